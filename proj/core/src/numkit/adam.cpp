#include "egocf/numkit/adam.hpp"

#include <cmath>

#include "egocf/errors.hpp"

namespace egocf::numkit {

void adam_step(ParamStore& params, AdamState& state, const AdamConfig& config) {
  // Validate everything before touching any parameter.
  for (const auto& name : params.names()) {
    if (!params.has_grad(name)) {
      throw ConsistencyError("adam_step: missing gradient for " + name);
    }
    if (params.grad(name).shape() != params.value(name).shape()) {
      throw ConsistencyError("adam_step: gradient shape mismatch for " + name);
    }
  }

  state.t += 1;
  const double t = static_cast<double>(state.t);
  const double correction1 = 1.0 - std::pow(config.beta1, t);
  const double correction2 = 1.0 - std::pow(config.beta2, t);

  for (const auto& name : params.names()) {
    Tensor& w = params.value(name);
    const Tensor& g = params.grad(name);
    auto [m_it, m_new] = state.m.try_emplace(name, w.shape());
    auto [v_it, v_new] = state.v.try_emplace(name, w.shape());
    Tensor& m = m_it->second;
    Tensor& v = v_it->second;
    if (m.shape() != w.shape() || v.shape() != w.shape()) {
      throw ConsistencyError("adam_step: moment shape mismatch for " + name);
    }
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double grad = g[i] + config.weight_decay * w[i];
      m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * grad;
      v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * grad * grad;
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      w[i] -= config.lr * m_hat / (std::sqrt(v_hat) + config.eps);
    }
  }
}

}  // namespace egocf::numkit
