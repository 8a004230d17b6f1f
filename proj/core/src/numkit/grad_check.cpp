#include "egocf/numkit/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "egocf/errors.hpp"
#include "egocf/numkit/rng.hpp"

namespace egocf::numkit {
namespace {

double checked(double value, const std::string& name, std::size_t index) {
  if (!std::isfinite(value)) {
    throw NumericError("grad_check: non-finite loss while perturbing " + name +
                       "[" + std::to_string(index) + "]");
  }
  return value;
}

std::vector<std::size_t> pick_coords(std::size_t n, const GradCheckOptions& o,
                                     Rng& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (o.full_sweep || n <= o.max_coords_per_tensor) return idx;
  // Partial Fisher-Yates: the first k slots become a uniform sample.
  for (std::size_t i = 0; i < o.max_coords_per_tensor; ++i) {
    std::swap(idx[i], idx[i + rng.index(n - i)]);
  }
  idx.resize(o.max_coords_per_tensor);
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace

double relative_error(double analytic, double numeric) {
  const double denom =
      std::max({std::abs(analytic), std::abs(numeric), 1e-8});
  return std::abs(analytic - numeric) / denom;
}

GradCheckReport grad_check(const std::function<double(const ParamStore&)>& loss,
                           ParamStore& params, const GradCheckOptions& options) {
  if (!(options.eps > 0.0)) throw ConfigError("grad_check: eps must be positive");
  checked(loss(params), "<unperturbed>", 0);

  GradCheckReport report;
  Rng rng(options.seed);
  const double h = options.eps;
  for (const auto& name : params.names()) {
    const Tensor analytic = params.grad(name);
    Tensor& w = params.value(name);
    double worst = 0.0;
    for (std::size_t i : pick_coords(w.size(), options, rng)) {
      const double original = w[i];
      auto eval_at = [&](double offset) {
        w[i] = original + offset;
        const double v = checked(loss(params), name, i);
        w[i] = original;
        return v;
      };
      double numeric = 0.0;
      if (options.stencil == Stencil::kCentral2) {
        numeric = (eval_at(h) - eval_at(-h)) / (2.0 * h);
      } else {
        numeric = (-eval_at(2 * h) + 8.0 * eval_at(h) - 8.0 * eval_at(-h) +
                   eval_at(-2 * h)) /
                  (12.0 * h);
      }
      const double err = relative_error(analytic[i], numeric);
      ++report.coords_checked;
      worst = std::max(worst, err);
      if (err > report.max_rel_error || report.worst_param.empty()) {
        report.max_rel_error = err;
        report.worst_param = name;
        report.worst_index = i;
        report.worst_analytic = analytic[i];
        report.worst_numeric = numeric;
      }
    }
    report.per_param_max[name] = worst;
  }
  return report;
}

}  // namespace egocf::numkit
