#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "egocf/numkit/param_store.hpp"
#include "egocf/numkit/tensor.hpp"

namespace egocf::numkit {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  // Coupled L2: weight_decay * param is added to the gradient before the
  // moment updates.
  double weight_decay = 0.0;
};

struct AdamState {
  std::map<std::string, Tensor> m;
  std::map<std::string, Tensor> v;
  std::int64_t t = 0;
};

// One bias-corrected Adam update over every parameter in `params`. Throws
// ConsistencyError if a parameter has no gradient or a gradient/state shape
// disagrees with its parameter.
void adam_step(ParamStore& params, AdamState& state, const AdamConfig& config);

}  // namespace egocf::numkit
