#pragma once

#include <cstddef>
#include <cstdint>

#include "egocf/losses/losses.hpp"
#include "egocf/numkit/grad_check.hpp"

namespace egocf::trainkit {

struct ObjectiveCheckOptions {
  std::size_t samples = 3;
  std::uint64_t seed = 0;
  double eps = 1e-3;
  std::size_t coords_per_tensor = 24;
  bool full_sweep = false;
  losses::LossWeights weights;
};

struct ObjectiveCheckResult {
  numkit::GradCheckReport report;
  std::size_t samples = 0;
  std::size_t tensors = 0;
  std::size_t usable = 0;
};

// Finite-difference check of the full composite objective (cross-entropy,
// counterfactual terms and the contrastive term) through every parameter
// tensor of a small model, on freshly generated synthetic samples augmented
// with f_q3 + f_v1.
ObjectiveCheckResult check_objective_gradients(const ObjectiveCheckOptions& options);

}  // namespace egocf::trainkit
