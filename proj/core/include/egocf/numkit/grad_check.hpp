#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <string>

#include "egocf/numkit/param_store.hpp"

namespace egocf::numkit {

enum class Stencil {
  kCentral2,  // (f(x+h) - f(x-h)) / 2h
  kCentral4,  // fourth-order central difference
};

struct GradCheckOptions {
  double eps = 1e-5;
  // Coordinates checked per tensor unless full_sweep is set.
  std::size_t max_coords_per_tensor = 256;
  bool full_sweep = false;
  Stencil stencil = Stencil::kCentral2;
  std::uint64_t seed = 0;
};

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t coords_checked = 0;
  std::map<std::string, double> per_param_max;
};

// |a - n| / max(|a|, |n|, 1e-8)
double relative_error(double analytic, double numeric);

// Compares the gradients already stored in `params` against finite
// differences of `loss`. Parameters are perturbed in place and restored
// exactly. Throws NumericError if the loss is not finite.
GradCheckReport grad_check(const std::function<double(const ParamStore&)>& loss,
                           ParamStore& params,
                           const GradCheckOptions& options = {});

}  // namespace egocf::numkit
