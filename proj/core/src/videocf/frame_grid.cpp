#include "egocf/videocf/frame_grid.hpp"

#include <utility>

#include "egocf/errors.hpp"

namespace egocf::videocf {

FrameGrid::FrameGrid(std::size_t frames, std::size_t channels, std::size_t height,
                     std::size_t width, double fill)
    : tensor_({frames, channels, height, width}, fill) {}

FrameGrid::FrameGrid(numkit::Tensor tensor) : tensor_(std::move(tensor)) {
  if (tensor_.rank() != 4) {
    throw DimensionError("FrameGrid needs an N x C x H x W tensor, got " +
                         tensor_.shape_string());
  }
  if (!tensor_.all_finite()) throw NumericError("FrameGrid contains non-finite values");
}

double FrameGrid::frame_sum(std::size_t n) const {
  const std::size_t per_frame = channels() * height() * width();
  double total = 0.0;
  for (std::size_t i = 0; i < per_frame; ++i) total += tensor_[n * per_frame + i];
  return total;
}

}  // namespace egocf::videocf
