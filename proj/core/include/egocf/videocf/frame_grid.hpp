#pragma once

#include <cstddef>

#include "egocf/numkit/tensor.hpp"

namespace egocf::videocf {

// A clip as an N x C x H x W tensor. All values are finite.
class FrameGrid {
 public:
  FrameGrid() = default;
  FrameGrid(std::size_t frames, std::size_t channels, std::size_t height,
            std::size_t width, double fill = 0.0);
  // Throws DimensionError unless rank 4, NumericError on non-finite values.
  explicit FrameGrid(numkit::Tensor tensor);

  std::size_t frames() const { return tensor_.dim(0); }
  std::size_t channels() const { return tensor_.dim(1); }
  std::size_t height() const { return tensor_.dim(2); }
  std::size_t width() const { return tensor_.dim(3); }

  double& at(std::size_t n, std::size_t c, std::size_t r, std::size_t col) {
    return tensor_[offset(n, c, r, col)];
  }
  double at(std::size_t n, std::size_t c, std::size_t r, std::size_t col) const {
    return tensor_[offset(n, c, r, col)];
  }

  const numkit::Tensor& tensor() const { return tensor_; }
  numkit::Tensor& tensor() { return tensor_; }

  // Sum of every value in frame n (all channels).
  double frame_sum(std::size_t n) const;

  bool operator==(const FrameGrid&) const = default;

 private:
  std::size_t offset(std::size_t n, std::size_t c, std::size_t r,
                     std::size_t col) const {
    return ((n * channels() + c) * height() + r) * width() + col;
  }

  numkit::Tensor tensor_;
};

}  // namespace egocf::videocf
