#include "egocf/numkit/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "egocf/errors.hpp"

namespace egocf::numkit {
namespace {

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMatrix>;
using MutMap = Eigen::Map<RowMatrix>;

ConstMap as_matrix(const Tensor& t) {
  return ConstMap(t.data(), static_cast<Eigen::Index>(t.rows()),
                  static_cast<Eigen::Index>(t.cols()));
}

MutMap as_matrix(Tensor& t) {
  return MutMap(t.data(), static_cast<Eigen::Index>(t.rows()),
                static_cast<Eigen::Index>(t.cols()));
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " +
                         a.shape_string() + " vs " + b.shape_string());
  }
}

constexpr double kGeluC = 0.7978845608028654;  // sqrt(2/pi)
constexpr double kGeluA = 0.044715;

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.cols() != b.rows()) {
    throw DimensionError("matmul: cannot multiply " + a.shape_string() +
                         " by " + b.shape_string());
  }
  Tensor c({a.rows(), b.cols()});
  as_matrix(c).noalias() = as_matrix(a) * as_matrix(b);
  return c;
}

Tensor matmul_transpose_a(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.rows() != b.rows()) {
    throw DimensionError("matmul_transpose_a: cannot multiply transpose of " +
                         a.shape_string() + " by " + b.shape_string());
  }
  Tensor c({a.cols(), b.cols()});
  as_matrix(c).noalias() = as_matrix(a).transpose() * as_matrix(b);
  return c;
}

Tensor matmul_transpose_b(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.cols() != b.cols()) {
    throw DimensionError("matmul_transpose_b: cannot multiply " +
                         a.shape_string() + " by transpose of " +
                         b.shape_string());
  }
  Tensor c({a.rows(), b.rows()});
  as_matrix(c).noalias() = as_matrix(a) * as_matrix(b).transpose();
  return c;
}

MatmulGrads matmul_backward(const Tensor& a, const Tensor& b, const Tensor& dc) {
  if (dc.rank() != 2 || dc.rows() != a.rows() || dc.cols() != b.cols()) {
    throw DimensionError("matmul_backward: upstream gradient " +
                         dc.shape_string() + " does not match product of " +
                         a.shape_string() + " and " + b.shape_string());
  }
  return {matmul_transpose_b(dc, b), matmul_transpose_a(a, dc)};
}

void accumulate_matmul_transpose_a(const Tensor& a, const Tensor& b,
                                   Tensor& out) {
  if (a.rows() != b.rows() || out.rows() != a.cols() || out.cols() != b.cols()) {
    throw DimensionError("accumulate_matmul_transpose_a: " + a.shape_string() +
                         "^T x " + b.shape_string() + " into " +
                         out.shape_string());
  }
  as_matrix(out).noalias() += as_matrix(a).transpose() * as_matrix(b);
}

Tensor transpose(const Tensor& m) {
  Tensor t({m.cols(), m.rows()});
  as_matrix(t) = as_matrix(m).transpose();
  return t;
}

void add_inplace(Tensor& dst, const Tensor& src, double scale) {
  require_same_shape(dst, src, "add_inplace");
  auto d = dst.values();
  auto s = src.values();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] += scale * s[i];
}

Tensor add(const Tensor& a, const Tensor& b) {
  Tensor out = a;
  add_inplace(out, b);
  return out;
}

void scale_inplace(Tensor& t, double factor) {
  for (double& v : t.values()) v *= factor;
}

void add_row_vector_inplace(Tensor& m, const Tensor& v) {
  if (v.size() != m.cols()) {
    throw DimensionError("add_row_vector: vector " + v.shape_string() +
                         " does not match matrix " + m.shape_string());
  }
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) row[c] += v[c];
  }
}

Tensor column_sums(const Tensor& m) {
  Tensor out({m.cols()});
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) out[c] += row[c];
  }
  return out;
}

Tensor mean_rows(const Tensor& m) {
  Tensor out = column_sums(m);
  scale_inplace(out, 1.0 / static_cast<double>(m.rows()));
  return out;
}

Tensor slice_cols(const Tensor& m, std::size_t begin, std::size_t end) {
  if (begin >= end || end > m.cols()) {
    throw DimensionError("slice_cols: invalid range [" + std::to_string(begin) +
                         ", " + std::to_string(end) + ") for " +
                         m.shape_string());
  }
  Tensor out({m.rows(), end - begin});
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto src = m.row(r).subspan(begin, end - begin);
    std::copy(src.begin(), src.end(), out.row(r).begin());
  }
  return out;
}

void set_cols(Tensor& dst, std::size_t begin, const Tensor& src) {
  if (src.rows() != dst.rows() || begin + src.cols() > dst.cols()) {
    throw DimensionError("set_cols: cannot place " + src.shape_string() +
                         " at column " + std::to_string(begin) + " of " +
                         dst.shape_string());
  }
  for (std::size_t r = 0; r < dst.rows(); ++r) {
    auto s = src.row(r);
    std::copy(s.begin(), s.end(), dst.row(r).begin() + begin);
  }
}

Tensor gelu(const Tensor& x) {
  Tensor y = x;
  for (double& v : y.values()) {
    const double t = std::tanh(kGeluC * (v + kGeluA * v * v * v));
    v = 0.5 * v * (1.0 + t);
  }
  return y;
}

Tensor gelu_backward(const Tensor& x, const Tensor& dy) {
  require_same_shape(x, dy, "gelu_backward");
  Tensor dx(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double v = x[i];
    const double t = std::tanh(kGeluC * (v + kGeluA * v * v * v));
    const double dt = (1.0 - t * t) * kGeluC * (1.0 + 3.0 * kGeluA * v * v);
    dx[i] = dy[i] * (0.5 * (1.0 + t) + 0.5 * v * dt);
  }
  return dx;
}

std::vector<double> softmax(std::span<const double> x) {
  std::vector<double> y(x.begin(), x.end());
  if (y.empty()) return y;
  const double m = *std::max_element(y.begin(), y.end());
  double total = 0.0;
  for (double& v : y) {
    v = std::exp(v - m);
    total += v;
  }
  for (double& v : y) v /= total;
  return y;
}

Tensor softmax(const Tensor& x, std::size_t axis) {
  const std::size_t extent = x.dim(axis);
  std::size_t inner = 1;
  for (std::size_t a = axis + 1; a < x.rank(); ++a) inner *= x.shape()[a];
  const std::size_t outer = x.size() / (extent * inner);

  Tensor y(x.shape());
  std::vector<double> lane(extent);
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t i = 0; i < inner; ++i) {
      const std::size_t base = o * extent * inner + i;
      for (std::size_t k = 0; k < extent; ++k) lane[k] = x[base + k * inner];
      const auto out = softmax(lane);
      for (std::size_t k = 0; k < extent; ++k) y[base + k * inner] = out[k];
    }
  }
  return y;
}

std::vector<double> softmax_backward(std::span<const double> y,
                                     std::span<const double> dy) {
  if (y.size() != dy.size()) {
    throw DimensionError("softmax_backward: length mismatch " +
                         std::to_string(y.size()) + " vs " +
                         std::to_string(dy.size()));
  }
  double dot = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) dot += y[i] * dy[i];
  std::vector<double> dx(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) dx[i] = y[i] * (dy[i] - dot);
  return dx;
}

Tensor softmax_backward(const Tensor& y, const Tensor& dy) {
  require_same_shape(y, dy, "softmax_backward");
  const std::size_t width = y.shape().back();
  Tensor dx(y.shape());
  for (std::size_t base = 0; base < y.size(); base += width) {
    const auto lane = softmax_backward(y.values().subspan(base, width),
                                       dy.values().subspan(base, width));
    std::copy(lane.begin(), lane.end(), dx.values().begin() + base);
  }
  return dx;
}

double cross_entropy(std::span<const double> probs,
                     std::span<const double> one_hot) {
  if (probs.size() != one_hot.size()) {
    throw DimensionError("cross_entropy: probs has length " +
                         std::to_string(probs.size()) + ", ground truth " +
                         std::to_string(one_hot.size()));
  }
  const auto hot = std::find(one_hot.begin(), one_hot.end(), 1.0);
  if (hot == one_hot.end()) {
    throw InputError("cross_entropy: ground truth is not a one-hot vector");
  }
  return cross_entropy(probs, static_cast<std::size_t>(hot - one_hot.begin()));
}

double cross_entropy(std::span<const double> probs, std::size_t label) {
  if (label >= probs.size()) {
    throw DimensionError("cross_entropy: label " + std::to_string(label) +
                         " outside distribution of length " +
                         std::to_string(probs.size()));
  }
  return -std::log(std::max(probs[label], kLogClamp));
}

std::vector<double> cross_entropy_grad(std::span<const double> probs,
                                       std::size_t label) {
  if (label >= probs.size()) {
    throw DimensionError("cross_entropy_grad: label out of range");
  }
  std::vector<double> grad(probs.size(), 0.0);
  if (probs[label] > kLogClamp) grad[label] = -1.0 / probs[label];
  return grad;
}

double cosine_similarity(std::span<const double> p, std::span<const double> q) {
  return cosine_similarity_grad(p, q).value;
}

CosineGrad cosine_similarity_grad(std::span<const double> p,
                                  std::span<const double> q) {
  if (p.size() != q.size()) {
    throw DimensionError("cosine_similarity: length mismatch " +
                         std::to_string(p.size()) + " vs " +
                         std::to_string(q.size()));
  }
  double dot = 0.0, pp = 0.0, qq = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    dot += p[i] * q[i];
    pp += p[i] * p[i];
    qq += q[i] * q[i];
  }
  if (pp == 0.0 || qq == 0.0) {
    throw DegenerateInputError("cosine_similarity: zero-norm input");
  }
  const double np = std::sqrt(pp);
  const double nq = std::sqrt(qq);
  CosineGrad out;
  out.value = dot / (np * nq);
  out.d_p.resize(p.size());
  out.d_q.resize(q.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    out.d_p[i] = q[i] / (np * nq) - out.value * p[i] / pp;
    out.d_q[i] = p[i] / (np * nq) - out.value * q[i] / qq;
  }
  return out;
}

AttentionResult attention(const Tensor& queries, const Tensor& keys,
                          const Tensor& values) {
  if (queries.rank() != 2 || keys.rank() != 2 || values.rank() != 2 ||
      queries.cols() != keys.cols() || keys.rows() != values.rows()) {
    throw DimensionError("attention: incompatible queries " +
                         queries.shape_string() + ", keys " +
                         keys.shape_string() + ", values " +
                         values.shape_string());
  }
  Tensor scores = matmul_transpose_b(queries, keys);
  scale_inplace(scores, 1.0 / std::sqrt(static_cast<double>(queries.cols())));
  AttentionResult result;
  result.weights = softmax(scores, 1);
  result.output = matmul(result.weights, values);
  return result;
}

AttentionGrads attention_backward(const Tensor& queries, const Tensor& keys,
                                  const Tensor& values, const Tensor& weights,
                                  const Tensor& d_output) {
  const double scale = 1.0 / std::sqrt(static_cast<double>(queries.cols()));
  AttentionGrads g;
  g.d_values = matmul_transpose_a(weights, d_output);
  const Tensor d_weights = matmul_transpose_b(d_output, values);
  Tensor d_scores = softmax_backward(weights, d_weights);
  scale_inplace(d_scores, scale);
  g.d_queries = matmul(d_scores, keys);
  g.d_keys = matmul_transpose_a(d_scores, queries);
  return g;
}

LayerNormResult layer_norm(const Tensor& x, const Tensor& gain,
                           const Tensor& bias, double eps) {
  const std::size_t width = x.cols();
  if (gain.size() != width || bias.size() != width) {
    throw DimensionError("layer_norm: gain/bias do not match width of " +
                         x.shape_string());
  }
  LayerNormResult r{Tensor(x.shape()), Tensor(x.shape()), {}};
  r.inv_std.resize(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto in = x.row(i);
    const double mean =
        std::accumulate(in.begin(), in.end(), 0.0) / static_cast<double>(width);
    double var = 0.0;
    for (double v : in) var += (v - mean) * (v - mean);
    var /= static_cast<double>(width);
    const double inv = 1.0 / std::sqrt(var + eps);
    r.inv_std[i] = inv;
    auto norm = r.normalized.row(i);
    auto out = r.output.row(i);
    for (std::size_t c = 0; c < width; ++c) {
      norm[c] = (in[c] - mean) * inv;
      out[c] = norm[c] * gain[c] + bias[c];
    }
  }
  return r;
}

LayerNormGrads layer_norm_backward(const LayerNormResult& forward,
                                   const Tensor& gain, const Tensor& dy) {
  const Tensor& xhat = forward.normalized;
  require_same_shape(xhat, dy, "layer_norm_backward");
  const std::size_t width = xhat.cols();
  LayerNormGrads g{Tensor(xhat.shape()), Tensor({width}), Tensor({width})};
  std::vector<double> dxhat(width);
  for (std::size_t i = 0; i < xhat.rows(); ++i) {
    auto xh = xhat.row(i);
    auto up = dy.row(i);
    double mean_d = 0.0, mean_dx = 0.0;
    for (std::size_t c = 0; c < width; ++c) {
      g.d_gain[c] += up[c] * xh[c];
      g.d_bias[c] += up[c];
      dxhat[c] = up[c] * gain[c];
      mean_d += dxhat[c];
      mean_dx += dxhat[c] * xh[c];
    }
    mean_d /= static_cast<double>(width);
    mean_dx /= static_cast<double>(width);
    auto dx = g.d_x.row(i);
    for (std::size_t c = 0; c < width; ++c) {
      dx[c] = forward.inv_std[i] * (dxhat[c] - mean_d - xh[c] * mean_dx);
    }
  }
  return g;
}

}  // namespace egocf::numkit
