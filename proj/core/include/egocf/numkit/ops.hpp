#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "egocf/numkit/tensor.hpp"

// Dense kernels with hand-written gradient rules. Matrices are rank-2
// Tensors; vectors are rank-1 Tensors or plain spans.
namespace egocf::numkit {

// Lower bound applied to probabilities before taking a log.
inline constexpr double kLogClamp = 1e-12;

// ---- matrix products -------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b);
// a^T * b without materializing the transpose.
Tensor matmul_transpose_a(const Tensor& a, const Tensor& b);
// a * b^T without materializing the transpose.
Tensor matmul_transpose_b(const Tensor& a, const Tensor& b);

struct MatmulGrads {
  Tensor da;
  Tensor db;
};
// Given C = A*B and dL/dC, returns dA = dC*B^T and dB = A^T*dC.
MatmulGrads matmul_backward(const Tensor& a, const Tensor& b, const Tensor& dc);

// out += a^T * b; used to accumulate weight gradients in place.
void accumulate_matmul_transpose_a(const Tensor& a, const Tensor& b, Tensor& out);

Tensor transpose(const Tensor& m);

// ---- elementwise and reductions -------------------------------------------

void add_inplace(Tensor& dst, const Tensor& src, double scale = 1.0);
Tensor add(const Tensor& a, const Tensor& b);
void scale_inplace(Tensor& t, double factor);

// m[r, :] += v for every row r.
void add_row_vector_inplace(Tensor& m, const Tensor& v);
// Sum over rows; the gradient of a broadcast bias.
Tensor column_sums(const Tensor& m);
Tensor mean_rows(const Tensor& m);

Tensor slice_cols(const Tensor& m, std::size_t begin, std::size_t end);
void set_cols(Tensor& dst, std::size_t begin, const Tensor& src);

Tensor gelu(const Tensor& x);
// dL/dx given x and dL/dy for y = gelu(x).
Tensor gelu_backward(const Tensor& x, const Tensor& dy);

// ---- softmax / losses ------------------------------------------------------

// Numerically stable softmax along `axis` (max-subtracted).
Tensor softmax(const Tensor& x, std::size_t axis);
std::vector<double> softmax(std::span<const double> x);
// Backward through a softmax taken along the last axis: y are its outputs.
Tensor softmax_backward(const Tensor& y, const Tensor& dy);
std::vector<double> softmax_backward(std::span<const double> y,
                                     std::span<const double> dy);

// -log(max(probs[gt], 1e-12)) where gt is given as a one-hot vector.
double cross_entropy(std::span<const double> probs,
                     std::span<const double> one_hot);
double cross_entropy(std::span<const double> probs, std::size_t label);
// d cross_entropy / d probs; zero wherever the clamp is active.
std::vector<double> cross_entropy_grad(std::span<const double> probs,
                                       std::size_t label);

// ---- similarity / attention -----------------------------------------------

// p.q / (|p| |q|). Throws DegenerateInputError when either norm is zero.
double cosine_similarity(std::span<const double> p, std::span<const double> q);

struct CosineGrad {
  double value = 0.0;
  std::vector<double> d_p;
  std::vector<double> d_q;
};
CosineGrad cosine_similarity_grad(std::span<const double> p,
                                  std::span<const double> q);

struct AttentionResult {
  Tensor output;   // a x dv
  Tensor weights;  // a x b, each row a probability vector
};
// softmax(Q K^T / sqrt(d)) V with one softmax per query row.
AttentionResult attention(const Tensor& queries, const Tensor& keys,
                          const Tensor& values);

struct AttentionGrads {
  Tensor d_queries;
  Tensor d_keys;
  Tensor d_values;
};
AttentionGrads attention_backward(const Tensor& queries, const Tensor& keys,
                                  const Tensor& values, const Tensor& weights,
                                  const Tensor& d_output);

// ---- layer norm ------------------------------------------------------------

struct LayerNormResult {
  Tensor output;
  Tensor normalized;            // (x - mean) / std, before gain and bias
  std::vector<double> inv_std;  // one per row
};
LayerNormResult layer_norm(const Tensor& x, const Tensor& gain,
                           const Tensor& bias, double eps = 1e-5);

struct LayerNormGrads {
  Tensor d_x;
  Tensor d_gain;
  Tensor d_bias;
};
LayerNormGrads layer_norm_backward(const LayerNormResult& forward,
                                   const Tensor& gain, const Tensor& dy);

}  // namespace egocf::numkit
