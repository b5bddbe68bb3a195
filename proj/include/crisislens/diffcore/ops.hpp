#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "crisislens/diffcore/tensor.hpp"

// Forward-only tensor kernels. The autodiff layer calls these for its forward
// values and pairs each with a handwritten backward.
namespace crisislens::diff::ops {

// Rank-1 operands are read as a single row.
Tensor matmul(const Tensor& a, const Tensor& b);
// a · bᵀ
Tensor matmul_nt(const Tensor& a, const Tensor& b);
// aᵀ · b
Tensor matmul_tn(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

enum class Elementwise { Relu, Hadamard, Add, Scale };

Tensor elementwise(Elementwise kind, std::span<const Tensor> inputs, double scalar = 1.0);
Tensor relu(const Tensor& x);
Tensor hadamard(const Tensor& a, const Tensor& b);
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& x, double s);
Tensor sigmoid(const Tensor& x);
Tensor tanh_act(const Tensor& x);
// x[m×n] + bias broadcast over rows; bias is [n] or [1×n].
Tensor add_row_bias(const Tensor& x, const Tensor& bias);

double sigmoid(double x);

Tensor softmax_axis(const Tensor& x, std::size_t axis);

// Valid cross-correlation over time: seq[L×d_in], kernels[w×d_in×d_out], bias[d_out].
Tensor conv1d_valid(const Tensor& seq, const Tensor& kernels, const Tensor& bias);

struct LstmWeights {
  Tensor wx;  // [d_in × 4d_h], gate blocks ordered input, forget, candidate, output
  Tensor wh;  // [d_h × 4d_h]
  Tensor b;   // [4d_h]
};

struct LstmState {
  Tensor h;
  Tensor c;
};

LstmState lstm_step(const Tensor& x, const LstmState& state, const LstmWeights& w);

// Mean over rows of −log softmax(logits)[label].
double cross_entropy(const Tensor& logits, std::span<const std::size_t> labels);

double sum(const Tensor& x);
Tensor mean_rows(const Tensor& x);
Tensor concat_rows(std::span<const Tensor> parts);
Tensor concat_cols(std::span<const Tensor> parts);
Tensor slice_cols(const Tensor& x, std::size_t begin, std::size_t end);
Tensor slice_rows(const Tensor& x, std::size_t begin, std::size_t end);

}  // namespace crisislens::diff::ops
