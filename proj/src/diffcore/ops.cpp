#include "crisislens/diffcore/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "crisislens/error.hpp"

namespace crisislens::diff::ops {
namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    fail(ErrorKind::Dimension, std::string(op) + ": shapes " + shape_string(a.shape()) + " and " +
                                   shape_string(b.shape()) + " differ");
  }
}

template <class F>
Tensor map(const Tensor& x, F f) {
  Tensor out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = f(x[i]);
  return out;
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  if (b.rows() != k) {
    fail(ErrorKind::Dimension, "matmul: " + shape_string(a.shape()) + " · " + shape_string(b.shape()));
  }
  Tensor out({m, n});
  auto o = out.values();
  auto av = a.values();
  auto bv = b.values();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = av[i * k + p];
      if (aip == 0.0) continue;
      const double* brow = &bv[p * n];
      double* orow = &o[i * n];
      for (std::size_t j = 0; j < n; ++j) orow[j] += aip * brow[j];
    }
  }
  return out;
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  const std::size_t m = a.rows(), k = a.cols(), n = b.rows();
  if (b.cols() != k) {
    fail(ErrorKind::Dimension, "matmul_nt: " + shape_string(a.shape()) + " · " + shape_string(b.shape()) + "ᵀ");
  }
  Tensor out({m, n});
  auto av = a.values();
  auto bv = b.values();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t p = 0; p < k; ++p) acc += av[i * k + p] * bv[j * k + p];
      out.at(i, j) = acc;
    }
  }
  return out;
}

Tensor matmul_tn(const Tensor& a, const Tensor& b) {
  const std::size_t k = a.rows(), m = a.cols(), n = b.cols();
  if (b.rows() != k) {
    fail(ErrorKind::Dimension, "matmul_tn: " + shape_string(a.shape()) + "ᵀ · " + shape_string(b.shape()));
  }
  Tensor out({m, n});
  auto o = out.values();
  auto av = a.values();
  auto bv = b.values();
  for (std::size_t p = 0; p < k; ++p) {
    for (std::size_t i = 0; i < m; ++i) {
      const double api = av[p * m + i];
      if (api == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) o[i * n + j] += api * bv[p * n + j];
    }
  }
  return out;
}

Tensor transpose(const Tensor& a) {
  const std::size_t m = a.rows(), n = a.cols();
  Tensor out({n, m});
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out.at(j, i) = a[i * n + j];
  return out;
}

Tensor elementwise(Elementwise kind, std::span<const Tensor> inputs, double scalar) {
  const std::size_t arity = (kind == Elementwise::Hadamard || kind == Elementwise::Add) ? 2 : 1;
  if (inputs.size() != arity) {
    fail(ErrorKind::Dimension, "elementwise: expected " + std::to_string(arity) + " operands, got " +
                                   std::to_string(inputs.size()));
  }
  switch (kind) {
    case Elementwise::Relu: return relu(inputs[0]);
    case Elementwise::Hadamard: return hadamard(inputs[0], inputs[1]);
    case Elementwise::Add: return add(inputs[0], inputs[1]);
    case Elementwise::Scale: return scale(inputs[0], scalar);
  }
  return {};
}

Tensor relu(const Tensor& x) {
  return map(x, [](double v) { return v > 0.0 ? v : 0.0; });
}

Tensor hadamard(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "hadamard");
  Tensor out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  Tensor out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  Tensor out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

Tensor scale(const Tensor& x, double s) {
  if (!std::isfinite(s)) fail(ErrorKind::Numeric, "scale: non-finite scalar");
  return map(x, [s](double v) { return v * s; });
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Tensor sigmoid(const Tensor& x) {
  return map(x, [](double v) { return sigmoid(v); });
}

Tensor tanh_act(const Tensor& x) {
  return map(x, [](double v) { return std::tanh(v); });
}

Tensor add_row_bias(const Tensor& x, const Tensor& bias) {
  const std::size_t m = x.rows(), n = x.cols();
  if (bias.size() != n || (bias.rank() == 2 && bias.rows() != 1)) {
    fail(ErrorKind::Dimension, "bias " + shape_string(bias.shape()) + " for " + shape_string(x.shape()));
  }
  Tensor out(x.shape());
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] = x[i * n + j] + bias[j];
  return out;
}

Tensor softmax_axis(const Tensor& x, std::size_t axis) {
  if (axis >= x.rank()) {
    fail(ErrorKind::Index, "softmax axis " + std::to_string(axis) + " invalid for " + shape_string(x.shape()));
  }
  const auto& shape = x.shape();
  std::size_t outer = 1, inner = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= shape[i];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) inner *= shape[i];
  const std::size_t n = shape[axis];
  Tensor out(shape);
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t in = 0; in < inner; ++in) {
      const std::size_t base = o * n * inner + in;
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < n; ++j) mx = std::max(mx, x[base + j * inner]);
      double total = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double e = std::exp(x[base + j * inner] - mx);
        out[base + j * inner] = e;
        total += e;
      }
      for (std::size_t j = 0; j < n; ++j) out[base + j * inner] /= total;
    }
  }
  return out;
}

Tensor conv1d_valid(const Tensor& seq, const Tensor& kernels, const Tensor& bias) {
  if (kernels.rank() != 3) {
    fail(ErrorKind::Dimension, "conv1d kernels must be [w×d_in×d_out], got " + shape_string(kernels.shape()));
  }
  const std::size_t len = seq.rows(), d_in = seq.cols();
  const std::size_t w = kernels.dim(0), d_out = kernels.dim(2);
  if (kernels.dim(1) != d_in) {
    fail(ErrorKind::Dimension, "conv1d: sequence " + shape_string(seq.shape()) + " vs kernels " +
                                   shape_string(kernels.shape()));
  }
  if (bias.size() != d_out) {
    fail(ErrorKind::Dimension, "conv1d: bias " + shape_string(bias.shape()) + " for d_out " + std::to_string(d_out));
  }
  if (w < 1 || len < w) {
    fail(ErrorKind::Sequence, "conv1d: sequence length " + std::to_string(len) + " shorter than kernel width " +
                                  std::to_string(w));
  }
  const std::size_t out_len = len - w + 1;
  Tensor out({out_len, d_out});
  for (std::size_t t = 0; t < out_len; ++t) {
    double* orow = &out.values()[t * d_out];
    for (std::size_t o = 0; o < d_out; ++o) orow[o] = bias[o];
    for (std::size_t k = 0; k < w; ++k) {
      for (std::size_t i = 0; i < d_in; ++i) {
        const double xv = seq[(t + k) * d_in + i];
        if (xv == 0.0) continue;
        const double* krow = &kernels.values()[(k * d_in + i) * d_out];
        for (std::size_t o = 0; o < d_out; ++o) orow[o] += xv * krow[o];
      }
    }
  }
  return out;
}

LstmState lstm_step(const Tensor& x, const LstmState& state, const LstmWeights& w) {
  const std::size_t d_h = state.h.size();
  if (state.c.size() != d_h || w.wh.rows() != d_h || w.wh.cols() != 4 * d_h || w.wx.cols() != 4 * d_h ||
      w.wx.rows() != x.size() || w.b.size() != 4 * d_h) {
    fail(ErrorKind::Dimension, "lstm_step: x " + shape_string(x.shape()) + ", h " + shape_string(state.h.shape()) +
                                   ", wx " + shape_string(w.wx.shape()) + ", wh " + shape_string(w.wh.shape()) +
                                   ", b " + shape_string(w.b.shape()));
  }
  const Tensor pre = add_row_bias(add(matmul(x, w.wx), matmul(state.h, w.wh)), w.b);
  Tensor h({1, d_h}), c({1, d_h});
  for (std::size_t j = 0; j < d_h; ++j) {
    const double in = sigmoid(pre[j]);
    const double forget = sigmoid(pre[d_h + j]);
    const double cand = std::tanh(pre[2 * d_h + j]);
    const double out = sigmoid(pre[3 * d_h + j]);
    c[j] = forget * state.c[j] + in * cand;
    h[j] = out * std::tanh(c[j]);
  }
  return {std::move(h), std::move(c)};
}

double cross_entropy(const Tensor& logits, std::span<const std::size_t> labels) {
  const std::size_t n = logits.rows(), classes = logits.cols();
  if (labels.size() != n) {
    fail(ErrorKind::Dimension, "cross_entropy: " + std::to_string(labels.size()) + " labels for " +
                                   std::to_string(n) + " rows");
  }
  if (n == 0) fail(ErrorKind::Dimension, "cross_entropy: empty batch");
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] >= classes) {
      fail(ErrorKind::Label, "label " + std::to_string(labels[i]) + " outside [0, " + std::to_string(classes) + ")");
    }
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < classes; ++j) mx = std::max(mx, logits[i * classes + j]);
    double z = 0.0;
    for (std::size_t j = 0; j < classes; ++j) z += std::exp(logits[i * classes + j] - mx);
    total += std::log(z) + mx - logits[i * classes + labels[i]];
  }
  return total / static_cast<double>(n);
}

double sum(const Tensor& x) {
  double s = 0.0;
  for (double v : x.values()) s += v;
  return s;
}

Tensor mean_rows(const Tensor& x) {
  const std::size_t m = x.rows(), n = x.cols();
  if (m == 0) fail(ErrorKind::Dimension, "mean_rows of empty tensor");
  Tensor out({1, n});
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[j] += x[i * n + j];
  for (std::size_t j = 0; j < n; ++j) out[j] /= static_cast<double>(m);
  return out;
}

Tensor concat_rows(std::span<const Tensor> parts) {
  if (parts.empty()) fail(ErrorKind::Dimension, "concat_rows of nothing");
  const std::size_t n = parts[0].cols();
  std::size_t m = 0;
  for (const auto& p : parts) {
    if (p.cols() != n) fail(ErrorKind::Dimension, "concat_rows: column mismatch " + shape_string(p.shape()));
    m += p.rows();
  }
  std::vector<double> values;
  values.reserve(m * n);
  for (const auto& p : parts) values.insert(values.end(), p.values().begin(), p.values().end());
  return Tensor({m, n}, std::move(values));
}

Tensor concat_cols(std::span<const Tensor> parts) {
  if (parts.empty()) fail(ErrorKind::Dimension, "concat_cols of nothing");
  const std::size_t m = parts[0].rows();
  std::size_t n = 0;
  for (const auto& p : parts) {
    if (p.rows() != m) fail(ErrorKind::Dimension, "concat_cols: row mismatch " + shape_string(p.shape()));
    n += p.cols();
  }
  Tensor out({m, n});
  std::size_t offset = 0;
  for (const auto& p : parts) {
    const std::size_t pc = p.cols();
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < pc; ++j) out[i * n + offset + j] = p[i * pc + j];
    offset += pc;
  }
  return out;
}

Tensor slice_cols(const Tensor& x, std::size_t begin, std::size_t end) {
  const std::size_t m = x.rows(), n = x.cols();
  if (begin > end || end > n) {
    fail(ErrorKind::Index, "slice_cols [" + std::to_string(begin) + "," + std::to_string(end) + ") of " +
                               shape_string(x.shape()));
  }
  Tensor out({m, end - begin});
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = begin; j < end; ++j) out[i * (end - begin) + j - begin] = x[i * n + j];
  return out;
}

Tensor slice_rows(const Tensor& x, std::size_t begin, std::size_t end) {
  const std::size_t m = x.rows(), n = x.cols();
  if (begin > end || end > m) {
    fail(ErrorKind::Index, "slice_rows [" + std::to_string(begin) + "," + std::to_string(end) + ") of " +
                               shape_string(x.shape()));
  }
  std::vector<double> values(x.values().begin() + static_cast<std::ptrdiff_t>(begin * n),
                             x.values().begin() + static_cast<std::ptrdiff_t>(end * n));
  return Tensor({end - begin, n}, std::move(values));
}

}  // namespace crisislens::diff::ops
