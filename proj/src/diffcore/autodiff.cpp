#include "crisislens/diffcore/autodiff.hpp"

#include <algorithm>
#include <cmath>

#include "crisislens/error.hpp"

namespace crisislens::diff {

const Tensor& Var::value() const { return graph_->value(id_); }

Var Graph::constant(Tensor value) {
  Node n;
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

Var Graph::input(Tensor value) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = true;
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

Var Graph::param(const ParamStore& store, const std::string& name) {
  auto key = std::make_pair(&store, name);
  if (auto it = param_nodes_.find(key); it != param_nodes_.end()) return Var(this, it->second);
  Node n;
  n.external = &store.value(name);
  n.requires_grad = true;
  n.param_name = name;
  nodes_.push_back(std::move(n));
  param_nodes_.emplace(std::move(key), nodes_.size() - 1);
  return Var(this, nodes_.size() - 1);
}

Var Graph::record(Tensor value, std::initializer_list<Var> parents, Backward backward) {
  return record(std::move(value), std::span<const Var>(parents.begin(), parents.size()), std::move(backward));
}

Var Graph::record(Tensor value, std::span<const Var> parents, Backward backward) {
  if (!value.all_finite()) fail(ErrorKind::Numeric, "non-finite value produced on the tape");
  Node n;
  n.value = std::move(value);
  for (const Var& p : parents) {
    if (&p.graph() != this) fail(ErrorKind::Parameter, "operand belongs to another graph");
    n.requires_grad = n.requires_grad || nodes_[p.id()].requires_grad;
  }
  if (n.requires_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

const Tensor& Graph::value(std::size_t id) const {
  const Node& n = nodes_[id];
  return n.external ? *n.external : n.value;
}

const Tensor& Graph::grad(std::size_t id) const {
  static const Tensor empty;
  const Node& n = nodes_[id];
  return n.has_grad ? n.grad : empty;
}

Tensor& Graph::grad_buffer(std::size_t id) {
  Node& n = nodes_[id];
  if (!n.has_grad) {
    n.grad = Tensor(value(id).shape());
    n.has_grad = true;
  }
  return n.grad;
}

void Graph::accumulate(std::size_t id, const Tensor& delta) {
  if (!nodes_[id].requires_grad) return;
  Tensor& g = grad_buffer(id);
  if (g.size() != delta.size()) {
    fail(ErrorKind::Dimension, "gradient " + shape_string(delta.shape()) + " for node " + shape_string(g.shape()));
  }
  for (std::size_t i = 0; i < g.size(); ++i) g[i] += delta[i];
}

void Graph::backward(Var output) {
  if (output.value().size() != 1) {
    fail(ErrorKind::Dimension, "backward from non-scalar " + shape_string(output.value().shape()));
  }
  grad_buffer(output.id())[0] += 1.0;
  for (std::size_t i = output.id() + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (n.requires_grad && n.has_grad && n.backward) n.backward(*this, i);
  }
}

GradMap Graph::param_grads() const {
  GradMap out;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    if (n.param_name.empty()) continue;
    out[n.param_name] = n.has_grad ? n.grad : Tensor(value(i).shape());
  }
  return out;
}

// ---------------------------------------------------------------------------

Var matmul(Var a, Var b) {
  Graph& g = a.graph();
  return g.record(ops::matmul(a.value(), b.value()), {a, b}, [a, b](Graph& g, std::size_t self) {
    const Tensor& dc = g.grad(self);
    if (g.requires_grad(a.id())) {
      g.accumulate(a.id(), ops::matmul_nt(dc, b.value()).reshaped(a.value().shape()));
    }
    if (g.requires_grad(b.id())) {
      const Tensor& av = a.value();
      g.accumulate(b.id(), ops::matmul_tn(av.rank() == 1 ? av.reshaped({1, av.size()}) : av, dc));
    }
  });
}

Var matmul_nt(Var a, Var b) {
  Graph& g = a.graph();
  return g.record(ops::matmul_nt(a.value(), b.value()), {a, b}, [a, b](Graph& g, std::size_t self) {
    const Tensor& dc = g.grad(self);
    if (g.requires_grad(a.id())) g.accumulate(a.id(), ops::matmul(dc, b.value()));
    if (g.requires_grad(b.id())) g.accumulate(b.id(), ops::matmul_tn(dc, a.value()));
  });
}

Var add(Var a, Var b) {
  Graph& g = a.graph();
  return g.record(ops::add(a.value(), b.value()), {a, b}, [a, b](Graph& g, std::size_t self) {
    const Tensor& d = g.grad(self);
    g.accumulate(a.id(), d);
    g.accumulate(b.id(), d);
  });
}

Var sub(Var a, Var b) {
  Graph& g = a.graph();
  return g.record(ops::sub(a.value(), b.value()), {a, b}, [a, b](Graph& g, std::size_t self) {
    const Tensor& d = g.grad(self);
    g.accumulate(a.id(), d);
    g.accumulate(b.id(), ops::scale(d, -1.0));
  });
}

Var hadamard(Var a, Var b) {
  Graph& g = a.graph();
  return g.record(ops::hadamard(a.value(), b.value()), {a, b}, [a, b](Graph& g, std::size_t self) {
    const Tensor& d = g.grad(self);
    if (g.requires_grad(a.id())) g.accumulate(a.id(), ops::hadamard(d, b.value()));
    if (g.requires_grad(b.id())) g.accumulate(b.id(), ops::hadamard(d, a.value()));
  });
}

Var scale(Var x, double s) { return affine(x, s, 0.0); }

Var affine(Var x, double s, double c) {
  if (!std::isfinite(s) || !std::isfinite(c)) fail(ErrorKind::Numeric, "affine: non-finite coefficient");
  Graph& g = x.graph();
  Tensor out = x.value();
  for (auto& v : out.values()) v = s * v + c;
  return g.record(std::move(out), {x}, [x, s](Graph& g, std::size_t self) {
    g.accumulate(x.id(), ops::scale(g.grad(self), s));
  });
}

Var add_row_bias(Var x, Var bias) {
  Graph& g = x.graph();
  return g.record(ops::add_row_bias(x.value(), bias.value()), {x, bias}, [x, bias](Graph& g, std::size_t self) {
    const Tensor& d = g.grad(self);
    g.accumulate(x.id(), d);
    if (g.requires_grad(bias.id())) {
      const std::size_t m = d.rows(), n = d.cols();
      Tensor db(bias.value().shape());
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) db[j] += d[i * n + j];
      g.accumulate(bias.id(), db);
    }
  });
}

Var relu(Var x) {
  Graph& g = x.graph();
  return g.record(ops::relu(x.value()), {x}, [x](Graph& g, std::size_t self) {
    const Tensor& d = g.grad(self);
    const Tensor& xv = x.value();
    Tensor dx(xv.shape());
    // Subgradient at exactly zero is zero.
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] = xv[i] > 0.0 ? d[i] : 0.0;
    g.accumulate(x.id(), dx);
  });
}

Var sigmoid(Var x) {
  Graph& g = x.graph();
  return g.record(ops::sigmoid(x.value()), {x}, [x](Graph& g, std::size_t self) {
    const Tensor& d = g.grad(self);
    const Tensor& y = g.value(self);
    Tensor dx(y.shape());
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] = d[i] * y[i] * (1.0 - y[i]);
    g.accumulate(x.id(), dx);
  });
}

Var tanh_act(Var x) {
  Graph& g = x.graph();
  return g.record(ops::tanh_act(x.value()), {x}, [x](Graph& g, std::size_t self) {
    const Tensor& d = g.grad(self);
    const Tensor& y = g.value(self);
    Tensor dx(y.shape());
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] = d[i] * (1.0 - y[i] * y[i]);
    g.accumulate(x.id(), dx);
  });
}

Var softmax_axis(Var x, std::size_t axis) {
  Graph& g = x.graph();
  return g.record(ops::softmax_axis(x.value(), axis), {x}, [x, axis](Graph& g, std::size_t self) {
    const Tensor& d = g.grad(self);
    const Tensor& y = g.value(self);
    const auto& shape = y.shape();
    std::size_t outer = 1, inner = 1;
    for (std::size_t i = 0; i < axis; ++i) outer *= shape[i];
    for (std::size_t i = axis + 1; i < shape.size(); ++i) inner *= shape[i];
    const std::size_t n = shape[axis];
    Tensor dx(shape);
    for (std::size_t o = 0; o < outer; ++o) {
      for (std::size_t in = 0; in < inner; ++in) {
        const std::size_t base = o * n * inner + in;
        double dot = 0.0;
        for (std::size_t j = 0; j < n; ++j) dot += d[base + j * inner] * y[base + j * inner];
        for (std::size_t j = 0; j < n; ++j) {
          const std::size_t k = base + j * inner;
          dx[k] = y[k] * (d[k] - dot);
        }
      }
    }
    g.accumulate(x.id(), dx);
  });
}

Var conv1d_valid(Var seq, Var kernels, Var bias) {
  Graph& g = seq.graph();
  return g.record(ops::conv1d_valid(seq.value(), kernels.value(), bias.value()), {seq, kernels, bias},
                  [seq, kernels, bias](Graph& g, std::size_t self) {
                    const Tensor& d = g.grad(self);
                    const Tensor& x = seq.value();
                    const Tensor& k = kernels.value();
                    const std::size_t w = k.dim(0), d_in = k.dim(1), d_out = k.dim(2);
                    const std::size_t out_len = d.rows();
                    const bool need_x = g.requires_grad(seq.id());
                    const bool need_k = g.requires_grad(kernels.id());
                    Tensor dx(x.shape()), dk(k.shape()), db(bias.value().shape());
                    for (std::size_t t = 0; t < out_len; ++t) {
                      const double* drow = &d.values()[t * d_out];
                      for (std::size_t o = 0; o < d_out; ++o) db[o] += drow[o];
                      for (std::size_t s = 0; s < w; ++s) {
                        for (std::size_t i = 0; i < d_in; ++i) {
                          const std::size_t kbase = (s * d_in + i) * d_out;
                          const double xv = x[(t + s) * d_in + i];
                          double acc = 0.0;
                          for (std::size_t o = 0; o < d_out; ++o) {
                            acc += drow[o] * k[kbase + o];
                            if (need_k) dk[kbase + o] += xv * drow[o];
                          }
                          if (need_x) dx[(t + s) * d_in + i] += acc;
                        }
                      }
                    }
                    g.accumulate(seq.id(), dx);
                    g.accumulate(kernels.id(), dk);
                    g.accumulate(bias.id(), db);
                  });
}

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) fail(ErrorKind::Dimension, "concat_rows of nothing");
  Graph& g = parts[0].graph();
  std::vector<Tensor> values;
  values.reserve(parts.size());
  for (const Var& p : parts) values.push_back(p.value());
  std::vector<Var> owned(parts.begin(), parts.end());
  return g.record(ops::concat_rows(values), parts, [owned](Graph& g, std::size_t self) {
    const Tensor& d = g.grad(self);
    std::size_t row = 0;
    for (const Var& p : owned) {
      const std::size_t r = p.value().rows();
      if (g.requires_grad(p.id())) g.accumulate(p.id(), ops::slice_rows(d, row, row + r));
      row += r;
    }
  });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) fail(ErrorKind::Dimension, "concat_cols of nothing");
  Graph& g = parts[0].graph();
  std::vector<Tensor> values;
  values.reserve(parts.size());
  for (const Var& p : parts) values.push_back(p.value());
  std::vector<Var> owned(parts.begin(), parts.end());
  return g.record(ops::concat_cols(values), parts, [owned](Graph& g, std::size_t self) {
    const Tensor& d = g.grad(self);
    std::size_t col = 0;
    for (const Var& p : owned) {
      const std::size_t c = p.value().cols();
      if (g.requires_grad(p.id())) g.accumulate(p.id(), ops::slice_cols(d, col, col + c));
      col += c;
    }
  });
}

Var slice_cols(Var x, std::size_t begin, std::size_t end) {
  Graph& g = x.graph();
  return g.record(ops::slice_cols(x.value(), begin, end), {x}, [x, begin](Graph& g, std::size_t self) {
    const Tensor& d = g.grad(self);
    Tensor& gx = g.grad_buffer(x.id());
    const std::size_t m = d.rows(), w = d.cols(), n = x.value().cols();
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < w; ++j) gx[i * n + begin + j] += d[i * w + j];
  });
}

Var slice_rows(Var x, std::size_t begin, std::size_t end) {
  Graph& g = x.graph();
  return g.record(ops::slice_rows(x.value(), begin, end), {x}, [x, begin](Graph& g, std::size_t self) {
    const Tensor& d = g.grad(self);
    Tensor& gx = g.grad_buffer(x.id());
    const std::size_t offset = begin * x.value().cols();
    for (std::size_t i = 0; i < d.size(); ++i) gx[offset + i] += d[i];
  });
}

Var mean_rows(Var x) {
  Graph& g = x.graph();
  return g.record(ops::mean_rows(x.value()), {x}, [x](Graph& g, std::size_t self) {
    const Tensor& d = g.grad(self);
    Tensor& gx = g.grad_buffer(x.id());
    const std::size_t m = x.value().rows(), n = x.value().cols();
    const double inv = 1.0 / static_cast<double>(m);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) gx[i * n + j] += d[j] * inv;
  });
}

Var sum(Var x) {
  Graph& g = x.graph();
  return g.record(Tensor::scalar(ops::sum(x.value())), {x}, [x](Graph& g, std::size_t self) {
    const double d = g.grad(self)[0];
    Tensor& gx = g.grad_buffer(x.id());
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += d;
  });
}

Var pad_rows(Var x, std::size_t min_rows) {
  const Tensor& xv = x.value();
  if (xv.rows() >= min_rows) return x;
  Graph& g = x.graph();
  Tensor out({min_rows, xv.cols()});
  std::copy(xv.values().begin(), xv.values().end(), out.values().begin());
  return g.record(std::move(out), {x}, [x](Graph& g, std::size_t self) {
    const Tensor& d = g.grad(self);
    Tensor& gx = g.grad_buffer(x.id());
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += d[i];
  });
}

Var gather_rows(Var table, std::span<const std::size_t> ids, std::optional<std::size_t> frozen_row) {
  Graph& g = table.graph();
  const Tensor& t = table.value();
  const std::size_t rows = t.rows(), n = t.cols();
  Tensor out({ids.size(), n});
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] >= rows) {
      fail(ErrorKind::Index, "row id " + std::to_string(ids[i]) + " outside table of " + std::to_string(rows));
    }
    std::copy_n(&t.values()[ids[i] * n], n, &out.values()[i * n]);
  }
  std::vector<std::size_t> owned(ids.begin(), ids.end());
  return g.record(std::move(out), {table}, [table, owned, frozen_row](Graph& g, std::size_t self) {
    const Tensor& d = g.grad(self);
    Tensor& gt = g.grad_buffer(table.id());
    const std::size_t n = d.cols();
    for (std::size_t i = 0; i < owned.size(); ++i) {
      if (frozen_row && owned[i] == *frozen_row) continue;
      for (std::size_t j = 0; j < n; ++j) gt[owned[i] * n + j] += d[i * n + j];
    }
  });
}

Var cross_entropy(Var logits, std::span<const std::size_t> labels) {
  Graph& g = logits.graph();
  const double loss = ops::cross_entropy(logits.value(), labels);
  std::vector<std::size_t> owned(labels.begin(), labels.end());
  return g.record(Tensor::scalar(loss), {logits}, [logits, owned](Graph& g, std::size_t self) {
    const double d = g.grad(self)[0];
    const Tensor& z = logits.value();
    const std::size_t n = z.rows(), classes = z.cols();
    Tensor p = ops::softmax_axis(z.reshaped({n, classes}), 1);
    const double inv = d / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      p[i * classes + owned[i]] -= 1.0;
      for (std::size_t j = 0; j < classes; ++j) p[i * classes + j] *= inv;
    }
    g.accumulate(logits.id(), p);
  });
}

LstmVarState lstm_step(Var x, const LstmVarState& state, const LstmVars& w) {
  const std::size_t d_h = state.h.value().size();
  if (state.c.value().size() != d_h || w.wh.value().rows() != d_h || w.wh.value().cols() != 4 * d_h ||
      w.wx.value().cols() != 4 * d_h || w.wx.value().rows() != x.value().size() || w.b.value().size() != 4 * d_h) {
    fail(ErrorKind::Dimension, "lstm_step: x " + shape_string(x.shape()) + ", h " + shape_string(state.h.shape()) +
                                   ", wx " + shape_string(w.wx.shape()) + ", wh " + shape_string(w.wh.shape()));
  }
  Var pre = add_row_bias(add(matmul(x, w.wx), matmul(state.h, w.wh)), w.b);
  Var in = sigmoid(slice_cols(pre, 0, d_h));
  Var forget = sigmoid(slice_cols(pre, d_h, 2 * d_h));
  Var cand = tanh_act(slice_cols(pre, 2 * d_h, 3 * d_h));
  Var out = sigmoid(slice_cols(pre, 3 * d_h, 4 * d_h));
  Var c = add(hadamard(forget, state.c), hadamard(in, cand));
  Var h = hadamard(out, tanh_act(c));
  return {h, c};
}

}  // namespace crisislens::diff
