#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <initializer_list>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "crisislens/diffcore/ops.hpp"
#include "crisislens/diffcore/params.hpp"
#include "crisislens/diffcore/tensor.hpp"

namespace crisislens::diff {

class Graph;

/// Handle to a node on a Graph tape. Cheap to copy; valid while the Graph lives.
class Var {
 public:
  Var() = default;
  Var(Graph* graph, std::size_t id) : graph_(graph), id_(id) {}

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  Graph& graph() const { return *graph_; }
  std::size_t id() const { return id_; }
  explicit operator bool() const { return graph_ != nullptr; }

 private:
  Graph* graph_ = nullptr;
  std::size_t id_ = 0;
};

/// Reverse-mode tape. Nodes are appended in evaluation order; backward walks
/// them in reverse, so accumulation order is fixed and results are bitwise
/// reproducible.
class Graph {
 public:
  using Backward = std::function<void(Graph&, std::size_t self)>;

  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var constant(Tensor value);
  // Leaf that receives a gradient (inputs under test).
  Var input(Tensor value);
  // Leaf bound to a stored parameter; repeated calls return the same node.
  Var param(const ParamStore& store, const std::string& name);

  Var record(Tensor value, std::initializer_list<Var> parents, Backward backward);
  Var record(Tensor value, std::span<const Var> parents, Backward backward);

  void backward(Var output);

  const Tensor& value(std::size_t id) const;
  const Tensor& grad(std::size_t id) const;
  const Tensor& grad(Var v) const { return grad(v.id()); }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  // Zero-initialized on first access.
  Tensor& grad_buffer(std::size_t id);
  void accumulate(std::size_t id, const Tensor& delta);

  GradMap param_grads() const;
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    const Tensor* external = nullptr;
    Tensor grad;
    bool has_grad = false;
    bool requires_grad = false;
    Backward backward;
    std::string param_name;
  };

  std::deque<Node> nodes_;
  std::map<std::pair<const ParamStore*, std::string>, std::size_t> param_nodes_;
};

Var matmul(Var a, Var b);
Var matmul_nt(Var a, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var hadamard(Var a, Var b);
Var scale(Var x, double s);
// s·x + c
Var affine(Var x, double s, double c);
Var add_row_bias(Var x, Var bias);
Var relu(Var x);
Var sigmoid(Var x);
Var tanh_act(Var x);
Var softmax_axis(Var x, std::size_t axis);
Var conv1d_valid(Var seq, Var kernels, Var bias);
Var concat_rows(std::span<const Var> parts);
Var concat_cols(std::span<const Var> parts);
Var slice_cols(Var x, std::size_t begin, std::size_t end);
Var slice_rows(Var x, std::size_t begin, std::size_t end);
Var mean_rows(Var x);
Var sum(Var x);
// Appends zero rows until x has at least `min_rows` rows.
Var pad_rows(Var x, std::size_t min_rows);
// Row gather; rows listed in `frozen_row` receive no gradient.
Var gather_rows(Var table, std::span<const std::size_t> ids, std::optional<std::size_t> frozen_row = std::nullopt);
Var cross_entropy(Var logits, std::span<const std::size_t> labels);

struct LstmVars {
  Var wx;
  Var wh;
  Var b;
};

struct LstmVarState {
  Var h;
  Var c;
};

LstmVarState lstm_step(Var x, const LstmVarState& state, const LstmVars& w);

}  // namespace crisislens::diff
