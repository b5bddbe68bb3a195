#include "crisislens/hgc/hgc.hpp"

#include <unordered_map>

#include "crisislens/diffcore/ops.hpp"
#include "crisislens/error.hpp"

namespace crisislens::hgc {

using diff::Tensor;
using diff::Var;

namespace {

Tensor row_normalize(Tensor m) {
  const std::size_t n = m.rows(), c = m.cols();
  for (std::size_t i = 0; i < n; ++i) {
    double total = 0.0;
    for (std::size_t j = 0; j < c; ++j) total += m.at(i, j);
    for (std::size_t j = 0; j < c; ++j) m.at(i, j) /= total;
  }
  return m;
}

void check_gates(std::span<const double> gates, std::size_t levels) {
  if (gates.size() != levels) fail(ErrorKind::Dimension, "expected " + std::to_string(levels) + " gates");
  for (double g : gates) {
    if (!(g >= kGateMin && g <= kGateMax)) fail(ErrorKind::Parameter, "gate outside [0,2]: " + std::to_string(g));
  }
}

void check_adjacency(const HierarchicalAdjacency& adj, std::size_t levels, std::size_t n) {
  if (adj.levels.size() < levels) fail(ErrorKind::Dimension, "adjacency has fewer levels than the network");
  for (std::size_t k = 0; k < levels; ++k) {
    if (adj.levels[k].rows() != n || adj.levels[k].cols() != n) {
      fail(ErrorKind::Dimension, "adjacency level " + std::to_string(k) + " is " +
                                     diff::shape_string(adj.levels[k].shape()) + " for " + std::to_string(n) +
                                     " nodes");
    }
  }
}

}  // namespace

std::string hgc_weight_param(std::size_t level) { return "hgc.w" + std::to_string(level); }
std::string hgc_bias_param(std::size_t level) { return "hgc.b" + std::to_string(level); }

HierarchicalAdjacency build_hierarchical_adjacency(const SocialGraph& graph, std::size_t levels) {
  if (levels < 1) fail(ErrorKind::Parameter, "hierarchical adjacency needs K >= 1");
  const std::size_t n = graph.size();
  if (n == 0) fail(ErrorKind::Graph, "graph has no users");
  Tensor a = Tensor::identity(n);
  for (const auto& [i, j] : graph.edges()) {
    a.at(i, j) = 1.0;
    a.at(j, i) = 1.0;
  }
  const Tensor base = row_normalize(std::move(a));
  HierarchicalAdjacency out;
  Tensor power = base;
  out.levels.push_back(base);
  for (std::size_t k = 1; k < levels; ++k) {
    power = diff::ops::matmul(power, base);
    out.levels.push_back(row_normalize(power));
  }
  return out;
}

void validate(const HgcConfig& cfg) {
  if (cfg.dims.empty()) fail(ErrorKind::Parameter, "hgc needs at least one level");
  for (std::size_t d : cfg.dims) {
    if (d == 0) fail(ErrorKind::Parameter, "hgc level width must be positive");
  }
}

void init_hgc_params(diff::ParamStore& store, const HgcConfig& cfg, std::size_t d0, Rng& rng) {
  validate(cfg);
  if (d0 == 0) fail(ErrorKind::Parameter, "hgc input width must be positive");
  std::size_t in = d0;
  for (std::size_t k = 0; k < cfg.dims.size(); ++k) {
    const std::size_t out = cfg.dims[k];
    store.add(hgc_weight_param(k), xavier_uniform(rng, {in, out}, in, out));
    store.add(hgc_bias_param(k), Tensor({out}, 0.0));
    in = out;
  }
  store.add(kBehaviorWeightParam, xavier_uniform(rng, {2, in}, in, 2));
  store.add(kBehaviorBiasParam, Tensor({2}, 0.0));
}

std::vector<HgcLayer> hgc_layers(diff::Graph& g, const diff::ParamStore& store, const HgcConfig& cfg) {
  std::vector<HgcLayer> layers;
  for (std::size_t k = 0; k < cfg.dims.size(); ++k) {
    layers.push_back({g.param(store, hgc_weight_param(k)), g.param(store, hgc_bias_param(k))});
  }
  return layers;
}

Var hgc_forward(Var h0, const HierarchicalAdjacency& adj, std::span<const HgcLayer> layers,
                std::span<const double> gates) {
  diff::Graph& g = h0.graph();
  const std::size_t n = h0.value().rows();
  check_adjacency(adj, layers.size(), n);
  check_gates(gates, layers.size());
  Var h = h0;
  for (std::size_t k = 0; k < layers.size(); ++k) {
    Var a = g.constant(adj.levels[k]);
    Var pre = diff::add_row_bias(diff::matmul(diff::matmul(a, h), layers[k].weight), layers[k].bias);
    pre = diff::scale(pre, gates[k]);
    h = k + 1 < layers.size() ? diff::relu(pre) : pre;
  }
  return h;
}

Var behavior_logits(diff::Graph& g, const diff::ParamStore& store, Var h_final) {
  return diff::add_row_bias(diff::matmul_nt(h_final, g.param(store, kBehaviorWeightParam)),
                            g.param(store, kBehaviorBiasParam));
}

HgcParams hgc_params(const diff::ParamStore& store, const HgcConfig& cfg, std::vector<double> gates) {
  HgcParams p;
  for (std::size_t k = 0; k < cfg.dims.size(); ++k) {
    p.weights.push_back(store.value(hgc_weight_param(k)));
    p.biases.push_back(store.value(hgc_bias_param(k)));
  }
  p.gates = std::move(gates);
  p.behavior_w = store.value(kBehaviorWeightParam);
  p.behavior_b = store.value(kBehaviorBiasParam);
  return p;
}

Tensor hgc_forward(const Tensor& h0, const HierarchicalAdjacency& adj, const HgcParams& p) {
  if (p.weights.size() != p.biases.size()) fail(ErrorKind::Dimension, "hgc weights and biases differ in count");
  diff::Graph g;
  std::vector<HgcLayer> layers;
  for (std::size_t k = 0; k < p.weights.size(); ++k) {
    layers.push_back({g.constant(p.weights[k]), g.constant(p.biases[k])});
  }
  return hgc_forward(g.constant(h0), adj, layers, p.gates).value();
}

Tensor behavior_logits(const Tensor& h_final, const HgcParams& p) {
  return diff::ops::add_row_bias(diff::ops::matmul_nt(h_final, p.behavior_w), p.behavior_b);
}

Tensor node_features(const SocialGraph& graph, std::span<const MessageFeatures> messages, double window_seconds,
                     std::int64_t t_ref) {
  if (!(window_seconds > 0.0)) fail(ErrorKind::Parameter, "node feature window must be positive");
  std::size_t ds = 0, dm = 0;
  if (!messages.empty()) {
    ds = messages.front().s_adaptive.cols();
    dm = messages.front().fused_mean.cols();
  }
  const std::size_t n = graph.size();
  Tensor out({n, ds + dm}, 0.0);
  std::vector<std::size_t> counts(n, 0);
  const double lo = static_cast<double>(t_ref) - window_seconds;
  for (const auto& m : messages) {
    const std::size_t u = graph.require_index(m.user);
    if (m.s_adaptive.cols() != ds || m.fused_mean.cols() != dm) {
      fail(ErrorKind::Dimension, "message feature widths differ");
    }
    const double t = static_cast<double>(m.timestamp);
    if (t < lo || m.timestamp > t_ref) continue;
    for (std::size_t j = 0; j < ds; ++j) out.at(u, j) += m.s_adaptive.values()[j];
    for (std::size_t j = 0; j < dm; ++j) out.at(u, ds + j) += m.fused_mean.values()[j];
    ++counts[u];
  }
  for (std::size_t u = 0; u < n; ++u) {
    if (counts[u] == 0) continue;
    for (std::size_t j = 0; j < ds + dm; ++j) out.at(u, j) /= static_cast<double>(counts[u]);
  }
  return out;
}

}  // namespace crisislens::hgc
