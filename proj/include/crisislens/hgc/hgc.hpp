#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "crisislens/diffcore/autodiff.hpp"
#include "crisislens/diffcore/rng.hpp"
#include "crisislens/hgc/social_graph.hpp"

namespace crisislens::hgc {

inline constexpr double kGateMin = 0.0;
inline constexpr double kGateMax = 2.0;

struct HierarchicalAdjacency {
  std::vector<diff::Tensor> levels;  // K row-stochastic N×N matrices
};

/// Â = row-normalize(A + I); level k = row-normalize(Â^(k+1)).
HierarchicalAdjacency build_hierarchical_adjacency(const SocialGraph& graph, std::size_t levels);

inline const std::string kBehaviorWeightParam = "hgc.behavior.w";
inline const std::string kBehaviorBiasParam = "hgc.behavior.b";
std::string hgc_weight_param(std::size_t level);
std::string hgc_bias_param(std::size_t level);

struct HgcConfig {
  std::vector<std::size_t> dims{16, 8};  // d_1..d_K; K = dims.size()
};

void validate(const HgcConfig& cfg);
void init_hgc_params(diff::ParamStore& store, const HgcConfig& cfg, std::size_t d0, Rng& rng);

struct HgcLayer {
  diff::Var weight;  // [d_k×d_{k+1}]
  diff::Var bias;    // [d_{k+1}]
};

std::vector<HgcLayer> hgc_layers(diff::Graph& g, const diff::ParamStore& store, const HgcConfig& cfg);

/// H^(k+1) = σ(g_k · (A^(k) H^(k) W^(k) + B^(k))), σ = ReLU on hidden levels,
/// identity on the last.
diff::Var hgc_forward(diff::Var h0, const HierarchicalAdjacency& adj, std::span<const HgcLayer> layers,
                      std::span<const double> gates);

// Per-node (no-risk, risk) logits from the final level, [N×2]. The head
// weight is stored [2×d_K].
diff::Var behavior_logits(diff::Graph& g, const diff::ParamStore& store, diff::Var h_final);

struct HgcParams {
  std::vector<diff::Tensor> weights;
  std::vector<diff::Tensor> biases;
  std::vector<double> gates;
  diff::Tensor behavior_w;  // [2×d_K]
  diff::Tensor behavior_b;  // [2]
};

HgcParams hgc_params(const diff::ParamStore& store, const HgcConfig& cfg, std::vector<double> gates);
diff::Tensor behavior_logits(const diff::Tensor& h_final, const HgcParams& p);

diff::Tensor hgc_forward(const diff::Tensor& h0, const HierarchicalAdjacency& adj, const HgcParams& p);

struct MessageFeatures {
  std::string user;
  std::int64_t timestamp = 0;
  diff::Tensor s_adaptive;  // [1×d_s]
  diff::Tensor fused_mean;  // [1×d_model]
};

/// Per user: mean s_adaptive over their messages with timestamp in
/// [t_ref − window, t_ref], concatenated with the mean fused embedding.
/// Users without messages in the window get zero rows.
diff::Tensor node_features(const SocialGraph& graph, std::span<const MessageFeatures> messages,
                           double window_seconds, std::int64_t t_ref);

}  // namespace crisislens::hgc
