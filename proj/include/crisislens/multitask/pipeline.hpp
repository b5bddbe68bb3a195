#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "crisislens/corpus/sample.hpp"
#include "crisislens/diffcore/autodiff.hpp"
#include "crisislens/hgc/hgc.hpp"
#include "crisislens/multitask/model.hpp"

namespace crisislens::multitask {

struct MessageVars {
  diff::Var e_total;     // [L×d_model]
  diff::Var fused_mean;  // [1×d_model]
  mscn::SentimentVars sentiment;
  diff::Var crisis_logits;  // [1×2]
};

/// Embedding, knowledge fusion, MSCN and the crisis head for one message.
MessageVars forward_message(diff::Graph& g, const TrainedModel& m, std::span<const std::string> tokens);
// `ids` overrides the vocabulary encoding of `tokens` (same length).
MessageVars forward_message(diff::Graph& g, const TrainedModel& m, std::span<const std::string> tokens,
                            std::span<const std::size_t> ids);

// [s_adaptive ; fused_mean], the message's contribution to its user's node row.
diff::Var node_row(const MessageVars& v);

hgc::MessageFeatures message_features(const TrainedModel& m, const corpus::Sample& s);
std::vector<hgc::MessageFeatures> message_features(const TrainedModel& m, std::span<const corpus::Sample> samples);

/// Risk probability per graph user, from node features at `t_ref`.
std::vector<double> behavior_probs(const TrainedModel& m, const hgc::SocialGraph& graph,
                                   std::span<const hgc::MessageFeatures> features, std::int64_t t_ref,
                                   std::span<const double> gates);

struct Prediction {
  double crisis_prob = 0.0;
  std::array<double, 3> polarity{};
  std::array<double, 3> intensity{};
  std::optional<double> behavior_risk;
};

// Message history that supplies node features for behavior prediction.
struct GraphContext {
  const hgc::SocialGraph* graph = nullptr;
  std::span<const corpus::Sample> history;
  std::int64_t t_ref = 0;
};

Prediction predict(const TrainedModel& m, std::span<const std::string> tokens);
Prediction predict(const TrainedModel& m, const corpus::Sample& s, const GraphContext* ctx = nullptr);
std::vector<Prediction> predict_batch(const TrainedModel& m, std::span<const corpus::Sample> samples,
                                      const GraphContext* ctx = nullptr);

std::int64_t latest_timestamp(std::span<const corpus::Sample> samples);

}  // namespace crisislens::multitask
