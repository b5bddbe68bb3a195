#include "crisislens/multitask/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "crisislens/diffcore/ops.hpp"
#include "crisislens/error.hpp"

namespace crisislens::multitask {

using diff::Tensor;
using diff::Var;

namespace {

std::array<double, 3> softmax3(const Tensor& logits) {
  const Tensor p = diff::ops::softmax_axis(logits, logits.shape().size() - 1);
  return {p[0], p[1], p[2]};
}

std::vector<double> behavior_probs_from(const TrainedModel& m, const hgc::SocialGraph& graph, const Tensor& h0,
                                        std::span<const double> gates) {
  const auto adj = hgc::build_hierarchical_adjacency(graph, m.config.hgc.dims.size());
  const auto p = hgc::hgc_params(m.params, m.config.hgc, std::vector<double>(gates.begin(), gates.end()));
  const Tensor probs = diff::ops::softmax_axis(hgc::behavior_logits(hgc::hgc_forward(h0, adj, p), p), 1);
  std::vector<double> out(graph.size());
  for (std::size_t u = 0; u < out.size(); ++u) out[u] = probs.at(u, 1);
  return out;
}

}  // namespace

MessageVars forward_message(diff::Graph& g, const TrainedModel& m, std::span<const std::string> tokens) {
  return forward_message(g, m, tokens, m.vocab.encode(tokens));
}

MessageVars forward_message(diff::Graph& g, const TrainedModel& m, std::span<const std::string> tokens,
                            std::span<const std::size_t> ids) {
  if (tokens.empty()) fail(ErrorKind::Input, "empty token sequence");
  if (ids.size() != tokens.size()) fail(ErrorKind::Dimension, "id and token counts differ");
  const ModelConfig& cfg = m.config;
  Var base = embedkb::embed_base(g, m.params, cfg.embedding, ids);
  Var know = embedkb::embed_knowledge(g, m.params, tokens, m.lexicon);
  MessageVars v;
  v.e_total = embedkb::fuse(base, know, g.param(m.params, embedkb::kFusionParam), cfg.embedding.lambda1);
  v.fused_mean = diff::mean_rows(v.e_total);
  v.sentiment = mscn::sentiment(g, m.params, cfg.mscn, v.e_total);
  const Var parts[] = {diff::scale(v.sentiment.s_adaptive, mscn::head_input_scale(cfg.mscn)), v.fused_mean};
  v.crisis_logits = diff::add_row_bias(diff::matmul(diff::concat_cols(parts), g.param(m.params, kCrisisWeightParam)),
                                       g.param(m.params, kCrisisBiasParam));
  return v;
}

Var node_row(const MessageVars& v) {
  const Var parts[] = {v.sentiment.s_adaptive, v.fused_mean};
  return diff::concat_cols(parts);
}

hgc::MessageFeatures message_features(const TrainedModel& m, const corpus::Sample& s) {
  diff::Graph g;
  const MessageVars v = forward_message(g, m, s.tokens);
  return {s.user, s.timestamp, v.sentiment.s_adaptive.value(), v.fused_mean.value()};
}

std::vector<hgc::MessageFeatures> message_features(const TrainedModel& m, std::span<const corpus::Sample> samples) {
  std::vector<hgc::MessageFeatures> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(message_features(m, s));
  return out;
}

std::vector<double> behavior_probs(const TrainedModel& m, const hgc::SocialGraph& graph,
                                   std::span<const hgc::MessageFeatures> features, std::int64_t t_ref,
                                   std::span<const double> gates) {
  Tensor h0 = hgc::node_features(graph, features, m.config.node_window_days * 86400.0, t_ref);
  if (features.empty()) h0 = Tensor({graph.size(), node_feature_dim(m.config)});
  return behavior_probs_from(m, graph, h0, gates);
}

Prediction predict(const TrainedModel& m, std::span<const std::string> tokens) {
  diff::Graph g;
  const MessageVars v = forward_message(g, m, tokens);
  Prediction p;
  const Tensor crisis = diff::ops::softmax_axis(v.crisis_logits.value(), 1);
  p.crisis_prob = crisis[1];
  p.polarity = softmax3(v.sentiment.polarity_logits.value());
  p.intensity = softmax3(v.sentiment.intensity_logits.value());
  return p;
}

Prediction predict(const TrainedModel& m, const corpus::Sample& s, const GraphContext* ctx) {
  Prediction p = predict(m, s.tokens);
  if (ctx && ctx->graph) {
    const auto features = message_features(m, ctx->history);
    const auto probs = behavior_probs(m, *ctx->graph, features, ctx->t_ref, m.gates);
    p.behavior_risk = probs[ctx->graph->require_index(s.user)];
  }
  return p;
}

std::vector<Prediction> predict_batch(const TrainedModel& m, std::span<const corpus::Sample> samples,
                                      const GraphContext* ctx) {
  std::vector<Prediction> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(predict(m, s.tokens));
  if (ctx && ctx->graph) {
    const auto features = message_features(m, ctx->history);
    const auto probs = behavior_probs(m, *ctx->graph, features, ctx->t_ref, m.gates);
    for (std::size_t i = 0; i < samples.size(); ++i) out[i].behavior_risk = probs[ctx->graph->require_index(samples[i].user)];
  }
  return out;
}

std::int64_t latest_timestamp(std::span<const corpus::Sample> samples) {
  std::int64_t t = 0;
  for (const auto& s : samples) t = std::max(t, s.timestamp);
  return t;
}

}  // namespace crisislens::multitask
