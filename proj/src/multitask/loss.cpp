#include "crisislens/multitask/loss.hpp"

#include <cmath>
#include <string>

#include "crisislens/error.hpp"

namespace crisislens::multitask {

using diff::Tensor;
using diff::Var;

namespace {

struct SoftParts {
  double T = 0, S = 0, Y = 0;
  double p = 0, r = 0, f = 0;
};

SoftParts soft_parts(std::span<const double> probs, std::span<const int> labels) {
  if (probs.size() != labels.size()) {
    fail(ErrorKind::Input, "soft_reward: " + std::to_string(probs.size()) + " probs vs " +
                               std::to_string(labels.size()) + " labels");
  }
  SoftParts s;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double p = probs[i];
    if (!(p >= 0.0 && p <= 1.0)) fail(ErrorKind::Input, "soft_reward: probability outside [0,1]");
    if (labels[i] != 0 && labels[i] != 1) fail(ErrorKind::Input, "soft_reward: labels must be 0 or 1");
    s.T += p * labels[i];
    s.S += p;
    s.Y += labels[i];
  }
  s.p = s.T / (s.S + kSoftEpsilon);
  s.r = s.T / (s.Y + kSoftEpsilon);
  s.f = 2.0 * s.p * s.r / (s.p + s.r + kSoftEpsilon);
  return s;
}

void check_finite(double v, const char* name) {
  if (!std::isfinite(v)) fail(ErrorKind::Numeric, std::string("non-finite ") + name + " loss");
}

double number(const nlohmann::json& j, const char* name, double fallback) {
  if (!j.contains(name)) return fallback;
  if (!j[name].is_number()) fail(ErrorKind::Config, std::string("'") + name + "' must be a number");
  return j[name].get<double>();
}

}  // namespace

void validate(const LossWeights& w) {
  for (double v : {w.classification, w.emotion, w.behavior, w.reinforcement}) {
    if (!std::isfinite(v) || v < 0.0) fail(ErrorKind::Parameter, "loss weights must be nonnegative");
  }
}

double soft_reward(std::span<const double> probs, std::span<const int> labels, const RewardWeights& w) {
  hgc::validate(w);
  const SoftParts s = soft_parts(probs, labels);
  return w.precision * s.p + w.recall * s.r + w.f1 * s.f;
}

Var soft_reward(Var probs, std::span<const int> labels, const RewardWeights& w) {
  hgc::validate(w);
  const auto pv = probs.value().values();
  const SoftParts s = soft_parts(std::span<const double>(pv.data(), pv.size()), labels);
  std::vector<int> y(labels.begin(), labels.end());
  const double value = w.precision * s.p + w.recall * s.r + w.f1 * s.f;
  return probs.graph().record(Tensor::scalar(value), {probs}, [probs, y, s, w](diff::Graph& g, std::size_t self) {
    const double d = g.grad(self)[0];
    const double sp = s.S + kSoftEpsilon, denom = s.p + s.r + kSoftEpsilon;
    const double df_dp = 2.0 * s.r * (s.r + kSoftEpsilon) / (denom * denom);
    const double df_dr = 2.0 * s.p * (s.p + kSoftEpsilon) / (denom * denom);
    Tensor& gp = g.grad_buffer(probs.id());
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double dp = y[i] / sp - s.T / (sp * sp);
      const double dr = y[i] / (s.Y + kSoftEpsilon);
      gp[i] += d * (w.precision * dp + w.recall * dr + w.f1 * (df_dp * dp + df_dr * dr));
    }
  });
}

Var reinforcement_loss(Var probs, std::span<const int> labels, const RewardWeights& w) {
  return diff::affine(soft_reward(probs, labels, w), -1.0, w.total());
}

double total_loss(const LossBreakdown& p, const LossWeights& w) {
  validate(w);
  check_finite(p.classification, "classification");
  check_finite(p.emotion, "emotion");
  check_finite(p.behavior, "behavior");
  check_finite(p.reinforcement, "reinforcement");
  return w.classification * p.classification + w.emotion * p.emotion + w.behavior * p.behavior +
         w.reinforcement * p.reinforcement;
}

LossBreakdown with_total(LossBreakdown parts, const LossWeights& w) {
  parts.total = total_loss(parts, w);
  return parts;
}

Var total_loss(const LossParts& p, const LossWeights& w) {
  validate(w);
  diff::Graph& g = p.classification.graph();
  const std::pair<Var, double> terms[] = {{p.classification, w.classification},
                                          {p.emotion, w.emotion},
                                          {p.behavior, w.behavior},
                                          {p.reinforcement, w.reinforcement}};
  const char* names[] = {"classification", "emotion", "behavior", "reinforcement"};
  Var total = g.constant(Tensor::scalar(0.0));
  for (std::size_t i = 0; i < 4; ++i) {
    if (!terms[i].first) continue;
    if (terms[i].first.value().size() != 1) fail(ErrorKind::Dimension, std::string(names[i]) + " loss is not a scalar");
    check_finite(terms[i].first.value()[0], names[i]);
    total = diff::add(total, diff::scale(terms[i].first, terms[i].second));
  }
  return total;
}

nlohmann::ordered_json to_json(const LossWeights& w) {
  return {{"classification", w.classification},
          {"emotion", w.emotion},
          {"behavior", w.behavior},
          {"reinforcement", w.reinforcement}};
}

LossWeights loss_weights_from_json(const nlohmann::json& j, LossWeights base) {
  if (!j.is_object()) fail(ErrorKind::Config, "loss weights must be an object");
  base.classification = number(j, "classification", base.classification);
  base.emotion = number(j, "emotion", base.emotion);
  base.behavior = number(j, "behavior", base.behavior);
  base.reinforcement = number(j, "reinforcement", base.reinforcement);
  return base;
}

nlohmann::ordered_json to_json(const RewardWeights& w) {
  return {{"precision", w.precision}, {"recall", w.recall}, {"f1", w.f1}};
}

RewardWeights reward_weights_from_json(const nlohmann::json& j, RewardWeights base) {
  if (!j.is_object()) fail(ErrorKind::Config, "reward weights must be an object");
  base.precision = number(j, "precision", base.precision);
  base.recall = number(j, "recall", base.recall);
  base.f1 = number(j, "f1", base.f1);
  return base;
}

}  // namespace crisislens::multitask
