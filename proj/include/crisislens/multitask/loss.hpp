#pragma once

#include <span>

#include "crisislens/diffcore/autodiff.hpp"
#include "crisislens/hgc/reward.hpp"
#include "json.hpp"

namespace crisislens::multitask {

using hgc::RewardWeights;

struct LossWeights {
  double classification = 1.0;
  double emotion = 0.5;
  double behavior = 0.5;
  double reinforcement = 0.25;
};

void validate(const LossWeights& w);

struct LossBreakdown {
  double classification = 0.0;
  double emotion = 0.0;
  double behavior = 0.0;
  double reinforcement = 0.0;
  double total = 0.0;

  bool operator==(const LossBreakdown&) const = default;
};

struct LossParts {
  diff::Var classification;
  diff::Var emotion;
  diff::Var behavior;
  diff::Var reinforcement;
};

inline constexpr double kSoftEpsilon = 1e-8;

/// softP = Σpy/(Σp+ε), softR = Σpy/(Σy+ε), softF1 = 2·softP·softR/(softP+softR+ε),
/// weighted like the hard reward.
double soft_reward(std::span<const double> probs, std::span<const int> labels, const RewardWeights& w);
diff::Var soft_reward(diff::Var probs, std::span<const int> labels, const RewardWeights& w);

// (λ₁+λ₂+λ₃) − soft_reward: the nonnegative reward deficit.
diff::Var reinforcement_loss(diff::Var probs, std::span<const int> labels, const RewardWeights& w);

double total_loss(const LossBreakdown& parts, const LossWeights& w);
diff::Var total_loss(const LossParts& parts, const LossWeights& w);

// Fills `total` from the components.
LossBreakdown with_total(LossBreakdown parts, const LossWeights& w);

nlohmann::ordered_json to_json(const LossWeights& w);
LossWeights loss_weights_from_json(const nlohmann::json& j, LossWeights base = {});
nlohmann::ordered_json to_json(const RewardWeights& w);
RewardWeights reward_weights_from_json(const nlohmann::json& j, RewardWeights base = {});

}  // namespace crisislens::multitask
