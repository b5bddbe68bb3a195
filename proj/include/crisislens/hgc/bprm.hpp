#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "crisislens/diffcore/rng.hpp"

namespace crisislens::hgc {

using RewardEval = std::function<double(std::span<const double> gates)>;

struct BprmResult {
  std::vector<double> gates;
  double incumbent = 0.0;  // reward of `gates`
  bool accepted = false;
  std::vector<int> direction;
  std::vector<double> plus;  // clamped candidates that were evaluated
  std::vector<double> minus;
  double reward_plus = 0.0;
  double reward_minus = 0.0;
};

std::vector<double> clamp_gates(std::span<const double> gates);

/// One simultaneous-perturbation step. δ ∈ {±1}^K is drawn from `rng`; the
/// clamped candidates g ± step·δ are evaluated and the better one replaces g
/// only if it strictly beats the incumbent. Without a known incumbent the
/// current gates are evaluated first.
BprmResult bprm_update(std::span<const double> gates, std::optional<double> incumbent, const RewardEval& reward_eval,
                       double step, Rng& rng);

}  // namespace crisislens::hgc
