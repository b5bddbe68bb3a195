#include "crisislens/hgc/bprm.hpp"

#include <algorithm>

#include "crisislens/error.hpp"
#include "crisislens/hgc/hgc.hpp"

namespace crisislens::hgc {

std::vector<double> clamp_gates(std::span<const double> gates) {
  std::vector<double> out(gates.begin(), gates.end());
  for (double& g : out) g = std::clamp(g, kGateMin, kGateMax);
  return out;
}

BprmResult bprm_update(std::span<const double> gates, std::optional<double> incumbent, const RewardEval& reward_eval,
                       double step, Rng& rng) {
  if (!(step > 0.0)) fail(ErrorKind::Parameter, "bprm step must be positive");
  BprmResult r;
  r.gates = clamp_gates(gates);
  r.incumbent = incumbent ? *incumbent : reward_eval(r.gates);
  r.plus = r.gates;
  r.minus = r.gates;
  for (std::size_t k = 0; k < r.gates.size(); ++k) {
    const int d = rng.sign();
    r.direction.push_back(d);
    r.plus[k] += step * d;
    r.minus[k] -= step * d;
  }
  r.plus = clamp_gates(r.plus);
  r.minus = clamp_gates(r.minus);
  r.reward_plus = reward_eval(r.plus);
  r.reward_minus = reward_eval(r.minus);
  const bool plus_better = r.reward_plus >= r.reward_minus;
  const double best = plus_better ? r.reward_plus : r.reward_minus;
  if (best > r.incumbent) {
    r.gates = plus_better ? r.plus : r.minus;
    r.incumbent = best;
    r.accepted = true;
  }
  return r;
}

}  // namespace crisislens::hgc
