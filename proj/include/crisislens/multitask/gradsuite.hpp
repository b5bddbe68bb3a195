#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace crisislens::multitask {

struct GradCaseResult {
  std::string name;
  double worst = 0.0;  // max relative error over all coordinates
  std::string worst_param;
};

/// Finite-difference check of every differentiable op and of the full
/// training loss (embedding → sentiment → graph → weighted loss) at small
/// seeded dims.
std::vector<GradCaseResult> run_grad_suite(std::uint64_t seed, double epsilon = 1e-4);

double worst_of(const std::vector<GradCaseResult>& results);

}  // namespace crisislens::multitask
