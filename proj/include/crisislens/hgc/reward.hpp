#pragma once

#include <cstddef>
#include <span>

namespace crisislens::hgc {

struct RewardWeights {
  double precision = 1.0 / 3.0;
  double recall = 1.0 / 3.0;
  double f1 = 1.0 / 3.0;

  double total() const { return precision + recall + f1; }
};

void validate(const RewardWeights& w);

/// Confusion counts for the positive class. Rates with a zero denominator are 0.
struct BinaryCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  double precision() const;
  double recall() const;
  double f1() const;
  std::size_t total() const { return tp + fp + tn + fn; }
  BinaryCounts& operator+=(const BinaryCounts& o);
};

BinaryCounts count_binary(std::span<const int> predictions, std::span<const int> labels);

double compute_reward(std::span<const int> predictions, std::span<const int> labels, const RewardWeights& w);
double compute_reward(const BinaryCounts& counts, const RewardWeights& w);

}  // namespace crisislens::hgc
