#include "crisislens/hgc/reward.hpp"

#include <cmath>
#include <string>

#include "crisislens/error.hpp"

namespace crisislens::hgc {

void validate(const RewardWeights& w) {
  for (double v : {w.precision, w.recall, w.f1}) {
    if (!std::isfinite(v) || v < 0.0) fail(ErrorKind::Parameter, "reward weights must be nonnegative");
  }
  if (!(w.total() > 0.0)) fail(ErrorKind::Parameter, "reward weights must not all be zero");
}

double BinaryCounts::precision() const { return tp + fp == 0 ? 0.0 : double(tp) / double(tp + fp); }
double BinaryCounts::recall() const { return tp + fn == 0 ? 0.0 : double(tp) / double(tp + fn); }
double BinaryCounts::f1() const {
  const double p = precision(), r = recall();
  return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

BinaryCounts& BinaryCounts::operator+=(const BinaryCounts& o) {
  tp += o.tp;
  fp += o.fp;
  tn += o.tn;
  fn += o.fn;
  return *this;
}

BinaryCounts count_binary(std::span<const int> predictions, std::span<const int> labels) {
  if (predictions.size() != labels.size()) {
    fail(ErrorKind::Input, "prediction/label length mismatch: " + std::to_string(predictions.size()) + " vs " +
                               std::to_string(labels.size()));
  }
  BinaryCounts c;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int p = predictions[i], y = labels[i];
    if ((p != 0 && p != 1) || (y != 0 && y != 1)) fail(ErrorKind::Label, "binary classes must be 0 or 1");
    if (p == 1 && y == 1) ++c.tp;
    else if (p == 1) ++c.fp;
    else if (y == 1) ++c.fn;
    else ++c.tn;
  }
  return c;
}

double compute_reward(const BinaryCounts& c, const RewardWeights& w) {
  validate(w);
  return w.precision * c.precision() + w.recall * c.recall() + w.f1 * c.f1();
}

double compute_reward(std::span<const int> predictions, std::span<const int> labels, const RewardWeights& w) {
  return compute_reward(count_binary(predictions, labels), w);
}

}  // namespace crisislens::hgc
