#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "crisislens/corpus/sample.hpp"
#include "crisislens/hgc/reward.hpp"
#include "crisislens/multitask/pipeline.hpp"

namespace crisislens::eval {

using multitask::Prediction;

inline constexpr double kDefaultThreshold = 0.5;

class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual std::string name() const = 0;
  virtual Prediction predict(std::span<const std::string> tokens) const = 0;
};

class ModelPredictor : public Predictor {
 public:
  explicit ModelPredictor(const multitask::TrainedModel& m, std::string name = "full") : m_(m), name_(std::move(name)) {}
  std::string name() const override { return name_; }
  Prediction predict(std::span<const std::string> tokens) const override { return multitask::predict(m_, tokens); }

 private:
  const multitask::TrainedModel& m_;
  std::string name_;
};

// Recall of the predicted intensity (argmax) within each gold intensity
// class; absent when the class does not occur.
using DepthDistribution = std::array<std::optional<double>, 3>;

struct StabilityBucket {
  std::size_t min_len = 0;
  std::size_t max_len = 0;  // inclusive
  std::size_t count = 0;
  std::optional<double> stability;
};

struct MetricsReport {
  std::size_t n = 0;
  hgc::BinaryCounts counts;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double cdr = 0.0;
  DepthDistribution intensity_recall;
  std::map<corpus::Mechanism, std::optional<double>> mechanism_recall;
  std::vector<StabilityBucket> stability;
};

std::size_t argmax(const std::array<double, 3>& p);
int crisis_decision(const Prediction& p, double threshold = kDefaultThreshold);

DepthDistribution depth_distribution(std::span<const Prediction> preds, std::span<const corpus::Sample> samples);

/// Confusion counts and rates at the threshold; CDR is crisis-class recall.
/// With provenance, recall per planted mechanism as well; a crisis sample
/// without a provenance entry is an input error.
MetricsReport evaluate_predictions(std::span<const Prediction> preds, std::span<const corpus::Sample> samples,
                                   const corpus::Provenance* provenance = nullptr,
                                   double threshold = kDefaultThreshold);

std::vector<Prediction> predict_all(const Predictor& p, std::span<const corpus::Sample> samples);

MetricsReport evaluate(const Predictor& p, std::span<const corpus::Sample> samples,
                       const corpus::Provenance* provenance = nullptr, double threshold = kDefaultThreshold);

// Crisis samples planted by `m`.
std::vector<corpus::Sample> mechanism_subset(std::span<const corpus::Sample> samples,
                                             const corpus::Provenance& provenance, corpus::Mechanism m);

}  // namespace crisislens::eval
