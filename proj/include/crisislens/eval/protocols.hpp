#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "crisislens/corpus/generator.hpp"
#include "crisislens/corpus/split.hpp"
#include "crisislens/eval/baselines.hpp"
#include "crisislens/eval/metrics.hpp"
#include "crisislens/multitask/train.hpp"

namespace crisislens::eval {

inline constexpr const char* kStabilityMetric = "prefix-intensity-dispersion/v1";

/// E[intensity] ∈ [0,2] of the intensity distribution on every token prefix.
std::vector<double> intensity_trajectory(const Predictor& p, std::span<const std::string> tokens);

/// 1/(1+σ), σ the population standard deviation of successive differences;
/// fewer than two differences give σ = 0.
double trajectory_stability(std::span<const double> trajectory);

using LengthBucket = std::pair<std::size_t, std::size_t>;  // inclusive
std::vector<LengthBucket> default_length_buckets();

/// Mean stability per length bucket; empty buckets are absent. A sample whose
/// length no bucket covers is an input error.
std::vector<StabilityBucket> stability_curve(const Predictor& p, std::span<const corpus::Sample> samples,
                                             std::span<const LengthBucket> buckets);

struct CurvePoint {
  std::size_t consumed = 0;
  std::int64_t anchor = 0;
  std::size_t window_count = 0;
  std::optional<double> cdr;  // absent when the window holds no crisis samples
};

using TrainFn = std::function<std::unique_ptr<Predictor>(std::span<const corpus::Sample> first_n)>;

/// At each checkpoint n: train on the first n stream samples and take CDR on
/// held-out samples with timestamps in [anchor − window, anchor], where the
/// anchor is the latest training timestamp (for n = 0, the earliest stream
/// timestamp plus the window).
std::vector<CurvePoint> detection_curve(const TrainFn& train_fn, std::span<const corpus::Sample> stream,
                                        std::span<const corpus::Sample> held_out, double window_days,
                                        std::span<const std::size_t> checkpoints,
                                        double threshold = kDefaultThreshold);

struct CompareConfig {
  multitask::TrainConfig train;
  BiLstmConfig bilstm;
  corpus::SplitSpec split;
  double threshold = kDefaultThreshold;
};

struct CompareRow {
  std::string name;
  MetricsReport metrics;
};

struct CompareResult {
  std::vector<CompareRow> rows;  // full, ablation, bilstm, lexicon
  std::size_t implicit_count = 0;
  std::optional<double> full_implicit_mild;
  std::optional<double> ablation_implicit_mild;
  multitask::TrainResult full;
  multitask::TrainResult ablation;

  const MetricsReport& metrics(const std::string& name) const;
  std::optional<double> implicit_mild_margin() const;
};

/// Trains the full model, its λ₁ = 0 ablation and the recurrent baseline on
/// one split and scores all of them plus the dictionary baseline on the
/// test split.
CompareResult run_compare(const corpus::GeneratedCorpus& corpus, const CompareConfig& cfg);

}  // namespace crisislens::eval
