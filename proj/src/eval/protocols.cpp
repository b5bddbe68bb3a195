#include "crisislens/eval/protocols.hpp"

#include <cmath>
#include <limits>

#include "crisislens/error.hpp"

namespace crisislens::eval {

std::vector<double> intensity_trajectory(const Predictor& p, std::span<const std::string> tokens) {
  std::vector<double> out;
  for (std::size_t len = 1; len <= tokens.size(); ++len) {
    const Prediction pred = p.predict(tokens.subspan(0, len));
    out.push_back(pred.intensity[1] + 2.0 * pred.intensity[2]);
  }
  return out;
}

double trajectory_stability(std::span<const double> trajectory) {
  if (trajectory.size() < 3) return 1.0;
  const std::size_t n = trajectory.size() - 1;
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += trajectory[i + 1] - trajectory[i];
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = trajectory[i + 1] - trajectory[i] - mean;
    var += d * d;
  }
  return 1.0 / (1.0 + std::sqrt(var / static_cast<double>(n)));
}

std::vector<LengthBucket> default_length_buckets() {
  return {{1, 8}, {9, 11}, {12, 14}, {15, std::numeric_limits<std::size_t>::max()}};
}

std::vector<StabilityBucket> stability_curve(const Predictor& p, std::span<const corpus::Sample> samples,
                                             std::span<const LengthBucket> buckets) {
  std::vector<StabilityBucket> out;
  std::vector<double> sums(buckets.size(), 0.0);
  for (const auto& [lo, hi] : buckets) out.push_back({lo, hi, 0, std::nullopt});
  for (const auto& s : samples) {
    const std::size_t len = s.tokens.size();
    std::size_t b = 0;
    while (b < buckets.size() && !(len >= buckets[b].first && len <= buckets[b].second)) ++b;
    if (b == buckets.size()) fail(ErrorKind::Input, "no length bucket covers " + std::to_string(len) + " tokens");
    const auto traj = intensity_trajectory(p, s.tokens);
    sums[b] += trajectory_stability(traj);
    ++out[b].count;
  }
  for (std::size_t b = 0; b < out.size(); ++b) {
    if (out[b].count) out[b].stability = sums[b] / static_cast<double>(out[b].count);
  }
  return out;
}

std::vector<CurvePoint> detection_curve(const TrainFn& train_fn, std::span<const corpus::Sample> stream,
                                        std::span<const corpus::Sample> held_out, double window_days,
                                        std::span<const std::size_t> checkpoints, double threshold) {
  if (!(window_days > 0.0)) fail(ErrorKind::Parameter, "window must be positive");
  if (stream.empty()) fail(ErrorKind::Input, "detection stream is empty");
  for (std::size_t i = 1; i < stream.size(); ++i) {
    if (stream[i].timestamp < stream[i - 1].timestamp) fail(ErrorKind::Input, "stream is not time-ordered");
  }
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    if (checkpoints[i] > stream.size()) fail(ErrorKind::Input, "checkpoint beyond the stream length");
    if (i > 0 && checkpoints[i] <= checkpoints[i - 1]) fail(ErrorKind::Input, "checkpoints must increase");
  }
  const double window = window_days * 86400.0;
  std::vector<CurvePoint> out;
  for (std::size_t n : checkpoints) {
    CurvePoint pt;
    pt.consumed = n;
    pt.anchor = n == 0 ? stream.front().timestamp + static_cast<std::int64_t>(std::llround(window))
                       : stream[n - 1].timestamp;
    std::vector<corpus::Sample> in_window;
    for (const auto& s : held_out) {
      const double t = static_cast<double>(s.timestamp);
      if (t >= static_cast<double>(pt.anchor) - window && s.timestamp <= pt.anchor) in_window.push_back(s);
    }
    pt.window_count = in_window.size();
    std::size_t positives = 0;
    for (const auto& s : in_window) positives += static_cast<std::size_t>(s.labels.crisis);
    if (positives > 0) {
      const auto predictor = train_fn(stream.subspan(0, n));
      pt.cdr = evaluate(*predictor, in_window, nullptr, threshold).cdr;
    }
    out.push_back(pt);
  }
  return out;
}

const MetricsReport& CompareResult::metrics(const std::string& name) const {
  for (const auto& r : rows)
    if (r.name == name) return r.metrics;
  fail(ErrorKind::Input, "no comparison row '" + name + "'");
}

std::optional<double> CompareResult::implicit_mild_margin() const {
  if (!full_implicit_mild || !ablation_implicit_mild) return std::nullopt;
  return *full_implicit_mild - *ablation_implicit_mild;
}

CompareResult run_compare(const corpus::GeneratedCorpus& corpus, const CompareConfig& cfg) {
  const corpus::Splits parts = corpus::split(corpus.samples, cfg.split);
  if (parts.test.empty()) fail(ErrorKind::Split, "comparison needs a non-empty test split");
  CompareResult r;
  r.full = multitask::train(cfg.train, parts.train, parts.val, corpus.lexicon, corpus.graph);
  multitask::TrainConfig ablated = cfg.train;
  ablated.model.embedding.lambda1 = 0.0;
  r.ablation = multitask::train(ablated, parts.train, parts.val, corpus.lexicon, corpus.graph);
  const BiLstmModel bilstm = train_bilstm(cfg.bilstm, parts.train);

  const ModelPredictor full(r.full.model, "full");
  const ModelPredictor ablation(r.ablation.model, "ablation");
  const BiLstmPredictor bi(bilstm);
  const LexiconBaseline lex(corpus.lexicon, corpus.polarity);
  const Predictor* predictors[] = {&full, &ablation, &bi, &lex};
  const auto implicit = mechanism_subset(parts.test, corpus.provenance, corpus::Mechanism::Implicit);
  r.implicit_count = implicit.size();
  for (const Predictor* p : predictors) {
    r.rows.push_back({p->name(), evaluate(*p, parts.test, &corpus.provenance, cfg.threshold)});
    if (!implicit.empty() && (p == &full || p == &ablation)) {
      const auto depth = depth_distribution(predict_all(*p, implicit), implicit);
      (p == &full ? r.full_implicit_mild : r.ablation_implicit_mild) = depth[0];
    }
  }
  return r;
}

}  // namespace crisislens::eval
