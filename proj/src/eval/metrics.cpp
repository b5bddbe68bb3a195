#include "crisislens/eval/metrics.hpp"

#include <algorithm>

#include "crisislens/error.hpp"

namespace crisislens::eval {

std::size_t argmax(const std::array<double, 3>& p) {
  return static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
}

int crisis_decision(const Prediction& p, double threshold) { return p.crisis_prob >= threshold ? 1 : 0; }

DepthDistribution depth_distribution(std::span<const Prediction> preds, std::span<const corpus::Sample> samples) {
  if (preds.size() != samples.size()) fail(ErrorKind::Input, "prediction/sample count mismatch");
  std::array<std::size_t, 3> hit{}, total{};
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto gold = static_cast<std::size_t>(samples[i].labels.intensity);
    ++total[gold];
    if (argmax(preds[i].intensity) == gold) ++hit[gold];
  }
  DepthDistribution out;
  for (std::size_t k = 0; k < 3; ++k) {
    if (total[k] > 0) out[k] = double(hit[k]) / double(total[k]);
  }
  return out;
}

MetricsReport evaluate_predictions(std::span<const Prediction> preds, std::span<const corpus::Sample> samples,
                                   const corpus::Provenance* provenance, double threshold) {
  if (samples.empty()) fail(ErrorKind::Input, "evaluate needs at least one sample");
  if (preds.size() != samples.size()) fail(ErrorKind::Input, "prediction/sample count mismatch");
  std::vector<int> decided, gold;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    decided.push_back(crisis_decision(preds[i], threshold));
    gold.push_back(samples[i].labels.crisis);
  }
  MetricsReport r;
  r.n = samples.size();
  r.counts = hgc::count_binary(decided, gold);
  r.precision = r.counts.precision();
  r.recall = r.counts.recall();
  r.f1 = r.counts.f1();
  r.cdr = r.recall;
  r.intensity_recall = depth_distribution(preds, samples);
  if (provenance) {
    std::map<corpus::Mechanism, std::pair<std::size_t, std::size_t>> per;
    for (corpus::Mechanism m : corpus::kMechanisms) per[m] = {0, 0};
    for (std::size_t i = 0; i < samples.size(); ++i) {
      if (gold[i] != 1) continue;
      const auto m = corpus::mechanism_of(*provenance, samples[i].id);
      if (!m) fail(ErrorKind::Input, "no provenance entry for crisis sample '" + samples[i].id + "'");
      per[*m].first += static_cast<std::size_t>(decided[i]);
      ++per[*m].second;
    }
    for (const auto& [m, c] : per) {
      r.mechanism_recall[m] = c.second ? std::optional<double>(double(c.first) / double(c.second)) : std::nullopt;
    }
  }
  return r;
}

std::vector<Prediction> predict_all(const Predictor& p, std::span<const corpus::Sample> samples) {
  std::vector<Prediction> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(p.predict(s.tokens));
  return out;
}

MetricsReport evaluate(const Predictor& p, std::span<const corpus::Sample> samples,
                       const corpus::Provenance* provenance, double threshold) {
  const auto preds = predict_all(p, samples);
  return evaluate_predictions(preds, samples, provenance, threshold);
}

std::vector<corpus::Sample> mechanism_subset(std::span<const corpus::Sample> samples,
                                             const corpus::Provenance& provenance, corpus::Mechanism m) {
  std::vector<corpus::Sample> out;
  for (const auto& s : samples) {
    if (s.labels.crisis == 1 && corpus::mechanism_of(provenance, s.id) == m) out.push_back(s);
  }
  return out;
}

}  // namespace crisislens::eval
