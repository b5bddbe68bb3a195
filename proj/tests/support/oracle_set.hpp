#pragma once

#include <array>
#include <string>
#include <vector>

#include "crisislens/corpus/sample.hpp"
#include "crisislens/multitask/pipeline.hpp"

namespace fixtures {

// Twenty hand-labeled rows shared with tests/oracles/metrics_oracle.py:
// gold crisis, predicted crisis probability, gold intensity, predicted
// intensity, planted mechanism ('-' for non-crisis).
struct OracleRow {
  int crisis;
  double prob;
  int gold_intensity;
  int pred_intensity;
  char mechanism;
};

inline const std::vector<OracleRow>& oracle_rows() {
  static const std::vector<OracleRow> rows{
      {1, .90, 0, 0, 'E'}, {1, .80, 1, 1, 'I'}, {1, .40, 2, 1, 'S'}, {0, .10, 0, 0, '-'}, {0, .60, 0, 1, '-'},
      {1, .50, 1, 1, 'E'}, {0, .49, 1, 1, '-'}, {1, .20, 0, 2, 'I'}, {0, .00, 2, 2, '-'}, {1, .99, 2, 2, 'E'},
      {0, .70, 0, 0, '-'}, {1, .55, 0, 0, 'I'}, {0, .30, 1, 0, '-'}, {1, .45, 1, 2, 'S'}, {0, .05, 0, 0, '-'},
      {1, .51, 2, 0, 'I'}, {0, .50, 2, 2, '-'}, {1, .95, 0, 0, 'E'}, {0, .15, 1, 1, '-'}, {1, .65, 1, 1, 'S'},
  };
  return rows;
}

struct OracleSet {
  std::vector<crisislens::corpus::Sample> samples;
  std::vector<crisislens::multitask::Prediction> preds;
  crisislens::corpus::Provenance provenance;
};

inline OracleSet oracle_set() {
  using namespace crisislens;
  OracleSet o;
  int i = 0;
  for (const auto& r : oracle_rows()) {
    corpus::Sample s;
    s.id = "h" + std::to_string(i++);
    s.user = "u0";
    s.timestamp = 1000 + i;
    s.tokens = {"x"};
    s.labels.crisis = r.crisis;
    s.labels.polarity = r.crisis ? corpus::Polarity::Negative : corpus::Polarity::Neutral;
    s.labels.intensity = static_cast<corpus::Intensity>(r.gold_intensity);
    s.labels.behavior_risk = 0;
    multitask::Prediction p;
    p.crisis_prob = r.prob;
    p.polarity = {0.2, 0.6, 0.2};
    p.intensity = {0.15, 0.15, 0.15};
    p.intensity[r.pred_intensity] = 0.7;
    if (r.mechanism != '-') {
      o.provenance[s.id] = r.mechanism == 'E'   ? corpus::Mechanism::Explicit
                           : r.mechanism == 'I' ? corpus::Mechanism::Implicit
                                                : corpus::Mechanism::Sarcasm;
    }
    o.samples.push_back(std::move(s));
    o.preds.push_back(p);
  }
  return o;
}

// Values printed by tests/oracles/metrics_oracle.py.
struct OracleExpect {
  std::size_t tp = 8, fp = 3, tn = 6, fn = 3;
  double precision = 8.0 / 11.0, recall = 8.0 / 11.0, f1 = 8.0 / 11.0;
  std::array<double, 3> depth{3.0 / 4.0, 5.0 / 7.0, 3.0 / 5.0};
  double explicit_recall = 1.0, implicit_recall = 3.0 / 4.0, sarcasm_recall = 1.0 / 3.0;
};

}  // namespace fixtures
