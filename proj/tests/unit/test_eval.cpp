#include <cmath>
#include <memory>

#include "crisislens/error.hpp"
#include "crisislens/eval/baselines.hpp"
#include "crisislens/eval/metrics.hpp"
#include "crisislens/eval/protocols.hpp"
#include "crisislens/eval/report.hpp"
#include "doctest.h"
#include "fixtures.hpp"
#include "oracle_set.hpp"

using namespace crisislens;
using namespace crisislens::eval;

namespace {

class ConstantPredictor : public Predictor {
 public:
  explicit ConstantPredictor(double prob) : prob_(prob) {}
  std::string name() const override { return "constant"; }
  Prediction predict(std::span<const std::string>) const override {
    Prediction p;
    p.crisis_prob = prob_;
    p.polarity = {0.2, 0.5, 0.3};
    p.intensity = {0.5, 0.3, 0.2};
    return p;
  }

 private:
  double prob_;
};

// Crisis iff the message contains "alpha", "bravo" or "charlie".
class CuePredictor : public Predictor {
 public:
  std::string name() const override { return "cue"; }
  Prediction predict(std::span<const std::string> tokens) const override {
    Prediction p;
    for (const auto& t : tokens) {
      if (t == "alpha" || t == "bravo" || t == "charlie") p.crisis_prob = 1.0;
    }
    p.polarity = {0, 1, 0};
    p.intensity = {1, 0, 0};
    return p;
  }
};

corpus::Sample text_sample(std::vector<std::string> tokens) {
  corpus::Sample s;
  s.id = "s";
  s.user = "u";
  s.tokens = std::move(tokens);
  return s;
}

}  // namespace

TEST_CASE("hand-labeled set matches the brute-force oracle") {
  const auto o = fixtures::oracle_set();
  const fixtures::OracleExpect want;
  const MetricsReport r = evaluate_predictions(o.preds, o.samples, &o.provenance);
  CHECK(r.n == 20);
  CHECK(r.counts.tp == want.tp);
  CHECK(r.counts.fp == want.fp);
  CHECK(r.counts.tn == want.tn);
  CHECK(r.counts.fn == want.fn);
  CHECK(r.precision == want.precision);
  CHECK(r.recall == want.recall);
  CHECK(r.f1 == want.f1);
  CHECK(r.cdr == want.recall);
  for (std::size_t k = 0; k < 3; ++k) CHECK(*r.intensity_recall[k] == want.depth[k]);
  CHECK(*r.mechanism_recall.at(corpus::Mechanism::Explicit) == want.explicit_recall);
  CHECK(*r.mechanism_recall.at(corpus::Mechanism::Implicit) == want.implicit_recall);
  CHECK(*r.mechanism_recall.at(corpus::Mechanism::Sarcasm) == want.sarcasm_recall);
  CHECK_NOTHROW(check_consistency(r));
}

TEST_CASE("counts add over disjoint subsets") {
  const auto o = fixtures::oracle_set();
  const std::span<const corpus::Sample> s(o.samples);
  const std::span<const Prediction> p(o.preds);
  for (std::size_t cut : {1u, 7u, 13u, 19u}) {
    const auto a = evaluate_predictions(p.subspan(0, cut), s.subspan(0, cut)).counts;
    const auto b = evaluate_predictions(p.subspan(cut), s.subspan(cut)).counts;
    auto sum = a;
    sum += b;
    const auto whole = evaluate_predictions(p, s).counts;
    CHECK(sum.tp == whole.tp);
    CHECK(sum.fp == whole.fp);
    CHECK(sum.tn == whole.tn);
    CHECK(sum.fn == whole.fn);
  }
}

TEST_CASE("threshold is inclusive and absent depth classes stay absent") {
  auto o = fixtures::oracle_set();
  CHECK(crisis_decision(o.preds[5]) == 1);  // exactly 0.5
  CHECK(crisis_decision(o.preds[6]) == 0);  // 0.49
  std::vector<corpus::Sample> mild;
  std::vector<Prediction> preds;
  for (std::size_t i = 0; i < o.samples.size(); ++i) {
    if (o.samples[i].labels.intensity == corpus::Intensity::Mild) {
      mild.push_back(o.samples[i]);
      preds.push_back(o.preds[i]);
    }
  }
  const auto d = depth_distribution(preds, mild);
  CHECK(*d[0] == 0.75);
  CHECK_FALSE(d[1].has_value());
  CHECK_FALSE(d[2].has_value());
}

TEST_CASE("evaluation input errors") {
  auto o = fixtures::oracle_set();
  o.provenance.erase("h0");
  try {
    evaluate_predictions(o.preds, o.samples, &o.provenance);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Input);
  }
  CHECK_THROWS_AS(evaluate_predictions(std::span(o.preds).subspan(1), o.samples), Error);
  CHECK_THROWS_AS(evaluate_predictions({}, {}), Error);
}

TEST_CASE("check_consistency rejects tampered rates") {
  const auto o = fixtures::oracle_set();
  MetricsReport r = evaluate_predictions(o.preds, o.samples);
  r.f1 += 1e-9;
  try {
    check_consistency(r);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Schema);
  }
}

TEST_CASE("stability of a hand trajectory") {
  const std::vector<double> traj{0, 1, 0, 1};
  CHECK(trajectory_stability(traj) == doctest::Approx(1.0 / (1.0 + std::sqrt(8.0 / 9.0))).epsilon(1e-12));
  const std::vector<double> ramp{0, 0.5, 1.0, 1.5};
  CHECK(trajectory_stability(ramp) == doctest::Approx(1.0));
  const std::vector<double> pair{0, 2};
  CHECK(trajectory_stability(pair) == 1.0);
}

TEST_CASE("constant model is perfectly stable and empty buckets are absent") {
  const ConstantPredictor c(0.3);
  std::vector<corpus::Sample> samples{text_sample({"a", "b", "c"}), text_sample({"a", "b", "c", "d", "e", "f", "g"}),
                                      text_sample(std::vector<std::string>(16, "z"))};
  const auto buckets = default_length_buckets();
  const auto curve = stability_curve(c, samples, buckets);
  REQUIRE(curve.size() == 4);
  CHECK(curve[0].count == 2);
  CHECK(*curve[0].stability == 1.0);
  CHECK_FALSE(curve[1].stability.has_value());
  CHECK_FALSE(curve[2].stability.has_value());
  CHECK(*curve[3].stability == 1.0);

  const std::vector<LengthBucket> narrow{{1, 4}};
  CHECK_THROWS_AS(stability_curve(c, samples, narrow), Error);
}

TEST_CASE("stability lies in (0,1] for a trained model") {
  const auto c = fixtures::separable_corpus(16, 3);
  BiLstmConfig cfg;
  cfg.d_model = 6;
  cfg.d_h = 6;
  cfg.epochs = 3;
  const BiLstmModel m = train_bilstm(cfg, c.samples);
  const BiLstmPredictor p(m);
  for (const auto& b : stability_curve(p, c.samples, default_length_buckets())) {
    if (b.stability) {
      CHECK(*b.stability > 0.0);
      CHECK(*b.stability <= 1.0);
    }
  }
}

TEST_CASE("lexicon baseline scoring") {
  const auto lexicon = embedkb::KnowledgeLexicon(embedkb::default_categories(),
                                                 {{"suicide", "suicidal-ideation"}, {"scared", "anxiety"}});
  const std::map<std::string, double> polarity{{"suicide", -0.9}, {"happy", 0.6}};
  const LexiconBaseline lex(lexicon, polarity);

  const std::vector<std::string> neutral{"the", "day", "was"};
  CHECK(lex.score(neutral) == 0.0);
  Prediction p = lex.predict(neutral);
  CHECK(p.crisis_prob == 0.0);
  CHECK(argmax(p.polarity) == 1);
  CHECK(argmax(p.intensity) == 0);

  const std::vector<std::string> one{"suicide"};
  p = lex.predict(one);
  CHECK(p.crisis_prob == 1.0);
  CHECK(argmax(p.polarity) == 0);
  CHECK(argmax(p.intensity) == 2);

  const std::vector<std::string> diluted{"suicide", "the", "day"};
  CHECK(lex.score(diluted) == doctest::Approx(-0.3));
  CHECK(argmax(lex.predict(diluted).intensity) == 0);

  const std::vector<std::string> positive{"happy", "day"};
  CHECK(argmax(lex.predict(positive).polarity) == 2);
  CHECK(lex.predict(positive).crisis_prob == 0.0);

  const std::vector<std::string> unscored{"scared"};
  CHECK(lex.score(unscored) == kUnscoredLexiconTerm);
  CHECK(lex.predict(diluted).crisis_prob == lex.predict(diluted).crisis_prob);
}

TEST_CASE("bilstm state width, determinism and fit") {
  const auto c = fixtures::separable_corpus(32, 5);
  BiLstmConfig cfg;
  cfg.d_model = 8;
  cfg.d_h = 8;
  cfg.epochs = 40;
  const BiLstmModel a = train_bilstm(cfg, c.samples);
  const BiLstmModel b = train_bilstm(cfg, c.samples);
  CHECK(a.params == b.params);

  diff::Graph g;
  const BiLstmVars v = bilstm_forward(g, a, c.samples[0].tokens);
  CHECK(v.state.value().shape() == diff::Shape{1, 2 * cfg.d_h});

  const BiLstmPredictor p(a);
  std::size_t correct = 0;
  for (const auto& s : c.samples) correct += static_cast<std::size_t>(crisis_decision(p.predict(s.tokens)) == s.labels.crisis);
  CHECK(static_cast<double>(correct) / 32.0 >= 0.95);
  CHECK_THROWS_AS(train_bilstm(cfg, {}), Error);
}

TEST_CASE("detection curve contracts") {
  const auto c = fixtures::separable_corpus(40, 9);
  const std::span<const corpus::Sample> all(c.samples);
  const auto stream = all.subspan(0, 30);
  const auto held = all.subspan(30);
  std::size_t calls = 0;
  const TrainFn fn = [&](std::span<const corpus::Sample>) -> std::unique_ptr<Predictor> {
    ++calls;
    return std::make_unique<CuePredictor>();
  };

  SUBCASE("a window spanning all time equals plain evaluation") {
    const std::vector<std::size_t> cps{40};
    const auto curve = detection_curve(fn, all, held, 1e6, cps);
    REQUIRE(curve.size() == 1);
    CHECK(curve[0].window_count == held.size());
    CHECK(*curve[0].cdr == evaluate(CuePredictor(), held).cdr);
  }
  SUBCASE("windows without positives are absent and skip training") {
    const std::vector<std::size_t> cps{0, 10};
    const auto curve = detection_curve(fn, stream, held, 0.5, cps);
    REQUIRE(curve.size() == 2);
    CHECK(curve[0].anchor == stream.front().timestamp + 43200);
    CHECK(curve[1].anchor == stream[9].timestamp);
    CHECK(curve[1].window_count == 0);
    CHECK_FALSE(curve[1].cdr.has_value());
    CHECK(calls == 0);
  }
  SUBCASE("bad arguments") {
    const std::vector<std::size_t> down{10, 5}, beyond{31}, ok{5};
    CHECK_THROWS_AS(detection_curve(fn, stream, held, 1.0, down), Error);
    CHECK_THROWS_AS(detection_curve(fn, stream, held, 1.0, beyond), Error);
    CHECK_THROWS_AS(detection_curve(fn, stream, held, 0.0, ok), Error);
    std::vector<corpus::Sample> shuffled(stream.begin(), stream.end());
    std::swap(shuffled[0], shuffled[1]);
    CHECK_THROWS_AS(detection_curve(fn, shuffled, held, 1.0, ok), Error);
  }
}

TEST_CASE("report outputs") {
  const auto o = fixtures::oracle_set();
  const MetricsReport r = evaluate_predictions(o.preds, o.samples, &o.provenance);
  const auto j = to_json(r);
  CHECK(j["counts"]["tp"] == 8);
  CHECK(j["f1"].get<double>() == r.f1);
  const std::string csv = to_csv(r);
  CHECK(csv.find("f1") != std::string::npos);

  const std::vector<Series> series{
      {"a", {{0, 0.2}, {1, std::nullopt}, {2, 0.8}}},
      {"b", {{0, 0.5}, {2, 0.5}}},
  };
  const std::string svg = svg_line_plot("t<1>", "x", "y", series);
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("t&lt;1&gt;") != std::string::npos);
  const auto depth = depth_series("full", r.intensity_recall);
  CHECK(depth.points.size() == 3);
  CHECK(*depth.points[0].second == 0.75);
}
