// One PASS/FAIL line per acceptance criterion. Exit status is nonzero when
// any criterion fails.
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "crisislens/cli/cli.hpp"
#include "crisislens/diffcore/ops.hpp"
#include "crisislens/embedkb/embedding.hpp"
#include "crisislens/eval/metrics.hpp"
#include "crisislens/hgc/hgc.hpp"
#include "crisislens/hgc/reward.hpp"
#include "crisislens/multitask/gradsuite.hpp"
#include "crisislens/multitask/loss.hpp"
#include "crisislens/multitask/serialize.hpp"
#include "crisislens/multitask/train.hpp"
#include "fixtures.hpp"
#include "json.hpp"
#include "oracle_set.hpp"

using namespace crisislens;
namespace fs = std::filesystem;
using diff::Tensor;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string num(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) return {};
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

int cli_run(const std::vector<std::string>& args, std::string* out = nullptr) {
  std::istringstream in;
  std::ostringstream o, e;
  const int code = cli::run(args, in, o, e);
  if (out) *out = o.str();
  if (code != 0) std::fprintf(stderr, "%s", e.str().c_str());
  return code;
}

Tensor random_tensor(Rng& rng, diff::Shape shape, double scale = 1.0) {
  Tensor t(std::move(shape));
  for (auto& v : t.values()) v = scale * rng.normal();
  return t;
}

hgc::SocialGraph random_graph(Rng& rng, std::size_t n, double p) {
  std::vector<std::string> users;
  for (std::size_t i = 0; i < n; ++i) users.push_back("u" + std::to_string(i));
  std::vector<std::pair<std::string, std::string>> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (rng.bernoulli(p)) edges.emplace_back(users[i], users[j]);
  return hgc::SocialGraph(users, edges);
}

Outcome gradient_suite() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto results = multitask::run_grad_suite(20260601, 1e-4);
  const double secs = seconds_since(t0);
  const double worst = multitask::worst_of(results);
  std::string name;
  for (const auto& r : results)
    if (r.worst == worst) name = r.name;
  return {worst <= 1e-3 && secs < 60.0, std::to_string(results.size()) + " checks, worst " + num("%.3e", worst) +
                                            " (" + name + "), " + num("%.2f", secs) + " s"};
}

Outcome oracles() {
  const auto o = fixtures::oracle_set();
  const fixtures::OracleExpect want;
  const auto r = eval::evaluate_predictions(o.preds, o.samples, &o.provenance);
  bool ok = r.counts.tp == want.tp && r.counts.fp == want.fp && r.counts.tn == want.tn && r.counts.fn == want.fn &&
            r.precision == want.precision && r.recall == want.recall && r.f1 == want.f1 && r.cdr == want.recall;
  for (std::size_t k = 0; k < 3; ++k) ok = ok && r.intensity_recall[k] && *r.intensity_recall[k] == want.depth[k];
  ok = ok && *r.mechanism_recall.at(corpus::Mechanism::Explicit) == want.explicit_recall &&
       *r.mechanism_recall.at(corpus::Mechanism::Implicit) == want.implicit_recall &&
       *r.mechanism_recall.at(corpus::Mechanism::Sarcasm) == want.sarcasm_recall;

  double worst = 0.0;
  const hgc::RewardWeights thirds;
  for (int labels = 0; labels < 16; ++labels) {
    for (int preds = 0; preds < 16; ++preds) {
      std::vector<int> y(4), p(4);
      std::vector<double> probs(4);
      for (int i = 0; i < 4; ++i) {
        y[i] = (labels >> i) & 1;
        p[i] = (preds >> i) & 1;
        probs[i] = p[i];
      }
      worst = std::max(worst, std::abs(multitask::soft_reward(probs, y, thirds) - hgc::compute_reward(p, y, thirds)));
    }
  }
  ok = ok && worst <= 1e-6;
  return {ok, std::string("20-sample counts/rates/depth ") + (ok ? "exact" : "mismatch") +
                  ", soft vs hard reward over 256 binary cases max diff " + num("%.1e", worst)};
}

Outcome overfit() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto c = fixtures::separable_corpus(64, 11);
  multitask::TrainConfig cfg;
  cfg.epochs = 200;
  const auto r = multitask::train(cfg, c.samples, c.samples, c.lexicon, c.graph);
  std::size_t correct = 0;
  for (const auto& s : c.samples)
    correct += static_cast<std::size_t>(eval::crisis_decision(multitask::predict(r.model, s.tokens)) == s.labels.crisis);
  const double acc = static_cast<double>(correct) / 64.0;
  const double secs = seconds_since(t0);
  return {acc >= 0.95 && secs < 120.0,
          "train accuracy " + num("%.4f", acc) + " after 200 epochs at default dims, " + num("%.1f", secs) + " s"};
}

struct CompareNumbers {
  double full_f1 = 0, lexicon_f1 = 0, bilstm_f1 = 0;
  std::optional<double> full_mild, ablation_mild, margin;
  bool ok = false;
};

CompareNumbers run_comparison(const fs::path& root, std::string& table) {
  CompareNumbers n;
  const std::string out = (root / "compare").string();
  if (cli_run({"gen", "--out", out, "--seed", "7", "--n-samples", "800"}) != 0) return n;
  if (cli_run({"compare", "--out", out, "--seed", "1", "--epochs", "15", "--lambda1", "1.0"}, &table) != 0) return n;
  const auto j = nlohmann::json::parse(slurp(root / "compare" / "reports" / "compare.json"));
  n.full_f1 = j["models"]["full"]["f1"].get<double>();
  n.lexicon_f1 = j["models"]["lexicon"]["f1"].get<double>();
  n.bilstm_f1 = j["models"]["bilstm"]["f1"].get<double>();
  const auto& sub = j["implicit_subset"];
  if (!sub["full_mild_recall"].is_null()) n.full_mild = sub["full_mild_recall"].get<double>();
  if (!sub["ablation_mild_recall"].is_null()) n.ablation_mild = sub["ablation_mild_recall"].get<double>();
  if (!sub["margin"].is_null()) n.margin = sub["margin"].get<double>();
  n.ok = true;
  return n;
}

Outcome bprm_monotone(const std::vector<fs::path>& histories) {
  std::size_t runs = 0, steps = 0, accepted = 0;
  bool ok = !histories.empty();
  for (const auto& path : histories) {
    if (!fs::exists(path)) {
      ok = false;
      continue;
    }
    ++runs;
    std::optional<double> best;
    for (const auto& rec : multitask::read_history_csv(path)) {
      if (!rec.bprm_ran) continue;
      ++steps;
      accepted += static_cast<std::size_t>(rec.accepted);
      if (!rec.bprm_incumbent) {
        ok = false;
        continue;
      }
      if (best && *rec.bprm_incumbent < *best) ok = false;
      if (best && rec.accepted && !(*rec.bprm_incumbent > *best)) ok = false;
      best = rec.bprm_incumbent;
    }
  }
  return {ok, std::to_string(runs) + " history files, " + std::to_string(steps) + " search steps, " +
                  std::to_string(accepted) + " accepted, incumbent never decreased: " + (ok ? "yes" : "no")};
}

Outcome determinism(const fs::path& root) {
  const std::vector<std::string> gen{"--seed", "21", "--n-samples", "300", "--n-users", "30"};
  for (const char* run : {"det_a", "det_b"}) {
    const std::string out = (root / run).string();
    std::vector<std::string> g{"gen", "--out", out};
    g.insert(g.end(), gen.begin(), gen.end());
    if (cli_run(g) != 0) return {false, "gen failed"};
    if (cli_run({"train", "--out", out, "--seed", "3", "--epochs", "4"}) != 0) return {false, "train failed"};
    if (cli_run({"eval", "--out", out}) != 0) return {false, "eval failed"};
  }
  const std::vector<std::string> files{
      "corpus/corpus.jsonl", "corpus/provenance.jsonl", "corpus/lexicon.json",  "corpus/graph.json",
      "corpus/polarity.json", "model/model.cln",        "model/history.csv",    "reports/metrics.json",
      "reports/metrics.csv",  "figures/depth.svg",      "figures/stability.svg"};
  std::size_t same = 0;
  std::string differing;
  for (const auto& f : files) {
    const std::string a = slurp(root / "det_a" / f), b = slurp(root / "det_b" / f);
    if (!a.empty() && a == b)
      ++same;
    else
      differing += " " + f;
  }
  return {same == files.size(),
          std::to_string(same) + "/" + std::to_string(files.size()) + " artifacts byte-identical" +
              (differing.empty() ? "" : ", differing:" + differing)};
}

Outcome invariants() {
  Rng rng(77);
  std::vector<std::string> failed;

  // softmax rows and columns sum to one and stay positive
  bool softmax_ok = true;
  for (int t = 0; t < 50; ++t) {
    const Tensor x = random_tensor(rng, {1 + rng.index(6), 1 + rng.index(6)}, 1.0 + 20.0 * rng.uniform());
    for (std::size_t axis : {0u, 1u}) {
      const Tensor p = diff::ops::softmax_axis(x, axis);
      const std::size_t outer = axis == 1 ? x.rows() : x.cols(), inner = axis == 1 ? x.cols() : x.rows();
      for (std::size_t i = 0; i < outer; ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k < inner; ++k) {
          const double v = axis == 1 ? p.at(i, k) : p.at(k, i);
          softmax_ok = softmax_ok && v >= 0.0;
          s += v;
        }
        softmax_ok = softmax_ok && std::abs(s - 1.0) <= 1e-12;
      }
    }
  }
  if (!softmax_ok) failed.push_back("softmax");

  bool stochastic = true;
  for (int t = 0; t < 20; ++t) {
    const auto g = random_graph(rng, 1 + rng.index(20), rng.uniform(0.0, 0.6));
    for (const auto& l : hgc::build_hierarchical_adjacency(g, 1 + rng.index(3)).levels) {
      for (std::size_t i = 0; i < l.rows(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < l.cols(); ++j) {
          stochastic = stochastic && l.at(i, j) >= 0.0;
          s += l.at(i, j);
        }
        stochastic = stochastic && std::abs(s - 1.0) <= 1e-9;
      }
    }
  }
  if (!stochastic) failed.push_back("adjacency");

  bool identity = true;
  for (int t = 0; t < 20; ++t) {
    const std::size_t len = 1 + rng.index(8), d_model = 1 + rng.index(8), d_ph = 1 + rng.index(8);
    const Tensor base = random_tensor(rng, {len, d_model});
    const Tensor ph = random_tensor(rng, {len, d_ph});
    const Tensor fused = embedkb::fuse(base, ph, {random_tensor(rng, {d_ph, d_model}), 0.0});
    identity = identity && std::ranges::equal(fused.values(), base.values());
  }
  if (!identity) failed.push_back("fusion");

  bool equivariant = true;
  const hgc::HgcConfig hcfg{{4, 2}};
  for (int t = 0; t < 10; ++t) {
    const std::size_t n = 2 + rng.index(10);
    const auto g = random_graph(rng, n, 0.35);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    diff::ParamStore store;
    hgc::init_hgc_params(store, hcfg, 3, rng);
    const auto p = hgc::hgc_params(store, hcfg, {rng.uniform(0.0, 2.0), rng.uniform(0.0, 2.0)});
    const Tensor h0 = random_tensor(rng, {n, 3});
    Tensor ph0({n, 3});
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < 3; ++c) ph0.at(r, c) = h0.at(order[r], c);
    const Tensor a = hgc::hgc_forward(h0, hgc::build_hierarchical_adjacency(g, 2), p);
    const Tensor b = hgc::hgc_forward(ph0, hgc::build_hierarchical_adjacency(g.permuted(order), 2), p);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < 2; ++c) equivariant = equivariant && std::abs(b.at(r, c) - a.at(order[r], c)) < 1e-12;
  }
  if (!equivariant) failed.push_back("hgc permutation");

  const auto c = fixtures::separable_corpus(24, 6);
  multitask::TrainConfig cfg;
  cfg.epochs = 3;
  cfg.model.embedding.d_model = 8;
  cfg.model.mscn.d_h = 8;
  const auto m = multitask::train(cfg, c.samples, c.samples, c.lexicon, c.graph).model;
  const std::string bytes = multitask::serialize_model(m);
  const auto back = multitask::deserialize_model(bytes);
  if (!(back == m) || multitask::serialize_model(back) != bytes) failed.push_back("serialization");

  std::string detail = "softmax, adjacency, fusion identity, hgc permutation, serialization";
  if (!failed.empty()) {
    detail += "; failing:";
    for (const auto& f : failed) detail += " " + f;
  }
  return {failed.empty(), detail};
}

}  // namespace

int main() {
  const fs::path root = fs::temp_directory_path() / ("crisislens_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  fs::create_directories(root);

  std::vector<std::pair<std::string, Outcome>> results;
  auto guarded = [&](const std::string& title, const std::function<Outcome()>& f) {
    Outcome o;
    try {
      o = f();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    std::printf("criterion %zu: %s  %s: %s\n", results.size() + 1, o.pass ? "PASS" : "FAIL", title.c_str(),
                o.detail.c_str());
    std::fflush(stdout);
    results.emplace_back(title, o);
  };

  guarded("gradient suite", gradient_suite);
  guarded("oracle equivalence", oracles);
  guarded("overfit check", overfit);

  std::string table;
  CompareNumbers cmp;
  try {
    cmp = run_comparison(root, table);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "comparison threw: %s\n", e.what());
  }
  if (!table.empty()) std::printf("%s", table.c_str());
  guarded("F1 vs baselines", [&]() -> Outcome {
    if (!cmp.ok) return {false, "comparison run failed"};
    const bool pass = cmp.full_f1 - cmp.lexicon_f1 >= 0.10 && cmp.full_f1 >= cmp.bilstm_f1;
    return {pass, "full " + num("%.4f", cmp.full_f1) + ", lexicon " + num("%.4f", cmp.lexicon_f1) + " (+" +
                      num("%.1f", 100.0 * (cmp.full_f1 - cmp.lexicon_f1)) + " points), bilstm " +
                      num("%.4f", cmp.bilstm_f1)};
  });
  guarded("implicit mild recall vs ablation", [&]() -> Outcome {
    if (!cmp.ok || !cmp.full_mild || !cmp.ablation_mild) return {false, "no implicit mild samples or run failed"};
    const bool printed = table.find("mild-intensity recall: full") != std::string::npos &&
                         table.find("margin") != std::string::npos;
    return {*cmp.full_mild >= *cmp.ablation_mild && printed,
            "full " + num("%.4f", *cmp.full_mild) + ", ablation " + num("%.4f", *cmp.ablation_mild) + ", margin " +
                num("%+.4f", *cmp.margin) + (printed ? ", printed by compare" : ", missing from compare output")};
  });

  Outcome det;
  try {
    det = determinism(root);
  } catch (const std::exception& e) {
    det = {false, std::string("threw: ") + e.what()};
  }
  guarded("BPRM monotonicity", [&] {
    return bprm_monotone({root / "compare" / "model" / "history_full.csv",
                          root / "compare" / "model" / "history_ablation.csv", root / "det_a" / "model" / "history.csv",
                          root / "det_b" / "model" / "history.csv"});
  });
  guarded("determinism", [&] { return det; });
  guarded("invariant suite", invariants);

  fs::remove_all(root);
  std::size_t passed = 0;
  for (const auto& [_, o] : results) passed += static_cast<std::size_t>(o.pass);
  std::printf("%zu/%zu criteria passed\n", passed, results.size());
  return passed == results.size() ? 0 : 1;
}
