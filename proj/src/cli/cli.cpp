#include "crisislens/cli/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "crisislens/corpus/generator.hpp"
#include "crisislens/corpus/split.hpp"
#include "crisislens/eval/baselines.hpp"
#include "crisislens/eval/metrics.hpp"
#include "crisislens/eval/protocols.hpp"
#include "crisislens/eval/report.hpp"
#include "crisislens/multitask/gradsuite.hpp"
#include "crisislens/multitask/serialize.hpp"
#include "crisislens/multitask/train.hpp"
#include "json.hpp"

namespace crisislens::cli {

namespace fs = std::filesystem;

namespace {

constexpr const char* kModelFile = "model.cln";
constexpr const char* kHistoryFile = "history.csv";

struct Layout {
  fs::path root;
  fs::path corpus() const { return root / "corpus"; }
  fs::path model() const { return root / "model"; }
  fs::path reports() const { return root / "reports"; }
  fs::path figures() const { return root / "figures"; }
};

template <class T>
void flag(CLI::App* app, const std::string& name, std::optional<T>& dst, const std::string& help) {
  app->add_option_function<T>(name, [&dst](const T& v) { dst = v; }, help);
}

template <class T>
void override_with(const std::optional<T>& v, T& dst) {
  if (v) dst = *v;
}

// Flags shared by every subcommand.
struct Common {
  std::optional<std::uint64_t> seed;
  std::string config;
  std::string out = "out";

  void attach(CLI::App* app) {
    flag(app, "--seed", seed, "random seed");
    app->add_option("--config", config, "JSON config file; flags override its values");
    app->add_option("--out", out, "output root (corpus/, model/, reports/, figures/)");
  }
  Layout layout() const { return {out}; }

  nlohmann::json section(const char* name) const {
    if (config.empty()) return nlohmann::json::object();
    std::ifstream f(config);
    if (!f) fail(ErrorKind::Input, "cannot open config file " + config);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(f);
    } catch (const nlohmann::json::parse_error& e) {
      fail(ErrorKind::Parse, config + ": " + e.what());
    }
    if (!j.is_object()) fail(ErrorKind::Config, config + ": top level must be an object");
    if (!j.contains(name)) return nlohmann::json::object();
    return j[name];
  }
};

struct GenFlags {
  std::optional<std::size_t> n_users, n_samples, vocab_size, links;
  std::optional<double> explicit_rate, implicit_rate, sarcasm_rate, timespan_days, homophily;

  void attach(CLI::App* app) {
    flag(app, "--n-users", n_users, "number of users");
    flag(app, "--n-samples", n_samples, "number of messages");
    flag(app, "--explicit-rate", explicit_rate, "share of explicit-cue crisis messages");
    flag(app, "--implicit-rate", implicit_rate, "share of implicit-cue crisis messages");
    flag(app, "--sarcasm-rate", sarcasm_rate, "share of sarcasm crisis messages");
    flag(app, "--timespan-days", timespan_days, "time range of the stream");
    flag(app, "--vocab-size", vocab_size, "filler vocabulary size");
    flag(app, "--homophily", homophily, "probability a link joins same-risk users");
    flag(app, "--links-per-user", links, "links added per user");
  }
  corpus::GenConfig resolve(const Common& c) const {
    corpus::GenConfig g = corpus::gen_config_from_json(c.section("gen"));
    override_with(c.seed, g.seed);
    override_with(n_users, g.n_users);
    override_with(n_samples, g.n_samples);
    override_with(explicit_rate, g.explicit_rate);
    override_with(implicit_rate, g.implicit_rate);
    override_with(sarcasm_rate, g.sarcasm_rate);
    override_with(timespan_days, g.timespan_days);
    override_with(vocab_size, g.vocab_size);
    override_with(homophily, g.homophily);
    override_with(links, g.links_per_user);
    corpus::validate(g);
    return g;
  }
};

struct SplitFlags {
  std::optional<double> train, val, test;
  std::optional<std::uint64_t> seed;
  bool by_user = false;

  void attach(CLI::App* app) {
    flag(app, "--train-ratio", train, "training share");
    flag(app, "--val-ratio", val, "validation share");
    flag(app, "--test-ratio", test, "test share");
    flag(app, "--split-seed", seed, "split shuffle seed");
    app->add_flag("--by-user", by_user, "split by user instead of by message");
  }
  corpus::SplitSpec resolve(const Common& c) const {
    corpus::SplitSpec s = corpus::split_spec_from_json(c.section("split"));
    override_with(train, s.train);
    override_with(val, s.val);
    override_with(test, s.test);
    override_with(seed, s.seed);
    if (by_user) s.by_user = true;
    corpus::validate(s);
    return s;
  }
};

struct TrainFlags {
  std::optional<std::size_t> epochs, batch, cadence;
  std::optional<double> lr, lambda1, dropout, bprm_step;

  void attach(CLI::App* app) {
    flag(app, "--epochs", epochs, "training epochs");
    flag(app, "--batch-size", batch, "minibatch size");
    flag(app, "--lr", lr, "Adam learning rate");
    flag(app, "--lambda1", lambda1, "knowledge fusion weight");
    flag(app, "--word-dropout", dropout, "training-time UNK replacement rate");
    flag(app, "--bprm-step", bprm_step, "gate search step");
    flag(app, "--bprm-cadence", cadence, "epochs between gate search steps");
  }
  multitask::TrainConfig resolve(const Common& c) const {
    multitask::TrainConfig t = multitask::train_config_from_json(c.section("train"));
    override_with(c.seed, t.seed);
    override_with(epochs, t.epochs);
    override_with(batch, t.batch_size);
    override_with(lr, t.learning_rate);
    override_with(lambda1, t.model.embedding.lambda1);
    override_with(dropout, t.word_dropout);
    override_with(bprm_step, t.bprm_step);
    override_with(cadence, t.bprm_cadence);
    multitask::validate(t);
    return t;
  }
};

corpus::GeneratedCorpus read_corpus(const std::string& dir, const Layout& layout) {
  return corpus::read_corpus_dir(dir.empty() ? layout.corpus() : fs::path(dir));
}

fs::path model_path(const std::string& flag_value, const Layout& layout) {
  return flag_value.empty() ? layout.model() / kModelFile : fs::path(flag_value);
}

std::span<const corpus::Sample> pick_split(const corpus::Splits& s, const std::string& name,
                                           const corpus::GeneratedCorpus& c) {
  if (name == "train") return s.train;
  if (name == "val") return s.val;
  if (name == "test") return s.test;
  return c.samples;
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

nlohmann::ordered_json prediction_json(const std::string& id, const multitask::Prediction& p, double threshold) {
  nlohmann::ordered_json j;
  if (!id.empty()) j["id"] = id;
  j["crisis_prob"] = p.crisis_prob;
  j["crisis"] = eval::crisis_decision(p, threshold);
  j["polarity"] = {{"neg", p.polarity[0]}, {"neu", p.polarity[1]}, {"pos", p.polarity[2]}};
  j["intensity"] = {{"mild", p.intensity[0]}, {"moderate", p.intensity[1]}, {"strong", p.intensity[2]}};
  if (p.behavior_risk) j["behavior_risk"] = *p.behavior_risk;
  return j;
}

std::unique_ptr<eval::Predictor> train_predictor(const multitask::TrainConfig& cfg,
                                                 std::span<const corpus::Sample> first_n,
                                                 std::span<const corpus::Sample> val,
                                                 const corpus::GeneratedCorpus& c,
                                                 std::vector<std::unique_ptr<multitask::TrainedModel>>& keep) {
  if (first_n.empty()) {
    keep.push_back(std::make_unique<multitask::TrainedModel>(
        multitask::init_model(cfg.model, embedkb::Vocabulary(), c.lexicon, cfg.seed)));
  } else {
    keep.push_back(std::make_unique<multitask::TrainedModel>(
        multitask::train(cfg, first_n, val, c.lexicon, c.graph).model));
  }
  return std::make_unique<eval::ModelPredictor>(*keep.back());
}

}  // namespace

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config:
    case ErrorKind::Parameter:
      return kExitUsage;
    case ErrorKind::Numeric:
    case ErrorKind::Training:
      return kExitNumeric;
    default:
      return kExitData;
  }
}

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Knowledge-enhanced crisis recognition", "crisislens"};
  app.require_subcommand(1);

  // gen
  Common gen_c;
  GenFlags gen_f;
  auto* gen = app.add_subcommand("gen", "generate a synthetic corpus into <out>/corpus");
  gen_c.attach(gen);
  gen_f.attach(gen);

  // train
  Common train_c;
  TrainFlags train_f;
  SplitFlags train_s;
  std::string train_corpus;
  auto* train = app.add_subcommand("train", "train the full model into <out>/model");
  train_c.attach(train);
  train_f.attach(train);
  train_s.attach(train);
  train->add_option("--corpus", train_corpus, "corpus directory (default <out>/corpus)");

  // eval
  Common eval_c;
  SplitFlags eval_s;
  std::string eval_corpus, eval_model, eval_split = "test";
  double eval_threshold = eval::kDefaultThreshold;
  auto* ev = app.add_subcommand("eval", "score a model; writes <out>/reports and <out>/figures");
  eval_c.attach(ev);
  eval_s.attach(ev);
  ev->add_option("--corpus", eval_corpus, "corpus directory (default <out>/corpus)");
  ev->add_option("--model", eval_model, "model file (default <out>/model/model.cln)");
  ev->add_option("--split", eval_split, "train | val | test | all")->check(CLI::IsMember({"train", "val", "test", "all"}));
  ev->add_option("--threshold", eval_threshold, "crisis decision threshold");

  // predict
  Common pred_c;
  std::string pred_model, pred_corpus;
  double pred_threshold = eval::kDefaultThreshold;
  auto* pred = app.add_subcommand("predict", "JSON lines with a \"tokens\" array on stdin, predictions on stdout");
  pred_c.attach(pred);
  pred->add_option("--model", pred_model, "model file (default <out>/model/model.cln)");
  pred->add_option("--corpus", pred_corpus, "corpus directory giving graph and history for behavior risk");
  pred->add_option("--threshold", pred_threshold, "crisis decision threshold");

  // curve
  Common curve_c;
  TrainFlags curve_f;
  SplitFlags curve_s;
  std::string curve_kind, curve_corpus, curve_model;
  double window_days = 7.0;
  std::vector<std::size_t> checkpoints;
  auto* curve = app.add_subcommand("curve", "detection-rate or stability curve");
  curve_c.attach(curve);
  curve_f.attach(curve);
  curve_s.attach(curve);
  curve->add_option("--kind", curve_kind, "detection | stability")
      ->required()
      ->check(CLI::IsMember({"detection", "stability"}));
  curve->add_option("--corpus", curve_corpus, "corpus directory (default <out>/corpus)");
  curve->add_option("--model", curve_model, "model file for the stability curve");
  curve->add_option("--window-days", window_days, "detection window");
  curve->add_option("--checkpoints", checkpoints, "training-stream prefix sizes")->delimiter(',');

  // gradcheck
  Common grad_c;
  double grad_eps = 1e-4, grad_tol = 1e-3;
  auto* grad = app.add_subcommand("gradcheck", "finite-difference check of every op and the full loss");
  grad_c.attach(grad);
  grad->add_option("--epsilon", grad_eps, "central difference step");
  grad->add_option("--tolerance", grad_tol, "maximum accepted relative error");

  // compare
  Common cmp_c;
  TrainFlags cmp_f;
  SplitFlags cmp_s;
  std::string cmp_corpus;
  std::optional<std::size_t> bilstm_epochs;
  auto* cmp = app.add_subcommand("compare", "full model vs ablation vs baselines on one split");
  cmp_c.attach(cmp);
  cmp_f.attach(cmp);
  cmp_s.attach(cmp);
  cmp->add_option("--corpus", cmp_corpus, "corpus directory (default <out>/corpus)");
  flag(cmp, "--bilstm-epochs", bilstm_epochs, "recurrent baseline epochs (default --epochs)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*gen) {
      const Layout l = gen_c.layout();
      const corpus::GenConfig g = gen_f.resolve(gen_c);
      const auto c = corpus::gen_corpus(g);
      corpus::write_corpus_dir(l.corpus(), c);
      eval::write_text(l.corpus() / "gen_config.json", corpus::to_json(g).dump(2) + "\n");
      out << "wrote " << c.samples.size() << " samples for " << c.graph.size() << " users to " << l.corpus().string()
          << "\n";
    } else if (*train) {
      const Layout l = train_c.layout();
      const auto tcfg = train_f.resolve(train_c);
      const auto spec = train_s.resolve(train_c);
      const auto c = read_corpus(train_corpus, l);
      const auto parts = corpus::split(c.samples, spec);
      const auto result = multitask::train(tcfg, parts.train, parts.val, c.lexicon, c.graph,
                                           [&](const multitask::EpochRecord& r) {
                                             err << "epoch " << r.epoch << " loss " << fmt("%.4f", r.loss.total)
                                                 << " val_reward " << fmt("%.4f", r.val_reward) << "\n";
                                           });
      fs::create_directories(l.model());
      multitask::save_model(result.model, l.model() / kModelFile);
      multitask::write_history_csv(l.model() / kHistoryFile, result.history);
      nlohmann::ordered_json rec;
      rec["train"] = multitask::to_json(tcfg);
      rec["split"] = corpus::to_json(spec);
      eval::write_text(l.model() / "train_config.json", rec.dump(2) + "\n");
      out << "trained on " << parts.train.size() << " samples; model in " << (l.model() / kModelFile).string() << "\n";
    } else if (*ev) {
      const Layout l = eval_c.layout();
      const auto spec = eval_s.resolve(eval_c);
      const auto c = read_corpus(eval_corpus, l);
      const auto m = multitask::load_model(model_path(eval_model, l));
      const auto parts = corpus::split(c.samples, spec);
      const auto samples = pick_split(parts, eval_split, c);
      const eval::ModelPredictor p(m);
      eval::MetricsReport r = eval::evaluate(p, samples, &c.provenance, eval_threshold);
      const auto buckets = eval::default_length_buckets();
      r.stability = eval::stability_curve(p, samples, buckets);
      eval::check_consistency(r);
      eval::write_text(l.reports() / "metrics.json", eval::to_json(r).dump(2) + "\n");
      eval::write_text(l.reports() / "metrics.csv", eval::to_csv(r));
      const eval::Series depth[] = {eval::depth_series("full", r.intensity_recall)};
      eval::write_text(l.figures() / "depth.svg",
                       eval::svg_line_plot("Emotion depth recall", "intensity (0 mild, 1 moderate, 2 strong)",
                                           "recall", depth));
      const eval::Series stab[] = {eval::stability_series("full", r.stability)};
      eval::write_text(l.figures() / "stability.svg",
                       eval::svg_line_plot("Emotional stability across text lengths", "text length (tokens)",
                                           "stability", stab));
      out << "n " << r.n << " precision " << fmt("%.4f", r.precision) << " recall " << fmt("%.4f", r.recall) << " f1 "
          << fmt("%.4f", r.f1) << " cdr " << fmt("%.4f", r.cdr) << "\n";
    } else if (*pred) {
      const Layout l = pred_c.layout();
      const auto m = multitask::load_model(model_path(pred_model, l));
      std::optional<corpus::GeneratedCorpus> ctx_corpus;
      std::vector<double> risk;
      if (!pred_corpus.empty()) {
        ctx_corpus = corpus::read_corpus_dir(pred_corpus);
        const auto features = multitask::message_features(m, ctx_corpus->samples);
        risk = multitask::behavior_probs(m, ctx_corpus->graph, features,
                                         multitask::latest_timestamp(ctx_corpus->samples), m.gates);
      }
      std::string line;
      std::size_t line_no = 0;
      while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::string where = "stdin:" + std::to_string(line_no) + ": ";
        nlohmann::json j;
        try {
          j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
          fail(ErrorKind::Parse, where + e.what());
        }
        if (!j.is_object() || !j.contains("tokens") || !j["tokens"].is_array()) {
          fail(ErrorKind::Schema, where + "expected an object with a 'tokens' array");
        }
        std::vector<std::string> tokens;
        for (const auto& t : j["tokens"]) {
          if (!t.is_string()) fail(ErrorKind::Schema, where + "tokens must be strings");
          tokens.push_back(t.get<std::string>());
        }
        if (tokens.empty()) fail(ErrorKind::Input, where + "empty token sequence");
        multitask::Prediction p = multitask::predict(m, tokens);
        if (ctx_corpus && j.contains("user") && j["user"].is_string()) {
          if (auto u = ctx_corpus->graph.index_of(j["user"].get<std::string>())) p.behavior_risk = risk[*u];
        }
        const std::string id = j.contains("id") && j["id"].is_string() ? j["id"].get<std::string>() : "";
        out << prediction_json(id, p, pred_threshold).dump() << "\n" << std::flush;
      }
    } else if (*curve) {
      const Layout l = curve_c.layout();
      const auto spec = curve_s.resolve(curve_c);
      const auto c = read_corpus(curve_corpus, l);
      const auto parts = corpus::split(c.samples, spec);
      const eval::LexiconBaseline lex(c.lexicon, c.polarity);
      if (curve_kind == "detection") {
        const auto tcfg = curve_f.resolve(curve_c);
        if (checkpoints.empty()) {
          for (std::size_t k = 0; k <= 4; ++k) checkpoints.push_back(parts.train.size() * k / 4);
        }
        std::vector<std::unique_ptr<multitask::TrainedModel>> keep;
        const eval::TrainFn full_fn = [&](std::span<const corpus::Sample> first_n) {
          err << "training on " << first_n.size() << " samples\n";
          return train_predictor(tcfg, first_n, parts.val, c, keep);
        };
        const eval::TrainFn lex_fn = [&](std::span<const corpus::Sample>) -> std::unique_ptr<eval::Predictor> {
          return std::make_unique<eval::LexiconBaseline>(lex);
        };
        const auto full_curve = eval::detection_curve(full_fn, parts.train, parts.test, window_days, checkpoints);
        const auto lex_curve = eval::detection_curve(lex_fn, parts.train, parts.test, window_days, checkpoints);
        eval::write_text(l.reports() / "detection_curve.csv", eval::curve_csv(full_curve));
        eval::write_text(l.reports() / "detection_curve_lexicon.csv", eval::curve_csv(lex_curve));
        const eval::Series s[] = {eval::detection_series("full", full_curve), eval::detection_series("lexicon", lex_curve)};
        eval::write_text(l.figures() / "detection.svg",
                         eval::svg_line_plot("Crisis detection rate", "training messages", "CDR", s));
        out << eval::curve_csv(full_curve);
      } else {
        const auto m = multitask::load_model(model_path(curve_model, l));
        const eval::ModelPredictor p(m);
        const auto buckets = eval::default_length_buckets();
        const auto full_st = eval::stability_curve(p, parts.test, buckets);
        const auto lex_st = eval::stability_curve(lex, parts.test, buckets);
        nlohmann::ordered_json j;
        j["metric"] = eval::kStabilityMetric;
        for (const auto* named : {&full_st, &lex_st}) {
          nlohmann::ordered_json rows = nlohmann::ordered_json::array();
          for (const auto& b : *named) {
            rows.push_back({{"min_len", b.min_len},
                            {"count", b.count},
                            {"stability", b.stability ? nlohmann::ordered_json(*b.stability) : nlohmann::ordered_json()}});
          }
          j[named == &full_st ? "full" : "lexicon"] = rows;
        }
        eval::write_text(l.reports() / "stability.json", j.dump(2) + "\n");
        const eval::Series s[] = {eval::stability_series("full", full_st), eval::stability_series("lexicon", lex_st)};
        eval::write_text(l.figures() / "stability.svg",
                         eval::svg_line_plot("Emotional stability across text lengths", "text length (tokens)",
                                             "stability", s));
        out << j.dump(2) << "\n";
      }
    } else if (*grad) {
      const auto results = multitask::run_grad_suite(grad_c.seed.value_or(42), grad_eps);
      for (const auto& r : results) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "%-32s %.3e  (%s)\n", r.name.c_str(), r.worst, r.worst_param.c_str());
        out << buf;
      }
      const double worst = multitask::worst_of(results);
      out << "worst relative error: " << fmt("%.3e", worst) << "\n";
      if (!(worst <= grad_tol)) {
        err << "gradient check failed: worst relative error " << fmt("%.3e", worst) << " exceeds "
            << fmt("%.1e", grad_tol) << "\n";
        return kExitNumeric;
      }
    } else if (*cmp) {
      const Layout l = cmp_c.layout();
      eval::CompareConfig cfg;
      cfg.train = cmp_f.resolve(cmp_c);
      cfg.split = cmp_s.resolve(cmp_c);
      cfg.bilstm = eval::bilstm_config_from_json(cmp_c.section("bilstm"));
      override_with(cmp_c.seed, cfg.bilstm.seed);
      override_with(cmp_f.epochs, cfg.bilstm.epochs);
      override_with(bilstm_epochs, cfg.bilstm.epochs);
      override_with(cmp_f.dropout, cfg.bilstm.word_dropout);
      eval::validate(cfg.bilstm);
      const auto c = read_corpus(cmp_corpus, l);
      const auto r = eval::run_compare(c, cfg);
      const std::string table = eval::format_compare(r);
      eval::write_text(l.reports() / "compare.txt", table);
      eval::write_text(l.reports() / "compare.json", eval::to_json(r).dump(2) + "\n");
      fs::create_directories(l.model());
      multitask::write_history_csv(l.model() / "history_full.csv", r.full.history);
      multitask::write_history_csv(l.model() / "history_ablation.csv", r.ablation.history);
      std::vector<eval::Series> depth;
      for (const auto& row : r.rows) depth.push_back(eval::depth_series(row.name, row.metrics.intensity_recall));
      eval::write_text(l.figures() / "compare_depth.svg",
                       eval::svg_line_plot("Emotion depth recall", "intensity (0 mild, 1 moderate, 2 strong)",
                                           "recall", depth));
      out << table;
    }
  } catch (const Error& e) {
    err << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::filesystem::filesystem_error& e) {
    err << "filesystem error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitOk;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cin, std::cout, std::cerr);
}

}  // namespace crisislens::cli
