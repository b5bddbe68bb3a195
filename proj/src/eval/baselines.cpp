#include "crisislens/eval/baselines.hpp"

#include <cmath>

#include "crisislens/diffcore/ops.hpp"
#include "crisislens/diffcore/rng.hpp"
#include "crisislens/error.hpp"

namespace crisislens::eval {

using diff::Tensor;
using diff::Var;

namespace {

std::array<double, 3> one_hot(std::size_t k) {
  std::array<double, 3> out{};
  out[k] = 1.0;
  return out;
}

std::array<double, 3> softmax3(const Tensor& logits) {
  const Tensor p = diff::ops::softmax_axis(logits, 1);
  return {p[0], p[1], p[2]};
}

Var head(diff::Graph& g, const diff::ParamStore& store, const std::string& name, Var x) {
  return diff::add_row_bias(diff::matmul(x, g.param(store, name + ".w")), g.param(store, name + ".b"));
}

Var run_lstm(diff::Graph& g, const diff::ParamStore& store, const std::string& prefix, Var seq, std::size_t d_h,
             bool reverse) {
  const diff::LstmVars w{g.param(store, prefix + ".wx"), g.param(store, prefix + ".wh"), g.param(store, prefix + ".b")};
  diff::LstmVarState st{g.constant(Tensor({1, d_h})), g.constant(Tensor({1, d_h}))};
  const std::size_t n = seq.value().rows();
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t t = reverse ? n - 1 - k : k;
    st = diff::lstm_step(diff::slice_rows(seq, t, t + 1), st, w);
  }
  return st.h;
}

std::size_t count(const nlohmann::json& j, const char* name, std::size_t fallback) {
  if (!j.contains(name)) return fallback;
  if (!j[name].is_number_unsigned()) fail(ErrorKind::Config, std::string("'") + name + "' must be a nonnegative integer");
  return j[name].get<std::size_t>();
}

}  // namespace

LexiconBaseline::LexiconBaseline(const embedkb::KnowledgeLexicon& lexicon, std::map<std::string, double> polarity,
                                 double threshold)
    : polarity_(std::move(polarity)), threshold_(threshold) {
  for (const auto& [term, cat] : lexicon.terms()) {
    if (cat != lexicon.neutral_id()) polarity_.emplace(term, kUnscoredLexiconTerm);
  }
}

double LexiconBaseline::score(std::span<const std::string> tokens) const {
  if (tokens.empty()) return 0.0;
  double total = 0.0;
  for (const auto& t : tokens) {
    auto it = polarity_.find(t);
    if (it != polarity_.end()) total += it->second;
  }
  return total / static_cast<double>(tokens.size());
}

Prediction LexiconBaseline::predict(std::span<const std::string> tokens) const {
  const double s = score(tokens);
  Prediction p;
  p.crisis_prob = s < threshold_ ? 1.0 : 0.0;
  p.polarity = one_hot(s < -0.05 ? 0 : s > 0.05 ? 2 : 1);
  const double mag = std::min(1.0, std::abs(s));
  p.intensity = one_hot(mag < 1.0 / 3.0 ? 0 : mag < 2.0 / 3.0 ? 1 : 2);
  return p;
}

void validate(const BiLstmConfig& cfg) {
  if (cfg.d_model == 0 || cfg.d_h == 0) fail(ErrorKind::Config, "bilstm widths must be positive");
  if (cfg.batch_size == 0) fail(ErrorKind::Config, "bilstm batch_size must be positive");
  if (!(cfg.learning_rate > 0.0)) fail(ErrorKind::Config, "bilstm learning_rate must be positive");
  if (cfg.min_count == 0) fail(ErrorKind::Config, "bilstm min_count must be positive");
  if (!(cfg.word_dropout >= 0.0 && cfg.word_dropout < 1.0)) {
    fail(ErrorKind::Config, "bilstm word_dropout must lie in [0,1)");
  }
}

nlohmann::ordered_json to_json(const BiLstmConfig& cfg) {
  nlohmann::ordered_json j;
  j["d_model"] = cfg.d_model;
  j["d_h"] = cfg.d_h;
  j["epochs"] = cfg.epochs;
  j["batch_size"] = cfg.batch_size;
  j["learning_rate"] = cfg.learning_rate;
  j["seed"] = cfg.seed;
  j["min_count"] = cfg.min_count;
  j["word_dropout"] = cfg.word_dropout;
  return j;
}

BiLstmConfig bilstm_config_from_json(const nlohmann::json& j, BiLstmConfig base) {
  if (!j.is_object()) fail(ErrorKind::Config, "bilstm config must be an object");
  base.d_model = count(j, "d_model", base.d_model);
  base.d_h = count(j, "d_h", base.d_h);
  base.epochs = count(j, "epochs", base.epochs);
  base.batch_size = count(j, "batch_size", base.batch_size);
  if (j.contains("learning_rate")) {
    if (!j["learning_rate"].is_number()) fail(ErrorKind::Config, "'learning_rate' must be a number");
    base.learning_rate = j["learning_rate"].get<double>();
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) fail(ErrorKind::Config, "'seed' must be a nonnegative integer");
    base.seed = j["seed"].get<std::uint64_t>();
  }
  base.min_count = count(j, "min_count", base.min_count);
  if (j.contains("word_dropout")) {
    if (!j["word_dropout"].is_number()) fail(ErrorKind::Config, "'word_dropout' must be a number");
    base.word_dropout = j["word_dropout"].get<double>();
  }
  return base;
}

BiLstmModel init_bilstm(const BiLstmConfig& cfg, embedkb::Vocabulary vocab) {
  validate(cfg);
  BiLstmModel m;
  m.config = cfg;
  m.vocab = std::move(vocab);
  Rng rng(derive_seed(cfg.seed, 21));
  Tensor table({m.vocab.size(), cfg.d_model});
  for (std::size_t r = 1; r < m.vocab.size(); ++r)
    for (std::size_t c = 0; c < cfg.d_model; ++c) table.at(r, c) = 0.1 * rng.normal();
  m.params.add("bilstm.table", std::move(table));
  const std::size_t h = cfg.d_h;
  for (const char* dir : {"bilstm.fwd", "bilstm.bwd"}) {
    m.params.add(std::string(dir) + ".wx", xavier_uniform(rng, {cfg.d_model, 4 * h}, cfg.d_model, h));
    m.params.add(std::string(dir) + ".wh", xavier_uniform(rng, {h, 4 * h}, h, h));
    Tensor b({4 * h});
    for (std::size_t i = h; i < 2 * h; ++i) b[i] = 1.0;
    m.params.add(std::string(dir) + ".b", std::move(b));
  }
  const std::pair<const char*, std::size_t> heads[] = {
      {"bilstm.crisis", 2}, {"bilstm.polarity", 3}, {"bilstm.intensity", 3}};
  for (const auto& [name, k] : heads) {
    m.params.add(std::string(name) + ".w", xavier_uniform(rng, {2 * h, k}, 2 * h, k));
    m.params.add(std::string(name) + ".b", Tensor({k}));
  }
  return m;
}

BiLstmVars bilstm_forward(diff::Graph& g, const BiLstmModel& m, std::span<const std::string> tokens) {
  return bilstm_forward(g, m, m.vocab.encode(tokens));
}

BiLstmVars bilstm_forward(diff::Graph& g, const BiLstmModel& m, std::span<const std::size_t> ids) {
  if (ids.empty()) fail(ErrorKind::Input, "empty token sequence");
  Var seq = diff::gather_rows(g.param(m.params, "bilstm.table"), ids, embedkb::Vocabulary::kPad);
  const Var parts[] = {run_lstm(g, m.params, "bilstm.fwd", seq, m.config.d_h, false),
                       run_lstm(g, m.params, "bilstm.bwd", seq, m.config.d_h, true)};
  BiLstmVars v;
  v.state = diff::concat_cols(parts);
  v.crisis_logits = head(g, m.params, "bilstm.crisis", v.state);
  v.polarity_logits = head(g, m.params, "bilstm.polarity", v.state);
  v.intensity_logits = head(g, m.params, "bilstm.intensity", v.state);
  return v;
}

BiLstmModel train_bilstm(const BiLstmConfig& cfg, std::span<const corpus::Sample> train_set,
                         const BiLstmEpochCallback& on_epoch) {
  validate(cfg);
  if (train_set.empty()) fail(ErrorKind::Corpus, "training split is empty");
  std::vector<std::vector<std::string>> docs;
  for (const auto& s : train_set) docs.push_back(s.tokens);
  BiLstmModel m = init_bilstm(cfg, embedkb::build_vocab(docs, cfg.min_count));
  const diff::AdamConfig adam{.lr = cfg.learning_rate};
  Rng order_rng(derive_seed(cfg.seed, 22));
  Rng dropout_rng(derive_seed(cfg.seed, 23));
  std::vector<std::size_t> order(train_set.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    order_rng.shuffle(order);
    double epoch_loss = 0.0;
    std::size_t batches = 0;
    try {
      for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
        const std::size_t end = std::min(order.size(), start + cfg.batch_size);
        diff::Graph g;
        std::vector<Var> crisis, pol, inten;
        std::vector<std::size_t> yc, yp, yi;
        for (std::size_t k = start; k < end; ++k) {
          const auto& s = train_set[order[k]];
          const BiLstmVars v =
              bilstm_forward(g, m, embedkb::word_dropout(m.vocab.encode(s.tokens), cfg.word_dropout, dropout_rng));
          crisis.push_back(v.crisis_logits);
          pol.push_back(v.polarity_logits);
          inten.push_back(v.intensity_logits);
          yc.push_back(static_cast<std::size_t>(s.labels.crisis));
          yp.push_back(static_cast<std::size_t>(s.labels.polarity));
          yi.push_back(static_cast<std::size_t>(s.labels.intensity));
        }
        Var loss = diff::add(diff::cross_entropy(diff::concat_rows(crisis), yc),
                             diff::add(diff::cross_entropy(diff::concat_rows(pol), yp),
                                       diff::cross_entropy(diff::concat_rows(inten), yi)));
        epoch_loss += loss.value()[0];
        g.backward(loss);
        diff::adam_step(m.params, g.param_grads(), adam);
        ++batches;
      }
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::Numeric) {
        fail(ErrorKind::Training, "bilstm diverged in epoch " + std::to_string(epoch) + ": " + e.detail());
      }
      throw;
    }
    if (on_epoch) on_epoch(epoch, epoch_loss / static_cast<double>(batches));
  }
  return m;
}

Prediction BiLstmPredictor::predict(std::span<const std::string> tokens) const {
  diff::Graph g;
  const BiLstmVars v = bilstm_forward(g, m_, tokens);
  Prediction p;
  p.crisis_prob = diff::ops::softmax_axis(v.crisis_logits.value(), 1)[1];
  p.polarity = softmax3(v.polarity_logits.value());
  p.intensity = softmax3(v.intensity_logits.value());
  return p;
}

}  // namespace crisislens::eval
