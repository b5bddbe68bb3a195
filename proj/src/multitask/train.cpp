#include "crisislens/multitask/train.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "crisislens/diffcore/ops.hpp"
#include "crisislens/diffcore/rng.hpp"
#include "crisislens/error.hpp"
#include "crisislens/hgc/bprm.hpp"
#include "crisislens/multitask/pipeline.hpp"

namespace crisislens::multitask {

using diff::Tensor;
using diff::Var;

namespace {

std::size_t count(const nlohmann::json& j, const char* name, std::size_t fallback) {
  if (!j.contains(name)) return fallback;
  if (!j[name].is_number_unsigned()) fail(ErrorKind::Config, std::string("'") + name + "' must be a nonnegative integer");
  return j[name].get<std::size_t>();
}

double number(const nlohmann::json& j, const char* name, double fallback) {
  if (!j.contains(name)) return fallback;
  if (!j[name].is_number()) fail(ErrorKind::Config, std::string("'") + name + "' must be a number");
  return j[name].get<double>();
}

// Users present in `samples` (graph order) with their behavior label.
std::vector<std::pair<std::size_t, int>> labelled_users(const hgc::SocialGraph& graph,
                                                        std::span<const corpus::Sample> samples) {
  std::map<std::size_t, int> users;
  for (const auto& s : samples) users.emplace(graph.require_index(s.user), s.labels.behavior_risk);
  return {users.begin(), users.end()};
}

double hard_reward(const std::vector<double>& probs, const std::vector<std::pair<std::size_t, int>>& users,
                   const RewardWeights& w) {
  std::vector<int> pred, gold;
  for (const auto& [u, y] : users) {
    pred.push_back(probs[u] >= 0.5 ? 1 : 0);
    gold.push_back(y);
  }
  return hgc::compute_reward(pred, gold, w);
}

// Node features for training: cached per-message rows, with the current
// minibatch's rows replaced by live tape values so the behavior loss reaches
// the text modules.
class NodeFeatureCache {
 public:
  NodeFeatureCache(const TrainedModel& m, const hgc::SocialGraph& graph, std::span<const corpus::Sample> train_set)
      : graph_(graph), d0_(node_feature_dim(m.config)) {
    const std::int64_t t_ref = latest_timestamp(train_set);
    const double lo = static_cast<double>(t_ref) - m.config.node_window_days * 86400.0;
    counts_.assign(graph.size(), 0);
    for (const auto& s : train_set) {
      const std::size_t u = graph.require_index(s.user);
      user_.push_back(u);
      const bool in = static_cast<double>(s.timestamp) >= lo && s.timestamp <= t_ref;
      in_window_.push_back(in);
      if (in) ++counts_[u];
    }
    rows_.reserve(train_set.size());
    for (const auto& s : train_set) {
      diff::Graph g;
      rows_.push_back(node_row(forward_message(g, m, s.tokens)).value());
    }
  }

  Var h0(diff::Graph& g, std::span<const std::size_t> batch, std::span<const Var> live) const {
    Tensor base({graph_.size(), d0_});
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      if (!in_window_[i]) continue;
      for (std::size_t j = 0; j < d0_; ++j) base.at(user_[i], j) += rows_[i][j];
    }
    std::vector<Var> rows;
    std::vector<std::size_t> owners;
    for (std::size_t k = 0; k < batch.size(); ++k) {
      const std::size_t i = batch[k];
      if (!in_window_[i]) continue;
      for (std::size_t j = 0; j < d0_; ++j) base.at(user_[i], j) -= rows_[i][j];
      rows.push_back(live[k]);
      owners.push_back(user_[i]);
    }
    for (std::size_t u = 0; u < graph_.size(); ++u) {
      if (counts_[u] == 0) continue;
      for (std::size_t j = 0; j < d0_; ++j) base.at(u, j) /= static_cast<double>(counts_[u]);
    }
    Var h = g.constant(std::move(base));
    if (rows.empty()) return h;
    Tensor mix({graph_.size(), rows.size()});
    for (std::size_t k = 0; k < rows.size(); ++k) mix.at(owners[k], k) = 1.0 / static_cast<double>(counts_[owners[k]]);
    return diff::add(h, diff::matmul(g.constant(std::move(mix)), diff::concat_rows(rows)));
  }

  void update(std::span<const std::size_t> batch, std::span<const Var> live) {
    for (std::size_t k = 0; k < batch.size(); ++k) rows_[batch[k]] = live[k].value();
  }

  // Users with at least one in-window training message.
  std::vector<std::size_t> active_users() const {
    std::vector<std::size_t> out;
    for (std::size_t u = 0; u < counts_.size(); ++u)
      if (counts_[u] > 0) out.push_back(u);
    return out;
  }

 private:
  const hgc::SocialGraph& graph_;
  std::size_t d0_;
  std::vector<std::size_t> user_;
  std::vector<bool> in_window_;
  std::vector<std::size_t> counts_;
  std::vector<Tensor> rows_;
};

std::string join_gates(const std::vector<double>& gates) {
  std::string out;
  char buf[64];
  for (std::size_t i = 0; i < gates.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", gates[i]);
    if (i) out += ';';
    out += buf;
  }
  return out;
}

}  // namespace

void validate(const TrainConfig& cfg) {
  if (cfg.batch_size == 0) fail(ErrorKind::Config, "batch_size must be positive");
  if (!(cfg.learning_rate > 0.0) || !std::isfinite(cfg.learning_rate)) {
    fail(ErrorKind::Config, "learning_rate must be positive");
  }
  if (!(cfg.word_dropout >= 0.0 && cfg.word_dropout < 1.0)) fail(ErrorKind::Config, "word_dropout must lie in [0,1)");
  if (!(cfg.bprm_step > 0.0)) fail(ErrorKind::Config, "bprm_step must be positive");
  if (cfg.bprm_cadence == 0) fail(ErrorKind::Config, "bprm_cadence must be positive");
  validate(cfg.loss);
  hgc::validate(cfg.reward);
  validate(cfg.model);
}

nlohmann::ordered_json to_json(const TrainConfig& cfg) {
  nlohmann::ordered_json j;
  j["epochs"] = cfg.epochs;
  j["batch_size"] = cfg.batch_size;
  j["learning_rate"] = cfg.learning_rate;
  j["seed"] = cfg.seed;
  j["word_dropout"] = cfg.word_dropout;
  j["loss_weights"] = to_json(cfg.loss);
  j["reward_weights"] = to_json(cfg.reward);
  j["bprm_step"] = cfg.bprm_step;
  j["bprm_cadence"] = cfg.bprm_cadence;
  j["model"] = to_json(cfg.model);
  return j;
}

TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig base) {
  if (!j.is_object()) fail(ErrorKind::Config, "train config must be an object");
  base.epochs = count(j, "epochs", base.epochs);
  base.batch_size = count(j, "batch_size", base.batch_size);
  base.learning_rate = number(j, "learning_rate", base.learning_rate);
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) fail(ErrorKind::Config, "'seed' must be a nonnegative integer");
    base.seed = j["seed"].get<std::uint64_t>();
  }
  base.word_dropout = number(j, "word_dropout", base.word_dropout);
  if (j.contains("loss_weights")) base.loss = loss_weights_from_json(j["loss_weights"], base.loss);
  if (j.contains("reward_weights")) base.reward = reward_weights_from_json(j["reward_weights"], base.reward);
  base.bprm_step = number(j, "bprm_step", base.bprm_step);
  base.bprm_cadence = count(j, "bprm_cadence", base.bprm_cadence);
  if (j.contains("model")) base.model = model_config_from_json(j["model"], base.model);
  return base;
}

double behavior_reward(const TrainedModel& m, const hgc::SocialGraph& graph,
                       std::span<const corpus::Sample> context, std::span<const corpus::Sample> eval_set,
                       const RewardWeights& w, std::span<const double> gates) {
  const auto features = message_features(m, context);
  const auto probs = behavior_probs(m, graph, features, latest_timestamp(context), gates);
  return hard_reward(probs, labelled_users(graph, eval_set), w);
}

TrainResult train(const TrainConfig& cfg, std::span<const corpus::Sample> train_set,
                  std::span<const corpus::Sample> val_set, const embedkb::KnowledgeLexicon& lexicon,
                  const hgc::SocialGraph& graph, const EpochCallback& on_epoch) {
  validate(cfg);
  if (train_set.empty()) fail(ErrorKind::Corpus, "training split is empty");
  if (val_set.empty()) fail(ErrorKind::Corpus, "validation split is empty");

  std::vector<std::vector<std::string>> docs;
  for (const auto& s : train_set) docs.push_back(s.tokens);
  TrainResult result;
  result.model = init_model(cfg.model, embedkb::build_vocab(docs, cfg.model.min_count), lexicon, cfg.seed);
  TrainedModel& m = result.model;
  if (cfg.epochs == 0) return result;

  const auto adj = hgc::build_hierarchical_adjacency(graph, cfg.model.hgc.dims.size());
  NodeFeatureCache cache(m, graph, train_set);
  const std::vector<std::size_t> active = cache.active_users();
  std::vector<std::size_t> behavior_labels(graph.size(), 0);
  for (const auto& s : train_set) behavior_labels[graph.require_index(s.user)] = static_cast<std::size_t>(s.labels.behavior_risk);
  std::vector<std::size_t> active_labels;
  for (std::size_t u : active) active_labels.push_back(behavior_labels[u]);

  std::vector<corpus::Sample> context(train_set.begin(), train_set.end());
  context.insert(context.end(), val_set.begin(), val_set.end());
  const auto val_users = labelled_users(graph, val_set);
  const std::int64_t context_ref = latest_timestamp(context);

  const diff::AdamConfig adam{.lr = cfg.learning_rate};
  Rng order_rng(derive_seed(cfg.seed, 6));
  Rng bprm_rng(derive_seed(cfg.seed, 5));
  Rng dropout_rng(derive_seed(cfg.seed, 7));
  std::vector<std::size_t> order(train_set.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    EpochRecord rec;
    rec.epoch = epoch;
    try {
      order_rng.shuffle(order);
      std::size_t batches = 0;
      for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
        const std::span<const std::size_t> batch(order.data() + start, std::min(cfg.batch_size, order.size() - start));
        diff::Graph g;
        std::vector<Var> crisis, polarity, intensity, live;
        std::vector<std::size_t> y_crisis, y_pol, y_int;
        std::vector<int> y_binary;
        for (std::size_t i : batch) {
          const corpus::Sample& s = train_set[i];
          const MessageVars v =
              forward_message(g, m, s.tokens, embedkb::word_dropout(m.vocab.encode(s.tokens), cfg.word_dropout, dropout_rng));
          crisis.push_back(v.crisis_logits);
          polarity.push_back(v.sentiment.polarity_logits);
          intensity.push_back(v.sentiment.intensity_logits);
          live.push_back(node_row(v));
          y_crisis.push_back(static_cast<std::size_t>(s.labels.crisis));
          y_binary.push_back(s.labels.crisis);
          y_pol.push_back(static_cast<std::size_t>(s.labels.polarity));
          y_int.push_back(static_cast<std::size_t>(s.labels.intensity));
        }
        Var crisis_logits = diff::concat_rows(crisis);
        LossParts parts;
        parts.classification = diff::cross_entropy(crisis_logits, y_crisis);
        parts.emotion = diff::add(diff::cross_entropy(diff::concat_rows(polarity), y_pol),
                                  diff::cross_entropy(diff::concat_rows(intensity), y_int));
        Var probs = diff::slice_cols(diff::softmax_axis(crisis_logits, 1), 1, 2);
        Var reward = soft_reward(probs, y_binary, cfg.reward);
        parts.reinforcement = diff::affine(reward, -1.0, cfg.reward.total());
        if (!active.empty()) {
          Var h = hgc::hgc_forward(cache.h0(g, batch, live), adj, hgc::hgc_layers(g, m.params, cfg.model.hgc), m.gates);
          Var logits = diff::gather_rows(hgc::behavior_logits(g, m.params, h), active);
          parts.behavior = diff::cross_entropy(logits, active_labels);
        } else {
          parts.behavior = g.constant(Tensor::scalar(0.0));
        }
        Var total = total_loss(parts, cfg.loss);
        if (!std::isfinite(total.value()[0])) fail(ErrorKind::Numeric, "non-finite total loss");
        rec.loss.classification += parts.classification.value()[0];
        rec.loss.emotion += parts.emotion.value()[0];
        rec.loss.behavior += parts.behavior.value()[0];
        rec.loss.reinforcement += parts.reinforcement.value()[0];
        rec.soft_reward += reward.value()[0];
        g.backward(total);
        const diff::GradMap grads = g.param_grads();
        for (const auto& [name, grad] : grads) {
          if (!grad.all_finite()) fail(ErrorKind::Numeric, "non-finite gradient for " + name);
        }
        cache.update(batch, live);
        diff::adam_step(m.params, grads, adam);
        ++batches;
      }
      const double nb = static_cast<double>(batches);
      rec.loss.classification /= nb;
      rec.loss.emotion /= nb;
      rec.loss.behavior /= nb;
      rec.loss.reinforcement /= nb;
      rec.soft_reward /= nb;
      rec.loss = with_total(rec.loss, cfg.loss);

      const auto features = message_features(m, context);
      const auto reward_at = [&](std::span<const double> gates) {
        return hard_reward(behavior_probs(m, graph, features, context_ref, gates), val_users, cfg.reward);
      };
      if (epoch % cfg.bprm_cadence == 0) {
        const hgc::BprmResult step = hgc::bprm_update(m.gates, m.bprm_incumbent, reward_at, cfg.bprm_step, bprm_rng);
        m.gates = step.gates;
        m.bprm_incumbent = step.incumbent;
        rec.bprm_ran = true;
        rec.accepted = step.accepted;
      }
      rec.val_reward = reward_at(m.gates);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::Numeric) {
        fail(ErrorKind::Training, "diverged in epoch " + std::to_string(epoch) + ": " + e.detail());
      }
      throw;
    }
    rec.bprm_incumbent = m.bprm_incumbent;
    rec.gates = m.gates;
    result.history.push_back(rec);
    if (on_epoch) on_epoch(rec);
  }
  return result;
}

void write_history_csv(const std::filesystem::path& path, std::span<const EpochRecord> history) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Input, "cannot write " + path.string());
  out << "epoch,classification,emotion,behavior,reinforcement,total,soft_reward,val_reward,bprm_ran,"
         "bprm_incumbent,accepted,gates\n";
  char buf[512];
  for (const auto& r : history) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d,", r.epoch,
                  r.loss.classification, r.loss.emotion, r.loss.behavior, r.loss.reinforcement, r.loss.total,
                  r.soft_reward, r.val_reward, r.bprm_ran ? 1 : 0);
    out << buf;
    if (r.bprm_incumbent) {
      std::snprintf(buf, sizeof buf, "%.17g", *r.bprm_incumbent);
      out << buf;
    }
    out << ',' << (r.accepted ? 1 : 0) << ',' << join_gates(r.gates) << '\n';
  }
}

std::vector<EpochRecord> read_history_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Input, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::Format, path.string() + ": missing header");
  std::vector<EpochRecord> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (cells.size() != 12) fail(ErrorKind::Format, path.string() + ":" + std::to_string(line_no) + ": expected 12 columns");
    try {
      EpochRecord r;
      r.epoch = std::stoul(cells[0]);
      r.loss = {std::stod(cells[1]), std::stod(cells[2]), std::stod(cells[3]), std::stod(cells[4]), std::stod(cells[5])};
      r.soft_reward = std::stod(cells[6]);
      r.val_reward = std::stod(cells[7]);
      r.bprm_ran = cells[8] == "1";
      if (!cells[9].empty()) r.bprm_incumbent = std::stod(cells[9]);
      r.accepted = cells[10] == "1";
      std::stringstream gs(cells[11]);
      while (std::getline(gs, cell, ';')) r.gates.push_back(std::stod(cell));
      out.push_back(std::move(r));
    } catch (const std::logic_error&) {
      fail(ErrorKind::Format, path.string() + ":" + std::to_string(line_no) + ": bad number");
    }
  }
  return out;
}

}  // namespace crisislens::multitask
