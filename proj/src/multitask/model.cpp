#include "crisislens/multitask/model.hpp"

#include <cmath>
#include <string>

#include "crisislens/diffcore/rng.hpp"
#include "crisislens/error.hpp"

namespace crisislens::multitask {

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

std::vector<std::size_t> count_list(const nlohmann::json& j, const char* name, std::vector<std::size_t> fallback) {
  if (!j.contains(name)) return fallback;
  if (!j[name].is_array()) fail(ErrorKind::Config, std::string("'") + name + "' must be an array");
  std::vector<std::size_t> out;
  for (const auto& v : j[name]) {
    if (!v.is_number_unsigned()) fail(ErrorKind::Config, std::string("'") + name + "' entries must be integers");
    out.push_back(v.get<std::size_t>());
  }
  return out;
}

}  // namespace

void validate(const ModelConfig& cfg) {
  embedkb::validate(cfg.embedding);
  mscn::validate(cfg.mscn);
  hgc::validate(cfg.hgc);
  if (!(cfg.node_window_days > 0.0)) fail(ErrorKind::Config, "node_window_days must be positive");
  if (cfg.min_count == 0) fail(ErrorKind::Config, "min_count must be positive");
}

nlohmann::ordered_json to_json(const ModelConfig& cfg) {
  nlohmann::ordered_json j;
  j["d_model"] = cfg.embedding.d_model;
  j["d_ph"] = cfg.embedding.d_ph;
  j["encoder_layers"] = cfg.embedding.encoder_layers;
  j["encoder_heads"] = cfg.embedding.encoder_heads;
  j["lambda1"] = cfg.embedding.lambda1;
  j["widths"] = cfg.mscn.widths;
  j["channels"] = cfg.mscn.channels;
  j["d_h"] = cfg.mscn.d_h;
  j["hgc_dims"] = cfg.hgc.dims;
  j["node_window_days"] = cfg.node_window_days;
  j["min_count"] = cfg.min_count;
  return j;
}

ModelConfig model_config_from_json(const nlohmann::json& j, ModelConfig base) {
  if (!j.is_object()) fail(ErrorKind::Config, "model config must be an object");
  base.embedding.d_model = count(j, "d_model", base.embedding.d_model);
  base.embedding.d_ph = count(j, "d_ph", base.embedding.d_ph);
  base.embedding.encoder_layers = count(j, "encoder_layers", base.embedding.encoder_layers);
  base.embedding.encoder_heads = count(j, "encoder_heads", base.embedding.encoder_heads);
  base.embedding.lambda1 = number(j, "lambda1", base.embedding.lambda1);
  base.mscn.widths = count_list(j, "widths", base.mscn.widths);
  base.mscn.channels = count(j, "channels", base.mscn.channels);
  base.mscn.d_h = count(j, "d_h", base.mscn.d_h);
  base.hgc.dims = count_list(j, "hgc_dims", base.hgc.dims);
  base.node_window_days = number(j, "node_window_days", base.node_window_days);
  base.min_count = count(j, "min_count", base.min_count);
  return base;
}

std::size_t node_feature_dim(const ModelConfig& cfg) { return cfg.mscn.d_h + cfg.embedding.d_model; }

bool TrainedModel::operator==(const TrainedModel& o) const {
  return to_json(config) == to_json(o.config) && vocab == o.vocab && lexicon == o.lexicon && params == o.params &&
         gates == o.gates && bprm_incumbent == o.bprm_incumbent;
}

TrainedModel init_model(const ModelConfig& cfg, embedkb::Vocabulary vocab, embedkb::KnowledgeLexicon lexicon,
                        std::uint64_t seed) {
  validate(cfg);
  TrainedModel m;
  m.config = cfg;
  m.vocab = std::move(vocab);
  m.lexicon = std::move(lexicon);
  Rng embed_rng(derive_seed(seed, 1)), mscn_rng(derive_seed(seed, 2)), hgc_rng(derive_seed(seed, 3)),
      head_rng(derive_seed(seed, 4));
  embedkb::init_embedding_params(m.params, cfg.embedding, m.vocab.size(), m.lexicon.category_count(), embed_rng);
  mscn::init_mscn_params(m.params, cfg.mscn, cfg.embedding.d_model, mscn_rng);
  hgc::init_hgc_params(m.params, cfg.hgc, node_feature_dim(cfg), hgc_rng);
  const std::size_t in = cfg.mscn.d_h + cfg.embedding.d_model;
  m.params.add(kCrisisWeightParam, xavier_uniform(head_rng, {in, 2}, in, 2));
  m.params.add(kCrisisBiasParam, diff::Tensor({2}));
  m.gates.assign(cfg.hgc.dims.size(), 1.0);
  return m;
}

}  // namespace crisislens::multitask
