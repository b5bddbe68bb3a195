#include "crisislens/embedkb/embedding.hpp"

#include <cmath>

#include "crisislens/error.hpp"

namespace crisislens::embedkb {

using diff::Graph;
using diff::ParamStore;
using diff::Tensor;
using diff::Var;

namespace {

std::string encoder_param(std::size_t layer, const char* what) {
  return "embed.enc" + std::to_string(layer) + "." + what;
}

Var attention_layer(Graph& g, const ParamStore& store, const EmbeddingConfig& cfg, std::size_t layer, Var x) {
  Var q = matmul(x, g.param(store, encoder_param(layer, "wq")));
  Var k = matmul(x, g.param(store, encoder_param(layer, "wk")));
  Var v = matmul(x, g.param(store, encoder_param(layer, "wv")));
  const std::size_t d_head = cfg.d_model / cfg.encoder_heads;
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(d_head));
  std::vector<Var> heads;
  for (std::size_t h = 0; h < cfg.encoder_heads; ++h) {
    const std::size_t lo = h * d_head, hi = lo + d_head;
    Var scores = scale(matmul_nt(slice_cols(q, lo, hi), slice_cols(k, lo, hi)), inv_sqrt);
    heads.push_back(matmul(softmax_axis(scores, 1), slice_cols(v, lo, hi)));
  }
  Var merged = heads.size() == 1 ? heads[0] : concat_cols(heads);
  return add(x, matmul(merged, g.param(store, encoder_param(layer, "wo"))));
}

}  // namespace

void validate(const EmbeddingConfig& cfg) {
  if (cfg.d_model == 0 || cfg.d_ph == 0) fail(ErrorKind::Config, "embedding dimensions must be positive");
  if (!(cfg.lambda1 >= 0.0) || !std::isfinite(cfg.lambda1)) {
    fail(ErrorKind::Config, "lambda1 must be a finite non-negative real");
  }
  if (cfg.encoder_layers > 0 && (cfg.encoder_heads == 0 || cfg.d_model % cfg.encoder_heads != 0)) {
    fail(ErrorKind::Config, "encoder heads must divide d_model");
  }
}

void init_embedding_params(ParamStore& store, const EmbeddingConfig& cfg, std::size_t vocab_size,
                           std::size_t category_count, Rng& rng) {
  validate(cfg);
  Tensor table({vocab_size, cfg.d_model});
  for (std::size_t i = Vocabulary::kPad + 1; i < vocab_size; ++i)
    for (std::size_t j = 0; j < cfg.d_model; ++j) table.at(i, j) = 0.1 * rng.normal();
  store.add(kTableParam, std::move(table));
  Tensor cats({category_count, cfg.d_ph});
  for (auto& v : cats.values()) v = 0.5 * rng.normal();
  store.add(kCategoryParam, std::move(cats));
  store.add(kFusionParam, xavier_uniform(rng, {cfg.d_ph, cfg.d_model}, cfg.d_ph, cfg.d_model));
  for (std::size_t l = 0; l < cfg.encoder_layers; ++l) {
    for (const char* w : {"wq", "wk", "wv", "wo"}) {
      Tensor t = xavier_uniform(rng, {cfg.d_model, cfg.d_model}, cfg.d_model, cfg.d_model);
      if (std::string(w) == "wo") t = diff::ops::scale(t, 0.1);
      store.add(encoder_param(l, w), std::move(t));
    }
  }
}

Var embed_base(Graph& g, const ParamStore& store, const EmbeddingConfig& cfg, std::span<const std::size_t> ids) {
  Var table = g.param(store, kTableParam);
  const std::size_t vocab = table.value().rows();
  if (table.value().cols() != cfg.d_model) {
    fail(ErrorKind::Dimension, "embedding table has " + std::to_string(table.value().cols()) + " columns, d_model is " +
                                   std::to_string(cfg.d_model));
  }
  for (std::size_t id : ids) {
    if (id >= vocab) {
      fail(ErrorKind::Vocabulary, "token id " + std::to_string(id) + " outside vocabulary of " + std::to_string(vocab));
    }
  }
  Var x = gather_rows(table, ids, Vocabulary::kPad);
  for (std::size_t l = 0; l < cfg.encoder_layers; ++l) x = attention_layer(g, store, cfg, l, x);
  return x;
}

Var embed_knowledge(Graph& g, const ParamStore& store, std::span<const std::string> tokens,
                    const KnowledgeLexicon& lexicon) {
  std::vector<std::size_t> cats;
  cats.reserve(tokens.size());
  for (const auto& t : tokens) cats.push_back(lexicon.category_of(t));
  Var table = g.param(store, kCategoryParam);
  if (table.value().rows() != lexicon.category_count()) {
    fail(ErrorKind::Dimension, "category table has " + std::to_string(table.value().rows()) + " rows for " +
                                   std::to_string(lexicon.category_count()) + " categories");
  }
  return gather_rows(table, cats);
}

Var fuse(Var e_base, Var e_ph, Var w_ph, double lambda1) {
  if (!(lambda1 >= 0.0) || !std::isfinite(lambda1)) fail(ErrorKind::Parameter, "lambda1 must be non-negative");
  const Tensor &b = e_base.value(), &k = e_ph.value(), &w = w_ph.value();
  if (k.rows() != b.rows() || w.rows() != k.cols() || w.cols() != b.cols()) {
    fail(ErrorKind::Dimension, "fuse: e_base " + diff::shape_string(b.shape()) + ", e_ph " +
                                   diff::shape_string(k.shape()) + ", W_ph " + diff::shape_string(w.shape()));
  }
  Var increment = softmax_axis(matmul(e_ph, w_ph), 1);
  return add(e_base, scale(increment, lambda1));
}

Tensor fuse(const Tensor& e_base, const Tensor& e_ph, const FusionParams& p) {
  Graph g;
  return fuse(g.constant(e_base), g.constant(e_ph), g.constant(p.w_ph), p.lambda1).value();
}

Tensor embed_knowledge(std::span<const std::string> tokens, const KnowledgeLexicon& lexicon,
                       const Tensor& category_table) {
  ParamStore store;
  store.add(kCategoryParam, category_table);
  Graph g;
  return embed_knowledge(g, store, tokens, lexicon).value();
}

Tensor embed_base(const ParamStore& store, const EmbeddingConfig& cfg, std::span<const std::size_t> ids) {
  Graph g;
  return embed_base(g, store, cfg, ids).value();
}

}  // namespace crisislens::embedkb
