#include "crisislens/mscn/mscn.hpp"

#include <algorithm>
#include <string>

#include "crisislens/error.hpp"

namespace crisislens::mscn {

using diff::Graph;
using diff::ParamStore;
using diff::Tensor;
using diff::Var;

namespace {

std::string conv_param(std::size_t width, const char* what) {
  return "mscn.conv" + std::to_string(width) + "." + what;
}

}  // namespace

void validate(const MscnConfig& cfg) {
  if (cfg.widths.empty() || cfg.channels == 0 || cfg.d_h == 0) {
    fail(ErrorKind::Config, "mscn needs at least one kernel width and positive channel/hidden sizes");
  }
  for (std::size_t i = 0; i < cfg.widths.size(); ++i) {
    if (cfg.widths[i] == 0) fail(ErrorKind::Config, "kernel widths must be positive");
    for (std::size_t j = 0; j < i; ++j) {
      if (cfg.widths[j] == cfg.widths[i]) fail(ErrorKind::Config, "duplicate kernel width");
    }
  }
}

std::size_t max_width(const MscnConfig& cfg) { return *std::max_element(cfg.widths.begin(), cfg.widths.end()); }

double head_input_scale(const MscnConfig& cfg) { return static_cast<double>(cfg.d_h); }

void init_mscn_params(ParamStore& store, const MscnConfig& cfg, std::size_t d_model, Rng& rng) {
  validate(cfg);
  for (std::size_t w : cfg.widths) {
    store.add(conv_param(w, "kernel"), xavier_uniform(rng, {w, d_model, cfg.channels}, w * d_model, cfg.channels));
    store.add(conv_param(w, "bias"), Tensor({cfg.channels}, 0.01));
  }
  const std::size_t h = cfg.d_h;
  store.add("mscn.lstm.wx", xavier_uniform(rng, {cfg.channels, 4 * h}, cfg.channels, h));
  store.add("mscn.lstm.wh", xavier_uniform(rng, {h, 4 * h}, h, h));
  Tensor b({4 * h});
  for (std::size_t j = h; j < 2 * h; ++j) b[j] = 1.0;  // forget gate
  store.add("mscn.lstm.b", std::move(b));
  store.add("mscn.w_a", xavier_uniform(rng, {h, h}, h, h));
  store.add("mscn.polarity.w", xavier_uniform(rng, {h, 3}, h, 3));
  store.add("mscn.polarity.b", Tensor({3}));
  store.add("mscn.intensity.w", xavier_uniform(rng, {h, 3}, h, 3));
  store.add("mscn.intensity.b", Tensor({3}));
}

Var mscn_forward(Graph& g, const ParamStore& store, const MscnConfig& cfg, Var e_total) {
  if (e_total.value().size() == 0 || e_total.value().rows() == 0) {
    fail(ErrorKind::Sequence, "mscn_forward on an empty sequence");
  }
  Var x = pad_rows(e_total, max_width(cfg));
  std::vector<Var> maps;
  maps.reserve(cfg.widths.size());
  for (std::size_t w : cfg.widths) {
    maps.push_back(relu(conv1d_valid(x, g.param(store, conv_param(w, "kernel")), g.param(store, conv_param(w, "bias")))));
  }
  Var features = maps.size() == 1 ? maps[0] : concat_rows(maps);
  diff::LstmVars lstm{g.param(store, "mscn.lstm.wx"), g.param(store, "mscn.lstm.wh"), g.param(store, "mscn.lstm.b")};
  diff::LstmVarState st{g.constant(Tensor({1, cfg.d_h})), g.constant(Tensor({1, cfg.d_h}))};
  const std::size_t steps = features.value().rows();
  for (std::size_t t = 0; t < steps; ++t) st = lstm_step(slice_rows(features, t, t + 1), st, lstm);
  return st.h;
}

Var adaptive_weights(Var s, Var w_a) {
  const Tensor &sv = s.value(), &wv = w_a.value();
  if (wv.rows() != sv.size() || wv.cols() != sv.size()) {
    fail(ErrorKind::Dimension, "adaptive_weights: s " + diff::shape_string(sv.shape()) + ", W_a " +
                                   diff::shape_string(wv.shape()));
  }
  Var z = matmul(s, w_a);
  return softmax_axis(z, z.value().rank() - 1);
}

Var adaptive_sentiment(Var s, Var a) { return hadamard(s, a); }

EmotionLogits emotion_heads(Graph& g, const ParamStore& store, const MscnConfig& cfg, Var s_adaptive) {
  Var x = scale(s_adaptive, head_input_scale(cfg));
  return {add_row_bias(matmul(x, g.param(store, "mscn.polarity.w")), g.param(store, "mscn.polarity.b")),
          add_row_bias(matmul(x, g.param(store, "mscn.intensity.w")), g.param(store, "mscn.intensity.b"))};
}

SentimentVars sentiment(Graph& g, const ParamStore& store, const MscnConfig& cfg, Var e_total) {
  SentimentVars out;
  out.s = mscn_forward(g, store, cfg, e_total);
  out.a = adaptive_weights(out.s, g.param(store, "mscn.w_a"));
  out.s_adaptive = adaptive_sentiment(out.s, out.a);
  auto heads = emotion_heads(g, store, cfg, out.s_adaptive);
  out.polarity_logits = heads.polarity;
  out.intensity_logits = heads.intensity;
  return out;
}

SentimentOutput sentiment(const ParamStore& store, const MscnConfig& cfg, const Tensor& e_total) {
  Graph g;
  auto v = sentiment(g, store, cfg, g.constant(e_total));
  return {v.s.value(), v.a.value(), v.s_adaptive.value(), v.polarity_logits.value(), v.intensity_logits.value()};
}

Tensor mscn_forward(const ParamStore& store, const MscnConfig& cfg, const Tensor& e_total) {
  Graph g;
  return mscn_forward(g, store, cfg, g.constant(e_total)).value();
}

Tensor adaptive_weights(const Tensor& s, const Tensor& w_a) {
  Graph g;
  return adaptive_weights(g.constant(s), g.constant(w_a)).value();
}

Tensor adaptive_sentiment(const Tensor& s, const Tensor& a) { return diff::ops::hadamard(s, a); }

std::pair<Tensor, Tensor> emotion_heads(const Tensor& s_adaptive, const HeadParams& p) {
  const Tensor x = diff::ops::scale(s_adaptive, p.input_scale);
  return {diff::ops::add_row_bias(diff::ops::matmul(x, p.polarity_w), p.polarity_b),
          diff::ops::add_row_bias(diff::ops::matmul(x, p.intensity_w), p.intensity_b)};
}

}  // namespace crisislens::mscn
