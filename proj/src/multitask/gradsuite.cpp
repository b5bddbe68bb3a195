#include "crisislens/multitask/gradsuite.hpp"

#include <algorithm>
#include <functional>

#include "crisislens/diffcore/gradcheck.hpp"
#include "crisislens/diffcore/rng.hpp"
#include "crisislens/hgc/hgc.hpp"
#include "crisislens/multitask/loss.hpp"
#include "crisislens/multitask/pipeline.hpp"

namespace crisislens::multitask {

using namespace crisislens::diff;

namespace {

struct Case {
  const char* name;
  std::function<void(ParamStore&)> init;
  ScalarFn f;
};

Tensor random_tensor(Rng& rng, Shape shape, double scale = 1.0) {
  Tensor t(std::move(shape));
  for (auto& v : t.values()) v = scale * rng.normal();
  return t;
}

// Contracting with fixed random weights makes every output coordinate count.
Var contract(Graph& g, Var y, const Tensor& w) { return sum(hadamard(y, g.constant(w))); }

ModelConfig small_model() {
  ModelConfig cfg;
  cfg.embedding.d_model = 6;
  cfg.embedding.d_ph = 4;
  cfg.embedding.encoder_layers = 1;
  cfg.embedding.encoder_heads = 2;
  cfg.mscn.widths = {2, 3};
  cfg.mscn.channels = 4;
  cfg.mscn.d_h = 5;
  cfg.hgc.dims = {4, 3};
  return cfg;
}

std::vector<corpus::Sample> small_messages() {
  const std::vector<std::vector<std::string>> texts{{"i", "feel", "hopeless", "tonight"},
                                                    {"great", "day", "at", "work"},
                                                    {"nobody", "cares", "anymore"},
                                                    {"so", "anxious", "and", "worried", "today"},
                                                    {"lunch", "was", "fine"},
                                                    {"goodbye", "forever"}};
  std::vector<corpus::Sample> out;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    corpus::Sample s;
    s.id = "g" + std::to_string(i);
    s.user = "u" + std::to_string(i % 4);
    s.tokens = texts[i];
    s.labels.crisis = i % 2 == 0 ? 1 : 0;
    s.labels.polarity = s.labels.crisis ? corpus::Polarity::Negative : corpus::Polarity::Positive;
    s.labels.intensity = static_cast<corpus::Intensity>(i % 3);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

std::vector<GradCaseResult> run_grad_suite(std::uint64_t seed, double epsilon) {
  Rng rng(seed);
  std::vector<Case> cases;

  const Tensor w34 = random_tensor(rng, {3, 4}), w35 = random_tensor(rng, {3, 5}), w7 = random_tensor(rng, {1, 7});
  const Tensor w55 = random_tensor(rng, {5, 5}), w26 = random_tensor(rng, {2, 6}), w13 = random_tensor(rng, {1, 3});
  const Tensor w46 = random_tensor(rng, {4, 6}), w43 = random_tensor(rng, {4, 3});
  cases.push_back({"matmul",
                   [&](ParamStore& s) {
                     s.add("a", random_tensor(rng, {3, 6}));
                     s.add("b", random_tensor(rng, {6, 4}));
                   },
                   [&](Graph& g, const ParamStore& s) {
                     return contract(g, matmul(g.param(s, "a"), g.param(s, "b")), w34);
                   }});
  cases.push_back({"matmul_nt",
                   [&](ParamStore& s) {
                     s.add("a", random_tensor(rng, {3, 6}));
                     s.add("b", random_tensor(rng, {5, 6}));
                   },
                   [&](Graph& g, const ParamStore& s) {
                     return contract(g, matmul_nt(g.param(s, "a"), g.param(s, "b")), w35);
                   }});
  cases.push_back({"add_sub_hadamard_scale_affine",
                   [&](ParamStore& s) {
                     s.add("a", random_tensor(rng, {3, 4}));
                     s.add("b", random_tensor(rng, {3, 4}));
                   },
                   [&](Graph& g, const ParamStore& s) {
                     Var a = g.param(s, "a"), b = g.param(s, "b");
                     return contract(g, affine(sub(hadamard(a, b), add(a, scale(b, 2.0))), 0.7, 1.0), w34);
                   }});
  cases.push_back({"relu_sigmoid_tanh",
                   [&](ParamStore& s) { s.add("x", random_tensor(rng, {3, 4})); },
                   [&](Graph& g, const ParamStore& s) {
                     Var x = g.param(s, "x");
                     return contract(g, add(add(relu(x), sigmoid(x)), tanh_act(x)), w34);
                   }});
  cases.push_back({"softmax",
                   [&](ParamStore& s) { s.add("x", random_tensor(rng, {3, 4}, 2.0)); },
                   [&](Graph& g, const ParamStore& s) {
                     Var x = g.param(s, "x");
                     return contract(g, add(softmax_axis(x, 0), softmax_axis(x, 1)), w34);
                   }});
  cases.push_back({"add_row_bias",
                   [&](ParamStore& s) {
                     s.add("x", random_tensor(rng, {3, 4}));
                     s.add("b", random_tensor(rng, {4}));
                   },
                   [&](Graph& g, const ParamStore& s) {
                     return contract(g, add_row_bias(g.param(s, "x"), g.param(s, "b")), w34);
                   }});
  cases.push_back({"conv1d_valid",
                   [&](ParamStore& s) {
                     s.add("seq", random_tensor(rng, {6, 3}));
                     s.add("k", random_tensor(rng, {2, 3, 5}));
                     s.add("b", random_tensor(rng, {5}));
                   },
                   [&](Graph& g, const ParamStore& s) {
                     return contract(g, conv1d_valid(g.param(s, "seq"), g.param(s, "k"), g.param(s, "b")), w55);
                   }});
  cases.push_back({"concat_slice_mean_pad",
                   [&](ParamStore& s) {
                     s.add("a", random_tensor(rng, {2, 3}));
                     s.add("b", random_tensor(rng, {2, 3}));
                   },
                   [&](Graph& g, const ParamStore& s) {
                     Var a = g.param(s, "a"), b = g.param(s, "b");
                     const Var pair[] = {a, b};
                     Var r = pad_rows(concat_rows(pair), 6);
                     Var c = concat_cols(pair);
                     Var m = mean_rows(slice_rows(r, 1, 4));
                     return add(contract(g, slice_cols(c, 0, 6), w26), contract(g, m, w13));
                   }});
  cases.push_back({"gather_rows",
                   [&](ParamStore& s) { s.add("t", random_tensor(rng, {5, 7})); },
                   [&](Graph& g, const ParamStore& s) {
                     const std::vector<std::size_t> ids{3, 1, 3, 0};
                     return contract(g, mean_rows(gather_rows(g.param(s, "t"), ids)), w7);
                   }});
  cases.push_back({"cross_entropy",
                   [&](ParamStore& s) { s.add("z", random_tensor(rng, {4, 3}, 2.0)); },
                   [&](Graph& g, const ParamStore& s) {
                     const std::vector<std::size_t> labels{0, 2, 1, 2};
                     return cross_entropy(g.param(s, "z"), labels);
                   }});
  cases.push_back({"lstm_step",
                   [&](ParamStore& s) {
                     s.add("wx", random_tensor(rng, {4, 12}, 0.5));
                     s.add("wh", random_tensor(rng, {3, 12}, 0.5));
                     s.add("b", random_tensor(rng, {12}, 0.5));
                     s.add("x", random_tensor(rng, {2, 4}));
                   },
                   [&](Graph& g, const ParamStore& s) {
                     LstmVars w{g.param(s, "wx"), g.param(s, "wh"), g.param(s, "b")};
                     Var x = g.param(s, "x");
                     LstmVarState st{g.constant(Tensor(Shape{1, 3})), g.constant(Tensor(Shape{1, 3}))};
                     st = lstm_step(slice_rows(x, 0, 1), st, w);
                     st = lstm_step(slice_rows(x, 1, 2), st, w);
                     return sum(add(st.h, scale(st.c, 0.5)));
                   }});
  cases.push_back({"soft_reward",
                   [&](ParamStore& s) { s.add("z", random_tensor(rng, {5, 1})); },
                   [&](Graph& g, const ParamStore& s) {
                     const std::vector<int> labels{1, 0, 1, 1, 0};
                     return soft_reward(sigmoid(g.param(s, "z")), labels, RewardWeights{});
                   }});
  cases.push_back({"knowledge_fusion",
                   [&](ParamStore& s) {
                     s.add("base", random_tensor(rng, {4, 6}));
                     s.add("ph", random_tensor(rng, {4, 3}));
                     s.add("w_ph", random_tensor(rng, {3, 6}));
                   },
                   [&](Graph& g, const ParamStore& s) {
                     return contract(g, embedkb::fuse(g.param(s, "base"), g.param(s, "ph"), g.param(s, "w_ph"), 0.8),
                                     w46);
                   }});
  const hgc::HgcConfig hcfg{{4, 3}};
  const hgc::SocialGraph graph({"u0", "u1", "u2", "u3"}, {{"u0", "u1"}, {"u1", "u2"}, {"u2", "u3"}});
  const auto adj = hgc::build_hierarchical_adjacency(graph, 2);
  cases.push_back({"hgc_forward",
                   [&](ParamStore& s) {
                     hgc::init_hgc_params(s, hcfg, 5, rng);
                     s.add("h0", random_tensor(rng, {4, 5}));
                   },
                   [&](Graph& g, const ParamStore& s) {
                     const std::vector<double> gates{1.3, 0.6};
                     Var h = hgc::hgc_forward(g.param(s, "h0"), adj, hgc::hgc_layers(g, s, hcfg), gates);
                     return contract(g, h, w43);
                   }});

  // End to end: fused embedding → sentiment network → crisis head and
  // behavior graph → weighted multi-task loss. grad_check perturbs the
  // model's own store, so the closure reads `m` directly.
  const auto messages = small_messages();
  std::vector<std::vector<std::string>> docs;
  for (const auto& s : messages) docs.push_back(s.tokens);
  embedkb::KnowledgeLexicon lexicon(embedkb::default_categories(),
                                    {{"hopeless", "hopelessness"}, {"anxious", "anxiety"}, {"worried", "anxiety"}});
  TrainedModel m = init_model(small_model(), embedkb::build_vocab(docs, 1), lexicon, derive_seed(seed, 1));
  const std::vector<double> gates{1.1, 0.8};
  const ScalarFn end_to_end = [&](Graph& g, const ParamStore& store) {
    std::vector<Var> crisis, pol, inten, rows(graph.size());
    std::vector<std::size_t> yc, yp, yi;
    std::vector<int> yb;
    for (const auto& s : messages) {
      const MessageVars v = forward_message(g, m, s.tokens);
      crisis.push_back(v.crisis_logits);
      pol.push_back(v.sentiment.polarity_logits);
      inten.push_back(v.sentiment.intensity_logits);
      yc.push_back(static_cast<std::size_t>(s.labels.crisis));
      yb.push_back(s.labels.crisis);
      yp.push_back(static_cast<std::size_t>(s.labels.polarity));
      yi.push_back(static_cast<std::size_t>(s.labels.intensity));
      const std::size_t u = graph.require_index(s.user);
      rows[u] = rows[u] ? add(rows[u], node_row(v)) : node_row(v);
    }
    for (auto& r : rows)
      if (!r) r = g.constant(Tensor({1, node_feature_dim(m.config)}));
    Var logits = concat_rows(crisis);
    LossParts parts;
    parts.classification = cross_entropy(logits, yc);
    parts.emotion = add(cross_entropy(concat_rows(pol), yp), cross_entropy(concat_rows(inten), yi));
    parts.reinforcement = reinforcement_loss(slice_cols(softmax_axis(logits, 1), 1, 2), yb, RewardWeights{});
    Var h = hgc::hgc_forward(concat_rows(rows), adj, hgc::hgc_layers(g, store, m.config.hgc), gates);
    const std::vector<std::size_t> risk{1, 1, 0, 0};
    parts.behavior = cross_entropy(hgc::behavior_logits(g, store, h), risk);
    return total_loss(parts, LossWeights{});
  };

  std::vector<GradCaseResult> out;
  for (auto& c : cases) {
    ParamStore store;
    c.init(store);
    const auto report = grad_check(c.f, store, epsilon);
    out.push_back({c.name, report.worst(), report.worst_param()});
  }
  const auto report = grad_check(end_to_end, m.params, epsilon);
  out.push_back({"end_to_end_loss", report.worst(), report.worst_param()});
  return out;
}

double worst_of(const std::vector<GradCaseResult>& results) {
  double w = 0.0;
  for (const auto& r : results) w = std::max(w, r.worst);
  return w;
}

}  // namespace crisislens::multitask
