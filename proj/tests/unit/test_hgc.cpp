#include <cmath>
#include <filesystem>
#include <numeric>

#include "crisislens/diffcore/gradcheck.hpp"
#include "crisislens/error.hpp"
#include "crisislens/hgc/bprm.hpp"
#include "crisislens/hgc/hgc.hpp"
#include "crisislens/hgc/reward.hpp"
#include "crisislens/hgc/social_graph.hpp"
#include "doctest.h"

using namespace crisislens;
using namespace crisislens::hgc;
using diff::Tensor;

namespace {

Tensor random_tensor(Rng& rng, diff::Shape shape, double scale = 1.0) {
  Tensor t(std::move(shape));
  for (auto& v : t.values()) v = scale * rng.normal();
  return t;
}

SocialGraph random_graph(Rng& rng, std::size_t n, double p) {
  std::vector<std::string> users;
  for (std::size_t i = 0; i < n; ++i) users.push_back("u" + std::to_string(i));
  std::vector<std::pair<std::string, std::string>> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (rng.bernoulli(p)) edges.emplace_back(users[i], users[j]);
  return SocialGraph(users, edges);
}

HgcParams random_params(Rng& rng, std::size_t d0, const std::vector<std::size_t>& dims) {
  HgcParams p;
  std::size_t in = d0;
  for (std::size_t d : dims) {
    p.weights.push_back(random_tensor(rng, {in, d}, 0.5));
    p.biases.push_back(random_tensor(rng, {d}, 0.1));
    p.gates.push_back(rng.uniform(0.5, 1.5));
    in = d;
  }
  return p;
}

}  // namespace

TEST_CASE("social graph construction and errors") {
  SocialGraph g({"a", "b", "c"}, {{"b", "a"}, {"a", "b"}, {"c", "b"}});
  CHECK(g.edges().size() == 2);
  CHECK(g.has_edge(0, 1));
  CHECK(g.has_edge(2, 1));
  CHECK_FALSE(g.has_edge(0, 2));
  CHECK_THROWS_AS(SocialGraph({"a", "a"}, {}), Error);
  CHECK_THROWS_AS(SocialGraph({"a", "b"}, {{"a", "a"}}), Error);
  try {
    SocialGraph({"a"}, {{"a", "zz"}});
    FAIL("expected graph error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Graph);
  }

  const auto path = std::filesystem::temp_directory_path() / "crisislens_graph_test.json";
  g.save(path);
  const SocialGraph back = SocialGraph::load(path);
  CHECK(back.users() == g.users());
  CHECK(back.edges() == g.edges());
  std::filesystem::remove(path);
  CHECK_THROWS_AS(SocialGraph::from_json(nlohmann::json{{"users", {"a"}}}), Error);
}

TEST_CASE("build_hierarchical_adjacency examples") {
  const auto single = build_hierarchical_adjacency(SocialGraph({"x"}, {}), 3);
  REQUIRE(single.levels.size() == 3);
  for (const auto& l : single.levels) CHECK(l == Tensor::matrix({{1.0}}));

  const auto lonely = build_hierarchical_adjacency(SocialGraph({"a", "b", "c", "d"}, {}), 2);
  for (const auto& l : lonely.levels) CHECK(l == Tensor::identity(4));

  const auto pair = build_hierarchical_adjacency(SocialGraph({"a", "b"}, {{"a", "b"}}), 1);
  CHECK(pair.levels[0] == Tensor::matrix({{0.5, 0.5}, {0.5, 0.5}}));

  // path a-b-c: level 1 is the normalized square, worked by hand
  const auto path = build_hierarchical_adjacency(SocialGraph({"a", "b", "c"}, {{"a", "b"}, {"b", "c"}}), 2);
  const Tensor expected = Tensor::matrix(
      {{5.0 / 12, 5.0 / 12, 2.0 / 12}, {5.0 / 18, 8.0 / 18, 5.0 / 18}, {2.0 / 12, 5.0 / 12, 5.0 / 12}});
  CHECK(diff::max_abs_diff(path.levels[1], expected) < 1e-15);

  try {
    build_hierarchical_adjacency(SocialGraph({"a"}, {}), 0);
    FAIL("expected parameter error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Parameter);
  }
}

TEST_CASE("adjacency levels are row-stochastic") {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const SocialGraph g = random_graph(rng, 1 + rng.index(25), rng.uniform(0.0, 0.6));
    const auto adj = build_hierarchical_adjacency(g, 1 + rng.index(4));
    for (const auto& l : adj.levels) {
      for (std::size_t i = 0; i < l.rows(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < l.cols(); ++j) {
          CHECK(l.at(i, j) >= 0.0);
          s += l.at(i, j);
        }
        CHECK(std::abs(s - 1.0) <= 1e-9);
      }
    }
  }
}

TEST_CASE("hgc_forward examples") {
  Rng rng(2);
  HierarchicalAdjacency ident{{Tensor::identity(3), Tensor::identity(3)}};
  HgcParams p;
  p.weights = {Tensor::identity(4), Tensor::identity(4)};
  p.biases = {Tensor({4}), Tensor({4})};
  p.gates = {1.0, 1.0};
  Tensor h0 = random_tensor(rng, {3, 4});
  for (auto& v : h0.values()) v = std::abs(v);
  CHECK(hgc_forward(h0, ident, p) == h0);

  HgcParams off = random_params(rng, 4, {5, 3});
  off.biases = {Tensor({5}), Tensor({3})};
  off.gates = {0.0, 0.0};
  CHECK(hgc_forward(random_tensor(rng, {3, 4}), ident, off) == Tensor({3, 3}));

  // K=1 on the two-node level: A·H = [[.5,1],[.5,1]], ·W = [[3.5,5],..], +B, ·0.5
  const auto pair = build_hierarchical_adjacency(SocialGraph({"a", "b"}, {{"a", "b"}}), 1);
  HgcParams hand;
  hand.weights = {Tensor::matrix({{1, 2}, {3, 4}})};
  hand.biases = {Tensor::vector({0.1, -0.2})};
  hand.gates = {0.5};
  const Tensor out = hgc_forward(Tensor::matrix({{1, 0}, {0, 2}}), pair, hand);
  CHECK(diff::max_abs_diff(out, Tensor::matrix({{1.8, 2.4}, {1.8, 2.4}})) < 1e-15);

  HgcParams bad = hand;
  bad.weights = {Tensor({3, 2})};
  CHECK_THROWS_AS(hgc_forward(Tensor({2, 2}), pair, bad), Error);
  CHECK_THROWS_AS(hgc_forward(Tensor({3, 2}), pair, hand), Error);
  bad = hand;
  bad.gates = {2.5};
  CHECK_THROWS_AS(hgc_forward(Tensor({2, 2}), pair, bad), Error);
}

TEST_CASE("hgc_forward is permutation-equivariant") {
  Rng rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 2 + rng.index(10);
    const SocialGraph g = random_graph(rng, n, 0.35);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    const SocialGraph pg = g.permuted(order);
    const HgcParams p = random_params(rng, 3, {4, 2});
    const Tensor h0 = random_tensor(rng, {n, 3});
    Tensor ph0({n, 3});
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < 3; ++c) ph0.at(r, c) = h0.at(order[r], c);
    const Tensor out = hgc_forward(h0, build_hierarchical_adjacency(g, 2), p);
    const Tensor pout = hgc_forward(ph0, build_hierarchical_adjacency(pg, 2), p);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < 2; ++c) CHECK(std::abs(pout.at(r, c) - out.at(order[r], c)) < 1e-12);
  }
}

TEST_CASE("hgc_forward gradients") {
  Rng rng(8);
  const SocialGraph g = random_graph(rng, 5, 0.5);
  const auto adj = build_hierarchical_adjacency(g, 2);
  const HgcConfig cfg{.dims = {4, 3}};
  diff::ParamStore store;
  init_hgc_params(store, cfg, 3, rng);
  store.add("h0", random_tensor(rng, {5, 3}));
  const std::vector<double> gates{0.9, 1.3};
  const Tensor mix = random_tensor(rng, {5, 3});
  const std::vector<std::size_t> labels{0, 1, 1, 0, 1};
  const diff::ScalarFn f = [&](diff::Graph& gr, const diff::ParamStore& s) {
    const auto layers = hgc_layers(gr, s, cfg);
    diff::Var h = hgc_forward(gr.param(s, "h0"), adj, layers, gates);
    diff::Var loss = diff::sum(diff::hadamard(h, gr.constant(mix)));
    return diff::add(loss, diff::cross_entropy(behavior_logits(gr, s, h), labels));
  };
  const auto report = diff::grad_check(f, store);
  CHECK_MESSAGE(report.worst() <= 1e-3, report.worst_param());
}

TEST_CASE("node_features") {
  SocialGraph g({"a", "b", "c"}, {{"a", "b"}});
  const std::vector<MessageFeatures> msgs{
      {"a", 100, Tensor::row({1.0, 2.0}), Tensor::row({0.5})},
      {"b", 90, Tensor::row({1.0, -1.0}), Tensor::row({3.0})},
      {"b", 95, Tensor::row({0.0, 4.0}), Tensor::row({-1.0})},
      {"b", 10, Tensor::row({100.0, 100.0}), Tensor::row({100.0})},  // outside window
      {"a", 200, Tensor::row({100.0, 100.0}), Tensor::row({100.0})},  // after t_ref
  };
  const Tensor f = node_features(g, msgs, 50.0, 100);
  CHECK(f == Tensor::matrix({{1.0, 2.0, 0.5}, {0.5, 1.5, 1.0}, {0.0, 0.0, 0.0}}));

  const std::vector<MessageFeatures> stranger{{"zz", 1, Tensor::row({1.0}), Tensor::row({1.0})}};
  try {
    node_features(g, stranger, 10.0, 1);
    FAIL("expected graph error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Graph);
  }
  CHECK_THROWS_AS(node_features(g, msgs, 0.0, 100), Error);
}

TEST_CASE("compute_reward examples") {
  const RewardWeights thirds;
  const std::vector<int> y{1, 0, 1, 1, 0};
  CHECK(compute_reward(y, y, thirds) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(compute_reward(std::vector<int>{0, 0, 0, 0, 0}, y, thirds) == 0.0);

  // P = 1, R = 0.5
  const std::vector<int> pred{1, 0, 0, 0, 0};
  const std::vector<int> lab{1, 1, 0, 0, 0};
  const BinaryCounts c = count_binary(pred, lab);
  CHECK(c.precision() == 1.0);
  CHECK(c.recall() == 0.5);
  CHECK(c.f1() == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(compute_reward(pred, lab, thirds) == doctest::Approx(0.7222222222222222).epsilon(1e-12));

  try {
    compute_reward(std::vector<int>{1}, y, thirds);
    FAIL("expected input error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Input);
  }
  CHECK_THROWS_AS(validate(RewardWeights{0, 0, 0}), Error);
  CHECK_THROWS_AS(validate(RewardWeights{-1, 1, 1}), Error);
}

TEST_CASE("compute_reward stays within bounds") {
  Rng rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    const RewardWeights w{rng.uniform(), rng.uniform(), rng.uniform() + 0.01};
    const std::size_t n = rng.index(12);
    std::vector<int> p(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = rng.bernoulli(0.5);
      y[i] = rng.bernoulli(0.4);
    }
    const double r = compute_reward(p, y, w);
    CHECK(r >= 0.0);
    CHECK(r <= w.total() + 1e-12);
  }
}

TEST_CASE("bprm_update") {
  Rng rng(3);
  const std::vector<double> start{1.0, 1.0};
  // both candidates worse than the incumbent
  const RewardEval peak = [](std::span<const double> g) { return -std::abs(g[0] - 1.0) - std::abs(g[1] - 1.0); };
  const BprmResult same = bprm_update(start, std::nullopt, peak, 0.1, rng);
  CHECK_FALSE(same.accepted);
  CHECK(same.gates == start);
  CHECK(same.incumbent == 0.0);

  // candidates are clamped before evaluation
  std::vector<std::vector<double>> seen;
  const RewardEval record = [&](std::span<const double> g) {
    seen.emplace_back(g.begin(), g.end());
    return g[0];
  };
  const BprmResult edge = bprm_update(std::vector<double>{1.95, 0.02}, std::nullopt, record, 0.3, rng);
  for (const auto& g : seen)
    for (double v : g) CHECK((v >= kGateMin && v <= kGateMax));
  CHECK(edge.accepted == (std::max(edge.reward_plus, edge.reward_minus) > 1.95));

  // reward increasing in g0: g0 never decreases over accepted steps and the
  // incumbent never falls
  const RewardEval rising = [](std::span<const double> g) { return g[0]; };
  std::vector<double> gates{0.3, 1.0, 1.7};
  std::optional<double> inc;
  Rng walk(99);
  int accepted = 0;
  for (int i = 0; i < 200; ++i) {
    const BprmResult r = bprm_update(gates, inc, rising, 0.05, walk);
    if (inc) CHECK(r.incumbent >= *inc);
    if (r.accepted) {
      CHECK(r.gates[0] > gates[0]);
      ++accepted;
    }
    gates = r.gates;
    inc = r.incumbent;
  }
  CHECK(accepted > 0);
  CHECK(gates[0] == doctest::Approx(2.0));

  CHECK_THROWS_AS(bprm_update(start, std::nullopt, peak, 0.0, rng), Error);

  Rng a(7), b(7);
  const auto ra = bprm_update(start, std::nullopt, rising, 0.1, a);
  const auto rb = bprm_update(start, std::nullopt, rising, 0.1, b);
  CHECK(ra.gates == rb.gates);
}
