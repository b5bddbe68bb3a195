#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "crisislens/corpus/generator.hpp"
#include "crisislens/corpus/split.hpp"
#include "crisislens/error.hpp"
#include "doctest.h"

using namespace crisislens;
using namespace crisislens::corpus;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("crisislens_corpus_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::Input;
}

GenConfig small_cfg() {
  GenConfig cfg;
  cfg.n_users = 12;
  cfg.n_samples = 300;
  cfg.seed = 5;
  return cfg;
}

}  // namespace

TEST_CASE("sample json round-trip and validation") {
  Sample s{"s1", "u1", 42, {"i", "feel", "fine"}, {1, Polarity::Negative, Intensity::Strong, 1}};
  CHECK(sample_from_json(nlohmann::json::parse(to_json(s).dump())) == s);

  auto j = nlohmann::json::parse(to_json(s).dump());
  j["labels"]["intensity"] = "extreme";
  try {
    sample_from_json(j);
    FAIL("expected schema error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Schema);
    CHECK(std::string(e.what()).find("labels.intensity") != std::string::npos);
  }
  j = nlohmann::json::parse(to_json(s).dump());
  j["labels"]["crisis"] = 2;
  CHECK(kind_of([&] { sample_from_json(j); }) == ErrorKind::Schema);
  j = nlohmann::json::parse(to_json(s).dump());
  j["tokens"] = nlohmann::json::array();
  CHECK(kind_of([&] { sample_from_json(j); }) == ErrorKind::Schema);
  j["tokens"] = {"Upper"};
  CHECK(kind_of([&] { sample_from_json(j); }) == ErrorKind::Schema);
  j = nlohmann::json::parse(to_json(s).dump());
  j["timestamp"] = -1;
  CHECK(kind_of([&] { sample_from_json(j); }) == ErrorKind::Schema);
}

TEST_CASE("load_corpus files") {
  const fs::path dir = temp_dir("load");
  const std::vector<Sample> samples{
      {"a", "u1", 1, {"x"}, {0, Polarity::Neutral, Intensity::Mild, 0}},
      {"b", "u2", 2, {"y", "z"}, {1, Polarity::Negative, Intensity::Moderate, 1}},
  };
  save_corpus(dir / "c.jsonl", samples);
  CHECK(load_corpus(dir / "c.jsonl") == samples);

  std::ofstream(dir / "empty.jsonl").close();
  CHECK(load_corpus(dir / "empty.jsonl").empty());

  {
    std::ofstream bad(dir / "bad.jsonl");
    bad << to_json(samples[0]).dump() << "\n{not json\n";
  }
  try {
    load_corpus(dir / "bad.jsonl");
    FAIL("expected parse error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Parse);
    CHECK(std::string(e.what()).find(":2:") != std::string::npos);
  }
  CHECK(kind_of([&] { load_corpus(dir / "missing.jsonl"); }) == ErrorKind::Input);
  fs::remove_all(dir);
}

TEST_CASE("gen_corpus with no cues has no crisis samples") {
  GenConfig cfg = small_cfg();
  cfg.explicit_rate = cfg.implicit_rate = cfg.sarcasm_rate = 0.0;
  const auto c = gen_corpus(cfg);
  CHECK(c.samples.size() == cfg.n_samples);
  for (const auto& s : c.samples) {
    CHECK(s.labels.crisis == 0);
    CHECK(s.labels.behavior_risk == 0);
  }
  CHECK(c.provenance.empty());
}

TEST_CASE("explicit rate 1 plants a lexicon term in every sample") {
  GenConfig cfg = small_cfg();
  cfg.explicit_rate = 1.0;
  cfg.implicit_rate = cfg.sarcasm_rate = 0.0;
  const fs::path dir = temp_dir("explicit");
  write_corpus_dir(dir, gen_corpus(cfg));
  // scan written files against the written lexicon
  const auto lex = embedkb::KnowledgeLexicon::load(dir / kLexiconFile);
  const auto samples = load_corpus(dir / kCorpusFile);
  REQUIRE(samples.size() == cfg.n_samples);
  for (const auto& s : samples) {
    std::size_t hits = 0;
    for (const auto& t : s.tokens) hits += lex.contains(t) ? 1 : 0;
    CHECK(hits >= 1);
    CHECK(s.labels.crisis == 1);
  }
  fs::remove_all(dir);
}

TEST_CASE("gen_corpus structure") {
  const GenConfig cfg = small_cfg();
  const auto c = gen_corpus(cfg);
  std::set<std::string> ids;
  std::map<std::string, std::pair<int, int>> per_user;
  for (std::size_t i = 0; i < c.samples.size(); ++i) {
    const auto& s = c.samples[i];
    validate(s);
    CHECK(ids.insert(s.id).second);
    if (i > 0) CHECK(c.samples[i - 1].timestamp <= s.timestamp);
    CHECK(c.graph.index_of(s.user).has_value());
    // exactly one tag per crisis sample, none otherwise
    CHECK(c.provenance.contains(s.id) == (s.labels.crisis == 1));
    bool has_lex = false;
    for (const auto& t : s.tokens) has_lex = has_lex || c.lexicon.contains(t);
    const auto mech = mechanism_of(c.provenance, s.id);
    CHECK(has_lex == (mech == Mechanism::Explicit));
    if (mech == Mechanism::Implicit) CHECK(s.labels.intensity == Intensity::Mild);
    if (mech == Mechanism::Explicit) CHECK(s.labels.intensity != Intensity::Mild);
    auto& [crisis, total] = per_user[s.user];
    crisis += s.labels.crisis;
    ++total;
  }
  for (const auto& s : c.samples) {
    const auto [crisis, total] = per_user[s.user];
    CHECK(s.labels.behavior_risk == (2 * crisis > total ? 1 : 0));
  }
  std::set<Mechanism> seen;
  for (const auto& [id, m] : c.provenance) seen.insert(m);
  CHECK(seen.size() == 3);

  GenConfig bad = cfg;
  bad.explicit_rate = 0.6;
  bad.implicit_rate = 0.6;
  CHECK(kind_of([&] { gen_corpus(bad); }) == ErrorKind::Config);
}

TEST_CASE("gen_corpus is byte-identical under a seed") {
  const fs::path a = temp_dir("det_a"), b = temp_dir("det_b");
  write_corpus_dir(a, gen_corpus(small_cfg()));
  write_corpus_dir(b, gen_corpus(small_cfg()));
  for (const char* f : {kCorpusFile, kProvenanceFile, kLexiconFile, kGraphFile, kPolarityFile}) {
    CHECK_MESSAGE(slurp(a / f) == slurp(b / f), f);
  }
  const auto back = read_corpus_dir(a);
  const auto orig = gen_corpus(small_cfg());
  CHECK(back.samples == orig.samples);
  CHECK(back.provenance == orig.provenance);
  CHECK(back.lexicon == orig.lexicon);
  CHECK(back.graph.edges() == orig.graph.edges());
  CHECK(back.polarity == orig.polarity);

  GenConfig other = small_cfg();
  other.seed = 6;
  write_corpus_dir(b, gen_corpus(other));
  CHECK(slurp(a / kCorpusFile) != slurp(b / kCorpusFile));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("split") {
  const auto c = gen_corpus(small_cfg());
  const Splits all = split(c.samples, SplitSpec{1.0, 0.0, 0.0, false, 1});
  CHECK(all.train == c.samples);
  CHECK(all.val.empty());
  CHECK(all.test.empty());

  const SplitSpec spec;
  const Splits s1 = split(c.samples, spec);
  const Splits s2 = split(c.samples, spec);
  CHECK(s1.train == s2.train);
  CHECK(s1.val == s2.val);
  CHECK(s1.test == s2.test);
  CHECK(s1.train.size() + s1.val.size() + s1.test.size() == c.samples.size());
  std::set<std::string> ids;
  for (const auto* part : {&s1.train, &s1.val, &s1.test})
    for (const auto& s : *part) CHECK(ids.insert(s.id).second);
  CHECK(ids.size() == c.samples.size());
  CHECK(s1.train.size() == 210);

  SplitSpec by_user = spec;
  by_user.by_user = true;
  const Splits u = split(c.samples, by_user);
  const std::vector<const std::vector<Sample>*> parts{&u.train, &u.val, &u.test};
  for (std::size_t a = 0; a < 3; ++a)
    for (std::size_t b = 0; b < 3; ++b) {
      if (a == b) continue;
      for (const auto& x : *parts[a])
        for (const auto& y : *parts[b]) CHECK(x.user != y.user);
    }
  CHECK(u.train.size() + u.val.size() + u.test.size() == c.samples.size());

  const std::vector<Sample> two(c.samples.begin(), c.samples.begin() + 2);
  CHECK(kind_of([&] { split(two, spec); }) == ErrorKind::Split);
  CHECK(kind_of([&] { split(c.samples, SplitSpec{0.5, 0.5, 0.5, false, 1}); }) == ErrorKind::Split);
}
