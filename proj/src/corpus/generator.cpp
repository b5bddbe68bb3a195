#include "crisislens/corpus/generator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "crisislens/diffcore/rng.hpp"
#include "crisislens/error.hpp"

namespace crisislens::corpus {

namespace {

constexpr std::int64_t kEpochBase = 1'700'000'000;

struct CategoryTerms {
  const char* category;
  double polarity;
  std::vector<std::string> terms;
};

const std::vector<CategoryTerms>& crisis_terms() {
  static const std::vector<CategoryTerms> terms{
      {"depression", -0.6, {"sad", "depressed", "miserable", "worthless", "crying", "gloomy", "unhappy", "lonely",
                            "despair", "sorrow", "melancholy", "dejected", "tearful", "grief", "heartbroken",
                            "downcast"}},
      {"anxiety", -0.5, {"anxious", "panic", "nervous", "worried", "scared", "terrified", "dread", "restless",
                         "uneasy", "frantic", "jittery", "tense", "fearful", "overwhelmed", "shaking", "paranoid"}},
      {"suicidal-ideation", -0.9, {"suicide", "suicidal", "die", "death", "overdose", "noose", "lethal", "unalive",
                                   "deathwish", "endmylife", "perish", "wanttodie", "killmyself", "nopoint",
                                   "bettergone", "lastbreath"}},
      {"self-harm", -0.8, {"cutting", "razor", "bleeding", "scars", "burning", "bruises", "selfharm", "blade",
                           "wounds", "hurtmyself", "scratching", "pills", "harming", "relapse", "bandages", "cuts"}},
      {"hopelessness", -0.7, {"hopeless", "helpless", "trapped", "useless", "doomed", "defeated", "broken", "lost",
                              "failure", "meaningless", "cursed", "stuck", "ruined", "abandoned", "desperate",
                              "powerless"}},
  };
  return terms;
}

// Implicit cue: one word from each set in the same message.
const std::vector<std::string> kImplicitP{"nobody", "anymore", "burden", "invisible",
                                          "fading", "heavy", "drained", "distant"};
const std::vector<std::string> kImplicitQ{"tonight", "goodbye", "forever", "gone",
                                          "away", "letters", "final", "sleep"};
const std::vector<std::string> kSarcasmMarkers{"totally", "sure", "yeah", "obviously", "whatever", "clearly"};
const std::vector<std::string> kPositive{"happy", "great", "wonderful", "amazing", "fantastic", "love",
                                         "excited", "awesome", "perfect", "glad", "fun", "brilliant"};
const std::vector<std::string> kComplaint{"annoyed", "boring", "rude", "annoying", "slow",
                                          "noisy", "expensive", "delayed", "awful", "irritated"};
const std::vector<std::string> kCommon{"i", "the", "and", "today", "my", "it", "was", "so", "just", "at",
                                       "work", "home", "with", "a", "to", "of", "have", "this", "been", "really",
                                       "about", "day", "week", "friend", "after", "in", "on", "we", "they", "what"};
const std::vector<std::string> kSyllables{"ka", "lo", "mi", "ren", "tu", "sha", "vel", "dor", "pim", "qua",
                                          "zin", "bre", "nox", "fae", "gul", "yor", "tep", "wix"};

class Zipf {
 public:
  Zipf(std::size_t n, double exponent) {
    double acc = 0.0;
    for (std::size_t k = 1; k <= n; ++k) {
      acc += 1.0 / std::pow(static_cast<double>(k), exponent);
      cdf_.push_back(acc);
    }
    for (double& c : cdf_) c /= acc;
  }
  std::size_t draw(Rng& rng) const {
    const double u = rng.uniform();
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    return std::min<std::size_t>(static_cast<std::size_t>(it - cdf_.begin()), cdf_.size() - 1);
  }

 private:
  std::vector<double> cdf_;
};

template <class T>
const T& pick(Rng& rng, const std::vector<T>& v) {
  return v[rng.index(v.size())];
}

constexpr double kVariantShare = 0.4;

// Social-media spellings: letter elongation and intensifier prefixes.
std::vector<std::string> spelling_variants(const std::string& w) {
  const std::string last(1, w.back());
  return {w + last, w + last + last, "so" + w, "sooo" + w, "too" + w, "really" + w};
}

std::vector<std::string> make_long_tail(std::size_t n, Rng& rng) {
  std::set<std::string> reserved(kCommon.begin(), kCommon.end());
  for (const auto& c : crisis_terms()) {
    for (const auto& t : c.terms) {
      reserved.insert(t);
      for (const auto& v : spelling_variants(t)) reserved.insert(v);
    }
  }
  for (const auto* v : {&kImplicitP, &kImplicitQ, &kSarcasmMarkers, &kPositive, &kComplaint})
    reserved.insert(v->begin(), v->end());
  std::vector<std::string> out;
  std::set<std::string> seen;
  while (out.size() < n) {
    std::string w;
    const std::size_t parts = 2 + rng.index(2);
    for (std::size_t i = 0; i < parts; ++i) w += pick(rng, kSyllables);
    if (reserved.contains(w) || !seen.insert(w).second) continue;
    out.push_back(w);
  }
  return out;
}

void insert_random(std::vector<std::string>& tokens, const std::string& word, Rng& rng) {
  tokens.insert(tokens.begin() + static_cast<std::ptrdiff_t>(rng.index(tokens.size() + 1)), word);
}

double rate_field(const nlohmann::json& j, const char* name, double fallback) {
  if (!j.contains(name)) return fallback;
  if (!j[name].is_number()) fail(ErrorKind::Config, std::string("'") + name + "' must be a number");
  return j[name].get<double>();
}

std::size_t count_field(const nlohmann::json& j, const char* name, std::size_t fallback) {
  if (!j.contains(name)) return fallback;
  if (!j[name].is_number_unsigned()) fail(ErrorKind::Config, std::string("'") + name + "' must be a nonnegative integer");
  return j[name].get<std::size_t>();
}

}  // namespace

void validate(const GenConfig& cfg) {
  if (cfg.n_users == 0 || cfg.n_samples == 0) fail(ErrorKind::Config, "n_users and n_samples must be positive");
  for (double r : {cfg.explicit_rate, cfg.implicit_rate, cfg.sarcasm_rate}) {
    if (!(r >= 0.0 && r <= 1.0)) fail(ErrorKind::Config, "cue rates must lie in [0,1]");
  }
  if (cfg.crisis_rate() > 1.0 + 1e-12) fail(ErrorKind::Config, "cue rates sum to more than 1");
  if (!(cfg.timespan_days > 0.0)) fail(ErrorKind::Config, "timespan_days must be positive");
  if (cfg.vocab_size == 0) fail(ErrorKind::Config, "vocab_size must be positive");
  if (!(cfg.homophily >= 0.0 && cfg.homophily <= 1.0)) fail(ErrorKind::Config, "homophily must lie in [0,1]");
}

GenConfig gen_config_from_json(const nlohmann::json& j, GenConfig base) {
  if (!j.is_object()) fail(ErrorKind::Config, "generator config must be an object");
  base.n_users = count_field(j, "n_users", base.n_users);
  base.n_samples = count_field(j, "n_samples", base.n_samples);
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) fail(ErrorKind::Config, "'seed' must be a nonnegative integer");
    base.seed = j["seed"].get<std::uint64_t>();
  }
  base.explicit_rate = rate_field(j, "explicit_rate", base.explicit_rate);
  base.implicit_rate = rate_field(j, "implicit_rate", base.implicit_rate);
  base.sarcasm_rate = rate_field(j, "sarcasm_rate", base.sarcasm_rate);
  base.timespan_days = rate_field(j, "timespan_days", base.timespan_days);
  base.vocab_size = count_field(j, "vocab_size", base.vocab_size);
  base.homophily = rate_field(j, "homophily", base.homophily);
  base.links_per_user = count_field(j, "links_per_user", base.links_per_user);
  return base;
}

nlohmann::ordered_json to_json(const GenConfig& cfg) {
  nlohmann::ordered_json j;
  j["n_users"] = cfg.n_users;
  j["n_samples"] = cfg.n_samples;
  j["seed"] = cfg.seed;
  j["explicit_rate"] = cfg.explicit_rate;
  j["implicit_rate"] = cfg.implicit_rate;
  j["sarcasm_rate"] = cfg.sarcasm_rate;
  j["timespan_days"] = cfg.timespan_days;
  j["vocab_size"] = cfg.vocab_size;
  j["homophily"] = cfg.homophily;
  j["links_per_user"] = cfg.links_per_user;
  return j;
}

GeneratedCorpus gen_corpus(const GenConfig& cfg) {
  validate(cfg);
  Rng rng(cfg.seed);
  Rng graph_rng(derive_seed(cfg.seed, 0x67726170));

  GeneratedCorpus out;
  std::map<std::string, std::string> lex_terms;
  std::vector<std::string> all_terms, variants;
  for (const auto& c : crisis_terms()) {
    for (const auto& t : c.terms) {
      lex_terms[t] = c.category;
      out.polarity[t] = c.polarity;
      all_terms.push_back(t);
      for (const auto& v : spelling_variants(t)) {
        lex_terms[v] = c.category;
        out.polarity[v] = c.polarity;
        variants.push_back(v);
      }
    }
  }
  for (const auto& w : kPositive) out.polarity[w] = 0.6;
  for (const auto& w : kComplaint) out.polarity[w] = -0.4;
  out.lexicon = embedkb::KnowledgeLexicon(embedkb::default_categories(), lex_terms);

  // Base terms follow a shuffled Zipf ranking; spelling variants form a
  // flat tail that training data covers only partly.
  rng.shuffle(all_terms);
  const Zipf term_zipf(all_terms.size(), 1.1);
  auto draw_term = [&] {
    return rng.bernoulli(kVariantShare) ? pick(rng, variants) : all_terms[term_zipf.draw(rng)];
  };
  const std::vector<std::string> tail = make_long_tail(cfg.vocab_size, rng);
  const Zipf tail_zipf(tail.size(), 1.0);

  std::vector<std::string> users;
  char buf[32];
  for (std::size_t u = 0; u < cfg.n_users; ++u) {
    std::snprintf(buf, sizeof buf, "user%03zu", u);
    users.emplace_back(buf);
  }
  const double r = cfg.crisis_rate();
  std::vector<std::size_t> order(cfg.n_users);
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(order);
  const auto n_risky = static_cast<std::size_t>(std::llround(r * static_cast<double>(cfg.n_users)));
  std::vector<double> user_rate(cfg.n_users, r / 2.0);
  for (std::size_t i = 0; i < n_risky; ++i) user_rate[order[i]] = r + (1.0 - r) / 2.0;

  const double span = cfg.timespan_days * 86400.0;
  std::vector<Sample> samples;
  std::vector<std::optional<Mechanism>> mechs;
  for (std::size_t n = 0; n < cfg.n_samples; ++n) {
    Sample s;
    const std::size_t u = rng.index(cfg.n_users);
    s.user = users[u];
    s.timestamp = kEpochBase + static_cast<std::int64_t>(std::floor(rng.uniform() * span));
    const std::size_t len = 5 + rng.index(8);
    for (std::size_t i = 0; i < len; ++i) {
      s.tokens.push_back(rng.bernoulli(0.4) ? tail[tail_zipf.draw(rng)] : pick(rng, kCommon));
    }

    std::optional<Mechanism> mech;
    if (r > 0.0 && rng.bernoulli(std::min(1.0, user_rate[u]))) {
      const double x = rng.uniform() * r;
      mech = x < cfg.explicit_rate                        ? Mechanism::Explicit
             : x < cfg.explicit_rate + cfg.implicit_rate ? Mechanism::Implicit
                                                          : Mechanism::Sarcasm;
      if (*mech == Mechanism::Implicit && cfg.implicit_rate == 0.0) mech = Mechanism::Sarcasm;
      if (*mech == Mechanism::Sarcasm && cfg.sarcasm_rate == 0.0) mech = Mechanism::Explicit;
    }

    s.labels.crisis = mech ? 1 : 0;
    if (!mech) {
      const double kind = rng.uniform();
      if (kind < 0.5) {
        s.labels.polarity = Polarity::Neutral;
        s.labels.intensity = Intensity::Mild;
      } else if (kind < 0.75) {
        s.labels.polarity = Polarity::Positive;
        s.labels.intensity = Intensity::Mild;
        const std::size_t k = 1 + rng.index(2);
        for (std::size_t i = 0; i < k; ++i) insert_random(s.tokens, pick(rng, kPositive), rng);
      } else {
        s.labels.polarity = Polarity::Negative;
        s.labels.intensity = Intensity::Moderate;
        const std::size_t k = 1 + rng.index(2);
        for (std::size_t i = 0; i < k; ++i) insert_random(s.tokens, pick(rng, kComplaint), rng);
      }
      // decoy: half of an implicit pair on its own
      if (rng.bernoulli(0.3)) insert_random(s.tokens, pick(rng, rng.bernoulli(0.5) ? kImplicitP : kImplicitQ), rng);
    } else {
      s.labels.polarity = Polarity::Negative;
      switch (*mech) {
        case Mechanism::Explicit: {
          const std::size_t k = rng.bernoulli(0.6) ? 1 : 2;
          for (std::size_t i = 0; i < k; ++i) insert_random(s.tokens, draw_term(), rng);
          s.labels.intensity = k == 1 ? Intensity::Moderate : Intensity::Strong;
          // explicit messages often share the implicit vocabulary too
          if (rng.bernoulli(0.5)) {
            insert_random(s.tokens, pick(rng, kImplicitP), rng);
            insert_random(s.tokens, pick(rng, kImplicitQ), rng);
          }
          break;
        }
        case Mechanism::Implicit:
          insert_random(s.tokens, pick(rng, kImplicitP), rng);
          insert_random(s.tokens, pick(rng, kImplicitQ), rng);
          s.labels.intensity = Intensity::Mild;
          break;
        case Mechanism::Sarcasm: {
          insert_random(s.tokens, pick(rng, kPositive), rng);
          if (rng.bernoulli(0.5)) insert_random(s.tokens, pick(rng, kPositive), rng);
          insert_random(s.tokens, pick(rng, kSarcasmMarkers), rng);
          s.labels.intensity = Intensity::Moderate;
          break;
        }
      }
    }
    samples.push_back(std::move(s));
    mechs.push_back(mech);
  }

  std::vector<std::size_t> by_time(samples.size());
  for (std::size_t i = 0; i < by_time.size(); ++i) by_time[i] = i;
  std::stable_sort(by_time.begin(), by_time.end(),
                   [&](std::size_t a, std::size_t b) { return samples[a].timestamp < samples[b].timestamp; });

  std::vector<std::size_t> crisis_count(cfg.n_users, 0), total_count(cfg.n_users, 0);
  for (std::size_t k = 0; k < by_time.size(); ++k) {
    Sample& s = samples[by_time[k]];
    std::snprintf(buf, sizeof buf, "s%06zu", k);
    s.id = buf;
    if (mechs[by_time[k]]) out.provenance[s.id] = *mechs[by_time[k]];
    const std::size_t u = std::stoul(s.user.substr(4));
    ++total_count[u];
    crisis_count[u] += static_cast<std::size_t>(s.labels.crisis);
  }
  std::vector<int> risk(cfg.n_users, 0);
  for (std::size_t u = 0; u < cfg.n_users; ++u) {
    risk[u] = total_count[u] > 0 && 2 * crisis_count[u] > total_count[u] ? 1 : 0;
  }
  for (std::size_t k : by_time) {
    Sample s = std::move(samples[k]);
    s.labels.behavior_risk = risk[std::stoul(s.user.substr(4))];
    out.samples.push_back(std::move(s));
  }

  // Homophilous wiring: each user links to `links_per_user` partners, drawn
  // from its own risk group with probability `homophily`.
  std::vector<std::size_t> groups[2];
  for (std::size_t u = 0; u < cfg.n_users; ++u) groups[risk[u]].push_back(u);
  std::vector<std::pair<std::string, std::string>> edges;
  if (cfg.n_users > 1) {
    for (std::size_t u = 0; u < cfg.n_users; ++u) {
      for (std::size_t l = 0; l < cfg.links_per_user; ++l) {
        const bool same = graph_rng.bernoulli(cfg.homophily);
        const auto& pool = groups[same ? risk[u] : 1 - risk[u]];
        std::size_t v = u;
        if (pool.size() > (same ? 1u : 0u)) {
          while (v == u) v = pool[graph_rng.index(pool.size())];
        } else {
          while (v == u) v = graph_rng.index(cfg.n_users);
        }
        edges.emplace_back(users[u], users[v]);
      }
    }
  }
  out.graph = hgc::SocialGraph(users, edges);
  return out;
}

void write_corpus_dir(const std::filesystem::path& dir, const GeneratedCorpus& c) {
  std::filesystem::create_directories(dir);
  save_corpus(dir / kCorpusFile, c.samples);
  save_provenance(dir / kProvenanceFile, c.samples, c.provenance);
  c.lexicon.save(dir / kLexiconFile);
  c.graph.save(dir / kGraphFile);
  nlohmann::ordered_json pol = nlohmann::ordered_json::object();
  for (const auto& [term, v] : c.polarity) pol[term] = v;
  std::ofstream out(dir / kPolarityFile, std::ios::binary);
  if (!out) fail(ErrorKind::Input, "cannot write " + (dir / kPolarityFile).string());
  out << pol.dump() << '\n';
}

std::map<std::string, double> load_polarity(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Input, "cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Parse, path.string() + ": " + e.what());
  }
  if (!j.is_object()) fail(ErrorKind::Schema, path.string() + ": polarity table must be an object");
  std::map<std::string, double> out;
  for (const auto& [term, v] : j.items()) {
    if (!v.is_number()) fail(ErrorKind::Schema, path.string() + ": polarity of '" + term + "' must be a number");
    out[term] = v.get<double>();
  }
  return out;
}

GeneratedCorpus read_corpus_dir(const std::filesystem::path& dir) {
  GeneratedCorpus c;
  c.samples = load_corpus(dir / kCorpusFile);
  if (std::filesystem::exists(dir / kProvenanceFile)) c.provenance = load_provenance(dir / kProvenanceFile);
  c.lexicon = embedkb::KnowledgeLexicon::load(dir / kLexiconFile);
  c.graph = hgc::SocialGraph::load(dir / kGraphFile);
  if (std::filesystem::exists(dir / kPolarityFile)) c.polarity = load_polarity(dir / kPolarityFile);
  return c;
}

}  // namespace crisislens::corpus
