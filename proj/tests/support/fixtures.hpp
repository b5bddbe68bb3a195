#pragma once

#include <cstdio>
#include <string>
#include <vector>

#include "crisislens/corpus/sample.hpp"
#include "crisislens/diffcore/rng.hpp"
#include "crisislens/embedkb/lexicon.hpp"
#include "crisislens/hgc/social_graph.hpp"

namespace fixtures {

struct SmallCorpus {
  std::vector<crisislens::corpus::Sample> samples;
  crisislens::embedkb::KnowledgeLexicon lexicon;
  crisislens::hgc::SocialGraph graph;
};

// Half crisis, half not; each class has its own cue words, so a bag of
// words separates them. Crisis messages come from u0/u1, the rest from u2/u3.
inline SmallCorpus separable_corpus(std::size_t n, std::uint64_t seed) {
  using namespace crisislens;
  using namespace crisislens::corpus;
  Rng rng(seed);
  const std::vector<std::string> pos_cue{"alpha", "bravo", "charlie"};
  const std::vector<std::string> neg_cue{"delta", "echo", "foxtrot"};
  const std::vector<std::string> filler{"the", "a", "day", "it", "so", "my"};
  SmallCorpus c;
  for (std::size_t i = 0; i < n; ++i) {
    Sample s;
    char id[32];
    std::snprintf(id, sizeof id, "t%04zu", i);
    s.id = id;
    const bool crisis = i % 2 == 0;
    s.user = "u" + std::to_string((crisis ? 0 : 2) + rng.index(2));
    s.timestamp = 1'000'000 + static_cast<std::int64_t>(i) * 3600;
    const std::size_t len = 3 + rng.index(4);
    for (std::size_t k = 0; k < len; ++k) s.tokens.push_back(filler[rng.index(filler.size())]);
    const auto& cues = crisis ? pos_cue : neg_cue;
    s.tokens.insert(s.tokens.begin() + static_cast<std::ptrdiff_t>(rng.index(len + 1)), cues[rng.index(3)]);
    s.labels.crisis = crisis ? 1 : 0;
    s.labels.polarity = crisis ? Polarity::Negative : Polarity::Positive;
    s.labels.intensity = crisis ? Intensity::Moderate : Intensity::Mild;
    s.labels.behavior_risk = crisis ? 1 : 0;
    c.samples.push_back(std::move(s));
  }
  c.lexicon = embedkb::KnowledgeLexicon(embedkb::default_categories(), {{"alpha", "depression"}, {"bravo", "anxiety"}});
  c.graph = hgc::SocialGraph({"u0", "u1", "u2", "u3"}, {{"u0", "u1"}, {"u2", "u3"}, {"u1", "u2"}});
  return c;
}

}  // namespace fixtures
