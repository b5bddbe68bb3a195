#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "crisislens/corpus/sample.hpp"
#include "crisislens/embedkb/lexicon.hpp"
#include "crisislens/hgc/social_graph.hpp"
#include "json.hpp"

namespace crisislens::corpus {

struct GenConfig {
  std::size_t n_users = 60;
  std::size_t n_samples = 1200;
  std::uint64_t seed = 7;
  double explicit_rate = 0.25;
  double implicit_rate = 0.3;
  double sarcasm_rate = 0.1;
  double timespan_days = 60.0;
  // Size of the synthetic long-tail filler vocabulary.
  std::size_t vocab_size = 3000;
  double homophily = 0.7;
  std::size_t links_per_user = 2;

  double crisis_rate() const { return explicit_rate + implicit_rate + sarcasm_rate; }
};

void validate(const GenConfig& cfg);
GenConfig gen_config_from_json(const nlohmann::json& j, GenConfig base = {});
nlohmann::ordered_json to_json(const GenConfig& cfg);

struct GeneratedCorpus {
  std::vector<Sample> samples;  // time-ordered
  Provenance provenance;
  embedkb::KnowledgeLexicon lexicon;
  hgc::SocialGraph graph;
  // Term polarity scores for the dictionary baseline; unknown terms score 0.
  std::map<std::string, double> polarity;
};

GeneratedCorpus gen_corpus(const GenConfig& cfg);

inline constexpr const char* kCorpusFile = "corpus.jsonl";
inline constexpr const char* kProvenanceFile = "provenance.jsonl";
inline constexpr const char* kLexiconFile = "lexicon.json";
inline constexpr const char* kGraphFile = "graph.json";
inline constexpr const char* kPolarityFile = "polarity.json";

void write_corpus_dir(const std::filesystem::path& dir, const GeneratedCorpus& c);
GeneratedCorpus read_corpus_dir(const std::filesystem::path& dir);

std::map<std::string, double> load_polarity(const std::filesystem::path& path);

}  // namespace crisislens::corpus
