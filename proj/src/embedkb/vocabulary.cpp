#include "crisislens/embedkb/vocabulary.hpp"

#include <algorithm>

#include "crisislens/error.hpp"

namespace crisislens::embedkb {

Vocabulary::Vocabulary() : Vocabulary(std::vector<std::string>{std::string(kPadToken), std::string(kUnkToken)}) {}

Vocabulary::Vocabulary(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  if (tokens_.size() < 2 || tokens_[kPad] != kPadToken || tokens_[kUnk] != kUnkToken) {
    fail(ErrorKind::Vocabulary, "vocabulary must start with <pad>, <unk>");
  }
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!ids_.emplace(tokens_[i], i).second) fail(ErrorKind::Vocabulary, "duplicate token '" + tokens_[i] + "'");
  }
}

std::optional<std::size_t> Vocabulary::find(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

std::size_t Vocabulary::id(std::string_view token) const { return find(token).value_or(kUnk); }

const std::string& Vocabulary::token(std::size_t id) const {
  if (id >= tokens_.size()) {
    fail(ErrorKind::Vocabulary, "token id " + std::to_string(id) + " outside vocabulary of " +
                                    std::to_string(tokens_.size()));
  }
  return tokens_[id];
}

std::vector<std::size_t> Vocabulary::encode(std::span<const std::string> tokens) const {
  std::vector<std::size_t> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(id(t));
  return out;
}

void VocabBuilder::add(std::span<const std::string> document) {
  ++documents_;
  for (const auto& t : document) ++counts_[t];
}

Vocabulary VocabBuilder::build(std::size_t min_count) const {
  if (documents_ == 0) fail(ErrorKind::Corpus, "cannot build a vocabulary from an empty corpus");
  std::vector<std::pair<std::string, std::size_t>> kept;
  for (const auto& [token, count] : counts_) {
    if (count >= min_count && token != Vocabulary::kPadToken && token != Vocabulary::kUnkToken) {
      kept.emplace_back(token, count);
    }
  }
  std::stable_sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> tokens{std::string(Vocabulary::kPadToken), std::string(Vocabulary::kUnkToken)};
  for (auto& [token, _] : kept) tokens.push_back(token);
  return Vocabulary(std::move(tokens));
}

std::vector<std::size_t> word_dropout(std::vector<std::size_t> ids, double p, Rng& rng) {
  if (p <= 0.0) return ids;
  for (auto& id : ids) {
    if (rng.bernoulli(p)) id = Vocabulary::kUnk;
  }
  return ids;
}

Vocabulary build_vocab(std::span<const std::vector<std::string>> documents, std::size_t min_count) {
  VocabBuilder builder;
  for (const auto& d : documents) builder.add(d);
  return builder.build(min_count);
}

}  // namespace crisislens::embedkb
