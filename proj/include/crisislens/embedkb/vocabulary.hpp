#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "crisislens/diffcore/rng.hpp"

namespace crisislens::embedkb {

/// Dense token ids with PAD=0 and UNK=1.
class Vocabulary {
 public:
  static constexpr std::size_t kPad = 0;
  static constexpr std::size_t kUnk = 1;
  static constexpr std::string_view kPadToken = "<pad>";
  static constexpr std::string_view kUnkToken = "<unk>";

  Vocabulary();
  // Rebuild from an id-ordered token list (as serialized).
  explicit Vocabulary(std::vector<std::string> tokens);

  std::size_t size() const { return tokens_.size(); }
  std::size_t id(std::string_view token) const;
  std::optional<std::size_t> find(std::string_view token) const;
  const std::string& token(std::size_t id) const;
  const std::vector<std::string>& tokens() const { return tokens_; }
  std::vector<std::size_t> encode(std::span<const std::string> tokens) const;

  bool operator==(const Vocabulary& other) const { return tokens_ == other.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> ids_;
};

class VocabBuilder {
 public:
  void add(std::span<const std::string> document);
  // Frequency descending, ties lexicographic; tokens seen fewer than
  // `min_count` times fold into UNK.
  Vocabulary build(std::size_t min_count) const;

 private:
  std::map<std::string, std::size_t> counts_;
  std::size_t documents_ = 0;
};

Vocabulary build_vocab(std::span<const std::vector<std::string>> documents, std::size_t min_count);

// Replaces each id by UNK with probability p (training-time noise).
std::vector<std::size_t> word_dropout(std::vector<std::size_t> ids, double p, Rng& rng);

}  // namespace crisislens::embedkb
