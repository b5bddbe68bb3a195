#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace crisislens::embedkb {

inline constexpr std::string_view kNeutralCategory = "neutral";

std::vector<std::string> default_categories();

/// Term → psychological category map. Every term resolves to exactly one
/// category; unmapped surface forms resolve to `neutral`.
class KnowledgeLexicon {
 public:
  KnowledgeLexicon();
  KnowledgeLexicon(std::vector<std::string> categories, const std::map<std::string, std::string>& terms);

  static KnowledgeLexicon from_json(const nlohmann::json& j);
  static KnowledgeLexicon load(const std::filesystem::path& path);
  nlohmann::ordered_json to_json() const;
  void save(const std::filesystem::path& path) const;

  const std::vector<std::string>& categories() const { return categories_; }
  std::size_t category_count() const { return categories_.size(); }
  std::size_t neutral_id() const { return neutral_; }
  std::optional<std::size_t> category_index(std::string_view name) const;

  std::size_t category_of(std::string_view term) const;
  bool contains(std::string_view term) const { return terms_.contains(std::string(term)); }
  // Term → category name.
  std::map<std::string, std::string> term_names() const;
  const std::map<std::string, std::size_t>& terms() const { return terms_; }

  bool operator==(const KnowledgeLexicon&) const = default;

 private:
  std::vector<std::string> categories_;
  std::map<std::string, std::size_t> terms_;
  std::size_t neutral_ = 0;
};

}  // namespace crisislens::embedkb
