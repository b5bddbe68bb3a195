#include "crisislens/embedkb/lexicon.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>

#include "crisislens/error.hpp"

namespace crisislens::embedkb {
namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

}  // namespace

std::vector<std::string> default_categories() {
  return {"depression", "anxiety", "suicidal-ideation", "self-harm", "hopelessness", std::string(kNeutralCategory)};
}

KnowledgeLexicon::KnowledgeLexicon() : KnowledgeLexicon(default_categories(), {}) {}

KnowledgeLexicon::KnowledgeLexicon(std::vector<std::string> categories, const std::map<std::string, std::string>& terms)
    : categories_(std::move(categories)) {
  std::set<std::string> seen;
  for (const auto& c : categories_) {
    if (!seen.insert(c).second) fail(ErrorKind::Schema, "duplicate lexicon category '" + c + "'");
  }
  const auto neutral = category_index(kNeutralCategory);
  if (!neutral) fail(ErrorKind::Schema, "lexicon has no 'neutral' category");
  neutral_ = *neutral;
  for (const auto& [term, category] : terms) {
    const auto id = category_index(category);
    if (!id) fail(ErrorKind::Schema, "term '" + term + "' maps to unknown category '" + category + "'");
    const std::string key = lower(term);
    if (auto [it, inserted] = terms_.emplace(key, *id); !inserted && it->second != *id) {
      fail(ErrorKind::Schema, "term '" + key + "' maps to two categories");
    }
  }
}

std::optional<std::size_t> KnowledgeLexicon::category_index(std::string_view name) const {
  for (std::size_t i = 0; i < categories_.size(); ++i) {
    if (categories_[i] == name) return i;
  }
  return std::nullopt;
}

std::size_t KnowledgeLexicon::category_of(std::string_view term) const {
  auto it = terms_.find(std::string(term));
  return it == terms_.end() ? neutral_ : it->second;
}

std::map<std::string, std::string> KnowledgeLexicon::term_names() const {
  std::map<std::string, std::string> out;
  for (const auto& [term, id] : terms_) out.emplace(term, categories_[id]);
  return out;
}

KnowledgeLexicon KnowledgeLexicon::from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("categories") || !j.contains("terms") || !j["categories"].is_array() ||
      !j["terms"].is_object()) {
    fail(ErrorKind::Schema, "lexicon JSON needs a 'categories' array and a 'terms' object");
  }
  std::vector<std::string> categories;
  for (const auto& c : j["categories"]) {
    if (!c.is_string()) fail(ErrorKind::Schema, "lexicon category names must be strings");
    categories.push_back(c.get<std::string>());
  }
  std::map<std::string, std::string> terms;
  for (const auto& [term, category] : j["terms"].items()) {
    if (!category.is_string()) fail(ErrorKind::Schema, "lexicon term '" + term + "' must map to a category name");
    terms.emplace(term, category.get<std::string>());
  }
  return KnowledgeLexicon(std::move(categories), terms);
}

KnowledgeLexicon KnowledgeLexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Input, "cannot open lexicon file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Parse, path.string() + ": " + e.what());
  }
  return from_json(j);
}

nlohmann::ordered_json KnowledgeLexicon::to_json() const {
  nlohmann::ordered_json j;
  j["categories"] = categories_;
  nlohmann::ordered_json terms = nlohmann::ordered_json::object();
  for (const auto& [term, id] : terms_) terms[term] = categories_[id];
  j["terms"] = std::move(terms);
  return j;
}

void KnowledgeLexicon::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Input, "cannot write lexicon file " + path.string());
  out << to_json().dump(2) << '\n';
}

}  // namespace crisislens::embedkb
