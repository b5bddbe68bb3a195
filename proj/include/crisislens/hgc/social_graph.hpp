#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "json.hpp"

namespace crisislens::hgc {

/// Undirected user graph. Edges are stored once as (lo, hi) index pairs in
/// ascending order; self-edges are rejected.
class SocialGraph {
 public:
  SocialGraph() = default;
  SocialGraph(std::vector<std::string> users, const std::vector<std::pair<std::string, std::string>>& edges);

  static SocialGraph from_json(const nlohmann::json& j);
  static SocialGraph load(const std::filesystem::path& path);
  nlohmann::ordered_json to_json() const;
  void save(const std::filesystem::path& path) const;

  std::size_t size() const { return users_.size(); }
  const std::vector<std::string>& users() const { return users_; }
  const std::vector<std::pair<std::size_t, std::size_t>>& edges() const { return edges_; }
  std::optional<std::size_t> index_of(const std::string& user) const;
  std::size_t require_index(const std::string& user) const;
  bool has_edge(std::size_t a, std::size_t b) const;

  // Same graph with users reordered: position p holds old user order[p].
  SocialGraph permuted(const std::vector<std::size_t>& order) const;

 private:
  std::vector<std::string> users_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::pair<std::size_t, std::size_t>> edges_;
};

}  // namespace crisislens::hgc
