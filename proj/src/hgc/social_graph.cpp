#include "crisislens/hgc/social_graph.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "crisislens/error.hpp"

namespace crisislens::hgc {

SocialGraph::SocialGraph(std::vector<std::string> users, const std::vector<std::pair<std::string, std::string>>& edges)
    : users_(std::move(users)) {
  for (std::size_t i = 0; i < users_.size(); ++i) {
    if (!index_.emplace(users_[i], i).second) fail(ErrorKind::Graph, "duplicate user '" + users_[i] + "'");
  }
  std::set<std::pair<std::size_t, std::size_t>> unique;
  for (const auto& [a, b] : edges) {
    const std::size_t ia = require_index(a), ib = require_index(b);
    if (ia == ib) fail(ErrorKind::Graph, "self-edge on user '" + a + "'");
    unique.emplace(std::min(ia, ib), std::max(ia, ib));
  }
  edges_.assign(unique.begin(), unique.end());
}

std::optional<std::size_t> SocialGraph::index_of(const std::string& user) const {
  auto it = index_.find(user);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t SocialGraph::require_index(const std::string& user) const {
  auto idx = index_of(user);
  if (!idx) fail(ErrorKind::Graph, "unknown user '" + user + "'");
  return *idx;
}

bool SocialGraph::has_edge(std::size_t a, std::size_t b) const {
  return std::binary_search(edges_.begin(), edges_.end(), std::make_pair(std::min(a, b), std::max(a, b)));
}

SocialGraph SocialGraph::permuted(const std::vector<std::size_t>& order) const {
  if (order.size() != users_.size()) fail(ErrorKind::Graph, "permutation size mismatch");
  // new position p holds old user order[p]
  std::vector<std::string> users;
  for (std::size_t p : order) users.push_back(users_.at(p));
  std::vector<std::pair<std::string, std::string>> edges;
  for (const auto& [a, b] : edges_) edges.emplace_back(users_[a], users_[b]);
  return SocialGraph(std::move(users), edges);
}

SocialGraph SocialGraph::from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("users") || !j["users"].is_array() || !j.contains("edges") ||
      !j["edges"].is_array()) {
    fail(ErrorKind::Schema, "graph JSON needs 'users' and 'edges' arrays");
  }
  std::vector<std::string> users;
  for (const auto& u : j["users"]) {
    if (!u.is_string()) fail(ErrorKind::Schema, "graph user ids must be strings");
    users.push_back(u.get<std::string>());
  }
  std::vector<std::pair<std::string, std::string>> edges;
  for (const auto& e : j["edges"]) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_string() || !e[1].is_string()) {
      fail(ErrorKind::Schema, "graph edges must be [user, user] pairs");
    }
    edges.emplace_back(e[0].get<std::string>(), e[1].get<std::string>());
  }
  return SocialGraph(std::move(users), edges);
}

SocialGraph SocialGraph::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Input, "cannot open graph file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Parse, path.string() + ": " + e.what());
  }
  return from_json(j);
}

nlohmann::ordered_json SocialGraph::to_json() const {
  nlohmann::ordered_json j;
  j["users"] = users_;
  nlohmann::ordered_json edges = nlohmann::ordered_json::array();
  for (const auto& [a, b] : edges_) edges.push_back({users_[a], users_[b]});
  j["edges"] = std::move(edges);
  return j;
}

void SocialGraph::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Input, "cannot write graph file " + path.string());
  out << to_json().dump() << '\n';
}

}  // namespace crisislens::hgc
