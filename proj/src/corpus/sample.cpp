#include "crisislens/corpus/sample.hpp"

#include <fstream>

#include "crisislens/error.hpp"

namespace crisislens::corpus {

namespace {

[[noreturn]] void schema(const std::string& field, const std::string& what) {
  fail(ErrorKind::Schema, "field '" + field + "': " + what);
}

int binary_field(const nlohmann::json& labels, const char* name) {
  const std::string field = std::string("labels.") + name;
  if (!labels.contains(name)) schema(field, "missing");
  const auto& v = labels[name];
  if (!v.is_number_integer() || (v.get<std::int64_t>() != 0 && v.get<std::int64_t>() != 1)) {
    schema(field, "must be 0 or 1");
  }
  return v.get<int>();
}

std::string string_field(const nlohmann::json& j, const char* name, const std::string& field) {
  if (!j.contains(name)) schema(field, "missing");
  if (!j[name].is_string()) schema(field, "must be a string");
  return j[name].get<std::string>();
}

template <class Fn>
void for_each_line(const std::filesystem::path& path, Fn&& fn) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Input, "cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorKind::Parse, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    try {
      fn(j);
    } catch (const Error& e) {
      fail(e.kind(), path.string() + ":" + std::to_string(line_no) + ": " + e.detail());
    }
  }
}

}  // namespace

std::string_view to_string(Mechanism m) {
  switch (m) {
    case Mechanism::Explicit: return "explicit";
    case Mechanism::Implicit: return "implicit";
    case Mechanism::Sarcasm: return "sarcasm";
  }
  return "?";
}

Mechanism parse_mechanism(std::string_view s) {
  for (Mechanism m : kMechanisms)
    if (to_string(m) == s) return m;
  fail(ErrorKind::Schema, "field 'mechanism': unknown value '" + std::string(s) + "'");
}

std::string_view to_string(Polarity p) {
  switch (p) {
    case Polarity::Negative: return "neg";
    case Polarity::Neutral: return "neu";
    case Polarity::Positive: return "pos";
  }
  return "?";
}

std::string_view to_string(Intensity i) {
  switch (i) {
    case Intensity::Mild: return "mild";
    case Intensity::Moderate: return "moderate";
    case Intensity::Strong: return "strong";
  }
  return "?";
}

Polarity parse_polarity(std::string_view s) {
  for (Polarity p : {Polarity::Negative, Polarity::Neutral, Polarity::Positive})
    if (to_string(p) == s) return p;
  schema("labels.polarity", "unknown value '" + std::string(s) + "'");
}

Intensity parse_intensity(std::string_view s) {
  for (Intensity i : {Intensity::Mild, Intensity::Moderate, Intensity::Strong})
    if (to_string(i) == s) return i;
  schema("labels.intensity", "unknown value '" + std::string(s) + "'");
}

void validate(const Sample& s) {
  if (s.id.empty()) schema("id", "empty");
  if (s.user.empty()) schema("user", "empty");
  if (s.timestamp < 0) schema("timestamp", "negative");
  if (s.tokens.empty()) schema("tokens", "empty token list");
  for (const auto& t : s.tokens) {
    if (t.empty()) schema("tokens", "empty token");
    for (char c : t)
      if (c >= 'A' && c <= 'Z') schema("tokens", "token '" + t + "' is not lower-case");
  }
  if (s.labels.crisis != 0 && s.labels.crisis != 1) schema("labels.crisis", "must be 0 or 1");
  if (s.labels.behavior_risk != 0 && s.labels.behavior_risk != 1) schema("labels.behavior_risk", "must be 0 or 1");
}

nlohmann::ordered_json to_json(const Sample& s) {
  nlohmann::ordered_json j;
  j["id"] = s.id;
  j["user"] = s.user;
  j["timestamp"] = s.timestamp;
  j["tokens"] = s.tokens;
  j["labels"] = {{"crisis", s.labels.crisis},
                 {"polarity", to_string(s.labels.polarity)},
                 {"intensity", to_string(s.labels.intensity)},
                 {"behavior_risk", s.labels.behavior_risk}};
  return j;
}

Sample sample_from_json(const nlohmann::json& j) {
  if (!j.is_object()) fail(ErrorKind::Schema, "sample must be a JSON object");
  Sample s;
  s.id = string_field(j, "id", "id");
  s.user = string_field(j, "user", "user");
  if (!j.contains("timestamp")) schema("timestamp", "missing");
  if (!j["timestamp"].is_number_integer()) schema("timestamp", "must be an integer");
  s.timestamp = j["timestamp"].get<std::int64_t>();
  if (!j.contains("tokens") || !j["tokens"].is_array()) schema("tokens", "must be an array");
  for (const auto& t : j["tokens"]) {
    if (!t.is_string()) schema("tokens", "tokens must be strings");
    s.tokens.push_back(t.get<std::string>());
  }
  if (!j.contains("labels") || !j["labels"].is_object()) schema("labels", "must be an object");
  const auto& l = j["labels"];
  s.labels.crisis = binary_field(l, "crisis");
  s.labels.polarity = parse_polarity(string_field(l, "polarity", "labels.polarity"));
  s.labels.intensity = parse_intensity(string_field(l, "intensity", "labels.intensity"));
  s.labels.behavior_risk = binary_field(l, "behavior_risk");
  validate(s);
  return s;
}

std::vector<Sample> load_corpus(const std::filesystem::path& path) {
  std::vector<Sample> out;
  for_each_line(path, [&](const nlohmann::json& j) { out.push_back(sample_from_json(j)); });
  return out;
}

void save_corpus(const std::filesystem::path& path, std::span<const Sample> samples) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Input, "cannot write " + path.string());
  for (const auto& s : samples) {
    validate(s);
    out << to_json(s).dump() << '\n';
  }
}

Provenance load_provenance(const std::filesystem::path& path) {
  Provenance prov;
  for_each_line(path, [&](const nlohmann::json& j) {
    if (!j.is_object()) fail(ErrorKind::Schema, "provenance entry must be an object");
    const std::string id = string_field(j, "id", "id");
    prov[id] = parse_mechanism(string_field(j, "mechanism", "mechanism"));
  });
  return prov;
}

void save_provenance(const std::filesystem::path& path, std::span<const Sample> samples, const Provenance& prov) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Input, "cannot write " + path.string());
  // sample order, so the sidecar lines up with the corpus file
  for (const auto& s : samples) {
    auto it = prov.find(s.id);
    if (it == prov.end()) continue;
    nlohmann::ordered_json j;
    j["id"] = s.id;
    j["mechanism"] = to_string(it->second);
    out << j.dump() << '\n';
  }
}

std::optional<Mechanism> mechanism_of(const Provenance& prov, const std::string& id) {
  auto it = prov.find(id);
  if (it == prov.end()) return std::nullopt;
  return it->second;
}

}  // namespace crisislens::corpus
