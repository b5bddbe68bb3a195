#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "crisislens/mscn/mscn.hpp"
#include "json.hpp"

namespace crisislens::corpus {

using mscn::Intensity;
using mscn::Polarity;

enum class Mechanism { Explicit, Implicit, Sarcasm };

inline constexpr Mechanism kMechanisms[] = {Mechanism::Explicit, Mechanism::Implicit, Mechanism::Sarcasm};

std::string_view to_string(Mechanism m);
Mechanism parse_mechanism(std::string_view s);
std::string_view to_string(Polarity p);
std::string_view to_string(Intensity i);
Polarity parse_polarity(std::string_view s);
Intensity parse_intensity(std::string_view s);

struct Labels {
  int crisis = 0;
  Polarity polarity = Polarity::Neutral;
  Intensity intensity = Intensity::Mild;
  int behavior_risk = 0;

  bool operator==(const Labels&) const = default;
};

struct Sample {
  std::string id;
  std::string user;
  std::int64_t timestamp = 0;
  std::vector<std::string> tokens;
  Labels labels;

  bool operator==(const Sample&) const = default;
};

// id → planted mechanism, crisis samples only.
using Provenance = std::map<std::string, Mechanism>;

void validate(const Sample& s);
nlohmann::ordered_json to_json(const Sample& s);
// Schema errors name the offending field.
Sample sample_from_json(const nlohmann::json& j);

std::vector<Sample> load_corpus(const std::filesystem::path& path);
void save_corpus(const std::filesystem::path& path, std::span<const Sample> samples);

Provenance load_provenance(const std::filesystem::path& path);
void save_provenance(const std::filesystem::path& path, std::span<const Sample> samples, const Provenance& prov);

std::optional<Mechanism> mechanism_of(const Provenance& prov, const std::string& id);

}  // namespace crisislens::corpus
