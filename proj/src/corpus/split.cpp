#include "crisislens/corpus/split.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "crisislens/diffcore/rng.hpp"
#include "crisislens/error.hpp"

namespace crisislens::corpus {

void validate(const SplitSpec& spec) {
  for (double r : {spec.train, spec.val, spec.test}) {
    if (!(r >= 0.0 && r <= 1.0)) fail(ErrorKind::Split, "split ratios must lie in [0,1]");
  }
  if (std::abs(spec.train + spec.val + spec.test - 1.0) > 1e-9) fail(ErrorKind::Split, "split ratios must sum to 1");
}

SplitSpec split_spec_from_json(const nlohmann::json& j, SplitSpec base) {
  if (!j.is_object()) fail(ErrorKind::Config, "split config must be an object");
  auto num = [&](const char* name, double& field) {
    if (!j.contains(name)) return;
    if (!j[name].is_number()) fail(ErrorKind::Config, std::string("'") + name + "' must be a number");
    field = j[name].get<double>();
  };
  num("train", base.train);
  num("val", base.val);
  num("test", base.test);
  if (j.contains("by_user")) {
    if (!j["by_user"].is_boolean()) fail(ErrorKind::Config, "'by_user' must be a boolean");
    base.by_user = j["by_user"].get<bool>();
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) fail(ErrorKind::Config, "'seed' must be a nonnegative integer");
    base.seed = j["seed"].get<std::uint64_t>();
  }
  return base;
}

nlohmann::ordered_json to_json(const SplitSpec& spec) {
  nlohmann::ordered_json j;
  j["train"] = spec.train;
  j["val"] = spec.val;
  j["test"] = spec.test;
  j["by_user"] = spec.by_user;
  j["seed"] = spec.seed;
  return j;
}

Splits split(std::span<const Sample> samples, const SplitSpec& spec) {
  validate(spec);
  // unit = sample index, or user rank when splitting by user
  std::vector<std::size_t> unit_of(samples.size());
  std::size_t n_units = samples.size();
  if (spec.by_user) {
    std::map<std::string, std::size_t> users;
    for (const auto& s : samples) users.emplace(s.user, 0);
    std::size_t k = 0;
    for (auto& [u, idx] : users) idx = k++;
    for (std::size_t i = 0; i < samples.size(); ++i) unit_of[i] = users.at(samples[i].user);
    n_units = users.size();
  } else {
    for (std::size_t i = 0; i < samples.size(); ++i) unit_of[i] = i;
  }

  const auto n_train = static_cast<std::size_t>(std::llround(spec.train * static_cast<double>(n_units)));
  const auto n_val = std::min(n_units - std::min(n_train, n_units),
                              static_cast<std::size_t>(std::llround(spec.val * static_cast<double>(n_units))));
  const std::size_t n_test = n_units - std::min(n_units, n_train + n_val);
  const char* what = spec.by_user ? "users" : "samples";
  if ((spec.train > 0 && n_train == 0) || (spec.val > 0 && n_val == 0) || (spec.test > 0 && n_test == 0)) {
    fail(ErrorKind::Split, "too few " + std::string(what) + " (" + std::to_string(n_units) +
                               ") for non-empty splits");
  }

  std::vector<std::size_t> order(n_units);
  for (std::size_t i = 0; i < n_units; ++i) order[i] = i;
  Rng rng(spec.seed);
  rng.shuffle(order);
  std::vector<int> bucket(n_units);
  for (std::size_t p = 0; p < n_units; ++p) bucket[order[p]] = p < n_train ? 0 : p < n_train + n_val ? 1 : 2;

  Splits out;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    switch (bucket[unit_of[i]]) {
      case 0: out.train.push_back(samples[i]); break;
      case 1: out.val.push_back(samples[i]); break;
      default: out.test.push_back(samples[i]); break;
    }
  }
  return out;
}

}  // namespace crisislens::corpus
