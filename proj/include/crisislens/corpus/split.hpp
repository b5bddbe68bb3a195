#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "crisislens/corpus/sample.hpp"
#include "json.hpp"

namespace crisislens::corpus {

struct SplitSpec {
  double train = 0.7;
  double val = 0.15;
  double test = 0.15;
  bool by_user = false;
  std::uint64_t seed = 13;
};

void validate(const SplitSpec& spec);
SplitSpec split_spec_from_json(const nlohmann::json& j, SplitSpec base = {});
nlohmann::ordered_json to_json(const SplitSpec& spec);

struct Splits {
  std::vector<Sample> train;
  std::vector<Sample> val;
  std::vector<Sample> test;
};

/// Seeded shuffle of samples (or of users when `by_user`), then a partition
/// by ratio. Each split keeps the input order.
Splits split(std::span<const Sample> samples, const SplitSpec& spec);

}  // namespace crisislens::corpus
