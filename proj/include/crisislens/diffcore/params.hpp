#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "crisislens/diffcore/tensor.hpp"

namespace crisislens::diff {

struct AdamState {
  Tensor m;
  Tensor v;
  std::uint64_t step = 0;
};

struct Parameter {
  Tensor value;
  AdamState adam;
};

using GradMap = std::map<std::string, Tensor>;

/// Named trainable tensors with their optimizer state. Iteration order is the
/// lexicographic name order, which every consumer (optimizer, serializer)
/// relies on for reproducibility.
class ParamStore {
 public:
  Tensor& add(const std::string& name, Tensor init);
  bool contains(const std::string& name) const { return params_.contains(name); }
  Tensor& value(const std::string& name);
  const Tensor& value(const std::string& name) const;
  AdamState& adam(const std::string& name);
  const AdamState& adam(const std::string& name) const;

  std::vector<std::string> names() const;
  std::size_t scalar_count() const;

  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }
  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }

  bool operator==(const ParamStore&) const;

 private:
  std::map<std::string, Parameter> params_;
};

struct AdamConfig {
  double lr = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Bias-corrected Adam. Parameters absent from `grads` are left untouched
// (their step count does not advance).
void adam_step(ParamStore& store, const GradMap& grads, const AdamConfig& cfg);

}  // namespace crisislens::diff
