#include "crisislens/diffcore/params.hpp"

#include <cmath>

#include "crisislens/error.hpp"

namespace crisislens::diff {

Tensor& ParamStore::add(const std::string& name, Tensor init) {
  if (params_.contains(name)) fail(ErrorKind::Parameter, "duplicate parameter '" + name + "'");
  if (!init.all_finite()) fail(ErrorKind::Numeric, "parameter '" + name + "' initialized with non-finite values");
  Parameter p;
  p.adam.m = Tensor(init.shape());
  p.adam.v = Tensor(init.shape());
  p.value = std::move(init);
  return params_.emplace(name, std::move(p)).first->second.value;
}

Tensor& ParamStore::value(const std::string& name) {
  auto it = params_.find(name);
  if (it == params_.end()) fail(ErrorKind::Parameter, "unknown parameter '" + name + "'");
  return it->second.value;
}

const Tensor& ParamStore::value(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) fail(ErrorKind::Parameter, "unknown parameter '" + name + "'");
  return it->second.value;
}

AdamState& ParamStore::adam(const std::string& name) {
  auto it = params_.find(name);
  if (it == params_.end()) fail(ErrorKind::Parameter, "unknown parameter '" + name + "'");
  return it->second.adam;
}

const AdamState& ParamStore::adam(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) fail(ErrorKind::Parameter, "unknown parameter '" + name + "'");
  return it->second.adam;
}

std::vector<std::string> ParamStore::names() const {
  std::vector<std::string> out;
  out.reserve(params_.size());
  for (const auto& [name, _] : params_) out.push_back(name);
  return out;
}

std::size_t ParamStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& [_, p] : params_) n += p.value.size();
  return n;
}

bool ParamStore::operator==(const ParamStore& other) const {
  if (params_.size() != other.params_.size()) return false;
  for (const auto& [name, p] : params_) {
    auto it = other.params_.find(name);
    if (it == other.params_.end() || !(it->second.value == p.value)) return false;
  }
  return true;
}

void adam_step(ParamStore& store, const GradMap& grads, const AdamConfig& cfg) {
  for (const auto& [name, grad] : grads) {
    Tensor& value = store.value(name);
    AdamState& st = store.adam(name);
    if (grad.shape() != value.shape()) {
      fail(ErrorKind::Dimension, "gradient for '" + name + "' has shape " + shape_string(grad.shape()) +
                                     ", parameter is " + shape_string(value.shape()));
    }
    ++st.step;
    const double t = static_cast<double>(st.step);
    const double c1 = 1.0 - std::pow(cfg.beta1, t);
    const double c2 = 1.0 - std::pow(cfg.beta2, t);
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double g = grad[i];
      st.m[i] = cfg.beta1 * st.m[i] + (1.0 - cfg.beta1) * g;
      st.v[i] = cfg.beta2 * st.v[i] + (1.0 - cfg.beta2) * g * g;
      const double mhat = st.m[i] / c1;
      const double vhat = st.v[i] / c2;
      value[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
  }
}

}  // namespace crisislens::diff
