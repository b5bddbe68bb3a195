#pragma once

#include <functional>
#include <map>
#include <string>

#include "crisislens/diffcore/autodiff.hpp"

namespace crisislens::diff {

struct GradReport {
  // Per parameter: max over coordinates of |analytic − numeric| / max(|analytic|, |numeric|, 1e-8).
  std::map<std::string, double> max_rel_error;
  double epsilon = 0.0;

  double worst() const;
  std::string worst_param() const;
};

// Builds a scalar on a fresh graph from parameters drawn out of the store.
using ScalarFn = std::function<Var(Graph&, const ParamStore&)>;

// Central finite differences over every coordinate of every parameter.
GradReport grad_check(const ScalarFn& f, ParamStore& params, double epsilon = 1e-4);

// Just evaluates f once on a throwaway graph.
double evaluate_scalar(const ScalarFn& f, const ParamStore& params);

}  // namespace crisislens::diff
