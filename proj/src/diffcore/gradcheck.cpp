#include "crisislens/diffcore/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "crisislens/error.hpp"

namespace crisislens::diff {

double GradReport::worst() const {
  double w = 0.0;
  for (const auto& [_, e] : max_rel_error) w = std::max(w, e);
  return w;
}

std::string GradReport::worst_param() const {
  std::string name;
  double w = -1.0;
  for (const auto& [n, e] : max_rel_error) {
    if (e > w) {
      w = e;
      name = n;
    }
  }
  return name;
}

double evaluate_scalar(const ScalarFn& f, const ParamStore& params) {
  Graph g;
  Var out = f(g, params);
  if (out.value().size() != 1) {
    fail(ErrorKind::Dimension, "grad_check target is " + shape_string(out.value().shape()) + ", need a scalar");
  }
  const double v = out.value()[0];
  if (!std::isfinite(v)) fail(ErrorKind::Evaluation, "grad_check target evaluated to a non-finite value");
  return v;
}

GradReport grad_check(const ScalarFn& f, ParamStore& params, double epsilon) {
  if (!(epsilon >= 1e-6 && epsilon <= 1e-3)) {
    fail(ErrorKind::Parameter, "grad_check epsilon " + std::to_string(epsilon) + " outside [1e-6, 1e-3]");
  }
  GradMap analytic;
  {
    Graph g;
    Var out;
    try {
      out = f(g, params);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::Numeric) fail(ErrorKind::Evaluation, e.what());
      throw;
    }
    if (out.value().size() != 1 || !std::isfinite(out.value()[0])) {
      fail(ErrorKind::Evaluation, "grad_check target must be a finite scalar");
    }
    g.backward(out);
    analytic = g.param_grads();
  }

  GradReport report;
  report.epsilon = epsilon;
  for (const std::string& name : params.names()) {
    Tensor& value = params.value(name);
    const auto it = analytic.find(name);
    double worst = 0.0;
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double saved = value[i];
      value[i] = saved + epsilon;
      const double up = evaluate_scalar(f, params);
      value[i] = saved - epsilon;
      const double down = evaluate_scalar(f, params);
      value[i] = saved;
      const double numeric = (up - down) / (2.0 * epsilon);
      const double a = it == analytic.end() ? 0.0 : it->second[i];
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
      worst = std::max(worst, std::abs(a - numeric) / denom);
    }
    report.max_rel_error[name] = worst;
  }
  return report;
}

}  // namespace crisislens::diff
