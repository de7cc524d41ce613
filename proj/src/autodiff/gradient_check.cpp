#include "csg/autodiff/gradient_check.hpp"

#include <algorithm>
#include <cmath>

CSG_NAMESPACE_BEGIN
namespace ad {
namespace {

GradientCheckReport check(const std::function<Tensor()>& f, std::vector<std::pair<std::string, Tensor>> inputs, double h) {
  for (auto& [name, t] : inputs) t.zero_grad();
  const Tensor base = f();
  base.backward();
  GradientCheckReport report;
  report.value = base.item();
  for (auto& [name, t] : inputs) {
    const std::vector<Real> analytic = t.has_grad() ? std::vector<Real>(t.grad().begin(), t.grad().end())
                                                    : std::vector<Real>(t.size(), Real(0));
    auto values = t.data();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const Real saved = values[i];
      values[i] = static_cast<Real>(saved + h);
      double up;
      double down;
      {
        NoGradGuard guard;
        up = f().item();
        values[i] = static_cast<Real>(saved - h);
        down = f().item();
      }
      values[i] = saved;
      const double numeric = (up - down) / (2 * h);
      const double a = analytic[i];
      const double err = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-6});
      ++report.coordinates;
      if (err > report.max_rel_error) {
        report.max_rel_error = err;
        report.worst = name + "[" + std::to_string(i) + "]";
        report.worst_analytic = a;
        report.worst_numeric = numeric;
      }
    }
  }
  return report;
}

}  // namespace

GradientCheckReport gradient_check(const std::function<Tensor()>& f, std::vector<Tensor> inputs, double h) {
  std::vector<std::pair<std::string, Tensor>> named;
  for (std::size_t i = 0; i < inputs.size(); ++i) named.emplace_back("input" + std::to_string(i), inputs[i]);
  return check(f, std::move(named), h);
}

GradientCheckReport gradient_check(const std::function<Tensor()>& f, ParamSet& params, double h) {
  std::vector<std::pair<std::string, Tensor>> named;
  for (auto& [name, t] : params) named.emplace_back(name, t);
  return check(f, std::move(named), h);
}

}  // namespace ad
CSG_NAMESPACE_END
