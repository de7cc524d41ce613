#include "csg/autodiff/optimizer.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

CSG_NAMESPACE_BEGIN
namespace ad {

Real Optimizer::step(ParamSet& params) {
  double sq = 0;
  for (const auto& [name, t] : params) {
    if (!t.has_grad()) continue;
    const auto g = t.grad();
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (!std::isfinite(g[i])) {
        std::ostringstream msg;
        msg << "optimizer: non-finite gradient in '" << name << "' " << shape_string(t.shape()) << " at flat index " << i
            << " (value " << g[i] << ", step " << steps_ << ")";
        throw std::runtime_error(msg.str());
      }
      sq += static_cast<double>(g[i]) * static_cast<double>(g[i]);
    }
  }
  const Real norm = static_cast<Real>(std::sqrt(sq));
  Real clip = 1;
  if (config_.max_grad_norm > 0 && norm > config_.max_grad_norm) clip = config_.max_grad_norm / norm;

  ++steps_;
  const Real lr = config_.lr;
  const Real eps = config_.eps;
  for (auto& [name, t] : params) {
    if (!t.has_grad()) continue;
    const auto g = t.grad();
    auto p = t.data();
    auto& v = v_[name];
    if (v.size() != p.size()) v.assign(p.size(), Real(0));
    if (config_.algo == OptimizerAlgo::rmsprop) {
      const Real a = config_.decay;
      for (std::size_t i = 0; i < p.size(); ++i) {
        const Real gi = g[i] * clip;
        v[i] = a * v[i] + (1 - a) * gi * gi;
        p[i] -= lr * gi / (std::sqrt(v[i]) + eps);
      }
    } else {
      auto& m = m_[name];
      if (m.size() != p.size()) m.assign(p.size(), Real(0));
      const Real b1 = config_.beta1, b2 = config_.beta2;
      const Real c1 = 1 - static_cast<Real>(std::pow(static_cast<double>(b1), static_cast<double>(steps_)));
      const Real c2 = 1 - static_cast<Real>(std::pow(static_cast<double>(b2), static_cast<double>(steps_)));
      for (std::size_t i = 0; i < p.size(); ++i) {
        const Real gi = g[i] * clip;
        m[i] = b1 * m[i] + (1 - b1) * gi;
        v[i] = b2 * v[i] + (1 - b2) * gi * gi;
        p[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps);
      }
    }
  }
  params.bump_version();
  return norm;
}

}  // namespace ad
CSG_NAMESPACE_END
