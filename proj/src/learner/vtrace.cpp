#include "csg/learner/vtrace.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

CSG_NAMESPACE_BEGIN
namespace learner {

void VtraceConfig::validate() const {
  if (!(c_bar >= 1)) throw std::invalid_argument("vtrace: c_bar must be >= 1");
  if (!(rho_bar >= c_bar)) throw std::invalid_argument("vtrace: rho_bar must be >= c_bar");
  if (!(gamma >= 0 && gamma < 1)) throw std::invalid_argument("vtrace: gamma must lie in [0, 1)");
  if (policy_weight < 0 || baseline_weight < 0 || entropy_weight < 0)
    throw std::invalid_argument("vtrace: loss weights must be >= 0");
}

VtraceOutput vtrace_targets(std::span<const double> behavior_logp, std::span<const double> target_logp,
                            std::span<const double> rewards, std::span<const double> values,
                            std::span<const double> discounts, double bootstrap, double rho_bar, double c_bar) {
  const std::size_t n = rewards.size();
  if (behavior_logp.size() != n || target_logp.size() != n || values.size() != n || discounts.size() != n)
    throw std::invalid_argument("vtrace: sequence lengths differ (rewards " + std::to_string(n) + ", values " +
                                std::to_string(values.size()) + ", discounts " + std::to_string(discounts.size()) +
                                ", log-probs " + std::to_string(behavior_logp.size()) + "/" +
                                std::to_string(target_logp.size()) + ")");
  VtraceOutput out;
  out.vs.resize(n);
  out.pg_adv.resize(n);
  std::vector<double> rho(n);
  double acc = 0;  // v_{t+1} - V(x_{t+1})
  for (std::size_t k = n; k-- > 0;) {
    const double ratio = std::exp(target_logp[k] - behavior_logp[k]);
    rho[k] = std::min(rho_bar, ratio);
    const double c = std::min(c_bar, ratio);
    const double next_v = k + 1 < n ? values[k + 1] : bootstrap;
    const double delta = rho[k] * (rewards[k] + discounts[k] * next_v - values[k]);
    acc = delta + discounts[k] * c * acc;
    out.vs[k] = values[k] + acc;
  }
  for (std::size_t k = 0; k < n; ++k) {
    const double next_vs = k + 1 < n ? out.vs[k + 1] : bootstrap;
    out.pg_adv[k] = rho[k] * (rewards[k] + discounts[k] * next_vs - values[k]);
  }
  return out;
}

std::vector<double> discounts_from_dones(std::span<const unsigned char> done, double gamma) {
  std::vector<double> d(done.size());
  for (std::size_t i = 0; i < done.size(); ++i) d[i] = done[i] ? 0.0 : gamma;
  return d;
}

}  // namespace learner
CSG_NAMESPACE_END
