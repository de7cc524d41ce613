#ifndef CSG_LEARNER_VTRACE_HPP_
#define CSG_LEARNER_VTRACE_HPP_

#include <span>
#include <vector>

#include "csg/core/real.hpp"

CSG_NAMESPACE_BEGIN
namespace learner {

struct VtraceConfig {
  double rho_bar = 1.0;
  double c_bar = 1.0;
  double gamma = 0.99;
  double policy_weight = 1.0;
  double baseline_weight = 0.5;
  double entropy_weight = 0.01;

  // Throws std::invalid_argument naming the offending field.
  void validate() const;
};

struct VtraceOutput {
  std::vector<double> vs;      // value targets
  std::vector<double> pg_adv;  // policy-gradient advantages
};

// One sequence of length T. discounts[t] multiplies the value of step t + 1
// (gamma, or 0 across an episode boundary). `bootstrap` is V(x_T). Throws
// std::invalid_argument on a length mismatch.
VtraceOutput vtrace_targets(std::span<const double> behavior_logp, std::span<const double> target_logp,
                            std::span<const double> rewards, std::span<const double> values,
                            std::span<const double> discounts, double bootstrap, double rho_bar, double c_bar);

// Discounts for a sequence with done flags: gamma * (1 - done[t]).
std::vector<double> discounts_from_dones(std::span<const unsigned char> done, double gamma);

}  // namespace learner
CSG_NAMESPACE_END

#endif  // CSG_LEARNER_VTRACE_HPP_
