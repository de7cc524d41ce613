#include "csg/baselines/vanilla.hpp"

#include <stdexcept>

CSG_NAMESPACE_BEGIN
namespace baselines {

agent::PolicyNetConfig vanilla_config(int view, int hidden) {
  agent::PolicyNetConfig c;
  c.view = view;
  c.hidden = hidden;
  c.head = 6;
  c.goal_conditioned = false;
  return c;
}

agent::NavigatorStep vanilla_agent(const agent::PolicyNet& net, const ad::ParamSet& params, std::span<const int> obs,
                                   const agent::RecurrentState& state) {
  if (net.config().goal_conditioned) throw std::invalid_argument("vanilla_agent: network is goal-conditioned");
  ad::NoGradGuard guard;
  const agent::PolicyOutput out = net.forward(params, obs, {}, {}, state);
  return {std::vector<Real>(out.logits.data().begin(), out.logits.data().end()), out.value.item(), out.state};
}

}  // namespace baselines
CSG_NAMESPACE_END
