#ifndef CSG_BASELINES_VANILLA_HPP_
#define CSG_BASELINES_VANILLA_HPP_

#include <span>

#include "csg/agent/agent.hpp"

CSG_NAMESPACE_BEGIN
namespace baselines {

// Navigator architecture without goal inputs.
agent::PolicyNetConfig vanilla_config(int view, int hidden);

// Single-environment forward pass of the goal-free network.
agent::NavigatorStep vanilla_agent(const agent::PolicyNet& net, const ad::ParamSet& params, std::span<const int> obs,
                                   const agent::RecurrentState& state);

}  // namespace baselines
CSG_NAMESPACE_END

#endif  // CSG_BASELINES_VANILLA_HPP_
