#ifndef CSG_LEARNER_UPDATE_HPP_
#define CSG_LEARNER_UPDATE_HPP_

#include <vector>

#include "csg/autodiff/optimizer.hpp"
#include "csg/learner/rollout.hpp"
#include "csg/learner/vtrace.hpp"

CSG_NAMESPACE_BEGIN
namespace learner {

// T steps of B recurrent sequences, time-major, ready for one update. Step T
// only supplies the bootstrap value.
struct SequenceBatch {
  std::size_t T = 0, B = 0, tiles = 0;
  std::vector<int> tiles_in;              // [(T+1) * B * tiles]
  std::vector<int> goal_pos, goal_value;  // [(T+1) * B]
  std::vector<unsigned char> reset;       // [(T+1) * B]
  std::vector<Real> mask;                 // [T * B], 0 marks padding
  std::vector<int> actions;               // [T * B]
  std::vector<double> behavior_logp, rewards, discounts;
  std::vector<std::vector<Real>> initial_state;  // B rows

  // Throws std::invalid_argument on misaligned arrays.
  void validate() const;
};

struct LossReport {
  double total = 0, policy = 0, baseline = 0, entropy = 0, grad_norm = 0;
  friend bool operator==(const LossReport&, const LossReport&) = default;
};

// Navigator batch with per-step rewards and discounts supplied by the caller.
SequenceBatch navigator_batch(const Trajectory& traj, std::vector<double> rewards, std::vector<double> discounts);

// Navigator rewards for the algorithm: r_g + r_c (csg), r_e (vanilla) or
// r_e + r_i / rnd_std (rnd).
std::vector<double> navigator_rewards(const Trajectory& traj, Algo algo, double rnd_std);
// gamma per step, 0 at episode ends and, when `cut_at_subgoal`, at subgoal ends.
std::vector<double> navigator_discounts(const Trajectory& traj, double gamma, bool cut_at_subgoal);

// Subgoal-generator batch at decision granularity: one sequence per
// environment with completed decisions, padded to the longest. B may be 0.
SequenceBatch subgoal_batch(const Trajectory& traj, int view);

// V-trace actor-critic loss on `batch` followed by one optimizer step:
// policy_weight * sum(-pg_adv * log pi(a)) + baseline_weight * sum((v_s - V)^2)
// + entropy_weight * sum(-H(pi)). Throws std::runtime_error if the loss or a
// gradient is not finite; parameters are untouched in that case.
LossReport actor_critic_update(const agent::PolicyNet& net, ParamSet& params, ad::Optimizer& opt,
                               const SequenceBatch& batch, const VtraceConfig& config);

struct ActorCriticTargets {
  std::vector<double> vs, pg_adv;  // [T * B]
};

// Builds the loss graph without running backward. V-trace targets are
// computed from the current parameters unless `frozen` supplies them; they
// enter the graph as constants either way.
Tensor actor_critic_objective(const agent::PolicyNet& net, const ParamSet& params, const SequenceBatch& batch,
                              const VtraceConfig& config, const ActorCriticTargets* frozen = nullptr,
                              LossReport* report = nullptr, ActorCriticTargets* targets_out = nullptr);

// The loss without the optimizer step (gradients left on `params`).
LossReport actor_critic_loss(const agent::PolicyNet& net, ParamSet& params, const SequenceBatch& batch,
                             const VtraceConfig& config, Tensor* loss_out = nullptr);

}  // namespace learner
CSG_NAMESPACE_END

#endif  // CSG_LEARNER_UPDATE_HPP_
