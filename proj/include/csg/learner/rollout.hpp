#ifndef CSG_LEARNER_ROLLOUT_HPP_
#define CSG_LEARNER_ROLLOUT_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "csg/learner/model.hpp"

CSG_NAMESPACE_BEGIN
namespace learner {

// One subgoal-generator action and what followed it.
struct SgDecision {
  std::vector<int> obs;  // observation the proposal was made on
  int choice = 0;        // joint (pos, value) index
  double behavior_logp = 0;
  double value = 0;
  double reward = 0;    // sum of gamma^k * subgoal_step_reward over the interval
  double discount = 0;  // gamma^duration, 0 when the episode ended inside the interval
  int duration = 0;
  int accumulated = 0;  // steps already folded into `reward`
  bool episode_start = false;
  agent::Status outcome = agent::Status::none;  // none: cut by the episode end
  long serial = 0;
};

// Decisions of one environment that completed inside a rollout, plus the
// decision still open at its end (the bootstrap input).
struct SgChunk {
  std::vector<SgDecision> decisions;
  std::vector<Real> initial_state;  // generator state row before decisions[0]
  std::vector<int> next_obs;
  bool next_episode_start = false;
};

struct EpisodeSummary {
  double r_e = 0;
  int length = 0;
  bool success = false;
};

// T steps of B environments stepped in lockstep, time-major.
struct Trajectory {
  std::size_t T = 0, B = 0, tiles = 0;
  std::vector<int> obs;                   // [(T+1) * B * tiles]; slice T feeds the bootstrap
  std::vector<int> next_obs;              // [T * B * tiles], before any episode reset
  std::vector<int> goal_pos, goal_value;  // [(T+1) * B]
  std::vector<unsigned char> reset;       // [(T+1) * B] recurrent state zeroed before the step
  std::vector<int> actions;               // [T * B]
  std::vector<double> behavior_logp, values;
  std::vector<double> r_e, r_c, r_g, r_i;
  std::vector<unsigned char> verified, done, goal_end;
  std::vector<agent::TraceEvent> events;
  std::vector<std::vector<Real>> initial_state;  // navigator state row per environment
  std::vector<SgChunk> sg;                       // per environment; empty unless csg
  std::vector<EpisodeSummary> episodes;          // episodes that finished in this rollout
  int sg_reached = 0, sg_abandoned = 0;
  std::uint64_t policy_version = 0;

  std::size_t at(std::size_t t, std::size_t b) const { return t * B + b; }
  // Throws std::logic_error on misaligned arrays or non-finite log-probs.
  void validate() const;
};

struct ActorOptions {
  std::size_t num_envs = 8;
  std::size_t unroll = 80;
  bool greedy = false;
  // Every episode uses this layout when set.
  std::optional<std::uint64_t> layout_seed;
  // Keep TraceRecords for environment 0.
  bool record_trace = false;
};

// A group of environments with their recurrent and lifecycle state. Owned
// by one thread; reads snapshots only.
class Actor {
 public:
  Actor(const AgentConfig& config, const ActorOptions& options, std::uint64_t seed);

  Trajectory collect(const Snapshot& snap);

  const std::vector<agent::TraceRecord>& trace() const { return trace_; }
  std::vector<agent::TraceRecord> take_trace() { return std::move(trace_); }
  long env_steps() const { return env_steps_; }
  const ActorOptions& options() const { return options_; }

  // Called for environment 0 after each step with the post-step state and
  // its record (r_c is filled in later, at the end of the rollout).
  std::function<void(const grid::GridState&, const agent::TraceRecord&)> on_step;

 private:
  struct Slot {
    grid::GridState env;
    std::vector<int> obs;
    double ep_return = 0;
    int ep_len = 0;
    int episode = 0;
    bool fresh = true;  // recurrent state reset pending
    // Subgoal machinery.
    agent::SubGoal goal;
    agent::SubGoalStatus status;
    bool first_step = false;
    bool needs_proposal = true;
    bool episode_start = true;
    int goal_id = -1;
    std::vector<Real> sg_state;
    SgDecision pending;
    std::vector<Real> pending_state;
  };

  void reset_env(Slot& s);
  void propose(const Snapshot& snap);

  AgentConfig config_;
  ActorOptions options_;
  Nets nets_;
  Rng rng_;
  std::vector<Slot> slots_;
  agent::RecurrentState nav_state_;
  std::vector<SgChunk> chunks_;
  long env_steps_ = 0;
  long next_serial_ = 0;
  int next_goal_id_ = 0;
  int next_episode_ = 0;
  std::vector<agent::TraceRecord> trace_;
};

}  // namespace learner
CSG_NAMESPACE_END

#endif  // CSG_LEARNER_ROLLOUT_HPP_
