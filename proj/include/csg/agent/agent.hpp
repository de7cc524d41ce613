#ifndef CSG_AGENT_AGENT_HPP_
#define CSG_AGENT_AGENT_HPP_

#include <span>
#include <string>
#include <vector>

#include "csg/agent/policy_net.hpp"
#include "csg/gridworld/gridworld.hpp"

CSG_NAMESPACE_BEGIN
namespace agent {

inline constexpr int kVocab = grid::kVocabSize;
inline constexpr int kGoalTile = 7;  // green goal

// A (view cell, tile value) pair. The environment goal g0 is the agent's own
// cell holding the green goal; choosing it means "no subgoal".
struct SubGoal {
  int pos = 0;
  int value = 0;
  bool is_env_goal = false;

  int index() const { return pos * kVocab + value; }
  friend bool operator==(const SubGoal&, const SubGoal&) = default;
};

SubGoal env_goal(int view);
// Decodes a joint index in [0, view^2 * 8); throws std::out_of_range.
SubGoal decode_goal(int index, int view);

struct GoalRewardConfig {
  Real r = 1;
  Real gamma = Real(0.99);
  Real beta = Real(0.5);
  int abandon_limit = 25;

  // Throws std::invalid_argument naming the offending field.
  void validate() const;
};

// 1 iff the observation cell at goal.pos holds the tile goal.value.
int verify_goal(std::span<const int> obs, const SubGoal& goal);
int verify_goal(const grid::Observation& obs, const SubGoal& goal);
// verify_goal, with the environment goal also satisfied by entering the
// goal tile (the agent cell shows a carried key in that case).
int goal_satisfied(std::span<const int> obs, const SubGoal& goal, bool env_success);

Real goal_reward(std::span<const int> obs, const SubGoal& goal, const GoalRewardConfig& config, bool env_success = false);

enum class Status { active, reached, abandoned, none };
std::string_view status_name(Status s);

struct SubGoalStatus {
  Status status = Status::none;
  int steps_on_goal = 0;

  static SubGoalStatus fresh() { return {Status::active, 0}; }
  bool accepting_proposal() const { return status != Status::active; }
  friend bool operator==(const SubGoalStatus&, const SubGoalStatus&) = default;
};

// Advances an active subgoal by one environment step. Reached takes
// precedence; otherwise the goal is abandoned once abandon_limit steps have
// been spent on it. Throws std::logic_error unless status is active.
SubGoalStatus update_lifecycle(const SubGoalStatus& status, std::span<const int> obs, const SubGoal& goal,
                               const GoalRewardConfig& config, bool env_success = false);

Real navigator_step_reward(Real r_g, Real r_c);
Real subgoal_step_reward(Real r_c, Real r_e, int verified, Real beta);

std::string describe_subgoal(const SubGoal& goal, int view);

// Navigator and subgoal-generator forward passes over a single environment.
struct NavigatorStep {
  std::vector<Real> logits;
  Real value = 0;
  RecurrentState state;
};
NavigatorStep navigator_act(const PolicyNet& net, const ParamSet& params, std::span<const int> obs,
                            const SubGoal& goal, const RecurrentState& state);

struct Proposal {
  SubGoal goal;
  Real log_prob = 0;
  Real value = 0;
  RecurrentState state;
};
// Samples a joint (pos, value) index. Throws std::logic_error while a
// subgoal is still active.
Proposal propose_subgoal(const PolicyNet& net, const ParamSet& params, std::span<const int> obs, const SubGoal& g0,
                         const RecurrentState& state, const SubGoalStatus& status, Rng& rng);

// One environment step of an exported trace.
enum class TraceEvent { proposed, active, reached, abandoned, none };
std::string_view event_name(TraceEvent e);
TraceEvent event_from_name(std::string_view name);

struct TraceRecord {
  int episode = 0;
  int step = 0;  // 1-based within the episode
  int action = 0;
  int subgoal_id = -1;  // -1 when the agent has no subgoal machinery
  int subgoal_pos = -1;
  int subgoal_value = -1;
  bool env_goal = false;
  std::string subgoal_text;
  TraceEvent event = TraceEvent::none;
  int steps_on_goal = 0;
  bool done = false;
  double r_e = 0, r_c = 0, r_g = 0;
};

// Event for a step given the status before and after it.
TraceEvent trace_event(bool first_step_of_goal, const SubGoalStatus& after);

// Empty when the sequence obeys the lifecycle grammar, else a description
// of the first violation.
std::string validate_trace(const std::vector<TraceRecord>& trace, int abandon_limit);

}  // namespace agent
CSG_NAMESPACE_END

#endif  // CSG_AGENT_AGENT_HPP_
