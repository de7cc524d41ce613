#include "csg/agent/agent.hpp"

#include <stdexcept>

#include "csg/autodiff/ops.hpp"

CSG_NAMESPACE_BEGIN
namespace agent {

namespace {

int agent_cell(int view) { return (view / 2) * view + (view - 1); }

}  // namespace

SubGoal env_goal(int view) { return {agent_cell(view), kGoalTile, true}; }

SubGoal decode_goal(int index, int view) {
  if (index < 0 || index >= view * view * kVocab)
    throw std::out_of_range("decode_goal: index " + std::to_string(index) + " outside " +
                            std::to_string(view * view * kVocab) + " choices");
  SubGoal g{index / kVocab, index % kVocab, false};
  g.is_env_goal = g.pos == agent_cell(view) && g.value == kGoalTile;
  return g;
}

void GoalRewardConfig::validate() const {
  if (!(r > 0)) throw std::invalid_argument("goal reward: r must be > 0");
  if (!(gamma >= 0 && gamma < 1)) throw std::invalid_argument("goal reward: gamma must lie in [0, 1)");
  if (!(beta >= 0)) throw std::invalid_argument("goal reward: beta must be >= 0");
  if (abandon_limit < 1) throw std::invalid_argument("goal reward: abandon_limit must be >= 1");
}

int verify_goal(std::span<const int> obs, const SubGoal& goal) {
  if (goal.pos < 0 || static_cast<std::size_t>(goal.pos) >= obs.size()) return 0;
  return obs[static_cast<std::size_t>(goal.pos)] == goal.value ? 1 : 0;
}

int verify_goal(const grid::Observation& obs, const SubGoal& goal) {
  const std::vector<int> idx = obs.indices();
  return verify_goal(std::span<const int>(idx), goal);
}

int goal_satisfied(std::span<const int> obs, const SubGoal& goal, bool env_success) {
  if (goal.is_env_goal && env_success) return 1;
  return verify_goal(obs, goal);
}

Real goal_reward(std::span<const int> obs, const SubGoal& goal, const GoalRewardConfig& config, bool env_success) {
  return goal_satisfied(obs, goal, env_success) ? config.r : Real(0);
}

std::string_view status_name(Status s) {
  switch (s) {
    case Status::active: return "active";
    case Status::reached: return "reached";
    case Status::abandoned: return "abandoned";
    case Status::none: return "none";
  }
  return "?";
}

SubGoalStatus update_lifecycle(const SubGoalStatus& status, std::span<const int> obs, const SubGoal& goal,
                               const GoalRewardConfig& config, bool env_success) {
  if (status.status != Status::active)
    throw std::logic_error(std::string("update_lifecycle: subgoal is ") + std::string(status_name(status.status)));
  const int steps = status.steps_on_goal + 1;
  if (goal_satisfied(obs, goal, env_success)) return {Status::reached, steps};
  if (steps >= config.abandon_limit) return {Status::abandoned, steps};
  return {Status::active, steps};
}

Real navigator_step_reward(Real r_g, Real r_c) { return r_g + r_c; }

Real subgoal_step_reward(Real r_c, Real r_e, int verified, Real beta) {
  return r_c + (static_cast<Real>(verified) + beta) / (1 + beta) * r_e;
}

std::string describe_subgoal(const SubGoal& goal, int view) {
  const grid::TileSymbol tile = grid::TileSymbol::from_index(goal.value);
  const std::string name(grid::tile_name(tile));
  if (goal.is_env_goal) return "go to the green goal (pursue environment goal)";
  const int me = agent_cell(view);
  if (goal.pos == me) {
    switch (tile.kind) {
      case grid::TileKind::key: return "pick up the " + name;
      case grid::TileKind::goal: return "go to the " + name;
      case grid::TileKind::empty: return "stand on an empty cell";
      default: return "stand on the " + name;
    }
  }
  if (goal.pos == me - 1) {
    switch (tile.kind) {
      case grid::TileKind::key:
      case grid::TileKind::door:
      case grid::TileKind::goal: return "go to the " + name;
      case grid::TileKind::empty: return "face an empty cell";
      case grid::TileKind::unseen: return "face an unseen cell";
      default: return "face the " + name;
    }
  }
  return "make cell (" + std::to_string(goal.pos / view + 1) + "," + std::to_string(goal.pos % view + 1) +
         ") become " + name;
}

NavigatorStep navigator_act(const PolicyNet& net, const ParamSet& params, std::span<const int> obs,
                            const SubGoal& goal, const RecurrentState& state) {
  ad::NoGradGuard guard;
  const int pos[1] = {goal.pos};
  const int value[1] = {goal.value};
  PolicyOutput out = net.forward(params, obs, pos, value, state);
  return {std::vector<Real>(out.logits.data().begin(), out.logits.data().end()), out.value.item(), std::move(out.state)};
}

Proposal propose_subgoal(const PolicyNet& net, const ParamSet& params, std::span<const int> obs, const SubGoal& g0,
                         const RecurrentState& state, const SubGoalStatus& status, Rng& rng) {
  if (!status.accepting_proposal()) throw std::logic_error("propose_subgoal: a subgoal is still active");
  ad::NoGradGuard guard;
  const int pos[1] = {g0.pos};
  const int value[1] = {g0.value};
  PolicyOutput out = net.forward(params, obs, pos, value, state);
  const auto logits = out.logits.data();
  const int choice = sample_categorical(logits, rng);
  return {decode_goal(choice, net.config().view), log_prob_at(logits, choice), out.value.item(), std::move(out.state)};
}

std::string_view event_name(TraceEvent e) {
  switch (e) {
    case TraceEvent::proposed: return "proposed";
    case TraceEvent::active: return "active";
    case TraceEvent::reached: return "reached";
    case TraceEvent::abandoned: return "abandoned";
    case TraceEvent::none: return "none";
  }
  return "?";
}

TraceEvent event_from_name(std::string_view name) {
  for (TraceEvent e : {TraceEvent::proposed, TraceEvent::active, TraceEvent::reached, TraceEvent::abandoned,
                       TraceEvent::none})
    if (event_name(e) == name) return e;
  throw std::invalid_argument("unknown trace event '" + std::string(name) + "'");
}

TraceEvent trace_event(bool first_step_of_goal, const SubGoalStatus& after) {
  if (after.status == Status::reached) return TraceEvent::reached;
  if (after.status == Status::abandoned) return TraceEvent::abandoned;
  return first_step_of_goal ? TraceEvent::proposed : TraceEvent::active;
}

std::string validate_trace(const std::vector<TraceRecord>& trace, int abandon_limit) {
  auto at = [](std::size_t i, const std::string& what) { return "record " + std::to_string(i) + ": " + what; };
  const TraceRecord* prev = nullptr;
  int last_id = -1;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const TraceRecord& r = trace[i];
    const bool new_episode = prev == nullptr || prev->done || r.episode != prev->episode;
    if (new_episode) {
      if (prev && !prev->done) return at(i, "episode changed without a done flag");
      if (prev && r.episode <= prev->episode) return at(i, "episode number did not increase");
      if (r.step != 1) return at(i, "episode does not start at step 1");
    } else if (r.step != prev->step + 1) {
      return at(i, "step did not advance by one");
    }

    if (r.subgoal_id < 0) {
      if (r.event != TraceEvent::none) return at(i, "event without a subgoal");
      prev = &r;
      continue;
    }
    if (r.event == TraceEvent::none) return at(i, "subgoal record with event none");
    const bool boundary =
        new_episode || prev->event == TraceEvent::reached || prev->event == TraceEvent::abandoned;
    if (boundary) {
      if (r.subgoal_id <= last_id) return at(i, "new subgoal does not carry a fresh id");
      if (r.event == TraceEvent::active) return at(i, "first step of a subgoal marked active");
      if (r.steps_on_goal != 1) return at(i, "first step of a subgoal must count 1");
      if (r.subgoal_text.empty()) return at(i, "proposal without a description");
    } else {
      if (r.subgoal_id != prev->subgoal_id) return at(i, "subgoal changed while the previous one was active");
      if (r.event == TraceEvent::proposed) return at(i, "proposal while a subgoal is active");
      if (r.steps_on_goal != prev->steps_on_goal + 1) return at(i, "steps_on_goal did not advance by one");
    }
    if (r.steps_on_goal > abandon_limit) return at(i, "steps_on_goal exceeds the abandon limit");
    if (r.event == TraceEvent::abandoned && r.steps_on_goal != abandon_limit)
      return at(i, "abandoned before the limit");
    if ((r.event == TraceEvent::active || r.event == TraceEvent::proposed) && r.steps_on_goal >= abandon_limit)
      return at(i, "still active at the abandon limit");
    last_id = r.subgoal_id;
    prev = &r;
  }
  return {};
}

}  // namespace agent
CSG_NAMESPACE_END
