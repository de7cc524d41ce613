#include "csg/learner/rollout.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

#include "csg/autodiff/ops.hpp"

CSG_NAMESPACE_BEGIN
namespace learner {

namespace {

void zero_row(agent::RecurrentState& s, std::size_t r) {
  const std::size_t h = s.h1.cols();
  for (Tensor* t : {&s.h1, &s.c1, &s.h2, &s.c2})
    std::fill_n(t->data().begin() + static_cast<std::ptrdiff_t>(r * h), h, Real(0));
}

template <typename V>
void check_len(const V& v, std::size_t n, const char* what) {
  if (v.size() != n)
    throw std::logic_error(std::string("trajectory: ") + what + " holds " + std::to_string(v.size()) +
                           " entries, expected " + std::to_string(n));
}

}  // namespace

void Trajectory::validate() const {
  const std::size_t n = T * B;
  check_len(obs, (T + 1) * B * tiles, "obs");
  check_len(next_obs, n * tiles, "next_obs");
  check_len(goal_pos, (T + 1) * B, "goal_pos");
  check_len(goal_value, (T + 1) * B, "goal_value");
  check_len(reset, (T + 1) * B, "reset");
  check_len(actions, n, "actions");
  check_len(behavior_logp, n, "behavior_logp");
  check_len(values, n, "values");
  check_len(r_e, n, "r_e");
  check_len(r_c, n, "r_c");
  check_len(r_g, n, "r_g");
  check_len(r_i, n, "r_i");
  check_len(verified, n, "verified");
  check_len(done, n, "done");
  check_len(goal_end, n, "goal_end");
  check_len(events, n, "events");
  check_len(initial_state, B, "initial_state");
  for (std::size_t i = 0; i < n; ++i)
    if (!std::isfinite(behavior_logp[i])) throw std::logic_error("trajectory: non-finite behavior log-prob at " + std::to_string(i));
}

Actor::Actor(const AgentConfig& config, const ActorOptions& options, std::uint64_t seed)
    : config_(config), options_(options), nets_(Nets::describe(config)), rng_(seed) {
  if (options_.num_envs == 0 || options_.unroll == 0) throw std::invalid_argument("actor: num_envs and unroll must be > 0");
  config_.finalize();
  slots_.resize(options_.num_envs);
  for (Slot& s : slots_) reset_env(s);
  nav_state_ = agent::RecurrentState::zeros(options_.num_envs, static_cast<std::size_t>(config_.hidden));
  chunks_.resize(options_.num_envs);
}

void Actor::reset_env(Slot& s) {
  const std::uint64_t layout = options_.layout_seed ? *options_.layout_seed : rng_();
  s.env = grid::generate(layout, config_.size);
  s.obs = grid::observe(s.env, config_.view).indices();
  s.ep_return = 0;
  s.ep_len = 0;
  s.episode = next_episode_++;
  s.fresh = true;
  s.needs_proposal = true;
  s.episode_start = true;
  s.sg_state.assign(4 * static_cast<std::size_t>(config_.hidden), Real(0));
}

void Actor::propose(const Snapshot& snap) {
  std::vector<std::size_t> rows;
  for (std::size_t b = 0; b < slots_.size(); ++b)
    if (slots_[b].needs_proposal) rows.push_back(b);
  if (rows.empty()) return;
  const agent::SubGoal g0 = agent::env_goal(config_.view);
  std::vector<int> tiles, pos(rows.size(), g0.pos), val(rows.size(), g0.value);
  std::vector<std::vector<Real>> states;
  for (std::size_t b : rows) {
    tiles.insert(tiles.end(), slots_[b].obs.begin(), slots_[b].obs.end());
    states.push_back(slots_[b].sg_state);
  }
  ad::NoGradGuard guard;
  const auto state = agent::RecurrentState::from_rows(states, static_cast<std::size_t>(config_.hidden));
  const agent::PolicyOutput out = nets_.sg.forward(snap.sg, tiles, pos, val, state);
  const std::size_t head = static_cast<std::size_t>(nets_.sg.config().head);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    Slot& s = slots_[rows[i]];
    const auto logits = out.logits.data().subspan(i * head, head);
    const int choice = options_.greedy ? agent::argmax(logits) : agent::sample_categorical(logits, rng_);
    s.pending = {};
    s.pending.obs = s.obs;
    s.pending.choice = choice;
    s.pending.behavior_logp = agent::log_prob_at(logits, choice);
    s.pending.value = out.value.data()[i];
    s.pending.episode_start = s.episode_start;
    s.pending.serial = next_serial_++;
    s.pending_state = std::move(states[i]);
    s.sg_state = out.state.row(i);
    s.goal = agent::decode_goal(choice, config_.view);
    s.status = agent::SubGoalStatus::fresh();
    s.first_step = true;
    s.needs_proposal = false;
    s.episode_start = false;
    s.goal_id = next_goal_id_++;
  }
}

Trajectory Actor::collect(const Snapshot& snap) {
  const bool csg = config_.algo == Algo::csg;
  const std::size_t T = options_.unroll, B = slots_.size();
  const std::size_t tiles = static_cast<std::size_t>(config_.view * config_.view);
  const std::size_t head = static_cast<std::size_t>(nets_.nav.config().head);
  Trajectory tr;
  tr.T = T;
  tr.B = B;
  tr.tiles = tiles;
  tr.policy_version = snap.version;
  tr.obs.reserve((T + 1) * B * tiles);
  tr.next_obs.reserve(T * B * tiles);
  const std::size_t n = T * B;
  tr.actions.resize(n);
  tr.behavior_logp.resize(n);
  tr.values.resize(n);
  tr.r_e.resize(n);
  tr.r_c.assign(n, 0.0);
  tr.r_g.assign(n, 0.0);
  tr.r_i.assign(n, 0.0);
  tr.verified.assign(n, 0);
  tr.done.assign(n, 0);
  tr.goal_end.assign(n, 0);
  tr.events.assign(n, agent::TraceEvent::none);
  std::vector<long> step_serial(n, -1);
  std::vector<std::size_t> trace_index(T, SIZE_MAX);
  for (SgChunk& c : chunks_) c = {};

  auto record_inputs = [&](bool final) {
    if (csg) propose(snap);
    for (std::size_t b = 0; b < B; ++b) {
      Slot& s = slots_[b];
      tr.obs.insert(tr.obs.end(), s.obs.begin(), s.obs.end());
      tr.goal_pos.push_back(csg ? s.goal.pos : 0);
      tr.goal_value.push_back(csg ? s.goal.value : 0);
      tr.reset.push_back(s.fresh ? 1 : 0);
      if (!final) s.fresh = false;
    }
  };

  for (std::size_t b = 0; b < B; ++b) tr.initial_state.push_back(nav_state_.row(b));

  for (std::size_t t = 0; t < T; ++t) {
    record_inputs(false);
    const std::span<const int> obs_t(tr.obs.data() + t * B * tiles, B * tiles);
    const std::span<const int> pos_t(tr.goal_pos.data() + t * B, B);
    const std::span<const int> val_t(tr.goal_value.data() + t * B, B);
    agent::PolicyOutput out;
    {
      ad::NoGradGuard guard;
      out = nets_.nav.forward(snap.nav, obs_t, pos_t, val_t, nav_state_);
    }
    nav_state_ = out.state;
    for (std::size_t b = 0; b < B; ++b) {
      Slot& s = slots_[b];
      const std::size_t i = tr.at(t, b);
      const auto logits = out.logits.data().subspan(b * head, head);
      const int a = options_.greedy ? agent::argmax(logits) : agent::sample_categorical(logits, rng_);
      tr.actions[i] = a;
      tr.behavior_logp[i] = agent::log_prob_at(logits, a);
      tr.values[i] = out.value.data()[b];

      const grid::StepResult res = grid::step(s.env, static_cast<grid::Action>(a));
      ++env_steps_;
      std::vector<int> next = grid::observe(res.state, config_.view).indices();
      tr.next_obs.insert(tr.next_obs.end(), next.begin(), next.end());
      tr.r_e[i] = res.reward;
      tr.done[i] = res.terminated ? 1 : 0;
      s.ep_return += res.reward;
      ++s.ep_len;

      agent::TraceRecord rec;
      if (csg) {
        const int sat = agent::goal_satisfied(next, s.goal, res.success);
        tr.verified[i] = static_cast<unsigned char>(sat);
        tr.r_g[i] = sat ? config_.goal.r : 0.0;
        const agent::SubGoalStatus after =
            agent::update_lifecycle(s.status, next, s.goal, config_.goal, res.success);
        tr.events[i] = agent::trace_event(s.first_step, after);
        s.first_step = false;
        s.status = after;
        step_serial[i] = s.pending.serial;
        ++s.pending.duration;
        const bool ended = after.status != agent::Status::active;
        tr.goal_end[i] = ended ? 1 : 0;
        if (ended) (after.status == agent::Status::reached ? tr.sg_reached : tr.sg_abandoned)++;
        rec.subgoal_id = s.goal_id;
        rec.subgoal_pos = s.goal.pos;
        rec.subgoal_value = s.goal.value;
        rec.env_goal = s.goal.is_env_goal;
        rec.subgoal_text = agent::describe_subgoal(s.goal, config_.view);
        rec.steps_on_goal = after.steps_on_goal;
        if (ended || res.terminated) {
          SgDecision& d = s.pending;
          d.outcome = ended ? after.status : agent::Status::none;
          d.discount = res.terminated ? 0.0 : std::pow(static_cast<double>(config_.goal.gamma), d.duration);
          SgChunk& c = chunks_[b];
          if (c.decisions.empty()) c.initial_state = s.pending_state;
          c.decisions.push_back(std::move(d));
          s.needs_proposal = true;
        }
      }
      if (b == 0 && options_.record_trace) {
        rec.episode = s.episode;
        rec.step = s.ep_len;
        rec.action = a;
        rec.event = tr.events[i];
        rec.done = res.terminated;
        rec.r_e = res.reward;
        rec.r_g = tr.r_g[i];
        trace_index[t] = trace_.size();
        trace_.push_back(rec);
        if (on_step) on_step(res.state, rec);
      }
      if (res.terminated) {
        tr.episodes.push_back({s.ep_return, s.ep_len, res.success});
        zero_row(nav_state_, b);
        reset_env(s);
      } else {
        s.env = res.state;
        s.obs = std::move(next);
      }
    }
  }
  record_inputs(true);

  if (csg) {
    gan::GanBatch batch;
    batch.obs.assign(tr.obs.begin(), tr.obs.begin() + static_cast<std::ptrdiff_t>(n * tiles));
    batch.next = tr.next_obs;
    batch.actions = tr.actions;
    const std::vector<Real> rc = gan::curiosity_rewards(nets_.gan, snap.gan, batch);
    for (std::size_t i = 0; i < n; ++i) tr.r_c[i] = rc[i];

    // Fold the per-step generator rewards into their decisions.
    tr.sg.resize(B);
    for (std::size_t b = 0; b < B; ++b) {
      std::map<long, SgDecision*> by_serial;
      for (SgDecision& d : chunks_[b].decisions) by_serial[d.serial] = &d;
      by_serial[slots_[b].pending.serial] = &slots_[b].pending;
      for (std::size_t t = 0; t < T; ++t) {
        const std::size_t i = tr.at(t, b);
        SgDecision& d = *by_serial.at(step_serial[i]);
        const double r = agent::subgoal_step_reward(static_cast<Real>(tr.r_c[i]), static_cast<Real>(tr.r_e[i]),
                                                    tr.verified[i], config_.goal.beta);
        d.reward += std::pow(static_cast<double>(config_.goal.gamma), d.accumulated) * r;
        ++d.accumulated;
      }
      chunks_[b].next_obs = slots_[b].pending.obs;
      chunks_[b].next_episode_start = slots_[b].pending.episode_start;
      tr.sg[b] = std::move(chunks_[b]);
    }
    if (options_.record_trace)
      for (std::size_t t = 0; t < T; ++t)
        if (trace_index[t] != SIZE_MAX) trace_[trace_index[t]].r_c = tr.r_c[tr.at(t, 0)];
  }
  if (config_.algo == Algo::rnd) {
    const std::vector<Real> ri = baselines::rnd_bonus(nets_.rnd, snap.rnd, tr.next_obs, n);
    for (std::size_t i = 0; i < n; ++i) tr.r_i[i] = ri[i];
  }
  return tr;
}

}  // namespace learner
CSG_NAMESPACE_END
