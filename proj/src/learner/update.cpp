#include "csg/learner/update.hpp"

#include <cmath>
#include <stdexcept>

#include "csg/autodiff/ops.hpp"

CSG_NAMESPACE_BEGIN
namespace learner {

using namespace ad;

void SequenceBatch::validate() const {
  auto need = [](std::size_t got, std::size_t want, const char* what) {
    if (got != want)
      throw std::invalid_argument(std::string("sequence batch: ") + what + " holds " + std::to_string(got) +
                                  ", expected " + std::to_string(want));
  };
  const std::size_t n = T * B, n1 = (T + 1) * B;
  need(tiles_in.size(), n1 * tiles, "tiles_in");
  need(goal_pos.size(), n1, "goal_pos");
  need(goal_value.size(), n1, "goal_value");
  need(reset.size(), n1, "reset");
  need(mask.size(), n, "mask");
  need(actions.size(), n, "actions");
  need(behavior_logp.size(), n, "behavior_logp");
  need(rewards.size(), n, "rewards");
  need(discounts.size(), n, "discounts");
  need(initial_state.size(), B, "initial_state");
}

SequenceBatch navigator_batch(const Trajectory& tr, std::vector<double> rewards, std::vector<double> discounts) {
  SequenceBatch s;
  s.T = tr.T;
  s.B = tr.B;
  s.tiles = tr.tiles;
  s.tiles_in = tr.obs;
  s.goal_pos = tr.goal_pos;
  s.goal_value = tr.goal_value;
  s.reset = tr.reset;
  s.mask.assign(tr.T * tr.B, Real(1));
  s.actions = tr.actions;
  s.behavior_logp = tr.behavior_logp;
  s.rewards = std::move(rewards);
  s.discounts = std::move(discounts);
  s.initial_state = tr.initial_state;
  s.validate();
  return s;
}

std::vector<double> navigator_rewards(const Trajectory& tr, Algo algo, double rnd_std) {
  std::vector<double> r(tr.T * tr.B);
  for (std::size_t i = 0; i < r.size(); ++i) {
    switch (algo) {
      case Algo::csg: r[i] = agent::navigator_step_reward(static_cast<Real>(tr.r_g[i]), static_cast<Real>(tr.r_c[i])); break;
      case Algo::vanilla: r[i] = tr.r_e[i]; break;
      case Algo::rnd: r[i] = tr.r_e[i] + tr.r_i[i] / (rnd_std > 0 ? rnd_std : 1.0); break;
    }
  }
  return r;
}

std::vector<double> navigator_discounts(const Trajectory& tr, double gamma, bool cut_at_subgoal) {
  std::vector<double> d(tr.T * tr.B);
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = tr.done[i] || (cut_at_subgoal && tr.goal_end[i]) ? 0.0 : gamma;
  return d;
}

SequenceBatch subgoal_batch(const Trajectory& tr, int view) {
  std::vector<std::size_t> envs;
  std::size_t longest = 0;
  for (std::size_t b = 0; b < tr.sg.size(); ++b)
    if (!tr.sg[b].decisions.empty()) {
      envs.push_back(b);
      longest = std::max(longest, tr.sg[b].decisions.size());
    }
  SequenceBatch s;
  s.T = longest;
  s.B = envs.size();
  s.tiles = tr.tiles;
  const agent::SubGoal g0 = agent::env_goal(view);
  const std::size_t n1 = (s.T + 1) * s.B;
  s.tiles_in.assign(n1 * s.tiles, 1);
  s.goal_pos.assign(n1, g0.pos);
  s.goal_value.assign(n1, g0.value);
  s.reset.assign(n1, 0);
  s.mask.assign(s.T * s.B, Real(0));
  s.actions.assign(s.T * s.B, 0);
  s.behavior_logp.assign(s.T * s.B, 0.0);
  s.rewards.assign(s.T * s.B, 0.0);
  s.discounts.assign(s.T * s.B, 0.0);
  for (std::size_t j = 0; j < envs.size(); ++j) {
    const SgChunk& c = tr.sg[envs[j]];
    s.initial_state.push_back(c.initial_state);
    for (std::size_t k = 0; k <= s.T; ++k) {
      const std::size_t i = k * s.B + j;
      const std::vector<int>* obs = nullptr;
      if (k < c.decisions.size()) {
        const SgDecision& d = c.decisions[k];
        obs = &d.obs;
        s.reset[i] = d.episode_start ? 1 : 0;
        s.mask[i] = 1;
        s.actions[i] = d.choice;
        s.behavior_logp[i] = d.behavior_logp;
        s.rewards[i] = d.reward;
        s.discounts[i] = d.discount;
      } else if (k == c.decisions.size()) {
        obs = &c.next_obs;
        s.reset[i] = c.next_episode_start ? 1 : 0;
      }
      if (obs) std::copy(obs->begin(), obs->end(), s.tiles_in.begin() + static_cast<std::ptrdiff_t>(i * s.tiles));
    }
  }
  s.validate();
  return s;
}

Tensor actor_critic_objective(const agent::PolicyNet& net, const ParamSet& params, const SequenceBatch& batch,
                              const VtraceConfig& config, const ActorCriticTargets* frozen, LossReport* report,
                              ActorCriticTargets* targets_out) {
  batch.validate();
  LossReport rep;
  if (batch.B == 0 || batch.T == 0) {
    if (report) *report = rep;
    return Tensor::scalar(0);
  }
  const std::size_t T = batch.T, B = batch.B, tiles = batch.tiles;
  const std::size_t hidden = static_cast<std::size_t>(net.config().hidden);
  const std::size_t head = static_cast<std::size_t>(net.config().head);

  agent::RecurrentState state = agent::RecurrentState::from_rows(batch.initial_state, hidden);
  std::vector<Tensor> log_probs, values;
  std::vector<double> bootstrap(B);
  for (std::size_t t = 0; t <= T; ++t) {
    std::vector<Real> keep(B);
    for (std::size_t b = 0; b < B; ++b) keep[b] = batch.reset[t * B + b] ? Real(0) : Real(1);
    const LstmState l1 = mask_rows({state.h1, state.c1}, keep);
    const LstmState l2 = mask_rows({state.h2, state.c2}, keep);
    state = {l1.h, l1.c, l2.h, l2.c};
    const std::span<const int> tiles_t(batch.tiles_in.data() + t * B * tiles, B * tiles);
    const std::span<const int> pos_t(batch.goal_pos.data() + t * B, B);
    const std::span<const int> val_t(batch.goal_value.data() + t * B, B);
    if (t == T) {
      NoGradGuard guard;
      const agent::PolicyOutput out = net.forward(params, tiles_t, pos_t, val_t, state);
      for (std::size_t b = 0; b < B; ++b) bootstrap[b] = out.value.data()[b];
      break;
    }
    agent::PolicyOutput out = net.forward(params, tiles_t, pos_t, val_t, state);
    log_probs.push_back(log_softmax(out.logits));
    values.push_back(out.value);
    state = out.state;
  }

  // V-trace per sequence, evaluated with the current (target) policy.
  std::vector<double> vs(T * B), adv(T * B);
  if (frozen) {
    if (frozen->vs.size() != T * B || frozen->pg_adv.size() != T * B)
      throw std::invalid_argument("frozen targets do not match the batch");
    vs = frozen->vs;
    adv = frozen->pg_adv;
  }
  for (std::size_t b = 0; b < B && !frozen; ++b) {
    std::vector<double> mu, pi, r, v, d;
    for (std::size_t t = 0; t < T; ++t) {
      const std::size_t i = t * B + b;
      if (batch.mask[i] == 0) break;
      mu.push_back(batch.behavior_logp[i]);
      pi.push_back(log_probs[t].data()[b * head + static_cast<std::size_t>(batch.actions[i])]);
      r.push_back(batch.rewards[i]);
      v.push_back(values[t].data()[b]);
      d.push_back(batch.discounts[i]);
    }
    if (mu.empty()) continue;
    // A padded tail bootstraps from the step after the last real one.
    const std::size_t len = mu.size();
    const double boot = len == T ? bootstrap[b] : values[len].data()[b];
    const VtraceOutput o = vtrace_targets(mu, pi, r, v, d, boot, config.rho_bar, config.c_bar);
    for (std::size_t t = 0; t < len; ++t) {
      vs[t * B + b] = o.vs[t];
      adv[t * B + b] = o.pg_adv[t];
    }
  }

  Tensor policy_loss = Tensor::scalar(0), baseline_loss = Tensor::scalar(0), entropy_loss = Tensor::scalar(0);
  for (std::size_t t = 0; t < T; ++t) {
    std::vector<Real> adv_t(B), vs_t(B), mask_t(B);
    std::vector<int> act_t(B);
    for (std::size_t b = 0; b < B; ++b) {
      const std::size_t i = t * B + b;
      mask_t[b] = batch.mask[i];
      adv_t[b] = static_cast<Real>(adv[i]) * mask_t[b];
      vs_t[b] = static_cast<Real>(vs[i]);
      act_t[b] = batch.actions[i];
    }
    const Tensor m = Tensor::from({B, 1}, mask_t);
    const Tensor lp_a = gather_cols(log_probs[t], act_t);
    policy_loss = policy_loss - sum(lp_a * Tensor::from({B, 1}, adv_t));
    baseline_loss = baseline_loss + sum(square(values[t] - Tensor::from({B, 1}, vs_t)) * m);
    entropy_loss = entropy_loss + sum(row_sum(exp(log_probs[t]) * log_probs[t]) * m);
  }
  const Tensor loss = Real(config.policy_weight) * policy_loss + Real(config.baseline_weight) * baseline_loss +
                      Real(config.entropy_weight) * entropy_loss;
  rep.policy = policy_loss.item();
  rep.baseline = baseline_loss.item();
  rep.entropy = entropy_loss.item();
  rep.total = loss.item();
  if (report) *report = rep;
  if (targets_out) *targets_out = {std::move(vs), std::move(adv)};
  return loss;
}

LossReport actor_critic_loss(const agent::PolicyNet& net, ParamSet& params, const SequenceBatch& batch,
                             const VtraceConfig& config, Tensor* loss_out) {
  LossReport rep;
  const Tensor loss = actor_critic_objective(net, params, batch, config, nullptr, &rep);
  if (batch.B == 0 || batch.T == 0) return rep;
  if (!std::isfinite(rep.total)) throw std::runtime_error("actor-critic loss is not finite");
  params.zero_grad();
  loss.backward();
  if (loss_out) *loss_out = loss;
  return rep;
}

LossReport actor_critic_update(const agent::PolicyNet& net, ParamSet& params, Optimizer& opt,
                               const SequenceBatch& batch, const VtraceConfig& config) {
  LossReport rep = actor_critic_loss(net, params, batch, config);
  if (batch.B == 0 || batch.T == 0) return rep;
  rep.grad_norm = opt.step(params);
  return rep;
}

}  // namespace learner
CSG_NAMESPACE_END
