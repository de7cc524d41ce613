#include <cmath>
#include <random>
#include <set>
#include <thread>

#include "doctest.h"
#include "csg/learner/queue.hpp"
#include "csg/learner/train.hpp"

using namespace csg;
using namespace csg::learner;

namespace {

// v_s = V(x_s) + sum_{t>=s} (prod_{s<=i<t} d_i c_i) rho_t delta_t, summed
// directly rather than by the backward recursion.
std::vector<double> naive_vs(const std::vector<double>& mu, const std::vector<double>& pi, const std::vector<double>& r,
                             const std::vector<double>& v, const std::vector<double>& d, double boot, double rho_bar,
                             double c_bar) {
  const std::size_t n = r.size();
  std::vector<double> out(n);
  for (std::size_t s = 0; s < n; ++s) {
    double total = v[s];
    for (std::size_t t = s; t < n; ++t) {
      double trace = 1;
      for (std::size_t i = s; i < t; ++i) trace *= d[i] * std::min(c_bar, std::exp(pi[i] - mu[i]));
      const double next = t + 1 < n ? v[t + 1] : boot;
      total += trace * std::min(rho_bar, std::exp(pi[t] - mu[t])) * (r[t] + d[t] * next - v[t]);
    }
    out[s] = total;
  }
  return out;
}

struct RandomSeq {
  std::vector<double> mu, pi, r, v, d;
  double boot = 0;
};

RandomSeq random_seq(std::mt19937_64& rng, std::size_t n, bool on_policy) {
  std::normal_distribution<double> g(0, 1);
  std::uniform_real_distribution<double> u(0, 1);
  RandomSeq s;
  for (std::size_t i = 0; i < n; ++i) {
    s.mu.push_back(-std::abs(g(rng)) - 0.1);
    s.pi.push_back(on_policy ? s.mu.back() : s.mu.back() + 0.7 * g(rng));
    s.r.push_back(g(rng));
    s.v.push_back(g(rng));
    s.d.push_back(u(rng) < 0.2 ? 0.0 : 0.99);
  }
  s.boot = g(rng);
  return s;
}

// Bandit: constant observation, two actions, action 0 pays 1.
struct Bandit {
  agent::PolicyNet net;
  ParamSet params;

  explicit Bandit(std::uint64_t seed) {
    agent::PolicyNetConfig c;
    c.view = 3;
    c.embed = 4;
    c.hidden = 16;
    c.head = 2;
    c.goal_conditioned = false;
    Rng rng(seed);
    net = agent::PolicyNet::create(c, params, rng);
    for (auto& [name, t] : params) t.set_requires_grad(true);
  }

  std::vector<Real> logits(const ParamSet& p) const {
    ad::NoGradGuard guard;
    const std::vector<int> tiles(9, 1);
    const Tensor l = net.forward(p, tiles, {}, {}, agent::RecurrentState::zeros(1, 16)).logits;
    return std::vector<Real>(l.data().begin(), l.data().end());
  }
  double p0(const ParamSet& p) const { return ad::softmax_values(logits(p))[0]; }

  SequenceBatch batch(const ParamSet& behavior, Rng* rng, std::size_t rows) const {
    const std::vector<Real> l = logits(behavior);
    SequenceBatch b;
    b.T = 1;
    b.B = rows;
    b.tiles = 9;
    b.tiles_in.assign(2 * rows * 9, 1);
    b.goal_pos.assign(2 * rows, 0);
    b.goal_value.assign(2 * rows, 0);
    b.reset.assign(2 * rows, 1);
    b.mask.assign(rows, Real(1));
    b.discounts.assign(rows, 0.0);
    b.initial_state.assign(rows, std::vector<Real>(64, Real(0)));
    // Deterministic rollouts: action counts follow the behavior
    // probabilities exactly (stratified), unless `rng` is supplied.
    const double p0 = ad::softmax_values(l)[0];
    // Both arms always appear so the batch never loses its signal.
    const std::size_t n0 = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::lround(p0 * static_cast<double>(rows))), 1, rows - 1);
    for (std::size_t i = 0; i < rows; ++i) {
      const int a = rng ? agent::sample_categorical(l, *rng) : (i < n0 ? 0 : 1);
      b.actions.push_back(a);
      b.behavior_logp.push_back(agent::log_prob_at(l, a));
      b.rewards.push_back(a == 0 ? 1.0 : 0.0);
    }
    return b;
  }
};

AgentConfig small_agent(Algo algo) {
  AgentConfig a;
  a.algo = algo;
  a.hidden = 32;
  a.gan.hidden = 16;
  a.gan.k_samples = 4;
  a.rnd.hidden = 16;
  a.rnd.feature_dim = 8;
  return a;
}

}  // namespace

TEST_CASE("vtrace matches a direct-sum oracle on random sequences") {
  std::mt19937_64 rng(42);
  double worst = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const RandomSeq s = random_seq(rng, 5, false);
    const VtraceOutput o = vtrace_targets(s.mu, s.pi, s.r, s.v, s.d, s.boot, 1.0, 1.0);
    const std::vector<double> want = naive_vs(s.mu, s.pi, s.r, s.v, s.d, s.boot, 1.0, 1.0);
    for (std::size_t i = 0; i < 5; ++i) {
      worst = std::max(worst, std::abs(o.vs[i] - want[i]));
      const double next = i + 1 < 5 ? want[i + 1] : s.boot;
      const double adv = std::min(1.0, std::exp(s.pi[i] - s.mu[i])) * (s.r[i] + s.d[i] * next - s.v[i]);
      worst = std::max(worst, std::abs(o.pg_adv[i] - adv));
    }
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("vtrace with wider clips matches the oracle") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    const RandomSeq s = random_seq(rng, 6, false);
    const VtraceOutput o = vtrace_targets(s.mu, s.pi, s.r, s.v, s.d, s.boot, 2.0, 1.5);
    const std::vector<double> want = naive_vs(s.mu, s.pi, s.r, s.v, s.d, s.boot, 2.0, 1.5);
    for (std::size_t i = 0; i < 6; ++i) REQUIRE(std::abs(o.vs[i] - want[i]) < 1e-10);
  }
}

TEST_CASE("on-policy vtrace equals n-step bootstrapped returns") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const RandomSeq s = random_seq(rng, 5, true);
    const VtraceOutput o = vtrace_targets(s.mu, s.pi, s.r, s.v, s.d, s.boot, 1.0, 1.0);
    for (std::size_t k = 0; k < 5; ++k) {
      double g = 0, discount = 1;
      for (std::size_t t = k; t < 5; ++t) {
        g += discount * s.r[t];
        discount *= s.d[t];
      }
      g += discount * s.boot;
      REQUIRE(std::abs(o.vs[k] - g) < 1e-10);
    }
  }
}

TEST_CASE("single-step vtrace") {
  const std::vector<double> mu{-1.0}, pi{-0.5}, r{2.0}, v{0.5}, d{0.9};
  const VtraceOutput o = vtrace_targets(mu, pi, r, v, d, 3.0, 1.0, 1.0);
  const double rho = std::min(1.0, std::exp(0.5));
  CHECK(o.vs[0] == doctest::Approx(0.5 + rho * (2.0 + 0.9 * 3.0 - 0.5)).epsilon(1e-12));
}

TEST_CASE("rewards after a done never reach earlier targets") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 50; ++trial) {
    RandomSeq s = random_seq(rng, 6, false);
    s.d[2] = 0;
    const VtraceOutput a = vtrace_targets(s.mu, s.pi, s.r, s.v, s.d, s.boot, 1.0, 1.0);
    for (std::size_t i = 3; i < 6; ++i) s.r[i] = 1e6;
    s.v[3] += 50;
    s.boot = -1e6;
    const VtraceOutput b = vtrace_targets(s.mu, s.pi, s.r, s.v, s.d, s.boot, 1.0, 1.0);
    for (std::size_t i = 0; i < 3; ++i) {
      REQUIRE(a.vs[i] == b.vs[i]);
      REQUIRE(a.pg_adv[i] == b.pg_adv[i]);
    }
  }
}

TEST_CASE("vtrace rejects misaligned input and bad configs") {
  const std::vector<double> one{0.0}, two{0.0, 0.0};
  CHECK_THROWS_AS(vtrace_targets(one, one, two, one, one, 0, 1, 1), std::invalid_argument);
  VtraceConfig c;
  c.rho_bar = 0.5;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  const std::vector<unsigned char> done{0, 1, 0};
  CHECK(discounts_from_dones(done, 0.9) == std::vector<double>{0.9, 0.0, 0.9});
}

TEST_CASE("exact baselines and zero advantages leave only the entropy term") {
  Bandit bandit(3);
  Rng rng(1);
  SequenceBatch b = bandit.batch(bandit.params, &rng, 8);
  double value;
  {
    ad::NoGradGuard guard;
    const std::vector<int> tiles(9, 1);
    value = bandit.net.forward(bandit.params, tiles, {}, {}, agent::RecurrentState::zeros(1, 16)).value.item();
  }
  for (double& r : b.rewards) r = value;
  const LossReport rep = actor_critic_loss(bandit.net, bandit.params, b, VtraceConfig{});
  CHECK(std::abs(rep.policy) < 1e-5);
  CHECK(std::abs(rep.baseline) < 1e-8);
  CHECK(rep.entropy < -0.1);
  CHECK(rep.total == doctest::Approx(0.01 * rep.entropy).epsilon(1e-3));
}

TEST_CASE("bandit: the rewarded action gains probability every update") {
  Bandit bandit(4);
  ad::Optimizer opt({ad::OptimizerAlgo::rmsprop, Real(2e-3), Real(0.9), Real(0.999), Real(0.99), Real(0.01), Real(40)});
  VtraceConfig vc;
  vc.entropy_weight = 0;
  double prev = bandit.p0(bandit.params);
  const double start = prev;
  int drops = 0;
  for (int k = 0; k < 100; ++k) {
    actor_critic_update(bandit.net, bandit.params, opt, bandit.batch(bandit.params, nullptr, 32), vc);
    const double p = bandit.p0(bandit.params);
    drops += p < prev;
    prev = p;
  }
  MESSAGE("p(rewarded) " << start << " -> " << prev);
  CHECK(drops == 0);
  CHECK(prev > 0.9);
}

TEST_CASE("bandit: stale behavior snapshots still solve it") {
  for (int lag : {1, 2, 4}) {
    Bandit bandit(6);
    ad::Optimizer opt({ad::OptimizerAlgo::rmsprop, Real(2e-3), Real(0.9), Real(0.999), Real(0.99), Real(0.01), Real(40)});
    VtraceConfig vc;
    vc.entropy_weight = 0;
    Rng rng(10);
    std::deque<ParamSet> history{bandit.params.clone()};
    for (int k = 0; k < 150; ++k) {
      const ParamSet& behavior = history.front();
      actor_critic_update(bandit.net, bandit.params, opt, bandit.batch(behavior, &rng, 32), vc);
      history.push_back(bandit.params.clone());
      if (history.size() > static_cast<std::size_t>(lag) + 1) history.pop_front();
    }
    CAPTURE(lag);
    CHECK(bandit.p0(bandit.params) > 0.9);
  }
}

TEST_CASE("loss reports are reproducible") {
  auto run = [] {
    Bandit bandit(11);
    ad::Optimizer opt({});
    Rng rng(2);
    std::vector<LossReport> out;
    for (int k = 0; k < 5; ++k)
      out.push_back(actor_critic_update(bandit.net, bandit.params, opt, bandit.batch(bandit.params, &rng, 8), {}));
    return out;
  };
  CHECK(run() == run());
}

TEST_CASE("rollouts: determinism, episode bounds and lifecycle grammar") {
  AgentConfig a = small_agent(Algo::csg);
  a.finalize();
  const Snapshot snap = initial_snapshot(a, 3);
  ActorOptions o;
  o.num_envs = 3;
  o.unroll = 60;
  o.record_trace = true;
  Actor x(a, o, 77), y(a, o, 77);
  std::vector<agent::TraceRecord> trace;
  for (int k = 0; k < 6; ++k) {
    const Trajectory tx = x.collect(snap);
    const Trajectory ty = y.collect(snap);
    CHECK_NOTHROW(tx.validate());
    REQUIRE(tx.actions == ty.actions);
    REQUIRE(tx.obs == ty.obs);
    REQUIRE(tx.r_c == ty.r_c);
    REQUIRE(tx.behavior_logp == ty.behavior_logp);
    for (const EpisodeSummary& e : tx.episodes) REQUIRE(e.length <= grid::default_step_limit(a.size));
    for (double r : tx.r_c) REQUIRE(r >= 0);
    for (const SgChunk& c : tx.sg)
      for (const SgDecision& d : c.decisions) {
        REQUIRE(d.accumulated == d.duration);
        REQUIRE(d.duration >= 1);
        REQUIRE(d.duration <= a.goal.abandon_limit);
        REQUIRE((d.discount == 0.0 || d.outcome != agent::Status::none));
      }
  }
  const std::string err = agent::validate_trace(x.trace(), a.goal.abandon_limit);
  CHECK_MESSAGE(err.empty(), err);
  CHECK(x.trace().size() == 360);
}

TEST_CASE("subgoal batches pad to the longest decision sequence") {
  AgentConfig a = small_agent(Algo::csg);
  a.goal.abandon_limit = 3;
  a.finalize();
  const Snapshot snap = initial_snapshot(a, 3);
  ActorOptions o;
  o.num_envs = 4;
  o.unroll = 20;
  Actor actor(a, o, 5);
  const Trajectory tr = actor.collect(snap);
  const SequenceBatch b = subgoal_batch(tr, a.view);
  CHECK_NOTHROW(b.validate());
  std::size_t real = 0;
  for (Real m : b.mask) real += m > 0;
  std::size_t decisions = 0;
  for (const SgChunk& c : tr.sg) decisions += c.decisions.size();
  CHECK(real == decisions);
  CHECK(decisions >= 4 * 20 / 3);
}

TEST_CASE("bounded queue delivers every item once and respects its bound") {
  BoundedQueue<int> q(3);
  std::vector<int> seen;
  std::thread consumer([&] {
    while (auto v = q.pop()) seen.push_back(*v);
  });
  std::vector<std::thread> producers;
  for (int p = 0; p < 3; ++p)
    producers.emplace_back([&, p] {
      for (int i = 0; i < 500; ++i) q.push(p * 1000 + i);
    });
  for (auto& t : producers) t.join();
  q.close();
  consumer.join();
  CHECK(seen.size() == 1500);
  CHECK(std::set<int>(seen.begin(), seen.end()).size() == 1500);
  CHECK(q.high_water() <= 3);
  CHECK(q.pushed() == q.popped());
  CHECK_FALSE(q.push(1));
}

TEST_CASE("deterministic training is reproducible") {
  TrainConfig c;
  c.agent = small_agent(Algo::csg);
  c.total_steps = 2400;
  c.actors = 2;
  c.envs_per_actor = 2;
  c.unroll = 20;
  c.log_interval = 400;
  c.deterministic = true;
  const TrainResult a = train(c);
  const TrainResult b = train(c);
  CHECK(a.rows.size() >= 6);
  CHECK(a.rows == b.rows);
  CHECK(a.snapshot->nav == b.snapshot->nav);
  CHECK(a.consumed == a.produced);
}

TEST_CASE("threaded training consumes every trajectory within the queue bound") {
  for (Algo algo : {Algo::vanilla, Algo::rnd, Algo::csg}) {
    TrainConfig c;
    c.agent = small_agent(algo);
    c.total_steps = 3000;
    c.actors = 3;
    c.envs_per_actor = 2;
    c.unroll = 20;
    c.queue_capacity = 2;
    const TrainResult r = train(c);
    CAPTURE(algo_name(algo));
    CHECK(r.produced == r.consumed);
    CHECK(r.queue_high_water <= 2);
    CHECK(r.env_steps >= 3000);
    CHECK(r.env_steps == static_cast<long>(r.consumed) * 40);
  }
}

TEST_CASE("agent checkpoints round-trip and reject mismatched shapes") {
  const auto dir = std::filesystem::temp_directory_path() / "csg_test_learner";
  std::filesystem::create_directories(dir);
  AgentConfig a = small_agent(Algo::csg);
  a.finalize();
  Snapshot s = initial_snapshot(a, 21);
  s.version = 7;
  save_agent_checkpoint(dir / "a.ckpt", a, s, 1234);
  const LoadedAgent back = load_agent_checkpoint(dir / "a.ckpt");
  CHECK(back.env_steps == 1234);
  CHECK(back.config.algo == Algo::csg);
  CHECK(back.config.hidden == 32);
  CHECK(back.snapshot.nav == s.nav);
  CHECK(back.snapshot.sg == s.sg);
  CHECK(back.snapshot.gan.flatten() == s.gan.flatten());
  CHECK(back.snapshot.version == 7);

  AgentConfig wrong = a;
  wrong.hidden = 16;
  save_agent_checkpoint(dir / "b.ckpt", wrong, s, 0);
  CHECK_THROWS_WITH_AS(load_agent_checkpoint(dir / "b.ckpt"), doctest::Contains("shape"), std::runtime_error);
  CHECK_THROWS_AS(load_agent_checkpoint(dir / "missing.ckpt"), std::runtime_error);
}

TEST_CASE("train config validation names the field") {
  TrainConfig c;
  c.unroll = 0;
  CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("unroll"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(algo_from_name("ppo"), doctest::Contains("ppo"), std::invalid_argument);
}
