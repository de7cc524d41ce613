#include <cmath>
#include <random>

#include "doctest.h"
#include "csg/agent/agent.hpp"
#include "csg/autodiff/ops.hpp"

using namespace csg;
using namespace csg::agent;

namespace {

constexpr int kView = 5;

std::vector<int> random_obs(std::mt19937_64& rng, int tiles) {
  std::uniform_int_distribution<int> d(0, kVocab - 1);
  std::vector<int> v(static_cast<std::size_t>(tiles));
  for (int& x : v) x = d(rng);
  return v;
}

grid::Observation observe_carrying(bool carrying) {
  grid::GridState s = grid::generate(11, 6);
  if (carrying) s.carried = grid::TileSymbol::key();
  return grid::observe(s, kView);
}

TraceRecord rec(int episode, int step, int id, TraceEvent e, int steps_on_goal, bool done = false) {
  TraceRecord r;
  r.episode = episode;
  r.step = step;
  r.subgoal_id = id;
  r.subgoal_text = "x";
  r.event = e;
  r.steps_on_goal = steps_on_goal;
  r.done = done;
  return r;
}

}  // namespace

TEST_CASE("verify_goal on a carried key") {
  const grid::Observation with = observe_carrying(true);
  const grid::Observation without = observe_carrying(false);
  const SubGoal g{with.agent_cell(), 3, false};
  CHECK(verify_goal(with, g) == 1);
  CHECK(verify_goal(without, g) == 0);
}

TEST_CASE("verify_goal matches a brute-force scan") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::vector<int> obs = random_obs(rng, kView * kView);
    int total = 0, scan = 0;
    for (int pos = 0; pos < kView * kView; ++pos)
      for (int v = 0; v < kVocab; ++v) {
        const SubGoal g{pos, v, false};
        const int a = verify_goal(obs, g);
        CHECK(a == verify_goal(obs, g));
        total += a;
        scan += obs[static_cast<std::size_t>(pos)] == v;
      }
    REQUIRE(total == scan);
    REQUIRE(total == kView * kView);
  }
}

TEST_CASE("goal_reward") {
  const std::vector<int> obs(25, 1);
  GoalRewardConfig c;
  CHECK(goal_reward(obs, {0, 1, false}, c) == Real(1));
  CHECK(goal_reward(obs, {0, 2, false}, c) == Real(0));
  c.r = Real(0.5);
  CHECK(goal_reward(obs, {0, 1, false}, c) == Real(0.5));
  // The environment goal also counts when the episode ends on the goal tile.
  CHECK(goal_reward(obs, env_goal(kView), c, true) == Real(0.5));
  CHECK(goal_reward(obs, env_goal(kView), c, false) == Real(0));
}

TEST_CASE("config validation") {
  GoalRewardConfig c;
  CHECK_NOTHROW(c.validate());
  c.gamma = 1;
  CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("gamma"), std::invalid_argument);
  c = {};
  c.abandon_limit = 0;
  CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("abandon_limit"), std::invalid_argument);
}

TEST_CASE("lifecycle") {
  GoalRewardConfig c;
  c.abandon_limit = 20;
  const std::vector<int> miss(25, 1);
  std::vector<int> hit(25, 1);
  hit[7] = 3;
  const SubGoal g{7, 3, false};

  SUBCASE("never verified is abandoned after exactly the limit") {
    SubGoalStatus s = SubGoalStatus::fresh();
    for (int i = 1; i < 20; ++i) {
      s = update_lifecycle(s, miss, g, c);
      REQUIRE(s == SubGoalStatus{Status::active, i});
    }
    s = update_lifecycle(s, miss, g, c);
    CHECK(s == SubGoalStatus{Status::abandoned, 20});
    CHECK_THROWS_AS(update_lifecycle(s, miss, g, c), std::logic_error);
  }
  SUBCASE("reached wins on the limit step") {
    SubGoalStatus s{Status::active, 19};
    CHECK(update_lifecycle(s, hit, g, c) == SubGoalStatus{Status::reached, 20});
  }
  SUBCASE("reached at step 3") {
    SubGoalStatus s = SubGoalStatus::fresh();
    s = update_lifecycle(s, miss, g, c);
    s = update_lifecycle(s, miss, g, c);
    s = update_lifecycle(s, hit, g, c);
    CHECK(s == SubGoalStatus{Status::reached, 3});
  }
  SUBCASE("only active goals advance") {
    CHECK_THROWS_AS(update_lifecycle({}, miss, g, c), std::logic_error);
  }
}

TEST_CASE("step rewards") {
  CHECK(navigator_step_reward(Real(1), Real(0.2)) == doctest::Approx(1.2));
  CHECK(navigator_step_reward(0, 0) == Real(0));
  CHECK(subgoal_step_reward(Real(0.3), Real(0.7), 1, Real(0.5)) == doctest::Approx(1.0));
  CHECK(subgoal_step_reward(Real(0.3), Real(0.7), 0, Real(0)) == doctest::Approx(0.3));
  CHECK(subgoal_step_reward(Real(0.1), Real(0.9), 0, Real(1)) == doctest::Approx(0.55));
}

TEST_CASE("discounted reward sums match a hand expansion") {
  // Three steps, gamma 0.99: goal reached on the last step, extrinsic 0.9 there.
  const double gamma = 0.99;
  const Real r_g[3] = {0, 0, 1};
  const Real r_c[3] = {Real(0.1), Real(0.2), Real(0.05)};
  const Real r_e[3] = {0, 0, Real(0.9)};
  const int v[3] = {0, 0, 1};
  double nav = 0, sg = 0, discount = 1;
  for (int t = 0; t < 3; ++t) {
    nav += discount * navigator_step_reward(r_g[t], r_c[t]);
    sg += discount * subgoal_step_reward(r_c[t], r_e[t], v[t], Real(0.5));
    discount *= gamma;
  }
  // 0.1 + 0.99 * 0.2 + 0.9801 * 1.05
  CHECK(nav == doctest::Approx(1.327105).epsilon(1e-6));
  // 0.1 + 0.99 * 0.2 + 0.9801 * 0.95
  CHECK(sg == doctest::Approx(1.229095).epsilon(1e-6));
}

TEST_CASE("subgoal encoding") {
  const SubGoal g0 = env_goal(kView);
  CHECK(g0.pos == 14);
  CHECK(g0.value == 7);
  CHECK(g0.is_env_goal);
  CHECK(decode_goal(g0.index(), kView) == g0);
  for (int i = 0; i < kView * kView * kVocab; ++i) {
    const SubGoal g = decode_goal(i, kView);
    REQUIRE(g.pos < kView * kView);
    REQUIRE(g.value < kVocab);
    REQUIRE(g.index() == i);
    REQUIRE(g.is_env_goal == (i == g0.index()));
  }
  CHECK_THROWS_AS(decode_goal(200, kView), std::out_of_range);
}

TEST_CASE("describe_subgoal") {
  CHECK(describe_subgoal({14, 3, false}, kView) == "pick up the yellow key");
  CHECK(describe_subgoal({13, 6, false}, kView) == "go to the locked yellow door");
  CHECK(describe_subgoal({14, 7, false}, kView) == "go to the green goal");
  CHECK(describe_subgoal(env_goal(kView), kView) == "go to the green goal (pursue environment goal)");
  CHECK(describe_subgoal({13, 2, false}, kView) == "face the wall");
  CHECK(describe_subgoal({14, 1, false}, kView) == "stand on an empty cell");
  CHECK(describe_subgoal({0, 5, false}, kView) == "make cell (1,1) become closed yellow door");
  CHECK(describe_subgoal({24, 1, false}, kView) == "make cell (5,5) become empty cell");
}

TEST_CASE("navigator forward is deterministic, finite and near uniform at init") {
  ad::Rng rng(5);
  ParamSet params;
  const PolicyNet net = PolicyNet::create({}, params, rng);
  std::mt19937_64 gen(9);
  std::uniform_int_distribution<int> pos(0, kView * kView - 1), val(0, kVocab - 1);
  const RecurrentState zero = RecurrentState::zeros(1, 128);

  const std::vector<int> obs = random_obs(gen, 25);
  const NavigatorStep a = navigator_act(net, params, obs, {3, 4, false}, zero);
  const NavigatorStep b = navigator_act(net, params, obs, {3, 4, false}, zero);
  CHECK(a.logits == b.logits);
  CHECK(a.value == b.value);
  REQUIRE(a.logits.size() == 6);

  // Batched pass over 10k random inputs.
  constexpr std::size_t kBatch = 1000;
  double entropy = 0;
  for (int round = 0; round < 10; ++round) {
    std::vector<int> tiles, gp, gv;
    for (std::size_t i = 0; i < kBatch; ++i) {
      const std::vector<int> o = random_obs(gen, 25);
      tiles.insert(tiles.end(), o.begin(), o.end());
      gp.push_back(pos(gen));
      gv.push_back(val(gen));
    }
    ad::NoGradGuard guard;
    const PolicyOutput out = net.forward(params, tiles, gp, gv, RecurrentState::zeros(kBatch, 128));
    for (Real x : out.logits.data()) REQUIRE(std::isfinite(x));
    for (Real x : out.value.data()) REQUIRE(std::isfinite(x));
    for (std::size_t i = 0; i < kBatch; ++i) entropy += entropy_of(out.logits.data().subspan(i * 6, 6));
  }
  entropy /= 10.0 * kBatch;
  CHECK(std::abs(entropy - std::log(6.0)) < 0.05 * std::log(6.0));
}

TEST_CASE("recurrent state rows round-trip") {
  ad::Rng rng(1);
  RecurrentState s = RecurrentState::zeros(2, 3);
  for (Tensor* t : {&s.h1, &s.c1, &s.h2, &s.c2})
    for (Real& x : t->data()) x = Real(std::uniform_real_distribution<double>(-1, 1)(rng));
  const RecurrentState back = RecurrentState::from_rows({s.row(0), s.row(1)}, 3);
  CHECK(back.row(0) == s.row(0));
  CHECK(back.row(1) == s.row(1));
  CHECK_THROWS_AS(RecurrentState::from_rows({std::vector<Real>(5)}, 3), std::invalid_argument);
}

TEST_CASE("subgoal proposals") {
  ad::Rng rng(7);
  ParamSet params;
  PolicyNetConfig cfg;
  cfg.head = kView * kView * kVocab;
  const PolicyNet sg = PolicyNet::create(cfg, params, rng);
  const SubGoal g0 = env_goal(kView);
  std::mt19937_64 gen(2);
  const std::vector<int> obs = random_obs(gen, 25);
  const RecurrentState zero = RecurrentState::zeros(1, 128);

  SUBCASE("errors while a goal is active") {
    CHECK_THROWS_AS(propose_subgoal(sg, params, obs, g0, zero, SubGoalStatus::fresh(), rng), std::logic_error);
    CHECK_NOTHROW(propose_subgoal(sg, params, obs, g0, zero, {Status::reached, 4}, rng));
    CHECK_NOTHROW(propose_subgoal(sg, params, obs, g0, zero, {Status::abandoned, 25}, rng));
  }
  SUBCASE("range and forced environment goal") {
    for (int i = 0; i < 200; ++i) {
      const Proposal p = propose_subgoal(sg, params, obs, g0, zero, {}, rng);
      REQUIRE(p.goal.pos < 25);
      REQUIRE(p.goal.value < 8);
      REQUIRE(std::isfinite(p.log_prob));
    }
    params.at("policy.b").data()[static_cast<std::size_t>(g0.index())] = 100;
    const Proposal p = propose_subgoal(sg, params, obs, g0, zero, {}, rng);
    CHECK(p.goal == g0);
    CHECK(p.goal.is_env_goal);
    CHECK(p.log_prob > Real(-1e-3));
  }
  SUBCASE("sampling frequencies follow the softmax") {
    // Sharpen the logits so the distribution is far from uniform.
    for (Real& w : params.at("policy.b").data()) w = Real(std::normal_distribution<double>(0, 2)(gen));
    const NavigatorStep out = navigator_act(sg, params, obs, g0, zero);
    const std::vector<Real> p = ad::softmax_values(out.logits);
    std::vector<int> counts(p.size());
    constexpr int kDraws = 100000;
    for (int i = 0; i < kDraws; ++i) ++counts[static_cast<std::size_t>(sample_categorical(out.logits, rng))];
    double worst = 0;
    for (std::size_t i = 0; i < p.size(); ++i)
      worst = std::max(worst, std::abs(counts[i] / double(kDraws) - double(p[i])));
    CHECK(worst < 0.01);
    for (std::size_t i = 0; i < p.size(); ++i)
      REQUIRE(std::exp(double(log_prob_at(out.logits, static_cast<int>(i)))) == doctest::Approx(double(p[i])).epsilon(1e-4));
  }
}

TEST_CASE("trace events") {
  CHECK(trace_event(true, {Status::active, 1}) == TraceEvent::proposed);
  CHECK(trace_event(false, {Status::active, 2}) == TraceEvent::active);
  CHECK(trace_event(true, {Status::reached, 1}) == TraceEvent::reached);
  CHECK(trace_event(false, {Status::abandoned, 25}) == TraceEvent::abandoned);
  for (TraceEvent e : {TraceEvent::proposed, TraceEvent::active, TraceEvent::reached, TraceEvent::abandoned,
                       TraceEvent::none})
    CHECK(event_from_name(event_name(e)) == e);
  CHECK_THROWS_AS(event_from_name("bogus"), std::invalid_argument);
}

TEST_CASE("trace validator") {
  const int limit = 3;
  std::vector<TraceRecord> good = {
      rec(0, 1, 0, TraceEvent::proposed, 1),  rec(0, 2, 0, TraceEvent::active, 2),
      rec(0, 3, 0, TraceEvent::abandoned, 3), rec(0, 4, 1, TraceEvent::reached, 1),
      rec(0, 5, 2, TraceEvent::proposed, 1),  rec(0, 6, 2, TraceEvent::active, 2, true),
      rec(1, 1, 3, TraceEvent::proposed, 1),  rec(1, 2, 3, TraceEvent::reached, 2, true),
  };
  CHECK(validate_trace(good, limit).empty());

  auto broken = [&](auto mutate) {
    std::vector<TraceRecord> t = good;
    mutate(t);
    return validate_trace(t, limit);
  };
  CHECK(broken([](auto& t) { t[1].subgoal_id = 9; }).find("changed") != std::string::npos);
  CHECK(broken([](auto& t) { t[1].event = TraceEvent::proposed; }).find("proposal") != std::string::npos);
  CHECK(broken([](auto& t) { t[2].event = TraceEvent::active; }).find("limit") != std::string::npos);
  CHECK(broken([](auto& t) { t[1].event = TraceEvent::abandoned; }).find("before the limit") != std::string::npos);
  CHECK(broken([](auto& t) { t[3].subgoal_id = 0; }).find("fresh id") != std::string::npos);
  CHECK(broken([](auto& t) { t[3].event = TraceEvent::active; }).find("marked active") != std::string::npos);
  CHECK(broken([](auto& t) { t[2].steps_on_goal = 4; }).find("advance") != std::string::npos);
  CHECK(broken([](auto& t) { t[5].done = false; }).find("done") != std::string::npos);
  CHECK(broken([](auto& t) { t[4].step = 7; }).find("step") != std::string::npos);
  CHECK(broken([](auto& t) { t[6].event = TraceEvent::none; }).find("none") != std::string::npos);

  // Baseline traces carry no subgoal machinery.
  std::vector<TraceRecord> plain = {rec(0, 1, -1, TraceEvent::none, 0), rec(0, 2, -1, TraceEvent::none, 0, true)};
  CHECK(validate_trace(plain, limit).empty());
  plain[0].event = TraceEvent::active;
  CHECK_FALSE(validate_trace(plain, limit).empty());
}
