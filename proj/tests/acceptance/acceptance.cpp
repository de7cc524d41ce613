// One PASS/FAIL line per acceptance criterion. Tolerances and budgets are
// pinned below; learning runs log progress to stderr.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gradients.hpp"
#include "csg/agent/agent.hpp"
#include "csg/baselines/rnd.hpp"
#include "csg/cli/commands.hpp"
#include "csg/gan/toy_env.hpp"
#include "csg/gridworld/gridworld.hpp"
#include "csg/learner/rollout.hpp"
#include "csg/learner/vtrace.hpp"
#include "../support/grid_oracles.hpp"
#include "../support/reference_gridworld.hpp"

using namespace csg;

namespace {

// Criterion 1
constexpr double kFdStep = 1e-5;
constexpr double kFdRelTol = 1e-4;
constexpr double kFdSeconds = 120;
// Criterion 2
constexpr int kVtraceSequences = 200;
constexpr int kVtraceLength = 5;
constexpr double kVtraceTol = 1e-10;
constexpr double kVtraceSeconds = 10;
// Criterion 3
constexpr int kLayoutsPerSize = 1000;
constexpr int kInvariantSteps = 40;
constexpr int kReferenceEpisodes = 20;
constexpr double kEnvSeconds = 120;
// Criterion 4
constexpr double kArithmeticTol = 1e-6;
constexpr double kArithmeticSeconds = 1;
// Criterion 5
constexpr int kProbeSteps = 5000;
constexpr std::uint64_t kProbeSeed = 7;
constexpr double kProbeSeconds = 600;
// Criteria 6 to 8
constexpr double kTargetMean = 0.7;
constexpr long kStepBudget = 5'000'000;
constexpr double kLearningSeconds = 4 * 3600;
constexpr int kSeedsNeeded = 2;
// Criterion 8
constexpr int kRndEpochs = 60;
constexpr int kRndSmoothing = 5;
// Criterion 9
constexpr long kTraceSteps = 10'000;
constexpr double kTraceSeconds = 30;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Outcome gradients() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto items = acceptance::run_gradient_suite(kFdStep);
  const double secs = seconds_since(t0);
  double worst = 0;
  std::string worst_name;
  std::size_t coords = 0;
  bool ok = true;
  for (const auto& it : items) {
    coords += it.coordinates;
    const bool item_ok = it.max_rel_error < kFdRelTol && it.coordinates > 0;
    ok &= item_ok;
    std::cerr << fmt("  [fd] %-36s max rel %.2e over %zu coords%s\n", it.name.c_str(), it.max_rel_error,
                     it.coordinates, item_ok ? "" : "  <-- FAIL");
    if (it.max_rel_error >= worst) {
      worst = it.max_rel_error;
      worst_name = it.name + " " + it.worst;
    }
  }
  ok &= secs < kFdSeconds;
  return {ok, fmt("%zu checks, %zu coordinates, worst %.2e at %s (tol %.0e), %.1fs", items.size(), coords, worst,
                  worst_name.c_str(), kFdRelTol, secs)};
}

// Direct sum of the off-policy corrected target.
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

Outcome vtrace() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g(0, 1);
  std::uniform_real_distribution<double> u(0, 1);
  double worst = 0, worst_nstep = 0;
  for (int k = 0; k < 2 * kVtraceSequences; ++k) {
    const bool on_policy = k >= kVtraceSequences;
    std::vector<double> mu, pi, r, v, d;
    for (int i = 0; i < kVtraceLength; ++i) {
      mu.push_back(-std::abs(g(rng)) - 0.1);
      pi.push_back(on_policy ? mu.back() : mu.back() + 0.7 * g(rng));
      r.push_back(g(rng));
      v.push_back(g(rng));
      d.push_back(u(rng) < 0.2 ? 0.0 : 0.99);
    }
    const double boot = g(rng);
    const auto out = learner::vtrace_targets(mu, pi, r, v, d, boot, 1.0, 1.0);
    if (!on_policy) {
      const auto ref = naive_vs(mu, pi, r, v, d, boot, 1.0, 1.0);
      for (int i = 0; i < kVtraceLength; ++i) worst = std::max(worst, std::abs(out.vs[i] - ref[i]));
    } else {
      // n-step return: r_s + d_s r_{s+1} + ... + (prod d) * bootstrap.
      for (int s = 0; s < kVtraceLength; ++s) {
        double ret = 0, disc = 1;
        for (int t = s; t < kVtraceLength; ++t) {
          ret += disc * r[t];
          disc *= d[t];
        }
        ret += disc * boot;
        worst_nstep = std::max(worst_nstep, std::abs(out.vs[s] - ret));
      }
    }
  }
  const double secs = seconds_since(t0);
  const bool ok = worst < kVtraceTol && worst_nstep < kVtraceTol && secs < kVtraceSeconds;
  return {ok, fmt("%d off-policy sequences max |err| %.1e, %d on-policy vs n-step max |err| %.1e (tol %.0e), %.2fs",
                  kVtraceSequences, worst, kVtraceSequences, worst_nstep, kVtraceTol, secs)};
}

Outcome environment() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(5);
  long failures = 0, layouts = 0, observations = 0;
  std::string first;
  auto fail = [&](const std::string& what) {
    if (failures++ == 0) first = what;
  };
  for (int n : {5, 6, 8, 10}) {
    const int view = grid::default_view_size(n);
    for (std::uint64_t seed = 0; seed < static_cast<std::uint64_t>(kLayoutsPerSize); ++seed) {
      ++layouts;
      const grid::GridState s0 = grid::generate(seed, n);
      const std::string where = fmt("size %d seed %llu", n, static_cast<unsigned long long>(seed));
      if (!(grid::generate(seed, n) == s0)) fail(where + ": generate is not deterministic");
      if (oracle::shortest_solution(s0) <= 0) fail(where + ": not solvable");
      grid::GridState s = s0;
      for (int k = 0; k < kInvariantSteps && !s.done; ++k) {
        const auto r = grid::step(s, static_cast<grid::Action>(rng() % grid::kNumActions));
        const auto c = oracle::count_objects(r.state);
        if (c.keys != 1 || c.doors != 1 || c.goals != 1) fail(where + ": objects not conserved");
        ++observations;
        if (!oracle::occlusion_sound(grid::observe(r.state, view))) fail(where + ": occlusion unsound");
        s = r.state;
      }
    }
  }
  int agree = 0;
  for (std::uint64_t seed = 0; seed < static_cast<std::uint64_t>(kReferenceEpisodes); ++seed) {
    const int n = 5 + static_cast<int>(seed % 4);
    grid::GridState s = grid::generate(seed, n);
    reference::DoorKeyEnv ref(s);
    std::discrete_distribution<int> pick({1, 1, 3, 2, 1, 2});
    bool same = true;
    for (int k = 0; k < 400 && !s.done && same; ++k) {
      const int a = pick(rng);
      const auto mine = grid::step(s, static_cast<grid::Action>(a));
      const auto theirs = ref.step(a);
      std::string why;
      if (mine.terminated != theirs.terminated) why = "termination";
      else if (std::abs(mine.reward - theirs.reward) > 1e-12) why = fmt("reward %.17g vs %.17g", mine.reward, theirs.reward);
      else if (!(mine.state == ref.as_grid_state())) why = "state";
      for (int m : {3, 5, 7, 9})
        if (why.empty() && !(grid::observe(mine.state, m) == ref.observation(m))) why = fmt("view %d observation", m);
      same = why.empty();
      if (!same) fail(fmt("reference episode %llu step %d action %d: %s", static_cast<unsigned long long>(seed), k, a,
                          why.c_str()));
      s = mine.state;
    }
    agree += same;
  }
  const double secs = seconds_since(t0);
  const bool ok = failures == 0 && secs < kEnvSeconds;
  return {ok, fmt("%ld layouts over sizes 5/6/8/10 solvable and deterministic, %ld observations checked, %d/%d "
                  "reference episodes agree, %ld failures%s%s, %.1fs",
                  layouts, observations, agree, kReferenceEpisodes, failures, failures ? ": " : "", first.c_str(), secs)};
}

Outcome arithmetic() {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<std::pair<std::string, double>> errs;
  auto expect = [&](const std::string& name, double got, double want) { errs.emplace_back(name, std::abs(got - want)); };

  std::vector<Real> probs(8, 0);
  probs[0] = Real(0.75);
  probs[1] = Real(0.25);
  const std::vector<int> next{0};
  expect("curiosity 0.5*||p - onehot||", gan::curiosity_from_parts(1, next, probs, Real(0.5)), 0.5 * std::sqrt(0.125));
  expect("curiosity alpha scaling", gan::curiosity_from_parts(Real(0.01), next, probs, Real(0.5)),
         0.01 * 0.5 * std::sqrt(0.125));
  expect("navigator r_g + r_c", agent::navigator_step_reward(Real(1), Real(0.2)), 1.2);
  expect("subgoal verified", agent::subgoal_step_reward(Real(0.3), Real(0.7), 1, Real(0.5)), 1.0);
  expect("subgoal unverified beta 0", agent::subgoal_step_reward(Real(0.3), Real(0.7), 0, Real(0)), 0.3);
  expect("subgoal unverified beta 1", agent::subgoal_step_reward(Real(0.1), Real(0.9), 0, Real(1)), 0.55);
  const Real r_g[3] = {0, 0, 1}, r_c[3] = {Real(0.1), Real(0.2), Real(0.05)}, r_e[3] = {0, 0, Real(0.9)};
  const int v[3] = {0, 0, 1};
  double nav = 0, sg = 0, disc = 1;
  for (int t = 0; t < 3; ++t) {
    nav += disc * agent::navigator_step_reward(r_g[t], r_c[t]);
    sg += disc * agent::subgoal_step_reward(r_c[t], r_e[t], v[t], Real(0.5));
    disc *= 0.99;
  }
  expect("navigator discounted sum", nav, 0.1 + 0.99 * 0.2 + 0.9801 * 1.05);
  expect("subgoal discounted sum", sg, 0.1 + 0.99 * 0.2 + 0.9801 * 0.95);

  double worst = 0;
  std::string worst_name;
  for (const auto& [name, e] : errs)
    if (e >= worst) {
      worst = e;
      worst_name = name;
    }
  const double secs = seconds_since(t0);
  return {worst < kArithmeticTol && secs < kArithmeticSeconds,
          fmt("%zu hand examples (r_c = %.5f case included), worst |err| %.1e at %s (tol %.0e)", errs.size(),
              0.5 * std::sqrt(0.125), worst, worst_name.c_str(), kArithmeticTol)};
}

Outcome robustness() {
  const gan::RobustnessReport r = gan::robustness_probe(gan::toy_gan_config(), kProbeSteps, kProbeSeed);
  std::cerr << r.table();
  const bool dropped = r.trained_familiar() < r.untrained_familiar();
  const bool below = r.trained_familiar() < 0.5 * r.trained_impossible;
  return {dropped && below && r.seconds < kProbeSeconds,
          fmt("familiar curiosity %.4f (untrained %.4f), impossible %.4f, ratio %.3f (need < 0.5), %.0fs",
              r.trained_familiar(), r.untrained_familiar(), r.trained_impossible,
              r.trained_familiar() / r.trained_impossible, r.seconds)};
}

struct SeedRun {
  std::uint64_t seed = 0;
  bool pass = false;
  learner::TrainResult result;
};

// Runs seeds in order until the pass/fail outcome is settled.
std::vector<SeedRun> learning_runs(learner::Algo algo, int seeds, const std::filesystem::path& out) {
  std::vector<SeedRun> runs;
  int passed = 0, failed = 0;
  for (int i = 0; i < seeds && passed < kSeedsNeeded && failed <= seeds - kSeedsNeeded; ++i) {
    cli::RunConfig c;
    c.train.agent.algo = algo;
    c.train.seed = static_cast<std::uint64_t>(i + 1);
    c.total_steps = kStepBudget;
    c.train.deterministic = true;
    c.train.stop_at_mean_r_e = kTargetMean;
    c.train.log_interval = 100'000;
    c.train.out_dir = out / fmt("%s_seed%d", std::string(learner::algo_name(algo)).c_str(), i + 1);
    const std::string tag = fmt("  [%s seed %d] ", std::string(learner::algo_name(algo)).c_str(), i + 1);
    SeedRun run;
    run.seed = c.train.seed;
    run.result = cli::run_train(c, [&](const learner::MetricsRow& row) {
      std::cerr << tag << fmt("step %ld mean_r_e %.3f\n", row.step, row.mean_r_e);
    });
    run.pass = run.result.target_reached && run.result.env_steps <= kStepBudget &&
               run.result.seconds <= kLearningSeconds;
    std::cerr << tag << (run.pass ? "reached" : "did not reach") << fmt(" %.2f at %ld steps, %.0fs\n", kTargetMean,
                                                                        run.result.env_steps, run.result.seconds);
    (run.pass ? passed : failed)++;
    runs.push_back(std::move(run));
  }
  return runs;
}

std::string describe_runs(const std::vector<SeedRun>& runs, int seeds) {
  std::ostringstream os;
  int passed = 0;
  for (const auto& r : runs) passed += r.pass;
  os << passed << "/" << runs.size() << " seeds reached " << kTargetMean << " within " << kStepBudget << " steps (";
  for (std::size_t i = 0; i < runs.size(); ++i)
    os << (i ? "; " : "") << "seed " << runs[i].seed << ": " << fmt("%.3f at %ld, %.0fs", runs[i].result.trailing_mean_r_e,
                                                                      runs[i].result.env_steps, runs[i].result.seconds);
  os << ")";
  if (static_cast<int>(runs.size()) < seeds) os << ", remaining seeds skipped once the outcome was settled";
  return os.str();
}

bool enough(const std::vector<SeedRun>& runs) {
  int passed = 0;
  for (const auto& r : runs) passed += r.pass;
  return passed >= kSeedsNeeded;
}

Outcome vanilla_learning(int seeds, const std::filesystem::path& out) {
  const auto runs = learning_runs(learner::Algo::vanilla, seeds, out);
  return {enough(runs), describe_runs(runs, seeds)};
}

// Replays layouts with a trained agent until an episode succeeds with at
// least two distinct proposed subgoals.
Outcome csg_learning(int seeds, const std::filesystem::path& out) {
  const auto runs = learning_runs(learner::Algo::csg, seeds, out);
  std::string replay_note = "no trained agent reached the target, replay not attempted";
  bool replay_ok = false;
  for (const auto& run : runs) {
    if (!run.pass) continue;
    const learner::LoadedAgent agent = learner::load_agent_checkpoint(out / fmt("csg_seed%llu", static_cast<unsigned long long>(run.seed)) /
                                           "checkpoints" / "final.ckpt");
    for (std::uint64_t layout = 0; layout < 200 && !replay_ok; ++layout) {
      for (bool greedy : {true, false}) {
        const cli::ReplayResult r = cli::replay(agent, layout, greedy, layout + 1);
        if (!r.success) continue;
        const std::string error = agent::validate_trace(r.records, agent.config.goal.abandon_limit);
        std::set<std::pair<int, int>> distinct;
        std::vector<std::string> texts;
        bool described = true;
        for (const auto& rec : r.records)
          if (rec.event == agent::TraceEvent::proposed) {
            if (distinct.insert({rec.subgoal_pos, rec.subgoal_value}).second) texts.push_back(rec.subgoal_text);
            described &= !rec.subgoal_text.empty();
          }
        if (!error.empty() || distinct.size() < 2 || !described) continue;
        replay_ok = true;
        std::ostringstream os;
        os << "replay layout " << layout << (greedy ? " (greedy)" : " (sampled)") << ": " << r.records.size()
           << " steps, valid trace, " << distinct.size() << " distinct subgoals: ";
        for (std::size_t i = 0; i < texts.size() && i < 4; ++i) os << (i ? " | " : "") << '"' << texts[i] << '"';
        replay_note = os.str();
        std::cerr << r.frames;
        break;
      }
    }
    if (!replay_ok) replay_note = "no successful replay with two distinct valid subgoals on 200 layouts";
    break;
  }
  return {enough(runs) && replay_ok, describe_runs(runs, seeds) + "; " + replay_note};
}

Outcome rnd(int seeds, const std::filesystem::path& out, bool with_learning) {
  baselines::RndTrainer trainer(baselines::RndConfig{}, 5);
  std::mt19937_64 rng(2);
  const std::size_t rows = 64;
  std::vector<int> obs(rows * 25);
  for (int& x : obs) x = static_cast<int>(rng() % 8);
  auto mean_bonus = [&] {
    double s = 0;
    for (Real r : baselines::rnd_bonus(trainer.model(), trainer.params(), obs, rows)) s += r;
    return s / rows;
  };
  std::vector<double> curve{mean_bonus()};
  for (int e = 0; e < kRndEpochs; ++e) {
    trainer.train_step(obs, rows);
    curve.push_back(mean_bonus());
  }
  int rises = 0;
  double prev = 1e300;
  for (std::size_t i = kRndSmoothing - 1; i < curve.size(); ++i) {
    double m = 0;
    for (int k = 0; k < kRndSmoothing; ++k) m += curve[i - static_cast<std::size_t>(k)];
    m /= kRndSmoothing;
    rises += m > prev;
    prev = m;
  }
  const bool bonus_ok = rises == 0 && curve.back() < curve.front();
  std::string detail = fmt("bonus %.4f -> %.4f over %d epochs, %d rises after %d-epoch smoothing", curve.front(),
                           curve.back(), kRndEpochs, rises, kRndSmoothing);
  if (with_learning) {
    const auto runs = learning_runs(learner::Algo::rnd, seeds, out);
    detail += std::string("; stretch learning ") + (enough(runs) ? "met: " : "NOT met (documented deviation): ") +
              describe_runs(runs, seeds);
  } else {
    detail += "; stretch learning skipped";
  }
  return {bonus_ok, detail};
}

Outcome lifecycle() {
  const auto t0 = std::chrono::steady_clock::now();
  learner::AgentConfig a;
  a.finalize();
  const learner::Snapshot snap = learner::initial_snapshot(a, 17);
  learner::ActorOptions o;
  o.num_envs = 1;
  o.unroll = 100;
  o.record_trace = true;
  learner::Actor actor(a, o, 23);
  while (actor.env_steps() < kTraceSteps) actor.collect(snap);
  const auto trace = actor.take_trace();
  const std::string error = agent::validate_trace(trace, a.goal.abandon_limit);
  int proposals = 0, reached = 0, abandoned = 0, episodes = 0;
  for (const auto& r : trace) {
    proposals += r.event == agent::TraceEvent::proposed;
    reached += r.event == agent::TraceEvent::reached;
    abandoned += r.event == agent::TraceEvent::abandoned;
    episodes += r.done;
  }
  const double secs = seconds_since(t0);
  const bool ok = error.empty() && static_cast<long>(trace.size()) >= kTraceSteps && abandoned > 0 && reached > 0 &&
                  secs < kTraceSeconds;
  return {ok, fmt("%zu records, %d episodes, %d proposals, %d reached, %d abandoned, validator: %s, %.1fs",
                  trace.size(), episodes, proposals, reached, abandoned, error.empty() ? "accepted" : error.c_str(),
                  secs)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::vector<int> only;
  int seeds = 3;
  std::string out = "acceptance_runs";
  bool skip_rnd_learning = false;
  app.add_option("--only", only, "criteria to run (default: all)")->delimiter(',');
  app.add_option("--seeds", seeds, "seeds per learning criterion");
  app.add_option("--out", out, "directory for learning-run outputs");
  app.add_flag("--skip-rnd-learning", skip_rnd_learning, "skip the stretch learning run of criterion 8");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"gradient correctness", gradients},
      {"v-trace oracle", vtrace},
      {"environment suite", environment},
      {"reward arithmetic", arithmetic},
      {"stochastic robustness", robustness},
      {"vanilla learning", [&] { return vanilla_learning(seeds, out); }},
      {"csg learning and replay", [&] { return csg_learning(seeds, out); }},
      {"rnd baseline", [&] { return rnd(seeds, out, !skip_rnd_learning); }},
      {"lifecycle grammar", lifecycle},
  };
  int failed = 0, ran = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i + 1);
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    ++ran;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << "criterion " << id << " " << (o.pass ? "PASS" : "FAIL") << " " << criteria[i].first << ": "
              << o.detail << std::endl;
  }
  std::cout << "acceptance: " << ran - failed << "/" << ran << " passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
