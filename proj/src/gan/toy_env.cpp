#include "csg/gan/toy_env.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <random>

CSG_NAMESPACE_BEGIN
namespace gan {

namespace {

int draw_pattern(Rng& rng, bool from_held_out) {
  std::uniform_int_distribution<int> dist(0, ToyEnv::kPatterns - 1);
  for (;;) {
    const int p = dist(rng);
    if (ToyEnv::held_out(p) == from_held_out) return p;
  }
}

}  // namespace

std::vector<int> ToyEnv::observation(int pattern, int centre) {
  std::vector<int> obs(kTiles);
  int bit = 0;
  for (int i = 0; i < kTiles; ++i) {
    if (i == kCentre) continue;
    obs[static_cast<std::size_t>(i)] = ((pattern >> bit) & 1) ? 2 : 1;
    ++bit;
  }
  obs[kCentre] = centre;
  return obs;
}

std::vector<int> ToyEnv::outcomes(int centre, int action) const {
  if (kind_ == Kind::coin_flip && action == kFlipAction) return {kFlipOutcomeA, kFlipOutcomeB};
  return {rule(centre, action)};
}

void ToyEnv::sample(Rng& rng, bool from_held_out, std::vector<int>& obs, int& action, std::vector<int>& next) const {
  const int pattern = draw_pattern(rng, from_held_out);
  std::uniform_int_distribution<int> centre_dist(1, 7);
  std::uniform_int_distribution<int> action_dist(0, kActions - 1);
  const int centre = centre_dist(rng);
  action = action_dist(rng);
  const std::vector<int> options = outcomes(centre, action);
  std::uniform_int_distribution<std::size_t> pick(0, options.size() - 1);
  obs = observation(pattern, centre);
  next = observation(pattern, options[pick(rng)]);
}

GanBatch ToyEnv::batch(Rng& rng, std::size_t size, bool from_held_out) const {
  GanBatch b;
  std::vector<int> obs, next;
  int action = 0;
  for (std::size_t i = 0; i < size; ++i) {
    sample(rng, from_held_out, obs, action, next);
    b.add(obs, action, next);
  }
  return b;
}

void ToyEnv::impossible(Rng& rng, bool from_held_out, std::vector<int>& obs, int& action,
                        std::vector<int>& next) const {
  sample(rng, from_held_out, obs, action, next);
  const std::vector<int> allowed = outcomes(obs[kCentre], action);
  std::vector<int> wrong;
  for (int v = 1; v <= 7; ++v)
    if (std::find(allowed.begin(), allowed.end(), v) == allowed.end()) wrong.push_back(v);
  std::uniform_int_distribution<std::size_t> pick(0, wrong.size() - 1);
  next[kCentre] = wrong[pick(rng)];
}

GanConfig toy_gan_config() {
  GanConfig c;
  c.view = ToyEnv::kView;
  c.alpha = 1;
  return c;
}

bool RobustnessReport::robust() const {
  return trained_familiar() < untrained_familiar() && trained_familiar() < 0.5 * trained_impossible;
}

std::string RobustnessReport::table() const {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "transition                 untrained    trained\n"
                "flip -> key (observed)     %9.4f  %9.4f\n"
                "flip -> goal (observed)    %9.4f  %9.4f\n"
                "flip -> other (impossible) %9.4f  %9.4f\n"
                "steps %d, %.1f s\n",
                untrained_outcome_a, trained_outcome_a, untrained_outcome_b, trained_outcome_b, untrained_impossible,
                trained_impossible, steps, seconds);
  return buf;
}

RobustnessReport robustness_probe(const GanConfig& config, int steps, std::uint64_t seed, std::size_t batch_size, std::size_t eval_count) {
  const auto start = std::chrono::steady_clock::now();
  const ToyEnv env(ToyEnv::Kind::coin_flip);
  TransitionGan gan(config, seed);
  Rng rng(seed ^ 0x5eedULL);

  GanBatch outcome_a, outcome_b, impossible;
  std::vector<int> obs, next;
  int action = 0;
  for (std::size_t i = 0; i < eval_count; ++i) {
    do env.sample(rng, false, obs, action, next);
    while (action != ToyEnv::kFlipAction);
    next[ToyEnv::kCentre] = ToyEnv::kFlipOutcomeA;
    outcome_a.add(obs, action, next);
    next[ToyEnv::kCentre] = ToyEnv::kFlipOutcomeB;
    outcome_b.add(obs, action, next);
    std::uniform_int_distribution<int> wrong(0, 4);
    static constexpr int kOthers[5] = {1, 2, 4, 5, 6};
    next[ToyEnv::kCentre] = kOthers[wrong(rng)];
    impossible.add(obs, action, next);
  }
  auto mean_reward = [&](const GanBatch& b) {
    const auto r = curiosity_rewards(gan.model(), gan.params(), b);
    double s = 0;
    for (Real v : r) s += v;
    return s / static_cast<double>(r.size());
  };

  RobustnessReport report;
  report.steps = steps;
  report.untrained_outcome_a = mean_reward(outcome_a);
  report.untrained_outcome_b = mean_reward(outcome_b);
  report.untrained_impossible = mean_reward(impossible);
  for (int s = 0; s < steps; ++s) gan.train_step(env.batch(rng, batch_size, false), rng);
  report.trained_outcome_a = mean_reward(outcome_a);
  report.trained_outcome_b = mean_reward(outcome_b);
  report.trained_impossible = mean_reward(impossible);
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace gan
CSG_NAMESPACE_END
