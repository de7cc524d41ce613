#include <cmath>
#include <random>

#include "doctest.h"
#include "csg/autodiff/gradient_check.hpp"
#include "csg/autodiff/ops.hpp"
#include "csg/gan/toy_env.hpp"

using namespace csg;
using namespace csg::gan;

namespace {

constexpr bool kF64 = std::is_same_v<Real, double>;

std::vector<int> random_tiles(std::mt19937_64& rng, int n) {
  std::uniform_int_distribution<int> d(0, kVocab - 1);
  std::vector<int> v(static_cast<std::size_t>(n));
  for (int& x : v) x = d(rng);
  return v;
}

GanConfig tiny_config() {
  GanConfig c;
  c.view = 3;
  c.z_dim = 2;
  c.hidden = 6;
  c.k_samples = 3;
  return c;
}

GanBatch random_batch(std::mt19937_64& rng, int tiles, std::size_t size) {
  GanBatch b;
  std::uniform_int_distribution<int> a(0, kActions - 1);
  for (std::size_t i = 0; i < size; ++i) b.add(random_tiles(rng, tiles), a(rng), random_tiles(rng, tiles));
  return b;
}

}  // namespace

TEST_CASE("encoder is deterministic and its KL matches the closed form") {
  TransitionGan g(GanConfig{}, 3);
  std::mt19937_64 rng(1);
  const std::vector<int> next = random_tiles(rng, 25);
  std::vector<Real> mu1, lv1, mu2, lv2;
  encode(g.model(), g.params(), next, mu1, lv1);
  encode(g.model(), g.params(), next, mu2, lv2);
  CHECK(mu1 == mu2);
  CHECK(lv1 == lv2);
  REQUIRE(mu1.size() == 8);

  double oracle = 0;
  for (std::size_t i = 0; i < mu1.size(); ++i) {
    const double var = std::exp(static_cast<double>(lv1[i]));
    oracle += 0.5 * (static_cast<double>(mu1[i]) * mu1[i] + var - 1 - std::log(var));
  }
  ad::NoGradGuard guard;
  const Gaussian gauss = encoder_forward(g.model(), g.params().encoder, encode_input(next, 1));
  CHECK(kl_to_standard_normal(gauss).item() == doctest::Approx(oracle).epsilon(1e-6));
}

TEST_CASE("encoder has three linear layers and generator/discriminator four") {
  TransitionGan g(GanConfig{}, 3);
  CHECK(g.params().encoder.size() == 6);
  CHECK(g.params().generator.size() == 8);
  CHECK(g.params().discriminator.size() == 8);
  CHECK(g.params().discriminator.at("dis4.w").shape() == ad::Shape{1, 64});
}

TEST_CASE("generated observations are row-stochastic and depend on z") {
  GanConfig c;
  TransitionGan g(c, 5);
  std::mt19937_64 rng(2);
  ad::Rng srng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const std::vector<int> obs = random_tiles(rng, c.tiles());
    const int action = trial % kActions;
    const GeneratedNextObs a = generate(g.model(), g.params(), obs, action, sample_prior(c, srng), srng);
    const GeneratedNextObs b = generate(g.model(), g.params(), obs, action, sample_prior(c, srng), srng);
    REQUIRE(a.probs.size() == static_cast<std::size_t>(c.tiles() * kVocab));
    REQUIRE(a.sample.size() == static_cast<std::size_t>(c.tiles()));
    for (int r = 0; r < c.tiles(); ++r) {
      double s = 0;
      for (int k = 0; k < kVocab; ++k) s += a.probs[static_cast<std::size_t>(r * kVocab + k)];
      CHECK(std::abs(s - 1) < 1e-6);
      CHECK(a.sample[static_cast<std::size_t>(r)] >= 0);
      CHECK(a.sample[static_cast<std::size_t>(r)] < kVocab);
    }
    CHECK(a.probs != b.probs);
  }
  LatentCode wrong;
  wrong.z.assign(3, 0);
  CHECK_THROWS_AS(generate(g.model(), g.params(), random_tiles(rng, c.tiles()), 0, wrong, srng), std::invalid_argument);
}

TEST_CASE("samples follow the generated probabilities") {
  GanConfig c = tiny_config();
  TransitionGan g(c, 8);
  std::mt19937_64 rng(4);
  ad::Rng srng(4);
  const std::vector<int> obs = random_tiles(rng, c.tiles());
  LatentCode z;
  z.z = {Real(0.3), Real(-1.2)};
  std::vector<double> counts(static_cast<std::size_t>(c.tiles() * kVocab), 0);
  const int draws = 20000;
  std::vector<Real> probs;
  for (int i = 0; i < draws; ++i) {
    const GeneratedNextObs out = generate(g.model(), g.params(), obs, 2, z, srng);
    probs = out.probs;
    for (int r = 0; r < c.tiles(); ++r) counts[static_cast<std::size_t>(r * kVocab + out.sample[static_cast<std::size_t>(r)])] += 1;
  }
  for (std::size_t i = 0; i < counts.size(); ++i) CHECK(std::abs(counts[i] / draws - probs[i]) < 0.015);
}

TEST_CASE("discriminator output lies strictly inside (0, 1)") {
  double total = 0;
  int n = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    TransitionGan g(GanConfig{}, seed);
    std::mt19937_64 rng(seed + 100);
    for (int i = 0; i < 200; ++i) {
      const Real d = discriminate(g.model(), g.params(), random_tiles(rng, 25), i % kActions, random_tiles(rng, 25));
      CHECK(d > 0);
      CHECK(d < 1);
      total += d;
      ++n;
    }
  }
  const double mean = total / n;
  CHECK(mean > 0.3);
  CHECK(mean < 0.7);
}

TEST_CASE("curiosity arithmetic") {
  SUBCASE("exact reconstruction gives zero") {
    const std::vector<int> next{2, 0};
    std::vector<Real> probs(16, 0);
    probs[2] = 1;
    probs[8] = 1;
    CHECK(curiosity_from_parts(1, next, probs, Real(0.9)) == 0);
  }
  SUBCASE("alpha zero gives zero") {
    std::vector<Real> probs(8, Real(0.125));
    const std::vector<int> next{4};
    CHECK(curiosity_from_parts(0, next, probs, Real(0.7)) == 0);
  }
  SUBCASE("single-tile hand example") {
    std::vector<Real> probs(8, 0);
    probs[0] = Real(0.75);
    probs[1] = Real(0.25);
    const std::vector<int> next{0};
    // 0.5 * sqrt(0.25^2 + 0.25^2)
    const double expected = 0.5 * std::sqrt(0.0625 + 0.0625);
    CHECK(curiosity_from_parts(1, next, probs, Real(0.5)) == doctest::Approx(expected).epsilon(1e-6));
    CHECK(expected == doctest::Approx(0.17678).epsilon(1e-4));
  }
}

TEST_CASE("curiosity is non-negative and linear in alpha") {
  GanConfig c;
  c.alpha = Real(0.3);
  TransitionGan one(c, 11);
  GanConfig c2 = c;
  c2.alpha = Real(0.6);
  TransitionGan two(c2, one.snapshot());
  std::mt19937_64 rng(5);
  const GanBatch batch = random_batch(rng, c.tiles(), 50);
  const auto r1 = curiosity_rewards(one.model(), one.params(), batch);
  const auto r2 = curiosity_rewards(two.model(), two.params(), batch);
  for (std::size_t i = 0; i < r1.size(); ++i) {
    CHECK(r1[i] >= 0);
    CHECK(r2[i] == doctest::Approx(2 * r1[i]).epsilon(1e-5));
  }
  const Real single = curiosity_reward(one.model(), one.params(), std::span(batch.obs).first(25), batch.actions[0],
                                       std::span(batch.next).first(25));
  CHECK(single == doctest::Approx(r1[0]).epsilon(1e-5));

  GanConfig c3 = c;
  c3.scoring = CuriosityScoring::generated;
  TransitionGan three(c3, one.snapshot());
  for (Real r : curiosity_rewards(three.model(), three.params(), batch)) CHECK(r >= 0);
}

TEST_CASE("maligan weights") {
  const std::vector<Real> d{Real(0.2), Real(0.5), Real(0.8)};
  const auto w = maligan_weights(d);
  const double total = 4 + 1 + 0.25;
  CHECK(w[0] == doctest::Approx(4 / total));
  CHECK(w[1] == doctest::Approx(1 / total));
  CHECK(w[2] == doctest::Approx(0.25 / total));

  const std::vector<Real> flat(16, Real(0.37));
  for (Real x : maligan_weights(flat)) CHECK(x == doctest::Approx(1.0 / 16));

  SUBCASE("equal weights contribute no generator gradient") {
    GanConfig c = tiny_config();
    TransitionGan g(c, 2);
    std::mt19937_64 rng(3);
    ad::Rng nrng(3);
    const GanBatch batch = random_batch(rng, c.tiles(), 4);
    GanNoise noise = draw_noise(g.model(), g.params(), batch, nrng);
    for (std::size_t i = 0; i < noise.mali_coef.size(); i += 3) {
      const auto w = maligan_weights(std::vector<Real>(3, Real(0.6)));
      for (std::size_t j = 0; j < 3; ++j) noise.mali_coef[i + j] = w[j] - Real(1) / 3;
    }
    g.params().generator.zero_grad();
    generator_loss_terms(g.model(), g.params(), batch, noise).mali.backward();
    for (const auto& [name, t] : g.params().generator)
      if (t.has_grad())
        for (Real v : t.grad()) CHECK(std::abs(v) < 1e-6);
  }
}

TEST_CASE("every GAN loss term passes finite differences") {
  GanConfig c = tiny_config();
  TransitionGan g(c, 21);
  std::mt19937_64 rng(6);
  ad::Rng nrng(6);
  const GanBatch batch = random_batch(rng, c.tiles(), 2);
  const GanNoise noise = draw_noise(g.model(), g.params(), batch, nrng);
  GanParams& p = g.params();
  const double tol = kF64 ? 1e-4 : 1e6;

  auto term = [&](auto pick) { return [&, pick] { return pick(generator_loss_terms(g.model(), p, batch, noise)); }; };
  const auto mali = term([](const GanLossTerms& t) { return t.mali; });
  const auto kl = term([](const GanLossTerms& t) { return t.kl; });
  const auto recon = term([](const GanLossTerms& t) { return t.recon; });
  const auto latent = term([](const GanLossTerms& t) { return t.latent; });

  CHECK(ad::gradient_check(mali, p.generator).max_rel_error < tol);
  CHECK(ad::gradient_check(kl, p.encoder).max_rel_error < tol);
  CHECK(ad::gradient_check(recon, p.encoder).max_rel_error < tol);
  CHECK(ad::gradient_check(recon, p.generator).max_rel_error < tol);
  // The latent term holds the encoder fixed, so only the generator is checked.
  CHECK(ad::gradient_check(latent, p.generator).max_rel_error < tol);
  const auto dl = [&] { return discriminator_loss(g.model(), p, batch, noise); };
  CHECK(ad::gradient_check(dl, p.discriminator).max_rel_error < tol);
}

TEST_CASE("training steps are reproducible") {
  auto run = [] {
    GanConfig c;
    c.view = 3;
    TransitionGan g(c, 4);
    ToyEnv env(ToyEnv::Kind::coin_flip);
    ad::Rng rng(10);
    std::vector<GanLossReport> out;
    for (int i = 0; i < 3; ++i) out.push_back(g.train_step(env.batch(rng, 8, false), rng));
    return out;
  };
  CHECK(run() == run());
}

TEST_CASE("non-finite losses abort with a batch dump") {
  GanConfig c = tiny_config();
  TransitionGan g(c, 1);
  g.params().discriminator.at("dis4.b").data()[0] = std::numeric_limits<Real>::quiet_NaN();
  std::mt19937_64 rng(1);
  ad::Rng nrng(1);
  const GanBatch batch = random_batch(rng, c.tiles(), 2);
  try {
    g.train_step(batch, nrng);
    FAIL("expected throw");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("obs=") != std::string::npos);
  }
  CHECK_THROWS_AS(draw_noise(g.model(), g.params(), GanBatch{}, nrng), std::invalid_argument);
}

TEST_CASE("config validation names the offending field") {
  GanConfig c;
  c.k_samples = 1;
  try {
    c.validate();
    FAIL("expected throw");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("k_samples") != std::string::npos);
  }
  c = GanConfig{};
  c.alpha = -1;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("params flatten and unflatten") {
  TransitionGan g(GanConfig{}, 7);
  const ad::ParamSet flat = g.params().flatten();
  CHECK(flat.size() == 22);
  const GanParams back = GanParams::unflatten(flat);
  CHECK(back.encoder == g.params().encoder);
  CHECK(back.generator == g.params().generator);
  CHECK(back.discriminator == g.params().discriminator);
}

TEST_CASE("toy environments") {
  ToyEnv det(ToyEnv::Kind::deterministic);
  ToyEnv flip(ToyEnv::Kind::coin_flip);
  CHECK(det.outcomes(3, ToyEnv::kFlipAction).size() == 1);
  CHECK(flip.outcomes(3, ToyEnv::kFlipAction) == std::vector<int>{ToyEnv::kFlipOutcomeA, ToyEnv::kFlipOutcomeB});
  int held = 0;
  for (int p = 0; p < ToyEnv::kPatterns; ++p) held += ToyEnv::held_out(p);
  CHECK(held > 40);
  CHECK(held < 90);
  ad::Rng rng(3);
  std::vector<int> obs, next;
  int action = 0;
  for (int i = 0; i < 200; ++i) {
    flip.sample(rng, i % 2 == 0, obs, action, next);
    const auto allowed = flip.outcomes(obs[ToyEnv::kCentre], action);
    CHECK(std::find(allowed.begin(), allowed.end(), next[ToyEnv::kCentre]) != allowed.end());
    for (int t = 0; t < ToyEnv::kTiles; ++t)
      if (t != ToyEnv::kCentre) CHECK(obs[static_cast<std::size_t>(t)] == next[static_cast<std::size_t>(t)]);
    flip.impossible(rng, false, obs, action, next);
    const auto ok = flip.outcomes(obs[ToyEnv::kCentre], action);
    CHECK(std::find(ok.begin(), ok.end(), next[ToyEnv::kCentre]) == ok.end());
  }
}
