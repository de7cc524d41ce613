#include "csg/gan/transition_gan.hpp"

#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "csg/autodiff/ops.hpp"

CSG_NAMESPACE_BEGIN
namespace gan {

using namespace ad;

namespace {

Linear describe(const std::string& name, std::size_t in, std::size_t out) {
  Linear l;
  l.weight = name + ".w";
  l.bias = name + ".b";
  l.in = in;
  l.out = out;
  return l;
}

GanModel describe_model(const GanConfig& c) {
  const auto t = static_cast<std::size_t>(c.tiles() * kVocab);
  const auto h = static_cast<std::size_t>(c.hidden);
  const auto z = static_cast<std::size_t>(c.z_dim);
  GanModel m;
  m.config = c;
  m.e1 = describe("enc1", t, h);
  m.e2 = describe("enc2", h, h);
  m.e3 = describe("enc3", h, 2 * z);
  m.g1 = describe("gen1", t + kActions + z, h);
  m.g2 = describe("gen2", h, h);
  m.g3 = describe("gen3", h, h);
  m.g4 = describe("gen4", h, t);
  m.d1 = describe("dis1", 2 * t + kActions, h);
  m.d2 = describe("dis2", h, h);
  m.d3 = describe("dis3", h, h);
  m.d4 = describe("dis4", h, 1);
  return m;
}

void register_linear(ParamSet& params, const Linear& l, Rng& rng) {
  params.add(l.weight, uniform_fan_in(l.out, l.in, rng));
  params.add(l.bias, Tensor::zeros({l.out}));
}

std::vector<Real> standard_normal(std::size_t n, Rng& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  std::vector<Real> v(n);
  for (Real& x : v) x = static_cast<Real>(dist(rng));
  return v;
}

// Draws one tile index per row of a [rows, kVocab] log-probability matrix.
std::vector<int> sample_rows(const Tensor& log_probs, Rng& rng) {
  const std::size_t rows = log_probs.rows();
  const auto lp = log_probs.data();
  std::vector<int> out(rows);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t r = 0; r < rows; ++r) {
    const double x = u(rng);
    double acc = 0;
    int pick = kVocab - 1;
    for (int k = 0; k < kVocab; ++k) {
      acc += std::exp(static_cast<double>(lp[r * kVocab + static_cast<std::size_t>(k)]));
      if (x < acc) {
        pick = k;
        break;
      }
    }
    out[r] = pick;
  }
  return out;
}

// log p(x) per transition from per-tile log-probabilities; [rows / tiles, 1].
Tensor sequence_log_prob(const Tensor& log_probs, std::span<const int> x, std::size_t tiles) {
  const Tensor picked = gather_cols(log_probs, x);
  return row_sum(reshape(picked, {x.size() / tiles, tiles}));
}

std::vector<int> repeat_rows(std::span<const int> v, std::size_t width, std::size_t times) {
  std::vector<int> out;
  out.reserve(v.size() * times);
  for (std::size_t r = 0; r < v.size() / width; ++r)
    for (std::size_t k = 0; k < times; ++k) out.insert(out.end(), v.begin() + r * width, v.begin() + (r + 1) * width);
  return out;
}

}  // namespace

void GanConfig::validate() const {
  auto fail = [](const std::string& key, const std::string& why) {
    throw std::invalid_argument("gan config: " + key + " " + why);
  };
  if (view < 3 || view % 2 == 0) fail("view", "must be odd and >= 3");
  if (z_dim < 1) fail("z_dim", "must be >= 1");
  if (hidden < 1) fail("hidden", "must be >= 1");
  if (k_samples < 2) fail("k_samples", "must be >= 2");
  if (d_steps < 1) fail("d_steps", "must be >= 1");
  if (!(alpha >= 0)) fail("alpha", "must be >= 0");
  if (!(lambda_kl >= 0) || !(lambda_latent >= 0) || !(lambda_recon >= 0)) fail("lambda", "weights must be >= 0");
  if (!(d_eps > 0 && d_eps < Real(0.5))) fail("d_eps", "must lie in (0, 0.5)");
}

GanParams GanParams::clone() const {
  return {encoder.clone(), generator.clone(), discriminator.clone()};
}

ParamSet GanParams::flatten() const {
  ParamSet flat;
  flat.merge(encoder, "E.");
  flat.merge(generator, "G.");
  flat.merge(discriminator, "D.");
  flat.set_version(generator.version());
  return flat;
}

GanParams GanParams::unflatten(const ParamSet& flat) {
  GanParams p;
  for (const auto& [name, t] : flat) {
    const std::string rest = name.substr(2);
    if (name.rfind("E.", 0) == 0) p.encoder.add(rest, t.clone());
    else if (name.rfind("G.", 0) == 0) p.generator.add(rest, t.clone());
    else if (name.rfind("D.", 0) == 0) p.discriminator.add(rest, t.clone());
    else throw std::invalid_argument("gan params: unexpected entry " + name);
  }
  p.generator.set_version(flat.version());
  return p;
}

GanModel GanModel::create(const GanConfig& config, GanParams& params, Rng& rng) {
  config.validate();
  GanModel m = describe_model(config);
  for (const Linear* l : {&m.e1, &m.e2, &m.e3}) register_linear(params.encoder, *l, rng);
  for (const Linear* l : {&m.g1, &m.g2, &m.g3, &m.g4}) register_linear(params.generator, *l, rng);
  for (const Linear* l : {&m.d1, &m.d2, &m.d3, &m.d4}) register_linear(params.discriminator, *l, rng);
  return m;
}

void GanBatch::add(std::span<const int> o, int action, std::span<const int> n) {
  obs.insert(obs.end(), o.begin(), o.end());
  next.insert(next.end(), n.begin(), n.end());
  actions.push_back(action);
}

std::string GanBatch::dump() const {
  std::ostringstream out;
  const std::size_t tiles = actions.empty() ? 0 : obs.size() / actions.size();
  for (std::size_t b = 0; b < actions.size(); ++b) {
    out << "  [" << b << "] obs=";
    for (std::size_t i = 0; i < tiles; ++i) out << obs[b * tiles + i];
    out << " action=" << actions[b] << " next=";
    for (std::size_t i = 0; i < tiles; ++i) out << next[b * tiles + i];
    out << '\n';
  }
  return out.str();
}

Tensor encode_input(std::span<const int> tiles, std::size_t rows) { return one_hot(tiles, kVocab, rows); }

Tensor action_input(std::span<const int> actions) { return one_hot(actions, kActions, actions.size()); }

Gaussian encoder_forward(const GanModel& m, const ParamSet& encoder, const Tensor& next_input) {
  const Tensor h = tanh(m.e2(encoder, tanh(m.e1(encoder, next_input))));
  const Tensor out = m.e3(encoder, h);
  const auto z = static_cast<std::size_t>(m.config.z_dim);
  return {slice_cols(out, 0, z), slice_cols(out, z, 2 * z)};
}

Tensor generator_log_probs(const GanModel& m, const ParamSet& generator, const Tensor& obs_input,
                           const Tensor& action_in, const Tensor& z) {
  Tensor h = tanh(m.g1(generator, concat({obs_input, action_in, z})));
  h = tanh(m.g2(generator, h));
  h = tanh(m.g3(generator, h));
  const Tensor logits = m.g4(generator, h);
  return log_softmax(reshape(logits, {logits.rows() * static_cast<std::size_t>(m.config.tiles()), kVocab}));
}

Tensor discriminator_logits(const GanModel& m, const ParamSet& discriminator, const Tensor& obs_input,
                            const Tensor& action_in, const Tensor& next_input) {
  Tensor h = tanh(m.d1(discriminator, concat({obs_input, action_in, next_input})));
  h = tanh(m.d2(discriminator, h));
  h = tanh(m.d3(discriminator, h));
  return m.d4(discriminator, h);
}

Tensor discriminator_forward(const GanModel& m, const ParamSet& discriminator, const Tensor& obs_input,
                             const Tensor& action_in, const Tensor& next_input) {
  const Real eps = m.config.d_eps;
  return clamp(sigmoid(discriminator_logits(m, discriminator, obs_input, action_in, next_input)), eps, 1 - eps);
}

Tensor kl_to_standard_normal(const Gaussian& g) {
  // 0.5 * sum(mu^2 + exp(logvar) - 1 - logvar)
  const Tensor inner = sub(add(square(g.mu), exp(g.logvar)), add_scalar(g.logvar, 1));
  return scale(row_sum(inner), Real(0.5));
}

void encode(const GanModel& m, const GanParams& p, std::span<const int> next, std::vector<Real>& mu,
            std::vector<Real>& logvar) {
  NoGradGuard guard;
  const Gaussian g = encoder_forward(m, p.encoder, encode_input(next, 1));
  mu.assign(g.mu.data().begin(), g.mu.data().end());
  logvar.assign(g.logvar.data().begin(), g.logvar.data().end());
}

LatentCode sample_prior(const GanConfig& config, Rng& rng) {
  return {standard_normal(static_cast<std::size_t>(config.z_dim), rng), LatentCode::Source::prior};
}

GeneratedNextObs generate(const GanModel& m, const GanParams& p, std::span<const int> obs, int action,
                          const LatentCode& z, Rng& rng) {
  if (z.z.size() != static_cast<std::size_t>(m.config.z_dim))
    throw std::invalid_argument("generate: latent of size " + std::to_string(z.z.size()) + ", expected " +
                                std::to_string(m.config.z_dim));
  NoGradGuard guard;
  const int a[1] = {action};
  const Tensor lp = generator_log_probs(m, p.generator, encode_input(obs, 1), action_input(a),
                                        Tensor::from({1, z.z.size()}, z.z));
  GeneratedNextObs out;
  out.probs.resize(lp.size());
  for (std::size_t i = 0; i < lp.size(); ++i) out.probs[i] = std::exp(lp[i]);
  out.sample = sample_rows(lp, rng);
  return out;
}

Real discriminate(const GanModel& m, const GanParams& p, std::span<const int> obs, int action,
                  std::span<const int> next) {
  NoGradGuard guard;
  const int a[1] = {action};
  return discriminator_forward(m, p.discriminator, encode_input(obs, 1), action_input(a), encode_input(next, 1)).item();
}

Real curiosity_from_parts(Real alpha, std::span<const int> next, std::span<const Real> probs, Real d) {
  double sq = 0;
  for (std::size_t i = 0; i < next.size(); ++i)
    for (int k = 0; k < kVocab; ++k) {
      const double target = next[i] == k ? 1.0 : 0.0;
      const double diff = target - probs[i * kVocab + static_cast<std::size_t>(k)];
      sq += diff * diff;
    }
  return static_cast<Real>(alpha * std::sqrt(sq) * d);
}

std::vector<Real> curiosity_rewards(const GanModel& m, const GanParams& p, const GanBatch& batch) {
  const std::size_t b = batch.size();
  if (b == 0) return {};
  const auto tiles = static_cast<std::size_t>(m.config.tiles());
  NoGradGuard guard;
  const Tensor obs_in = encode_input(batch.obs, b);
  const Tensor act_in = action_input(batch.actions);
  const Tensor next_in = encode_input(batch.next, b);
  const Gaussian g = encoder_forward(m, p.encoder, next_in);
  const Tensor lp = generator_log_probs(m, p.generator, obs_in, act_in, g.mu);
  std::vector<Real> probs(lp.size());
  for (std::size_t i = 0; i < lp.size(); ++i) probs[i] = std::exp(lp[i]);

  Tensor scored = next_in;
  if (m.config.scoring == CuriosityScoring::generated) {
    std::vector<int> argmax(b * tiles);
    for (std::size_t r = 0; r < argmax.size(); ++r) {
      int best = 0;
      for (int k = 1; k < kVocab; ++k)
        if (probs[r * kVocab + static_cast<std::size_t>(k)] > probs[r * kVocab + static_cast<std::size_t>(best)]) best = k;
      argmax[r] = best;
    }
    scored = encode_input(argmax, b);
  }
  const Tensor d = discriminator_forward(m, p.discriminator, obs_in, act_in, scored);

  std::vector<Real> out(b);
  const std::span<const Real> all_probs(probs);
  const std::span<const int> all_next(batch.next);
  for (std::size_t i = 0; i < b; ++i)
    out[i] = curiosity_from_parts(m.config.alpha, all_next.subspan(i * tiles, tiles),
                                  all_probs.subspan(i * tiles * kVocab, tiles * kVocab), d[i]);
  return out;
}

Real curiosity_reward(const GanModel& m, const GanParams& p, std::span<const int> obs, int action,
                      std::span<const int> next) {
  GanBatch batch;
  batch.add(obs, action, next);
  return curiosity_rewards(m, p, batch)[0];
}

std::vector<Real> maligan_weights(std::span<const Real> d) {
  std::vector<Real> w(d.size());
  double total = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    w[i] = (1 - d[i]) / d[i];
    total += w[i];
  }
  for (Real& x : w) x = static_cast<Real>(x / total);
  return w;
}

GanNoise draw_noise(const GanModel& m, const GanParams& p, const GanBatch& batch, Rng& rng) {
  const GanConfig& c = m.config;
  const std::size_t b = batch.size();
  if (b == 0) throw std::invalid_argument("gan: empty batch");
  const auto z = static_cast<std::size_t>(c.z_dim);
  const auto k = static_cast<std::size_t>(c.k_samples);
  const auto tiles = static_cast<std::size_t>(c.tiles());

  GanNoise n;
  n.eps = standard_normal(b * z, rng);
  n.z_prior = standard_normal(b * z, rng);
  n.z_mali = standard_normal(b * k * z, rng);

  NoGradGuard guard;
  const Tensor obs_in = encode_input(batch.obs, b);
  const Tensor act_in = action_input(batch.actions);

  // MaliGAN samples and their self-normalized weights under the current D.
  const std::vector<int> obs_rep = repeat_rows(batch.obs, tiles, k);
  const std::vector<int> act_rep = repeat_rows(batch.actions, 1, k);
  const Tensor obs_rep_in = encode_input(obs_rep, b * k);
  const Tensor act_rep_in = action_input(act_rep);
  const Tensor lp_mali = generator_log_probs(m, p.generator, obs_rep_in, act_rep_in, Tensor::from({b * k, z}, n.z_mali));
  n.mali_samples = sample_rows(lp_mali, rng);
  const Tensor d_mali =
      discriminator_forward(m, p.discriminator, obs_rep_in, act_rep_in, encode_input(n.mali_samples, b * k));
  n.mali_coef.resize(b * k);
  for (std::size_t i = 0; i < b; ++i) {
    const auto w = maligan_weights(d_mali.data().subspan(i * k, k));
    for (std::size_t j = 0; j < k; ++j) n.mali_coef[i * k + j] = w[j] - Real(1) / static_cast<Real>(k);
  }

  // Synthetic examples for the discriminator from both latent branches.
  const Tensor lp_prior = generator_log_probs(m, p.generator, obs_in, act_in, Tensor::from({b, z}, n.z_prior));
  n.fake_prior = sample_rows(lp_prior, rng);
  const Gaussian g = encoder_forward(m, p.encoder, encode_input(batch.next, b));
  std::vector<Real> z_enc(b * z);
  for (std::size_t i = 0; i < z_enc.size(); ++i) z_enc[i] = g.mu[i] + std::exp(g.logvar[i] / 2) * n.eps[i];
  const Tensor lp_enc = generator_log_probs(m, p.generator, obs_in, act_in, Tensor::from({b, z}, z_enc));
  n.fake_encoded = sample_rows(lp_enc, rng);
  return n;
}

Tensor GanLossTerms::total(const GanConfig& c) const {
  return add(add(mali, scale(kl, c.lambda_kl)), add(scale(recon, c.lambda_recon), scale(latent, c.lambda_latent)));
}

GanLossTerms generator_loss_terms(const GanModel& m, const GanParams& p, const GanBatch& batch, const GanNoise& noise) {
  const GanConfig& c = m.config;
  const std::size_t b = batch.size();
  const auto z = static_cast<std::size_t>(c.z_dim);
  const auto k = static_cast<std::size_t>(c.k_samples);
  const auto tiles = static_cast<std::size_t>(c.tiles());
  const Real inv_b = Real(1) / static_cast<Real>(b);

  const Tensor obs_in = encode_input(batch.obs, b);
  const Tensor act_in = action_input(batch.actions);
  GanLossTerms terms;

  // (a) MaliGAN: -sum_i (w_i - 1/K) log p_G(x_i), averaged over transitions.
  {
    const Tensor obs_rep_in = encode_input(repeat_rows(batch.obs, tiles, k), b * k);
    const Tensor act_rep_in = action_input(repeat_rows(batch.actions, 1, k));
    const Tensor lp = generator_log_probs(m, p.generator, obs_rep_in, act_rep_in, Tensor::from({b * k, z}, noise.z_mali));
    const Tensor logp = sequence_log_prob(lp, noise.mali_samples, tiles);
    std::vector<Real> coef(noise.mali_coef);
    for (Real& v : coef) v *= -inv_b;
    terms.mali = sum(mul(logp, Tensor::from({b * k, 1}, std::move(coef))));
  }

  // (b)+(c) encoded branch: KL to the prior and reconstruction of next.
  {
    const Gaussian g = encoder_forward(m, p.encoder, encode_input(batch.next, b));
    terms.kl = mean(kl_to_standard_normal(g));
    const Tensor z_enc = add(g.mu, mul(exp(scale(g.logvar, Real(0.5))), Tensor::from({b, z}, noise.eps)));
    const Tensor lp = generator_log_probs(m, p.generator, obs_in, act_in, z_enc);
    terms.recon = scale(mean(sequence_log_prob(lp, batch.next, tiles)), -1);
  }

  // (d) latent regression through the probability matrix; the encoder is
  // held fixed for this term.
  {
    const Tensor z_prior = Tensor::from({b, z}, noise.z_prior);
    const Tensor probs = exp(generator_log_probs(m, p.generator, obs_in, act_in, z_prior));
    const ParamSet frozen = p.encoder.clone();
    const Gaussian g = encoder_forward(m, frozen, reshape(probs, {b, tiles * kVocab}));
    terms.latent = scale(sum(abs(sub(g.mu, z_prior))), inv_b);
  }
  return terms;
}

Tensor discriminator_loss(const GanModel& m, const GanParams& p, const GanBatch& batch, const GanNoise& noise) {
  const std::size_t b = batch.size();
  const Tensor obs_in = encode_input(batch.obs, b);
  const Tensor act_in = action_input(batch.actions);
  // Label 1 = synthetic. BCE through softplus of the logits:
  // -log(1 - sigmoid(l)) = softplus(l), -log sigmoid(l) = softplus(-l).
  const Tensor real = discriminator_logits(m, p.discriminator, obs_in, act_in, encode_input(batch.next, b));
  const Tensor fake_p = discriminator_logits(m, p.discriminator, obs_in, act_in, encode_input(noise.fake_prior, b));
  const Tensor fake_e = discriminator_logits(m, p.discriminator, obs_in, act_in, encode_input(noise.fake_encoded, b));
  const Tensor fake = add(mean(softplus(scale(fake_p, -1))), mean(softplus(scale(fake_e, -1))));
  return add(mean(softplus(real)), scale(fake, Real(0.5)));
}

TransitionGan::TransitionGan(const GanConfig& config, std::uint64_t seed)
    : opt_e_(config.optimizer), opt_g_(config.optimizer), opt_d_(config.optimizer) {
  Rng rng(seed);
  model_ = GanModel::create(config, params_, rng);
}

TransitionGan::TransitionGan(const GanConfig& config, GanParams params)
    : model_(describe_model(config)),
      params_(std::move(params)),
      opt_e_(config.optimizer),
      opt_g_(config.optimizer),
      opt_d_(config.optimizer) {
  config.validate();
  params_.encoder = params_.encoder.clone(true);
  params_.generator = params_.generator.clone(true);
  params_.discriminator = params_.discriminator.clone(true);
}

GanLossReport TransitionGan::train_step(const GanBatch& batch, Rng& rng) {
  const GanNoise noise = draw_noise(model_, params_, batch, rng);
  auto check = [&](const char* what, double v) {
    if (!std::isfinite(v))
      throw std::runtime_error(std::string("gan: non-finite ") + what + " loss; batch:\n" + batch.dump());
  };

  GanLossReport report;
  for (int it = 0; it < model_.config.d_steps; ++it) {
    params_.discriminator.zero_grad();
    const Tensor d_loss = discriminator_loss(model_, params_, batch, noise);
    report.d_loss = d_loss.item();
    check("discriminator", report.d_loss);
    d_loss.backward();
    opt_d_.step(params_.discriminator);
  }

  params_.encoder.zero_grad();
  params_.generator.zero_grad();
  const GanLossTerms terms = generator_loss_terms(model_, params_, batch, noise);
  report.g_mali_loss = terms.mali.item();
  report.kl_loss = terms.kl.item();
  report.recon_loss = terms.recon.item();
  report.latent_loss = terms.latent.item();
  const Tensor total = terms.total(model_.config);
  check("generator", total.item());
  total.backward();
  opt_g_.step(params_.generator);
  opt_e_.step(params_.encoder);
  return report;
}

}  // namespace gan
CSG_NAMESPACE_END
