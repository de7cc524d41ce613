#ifndef CSG_GAN_TRANSITION_GAN_HPP_
#define CSG_GAN_TRANSITION_GAN_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "csg/autodiff/layers.hpp"
#include "csg/autodiff/optimizer.hpp"
#include "csg/autodiff/param_set.hpp"

CSG_NAMESPACE_BEGIN
namespace gan {

using ad::ParamSet;
using ad::Rng;
using ad::Tensor;

inline constexpr int kVocab = 8;
inline constexpr int kActions = 6;

// Which transition the discriminator scores inside the curiosity reward.
enum class CuriosityScoring { real, generated };

struct GanConfig {
  int view = 5;  // M; observations hold view * view tiles
  int z_dim = 8;
  int hidden = 64;
  int k_samples = 16;
  int d_steps = 3;  // discriminator updates per generator update
  Real alpha = Real(0.01);
  Real lambda_kl = Real(0.3);
  Real lambda_latent = Real(0.5);
  Real lambda_recon = Real(1.0);
  Real d_eps = Real(1e-6);
  CuriosityScoring scoring = CuriosityScoring::real;
  ad::OptimizerConfig optimizer{ad::OptimizerAlgo::adam, Real(2e-3), Real(0.5), Real(0.999), Real(0.99), Real(1e-8),
                                Real(10)};

  int tiles() const { return view * view; }
  // Throws std::invalid_argument naming the offending field.
  void validate() const;
};

struct GanParams {
  ParamSet encoder, generator, discriminator;

  GanParams clone() const;
  // Single flat set with "E.", "G.", "D." prefixes (checkpointing).
  ParamSet flatten() const;
  // Inverse of flatten().
  static GanParams unflatten(const ParamSet& flat);
};

// Layer descriptors. Shapes are a pure function of the config.
struct GanModel {
  GanConfig config;
  ad::Linear e1, e2, e3;
  ad::Linear g1, g2, g3, g4;
  ad::Linear d1, d2, d3, d4;

  // Registers freshly initialized weights in `params`.
  static GanModel create(const GanConfig& config, GanParams& params, Rng& rng);
};

struct LatentCode {
  enum class Source { prior, encoded };
  std::vector<Real> z;
  Source source = Source::prior;
};

struct GeneratedNextObs {
  std::vector<Real> probs;  // tiles x kVocab, row-major
  std::vector<int> sample;  // tiles
};

// A batch of transitions; observations are flattened tile indices.
struct GanBatch {
  std::vector<int> obs, next;
  std::vector<int> actions;
  std::size_t size() const { return actions.size(); }
  void add(std::span<const int> o, int action, std::span<const int> n);
  std::string dump() const;
};

// Tensor-level forward passes over a batch (rows = transitions).
struct Gaussian {
  Tensor mu, logvar;  // [B, Z]
};
Tensor encode_input(std::span<const int> tiles, std::size_t rows);
Gaussian encoder_forward(const GanModel& m, const ParamSet& encoder, const Tensor& next_input);
// Per-tile log-probabilities, [B * tiles, kVocab].
Tensor generator_log_probs(const GanModel& m, const ParamSet& generator, const Tensor& obs_input,
                           const Tensor& action_input, const Tensor& z);
// Probability that the transition is synthetic, clamped to [eps, 1 - eps]; [B, 1].
Tensor discriminator_forward(const GanModel& m, const ParamSet& discriminator, const Tensor& obs_input,
                             const Tensor& action_input, const Tensor& next_input);
// Pre-sigmoid discriminator output; [B, 1].
Tensor discriminator_logits(const GanModel& m, const ParamSet& discriminator, const Tensor& obs_input,
                            const Tensor& action_input, const Tensor& next_input);
Tensor action_input(std::span<const int> actions);
// KL(N(mu, exp(logvar)) || N(0, I)) per row; [B, 1].
Tensor kl_to_standard_normal(const Gaussian& g);

// Single-transition operations.
void encode(const GanModel& m, const GanParams& p, std::span<const int> next, std::vector<Real>& mu,
            std::vector<Real>& logvar);
LatentCode sample_prior(const GanConfig& config, Rng& rng);
GeneratedNextObs generate(const GanModel& m, const GanParams& p, std::span<const int> obs, int action,
                          const LatentCode& z, Rng& rng);
Real discriminate(const GanModel& m, const GanParams& p, std::span<const int> obs, int action, std::span<const int> next);

// alpha * ||onehot(next) - probs(G(obs, a, mu_E(next)))||_2 * d.
Real curiosity_from_parts(Real alpha, std::span<const int> next, std::span<const Real> probs, Real d);
Real curiosity_reward(const GanModel& m, const GanParams& p, std::span<const int> obs, int action,
                      std::span<const int> next);
// One reward per transition, computed in a single batched pass.
std::vector<Real> curiosity_rewards(const GanModel& m, const GanParams& p, const GanBatch& batch);

// Randomness consumed by one training step, drawn up front so every loss
// term is a deterministic differentiable function of the parameters.
struct GanNoise {
  std::vector<Real> eps;            // [B, Z] reparameterization noise
  std::vector<Real> z_prior;        // [B, Z] latent regression branch
  std::vector<Real> z_mali;         // [B*K, Z]
  std::vector<int> mali_samples;    // [B*K, tiles]
  std::vector<Real> mali_coef;      // [B*K] = (w_i - 1/K) per sample
  std::vector<int> fake_prior;      // [B, tiles]
  std::vector<int> fake_encoded;    // [B, tiles]
};

// MaliGAN self-normalized weights from discriminator outputs d_i (probability
// synthetic): r_i = (1 - d_i) / d_i, w_i = r_i / sum r.
std::vector<Real> maligan_weights(std::span<const Real> d);

GanNoise draw_noise(const GanModel& m, const GanParams& p, const GanBatch& batch, Rng& rng);

struct GanLossTerms {
  Tensor mali, kl, recon, latent;
  Tensor total(const GanConfig& c) const;
};
GanLossTerms generator_loss_terms(const GanModel& m, const GanParams& p, const GanBatch& batch, const GanNoise& noise);
Tensor discriminator_loss(const GanModel& m, const GanParams& p, const GanBatch& batch, const GanNoise& noise);

struct GanLossReport {
  double d_loss = 0, g_mali_loss = 0, kl_loss = 0, latent_loss = 0, recon_loss = 0;
  friend bool operator==(const GanLossReport&, const GanLossReport&) = default;
};

// Model, parameters and optimizer state for the single training writer.
class TransitionGan {
 public:
  TransitionGan(const GanConfig& config, std::uint64_t seed);
  TransitionGan(const GanConfig& config, GanParams params);

  const GanConfig& config() const { return model_.config; }
  const GanModel& model() const { return model_; }
  GanParams& params() { return params_; }
  const GanParams& params() const { return params_; }
  GanParams snapshot() const { return params_.clone(); }

  // One discriminator update then one generator/encoder update. Throws
  // std::runtime_error with a batch dump if any loss is not finite.
  GanLossReport train_step(const GanBatch& batch, Rng& rng);

 private:
  GanModel model_;
  GanParams params_;
  ad::Optimizer opt_e_, opt_g_, opt_d_;
};

}  // namespace gan
CSG_NAMESPACE_END

#endif  // CSG_GAN_TRANSITION_GAN_HPP_
