#ifndef CSG_BASELINES_RND_HPP_
#define CSG_BASELINES_RND_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "csg/autodiff/layers.hpp"
#include "csg/autodiff/optimizer.hpp"
#include "csg/autodiff/param_set.hpp"

CSG_NAMESPACE_BEGIN
namespace baselines {

using ad::ParamSet;
using ad::Rng;

struct RndConfig {
  int view = 5;
  int hidden = 128;
  int feature_dim = 64;
  Real scale = 1;
  ad::OptimizerConfig optimizer{ad::OptimizerAlgo::adam, Real(1e-4), Real(0.9), Real(0.999), Real(0.99), Real(1e-8),
                                Real(0)};

  // Throws std::invalid_argument naming the offending field.
  void validate() const;
};

// Target and predictor share one architecture: one-hot tiles, FC + ReLU,
// FC to the feature space. The target never trains.
struct RndModel {
  RndConfig config;
  ad::Linear fc1, fc2;

  static RndModel describe(const RndConfig& config);
};

struct RndParams {
  ParamSet target, predictor;
};

RndParams make_rnd_params(const RndModel& model, std::uint64_t seed);

// scale * ||f_target(next) - f_predictor(next)||^2 per observation; `next`
// holds rows observations of view^2 tiles.
std::vector<Real> rnd_bonus(const RndModel& model, const RndParams& params, std::span<const int> next, std::size_t rows);

// Distillation loss: mean over rows of the squared feature error, with the
// target network held constant.
ad::Tensor rnd_loss(const RndModel& model, const RndParams& params, std::span<const int> next, std::size_t rows);

// Running variance of the bonus stream (parallel Welford merge).
class RunningStd {
 public:
  void update(std::span<const double> xs);
  double stddev() const;
  double count() const { return count_; }

 private:
  double count_ = 0, mean_ = 0, m2_ = 0;
};

// Owns the predictor optimizer.
class RndTrainer {
 public:
  RndTrainer(const RndConfig& config, std::uint64_t seed);

  const RndModel& model() const { return model_; }
  RndParams& params() { return params_; }
  const RndParams& params() const { return params_; }

  // One predictor step on the mean squared feature error; returns it.
  double train_step(std::span<const int> next, std::size_t rows);

 private:
  RndModel model_;
  RndParams params_;
  ad::Optimizer opt_;
};

}  // namespace baselines
CSG_NAMESPACE_END

#endif  // CSG_BASELINES_RND_HPP_
