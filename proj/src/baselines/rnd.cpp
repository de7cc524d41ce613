#include "csg/baselines/rnd.hpp"

#include <cmath>
#include <stdexcept>

#include "csg/autodiff/ops.hpp"

CSG_NAMESPACE_BEGIN
namespace baselines {

using namespace ad;

namespace {

constexpr std::size_t kVocab = 8;

Tensor features(const RndModel& m, const ParamSet& p, const Tensor& x) { return m.fc2(p, relu(m.fc1(p, x))); }

Tensor one_hot_obs(const RndModel& m, std::span<const int> next, std::size_t rows) {
  const auto tiles = static_cast<std::size_t>(m.config.view * m.config.view);
  if (next.size() != rows * tiles)
    throw std::invalid_argument("rnd: " + std::to_string(next.size()) + " tiles for " + std::to_string(rows) +
                                " observations of " + std::to_string(tiles));
  return one_hot(next, kVocab, rows);
}

}  // namespace

void RndConfig::validate() const {
  if (view < 3 || view % 2 == 0) throw std::invalid_argument("rnd: view must be odd and >= 3");
  if (hidden < 1) throw std::invalid_argument("rnd: hidden must be >= 1");
  if (feature_dim < 1) throw std::invalid_argument("rnd: feature_dim must be >= 1");
  if (!(scale >= 0)) throw std::invalid_argument("rnd: scale must be >= 0");
}

RndModel RndModel::describe(const RndConfig& c) {
  c.validate();
  RndModel m;
  m.config = c;
  const auto in = static_cast<std::size_t>(c.view * c.view) * kVocab;
  auto layer = [](const char* name, std::size_t i, std::size_t o) {
    Linear l;
    l.weight = std::string(name) + ".w";
    l.bias = std::string(name) + ".b";
    l.in = i;
    l.out = o;
    return l;
  };
  m.fc1 = layer("rnd1", in, static_cast<std::size_t>(c.hidden));
  m.fc2 = layer("rnd2", static_cast<std::size_t>(c.hidden), static_cast<std::size_t>(c.feature_dim));
  return m;
}

RndParams make_rnd_params(const RndModel& m, std::uint64_t seed) {
  Rng rng(seed);
  RndParams p;
  for (ParamSet* set : {&p.target, &p.predictor}) {
    Linear(*set, "rnd1", m.fc1.in, m.fc1.out, rng);
    Linear(*set, "rnd2", m.fc2.in, m.fc2.out, rng);
  }
  for (auto& [name, t] : p.target) t.set_requires_grad(false);
  return p;
}

std::vector<Real> rnd_bonus(const RndModel& m, const RndParams& p, std::span<const int> next, std::size_t rows) {
  NoGradGuard guard;
  const Tensor x = one_hot_obs(m, next, rows);
  const Tensor err = square(features(m, p.target, x) - features(m, p.predictor, x));
  const Tensor per_row = row_sum(err);
  std::vector<Real> out(per_row.data().begin(), per_row.data().end());
  for (Real& v : out) v *= m.config.scale;
  return out;
}

void RunningStd::update(std::span<const double> xs) {
  if (xs.empty()) return;
  double n = 0, mean = 0, m2 = 0;
  for (double x : xs) {
    ++n;
    const double d = x - mean;
    mean += d / n;
    m2 += d * (x - mean);
  }
  const double total = count_ + n;
  const double delta = mean - mean_;
  mean_ += delta * n / total;
  m2_ += m2 + delta * delta * count_ * n / total;
  count_ = total;
}

double RunningStd::stddev() const { return count_ > 1 ? std::sqrt(m2_ / count_) : 1.0; }

RndTrainer::RndTrainer(const RndConfig& config, std::uint64_t seed)
    : model_(RndModel::describe(config)), params_(make_rnd_params(model_, seed)), opt_(config.optimizer) {}

Tensor rnd_loss(const RndModel& m, const RndParams& p, std::span<const int> next, std::size_t rows) {
  const Tensor x = one_hot_obs(m, next, rows);
  Tensor target;
  {
    NoGradGuard guard;
    target = features(m, p.target, x);
  }
  return mean(row_sum(square(features(m, p.predictor, x) - target)));
}

double RndTrainer::train_step(std::span<const int> next, std::size_t rows) {
  const Tensor loss = rnd_loss(model_, params_, next, rows);
  params_.predictor.zero_grad();
  loss.backward();
  opt_.step(params_.predictor);
  return loss.item();
}

}  // namespace baselines
CSG_NAMESPACE_END
