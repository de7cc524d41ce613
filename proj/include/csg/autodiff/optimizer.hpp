#ifndef CSG_AUTODIFF_OPTIMIZER_HPP_
#define CSG_AUTODIFF_OPTIMIZER_HPP_

#include <map>
#include <string>
#include <vector>

#include "csg/autodiff/param_set.hpp"

CSG_NAMESPACE_BEGIN
namespace ad {

enum class OptimizerAlgo { adam, rmsprop };

struct OptimizerConfig {
  OptimizerAlgo algo = OptimizerAlgo::rmsprop;
  Real lr = Real(4e-4);
  Real beta1 = Real(0.9);    // adam
  Real beta2 = Real(0.999);  // adam
  Real decay = Real(0.99);   // rmsprop smoothing
  Real eps = Real(1e-5);
  // Global L2 clip on the gradient; 0 disables.
  Real max_grad_norm = 0;
};

// Stateful optimizer. Moment buffers are keyed by parameter name and persist
// across steps. Every step bumps the ParamSet version.
class Optimizer {
 public:
  explicit Optimizer(OptimizerConfig config) : config_(config) {}

  // Applies one update from the grads currently stored on `params`.
  // Throws std::runtime_error naming the parameter if any gradient is not
  // finite; parameters are left untouched in that case. Returns the
  // pre-clipping gradient norm.
  Real step(ParamSet& params);

  const OptimizerConfig& config() const { return config_; }
  void set_lr(Real lr) { config_.lr = lr; }
  long steps() const { return steps_; }

 private:
  OptimizerConfig config_;
  std::map<std::string, std::vector<Real>, std::less<>> m_, v_;
  long steps_ = 0;
};

}  // namespace ad
CSG_NAMESPACE_END

#endif  // CSG_AUTODIFF_OPTIMIZER_HPP_
