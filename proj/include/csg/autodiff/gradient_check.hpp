#ifndef CSG_AUTODIFF_GRADIENT_CHECK_HPP_
#define CSG_AUTODIFF_GRADIENT_CHECK_HPP_

#include <functional>
#include <string>
#include <vector>

#include "csg/autodiff/param_set.hpp"

CSG_NAMESPACE_BEGIN
namespace ad {

struct GradientCheckReport {
  double max_rel_error = 0;
  std::string worst;  // "<input>[<flat index>]" of the worst coordinate
  std::size_t coordinates = 0;
  double worst_analytic = 0, worst_numeric = 0;
  double value = 0;  // f at the unperturbed inputs
};

// Compares tape gradients of the scalar `f` against central differences
// with step h, perturbing every coordinate of every tensor in `inputs`.
// Relative error per coordinate is |a - n| / max(|a|, |n|, 1e-6).
// Meaningful at the 1e-4 level only in the f64 build.
GradientCheckReport gradient_check(const std::function<Tensor()>& f, std::vector<Tensor> inputs, double h = 1e-5);
GradientCheckReport gradient_check(const std::function<Tensor()>& f, ParamSet& params, double h = 1e-5);

}  // namespace ad
CSG_NAMESPACE_END

#endif  // CSG_AUTODIFF_GRADIENT_CHECK_HPP_
