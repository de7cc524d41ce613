#include "csg/autodiff/param_set.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

CSG_NAMESPACE_BEGIN
namespace ad {

Tensor& ParamSet::add(std::string name, Tensor value) {
  value.set_requires_grad(true);
  auto [it, inserted] = params_.emplace(std::move(name), std::move(value));
  if (!inserted) throw std::invalid_argument("ParamSet::add: duplicate parameter '" + it->first + "'");
  return it->second;
}

const Tensor& ParamSet::at(std::string_view name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw std::out_of_range("ParamSet: no parameter '" + std::string(name) + "'");
  return it->second;
}

Tensor& ParamSet::at(std::string_view name) {
  auto it = params_.find(name);
  if (it == params_.end()) throw std::out_of_range("ParamSet: no parameter '" + std::string(name) + "'");
  return it->second;
}

std::size_t ParamSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& [name, t] : params_) n += t.size();
  return n;
}

ParamSet ParamSet::clone(bool trainable) const {
  ParamSet out;
  for (const auto& [name, t] : params_) {
    Tensor copy = Tensor::from(t.shape(), std::vector<Real>(t.data().begin(), t.data().end()), trainable);
    out.params_.emplace(name, std::move(copy));
  }
  out.version_ = version_;
  return out;
}

void ParamSet::assign_values(const ParamSet& other) {
  if (other.params_.size() != params_.size()) throw std::invalid_argument("ParamSet::assign_values: parameter count differs");
  for (auto& [name, t] : params_) {
    const Tensor& src = other.at(name);
    if (src.shape() != t.shape())
      throw std::invalid_argument("ParamSet::assign_values: '" + name + "' shape " + shape_string(t.shape()) + " vs " +
                                  shape_string(src.shape()));
    std::copy(src.data().begin(), src.data().end(), t.data().begin());
  }
  version_ = other.version_;
}

void ParamSet::zero_grad() {
  for (auto& [name, t] : params_) t.zero_grad();
}

void ParamSet::merge(const ParamSet& other, std::string_view prefix) {
  for (const auto& [name, t] : other.params_) {
    auto [it, inserted] = params_.emplace(std::string(prefix) + name, t);
    if (!inserted) throw std::invalid_argument("ParamSet::merge: duplicate parameter '" + it->first + "'");
  }
}

bool operator==(const ParamSet& a, const ParamSet& b) {
  if (a.params_.size() != b.params_.size()) return false;
  auto ib = b.params_.begin();
  for (auto ia = a.params_.begin(); ia != a.params_.end(); ++ia, ++ib) {
    if (ia->first != ib->first || ia->second.shape() != ib->second.shape()) return false;
    const auto av = ia->second.data();
    const auto bv = ib->second.data();
    if (!std::equal(av.begin(), av.end(), bv.begin())) return false;
  }
  return true;
}

Tensor uniform_fan_in(std::size_t out, std::size_t in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  std::vector<Real> v(out * in);
  for (Real& x : v) x = static_cast<Real>(dist(rng));
  return Tensor::from({out, in}, std::move(v));
}

Tensor orthogonal(std::size_t rows, std::size_t cols, Rng& rng) {
  // Gram-Schmidt on a Gaussian matrix; orthonormal rows when rows <= cols,
  // orthonormal columns otherwise.
  const bool tall = rows > cols;
  const std::size_t n = tall ? cols : rows, m = tall ? rows : cols;
  std::normal_distribution<double> dist(0.0, 1.0);
  std::vector<std::vector<double>> q(n, std::vector<double>(m));
  for (std::size_t i = 0; i < n; ++i) {
    for (;;) {
      for (double& x : q[i]) x = dist(rng);
      for (std::size_t j = 0; j < i; ++j) {
        double d = 0;
        for (std::size_t k = 0; k < m; ++k) d += q[i][k] * q[j][k];
        for (std::size_t k = 0; k < m; ++k) q[i][k] -= d * q[j][k];
      }
      double norm = 0;
      for (double x : q[i]) norm += x * x;
      norm = std::sqrt(norm);
      if (norm < 1e-8) continue;
      for (double& x : q[i]) x /= norm;
      break;
    }
  }
  std::vector<Real> v(rows * cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) v[r * cols + c] = static_cast<Real>(tall ? q[c][r] : q[r][c]);
  return Tensor::from({rows, cols}, std::move(v));
}

Tensor normal(Shape shape, Real stddev, Rng& rng) {
  std::normal_distribution<double> dist(0.0, static_cast<double>(stddev));
  std::vector<Real> v(shape_size(shape));
  for (Real& x : v) x = static_cast<Real>(dist(rng));
  return Tensor::from(std::move(shape), std::move(v));
}

}  // namespace ad
CSG_NAMESPACE_END
