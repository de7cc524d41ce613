#ifndef CSG_AUTODIFF_PARAM_SET_HPP_
#define CSG_AUTODIFF_PARAM_SET_HPP_

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <string_view>

#include "csg/autodiff/tensor.hpp"

CSG_NAMESPACE_BEGIN
namespace ad {

// Named trainable tensors. Iteration order is by name, so anything derived
// from iteration (serialization, flattened views) is deterministic.
class ParamSet {
 public:
  using Map = std::map<std::string, Tensor, std::less<>>;

  // Registers a leaf; throws std::invalid_argument on a duplicate name.
  Tensor& add(std::string name, Tensor value);
  const Tensor& at(std::string_view name) const;
  Tensor& at(std::string_view name);
  bool contains(std::string_view name) const { return params_.find(name) != params_.end(); }

  std::size_t size() const { return params_.size(); }
  std::size_t scalar_count() const;
  Map::const_iterator begin() const { return params_.begin(); }
  Map::const_iterator end() const { return params_.end(); }
  Map::iterator begin() { return params_.begin(); }
  Map::iterator end() { return params_.end(); }

  std::uint64_t version() const { return version_; }
  void bump_version() { ++version_; }
  void set_version(std::uint64_t v) { version_ = v; }

  // Deep copy. Trainable flags are kept only when `trainable` is set.
  ParamSet clone(bool trainable = false) const;
  // Overwrites values from a set with identical names and shapes.
  void assign_values(const ParamSet& other);
  void zero_grad();
  // Merges another set under `prefix`.
  void merge(const ParamSet& other, std::string_view prefix = {});

  friend bool operator==(const ParamSet& a, const ParamSet& b);

 private:
  Map params_;
  std::uint64_t version_ = 0;
};

using Rng = std::mt19937_64;

// Initializers.
Tensor uniform_fan_in(std::size_t out, std::size_t in, Rng& rng);
Tensor orthogonal(std::size_t rows, std::size_t cols, Rng& rng);
Tensor normal(Shape shape, Real stddev, Rng& rng);

}  // namespace ad
CSG_NAMESPACE_END

#endif  // CSG_AUTODIFF_PARAM_SET_HPP_
