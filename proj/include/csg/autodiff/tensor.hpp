#ifndef CSG_AUTODIFF_TENSOR_HPP_
#define CSG_AUTODIFF_TENSOR_HPP_

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "csg/core/real.hpp"

CSG_NAMESPACE_BEGIN
namespace ad {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

namespace detail {

struct Node {
  Shape shape;
  std::vector<Real> value;
  std::vector<Real> grad;  // empty until first needed
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward;
  bool requires_grad = false;
  const char* op = "leaf";

  bool is_leaf() const { return parents.empty(); }
  std::vector<Real>& ensure_grad();
};

}  // namespace detail

// Dense row-major array with optional participation in a define-by-run tape.
// Copies share the underlying node; use clone() for a deep copy.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, Real value, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<Real> values, bool requires_grad = false);
  static Tensor scalar(Real value, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  std::size_t size() const { return node_->value.size(); }
  std::size_t dim(std::size_t i) const { return node_->shape.at(i); }
  // Product of every dimension except the last.
  std::size_t rows() const;
  // Last dimension (1 for a scalar).
  std::size_t cols() const;

  std::span<Real> data() { return node_->value; }
  std::span<const Real> data() const { return node_->value; }
  Real item() const;
  Real operator[](std::size_t i) const { return node_->value[i]; }

  bool has_grad() const { return !node_->grad.empty(); }
  std::span<const Real> grad() const { return node_->grad; }
  std::span<Real> mutable_grad() { return node_->ensure_grad(); }
  void zero_grad();

  bool requires_grad() const { return node_ && node_->requires_grad; }
  Tensor& set_requires_grad(bool on);
  bool is_leaf() const { return node_->is_leaf(); }
  const char* op_name() const { return node_->op; }

  // Deep copy of the values as a fresh leaf.
  Tensor clone() const;
  // Same values, cut from the tape.
  Tensor detach() const;

  // Reverse-mode pass from this scalar. Leaf gradients accumulate across
  // calls; interior gradients are recomputed each call.
  void backward() const;

  detail::Node* node() const { return node_.get(); }
  const std::shared_ptr<detail::Node>& node_ptr() const { return node_; }

  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}

 private:
  std::shared_ptr<detail::Node> node_;
};

// Disables tape recording on this thread for its lifetime.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_enabled();

namespace detail {

// Builds the result node of an op. Parents are retained, and the backward
// closure installed, only when recording is on and some parent needs grad.
Tensor make_result(const char* op, Shape shape, std::vector<Real> value,
                   std::initializer_list<const Tensor*> parents,
                   std::function<void(Node&)> backward);
Tensor make_result(const char* op, Shape shape, std::vector<Real> value,
                   const std::vector<Tensor>& parents,
                   std::function<void(Node&)> backward);

}  // namespace detail

}  // namespace ad
CSG_NAMESPACE_END

#endif  // CSG_AUTODIFF_TENSOR_HPP_
