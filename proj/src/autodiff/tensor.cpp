#include "csg/autodiff/tensor.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_set>

CSG_NAMESPACE_BEGIN
namespace ad {

std::size_t shape_size(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

namespace detail {

std::vector<Real>& Node::ensure_grad() {
  if (grad.size() != value.size()) grad.assign(value.size(), Real(0));
  return grad;
}

}  // namespace detail

namespace {
thread_local bool g_grad_enabled = true;
}  // namespace

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

Tensor Tensor::zeros(Shape shape, bool requires_grad) { return full(std::move(shape), Real(0), requires_grad); }

Tensor Tensor::full(Shape shape, Real value, bool requires_grad) {
  auto node = std::make_shared<detail::Node>();
  node->value.assign(shape_size(shape), value);
  node->shape = std::move(shape);
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

Tensor Tensor::from(Shape shape, std::vector<Real> values, bool requires_grad) {
  if (shape_size(shape) != values.size())
    throw std::invalid_argument("Tensor::from: shape " + shape_string(shape) + " does not match " +
                                std::to_string(values.size()) + " values");
  auto node = std::make_shared<detail::Node>();
  node->shape = std::move(shape);
  node->value = std::move(values);
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

Tensor Tensor::scalar(Real value, bool requires_grad) { return full({1}, value, requires_grad); }

std::size_t Tensor::rows() const {
  const Shape& s = node_->shape;
  if (s.empty()) return 1;
  std::size_t n = 1;
  for (std::size_t i = 0; i + 1 < s.size(); ++i) n *= s[i];
  return n;
}

std::size_t Tensor::cols() const {
  const Shape& s = node_->shape;
  return s.empty() ? 1 : s.back();
}

Real Tensor::item() const {
  if (size() != 1) throw std::logic_error("Tensor::item: tensor of shape " + shape_string(shape()) + " is not a scalar");
  return node_->value[0];
}

void Tensor::zero_grad() {
  if (!node_->grad.empty()) std::fill(node_->grad.begin(), node_->grad.end(), Real(0));
}

Tensor& Tensor::set_requires_grad(bool on) {
  node_->requires_grad = on;
  return *this;
}

Tensor Tensor::clone() const { return from(shape(), node_->value, node_->requires_grad && is_leaf()); }

Tensor Tensor::detach() const { return from(shape(), node_->value, false); }

void Tensor::backward() const {
  if (!node_ || !node_->requires_grad)
    throw std::logic_error("backward: tensor is not attached to a gradient tape");
  if (size() != 1) throw std::logic_error("backward: loss must be a scalar, got shape " + shape_string(shape()));

  // Iterative post-order DFS gives a topological order.
  std::vector<detail::Node*> order;
  std::unordered_set<detail::Node*> seen;
  std::vector<std::pair<detail::Node*, std::size_t>> stack{{node_.get(), 0}};
  seen.insert(node_.get());
  while (!stack.empty()) {
    auto& [n, next] = stack.back();
    if (next < n->parents.size()) {
      detail::Node* p = n->parents[next++].get();
      if (p->requires_grad && seen.insert(p).second) stack.emplace_back(p, 0);
      continue;
    }
    order.push_back(n);
    stack.pop_back();
  }

  for (detail::Node* n : order)
    if (!n->is_leaf()) {
      n->ensure_grad();
      std::fill(n->grad.begin(), n->grad.end(), Real(0));
    }
  node_->ensure_grad()[0] += Real(1);
  for (auto it = order.rbegin(); it != order.rend(); ++it)
    if ((*it)->backward) (*it)->backward(**it);
}

namespace detail {

namespace {
template <typename Range>
Tensor make_result_impl(const char* op, Shape shape, std::vector<Real> value, const Range& parents,
                        std::function<void(Node&)> backward) {
  auto node = std::make_shared<Node>();
  node->op = op;
  node->shape = std::move(shape);
  node->value = std::move(value);
  if (g_grad_enabled) {
    bool any = false;
    for (const Tensor* p : parents) any = any || p->requires_grad();
    if (any) {
      node->requires_grad = true;
      node->parents.reserve(parents.size());
      for (const Tensor* p : parents) node->parents.push_back(p->node_ptr());
      node->backward = std::move(backward);
    }
  }
  return Tensor(std::move(node));
}
}  // namespace

Tensor make_result(const char* op, Shape shape, std::vector<Real> value, std::initializer_list<const Tensor*> parents,
                   std::function<void(Node&)> backward) {
  return make_result_impl(op, std::move(shape), std::move(value), parents, std::move(backward));
}

Tensor make_result(const char* op, Shape shape, std::vector<Real> value, const std::vector<Tensor>& parents,
                   std::function<void(Node&)> backward) {
  std::vector<const Tensor*> ptrs;
  ptrs.reserve(parents.size());
  for (const Tensor& t : parents) ptrs.push_back(&t);
  return make_result_impl(op, std::move(shape), std::move(value), ptrs, std::move(backward));
}

}  // namespace detail

}  // namespace ad
CSG_NAMESPACE_END
