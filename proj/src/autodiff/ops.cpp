#include "csg/autodiff/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "csg/kernels/kernels.hpp"

CSG_NAMESPACE_BEGIN
namespace ad {

using detail::make_result;
using detail::Node;

namespace {

[[noreturn]] void shape_error(const char* op, const Tensor& a, const Tensor& b) {
  throw std::invalid_argument(std::string(op) + ": shape mismatch " + shape_string(a.shape()) + " vs " +
                              shape_string(b.shape()));
}

void require(bool ok, const char* op, const Tensor& a, const Tensor& b) {
  if (!ok) shape_error(op, a, b);
}

std::vector<Real>* grad_of(Node& self, std::size_t parent) {
  Node& p = *self.parents[parent];
  return p.requires_grad ? &p.ensure_grad() : nullptr;
}

Shape matrix_shape(std::size_t rows, std::size_t cols) { return {rows, cols}; }

enum class Broadcast { same, row, col };

Broadcast broadcast_mode(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() == b.shape() || (a.size() == b.size() && b.size() == a.cols() && a.rows() == 1)) return Broadcast::same;
  if (b.size() == a.cols()) return Broadcast::row;
  if (b.size() == a.rows() && b.cols() == 1) return Broadcast::col;
  shape_error(op, a, b);
}

std::size_t b_index(Broadcast mode, std::size_t i, std::size_t cols) {
  switch (mode) {
    case Broadcast::same: return i;
    case Broadcast::row: return i % cols;
    case Broadcast::col: return i / cols;
  }
  return i;
}

template <typename Fwd, typename DA, typename DB>
Tensor binary(const char* op, const Tensor& a, const Tensor& b, Fwd fwd, DA da, DB db) {
  const Broadcast mode = broadcast_mode(op, a, b);
  const std::size_t n = a.size(), cols = a.cols();
  std::vector<Real> out(n);
  const auto av = a.data();
  const auto bv = b.data();
  for (std::size_t i = 0; i < n; ++i) out[i] = fwd(av[i], bv[b_index(mode, i, cols)]);
  return make_result(op, a.shape(), std::move(out), {&a, &b}, [mode, n, cols, da, db](Node& self) {
    const auto& av = self.parents[0]->value;
    const auto& bv = self.parents[1]->value;
    if (auto* ga = grad_of(self, 0))
      for (std::size_t i = 0; i < n; ++i) (*ga)[i] += self.grad[i] * da(av[i], bv[b_index(mode, i, cols)]);
    if (auto* gb = grad_of(self, 1))
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = b_index(mode, i, cols);
        (*gb)[j] += self.grad[i] * db(av[i], bv[j]);
      }
  });
}

// Unary op where the derivative is expressed through input x and output y.
template <typename Fwd, typename Deriv>
Tensor unary(const char* op, const Tensor& x, Fwd fwd, Deriv deriv) {
  const auto xv = x.data();
  std::vector<Real> out(xv.size());
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = fwd(xv[i]);
  return make_result(op, x.shape(), std::move(out), {&x}, [deriv](Node& self) {
    auto* gx = grad_of(self, 0);
    if (!gx) return;
    const auto& xv = self.parents[0]->value;
    for (std::size_t i = 0; i < xv.size(); ++i) (*gx)[i] += self.grad[i] * deriv(xv[i], self.value[i]);
  });
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  require(a.shape().size() == 2 && b.shape().size() == 2 && a.dim(1) == b.dim(0), "matmul", a, b);
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  std::vector<Real> out(m * n, Real(0));
  kernels::gemm_nn(a.data().data(), b.data().data(), out.data(), m, n, k);
  return make_result("matmul", matrix_shape(m, n), std::move(out), {&a, &b}, [m, n, k](Node& self) {
    const Real* av = self.parents[0]->value.data();
    const Real* bv = self.parents[1]->value.data();
    if (auto* ga = grad_of(self, 0)) kernels::gemm_nt(self.grad.data(), bv, ga->data(), m, k, n);
    if (auto* gb = grad_of(self, 1)) kernels::gemm_tn(av, self.grad.data(), gb->data(), k, n, m);
  });
}

Tensor linear(const Tensor& x, const Tensor& w, const Tensor& bias) {
  require(w.shape().size() == 2 && x.cols() == w.dim(1), "linear", x, w);
  const std::size_t batch = x.rows(), in = w.dim(1), out_dim = w.dim(0);
  if (bias.defined()) require(bias.size() == out_dim, "linear(bias)", w, bias);
  std::vector<Real> out(batch * out_dim, Real(0));
  if (bias.defined())
    for (std::size_t r = 0; r < batch; ++r) std::copy(bias.data().begin(), bias.data().end(), out.begin() + r * out_dim);
  kernels::gemm_nt(x.data().data(), w.data().data(), out.data(), batch, out_dim, in);
  const bool has_bias = bias.defined();
  auto backward = [batch, in, out_dim, has_bias](Node& self) {
    const Real* xv = self.parents[0]->value.data();
    const Real* wv = self.parents[1]->value.data();
    if (auto* gx = grad_of(self, 0)) kernels::gemm_nn(self.grad.data(), wv, gx->data(), batch, in, out_dim);
    if (auto* gw = grad_of(self, 1)) kernels::gemm_tn(self.grad.data(), xv, gw->data(), out_dim, in, batch);
    if (has_bias)
      if (auto* gb = grad_of(self, 2))
        for (std::size_t r = 0; r < batch; ++r)
          for (std::size_t o = 0; o < out_dim; ++o) (*gb)[o] += self.grad[r * out_dim + o];
  };
  if (has_bias) return make_result("linear", matrix_shape(batch, out_dim), std::move(out), {&x, &w, &bias}, backward);
  return make_result("linear", matrix_shape(batch, out_dim), std::move(out), {&x, &w}, backward);
}

Tensor add(const Tensor& a, const Tensor& b) {
  return binary(
      "add", a, b, [](Real x, Real y) { return x + y; }, [](Real, Real) { return Real(1); },
      [](Real, Real) { return Real(1); });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return binary(
      "sub", a, b, [](Real x, Real y) { return x - y; }, [](Real, Real) { return Real(1); },
      [](Real, Real) { return Real(-1); });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return binary(
      "mul", a, b, [](Real x, Real y) { return x * y; }, [](Real, Real y) { return y; }, [](Real x, Real) { return x; });
}

Tensor scale(const Tensor& a, Real s) {
  return unary("scale", a, [s](Real x) { return s * x; }, [s](Real, Real) { return s; });
}

Tensor add_scalar(const Tensor& a, Real s) {
  return unary("add_scalar", a, [s](Real x) { return x + s; }, [](Real, Real) { return Real(1); });
}

Tensor relu(const Tensor& x) {
  return unary("relu", x, [](Real v) { return v > 0 ? v : Real(0); }, [](Real v, Real) { return v > 0 ? Real(1) : Real(0); });
}

Tensor tanh(const Tensor& x) {
  return unary("tanh", x, [](Real v) { return std::tanh(v); }, [](Real, Real y) { return Real(1) - y * y; });
}

Tensor sigmoid(const Tensor& x) {
  return unary("sigmoid", x, [](Real v) { return Real(1) / (Real(1) + std::exp(-v)); },
               [](Real, Real y) { return y * (Real(1) - y); });
}

Tensor softplus(const Tensor& x) {
  return unary("softplus", x, [](Real v) { return std::max(v, Real(0)) + std::log1p(std::exp(-std::abs(v))); },
               [](Real v, Real) { return Real(1) / (Real(1) + std::exp(-v)); });
}

Tensor exp(const Tensor& x) {
  return unary("exp", x, [](Real v) { return std::exp(v); }, [](Real, Real y) { return y; });
}

Tensor log(const Tensor& x) {
  return unary("log", x, [](Real v) { return std::log(v); }, [](Real v, Real) { return Real(1) / v; });
}

Tensor square(const Tensor& x) {
  return unary("square", x, [](Real v) { return v * v; }, [](Real v, Real) { return Real(2) * v; });
}

Tensor abs(const Tensor& x) {
  return unary("abs", x, [](Real v) { return std::abs(v); },
               [](Real v, Real) { return v > 0 ? Real(1) : (v < 0 ? Real(-1) : Real(0)); });
}

Tensor clamp(const Tensor& x, Real lo, Real hi) {
  return unary("clamp", x, [lo, hi](Real v) { return std::clamp(v, lo, hi); },
               [lo, hi](Real v, Real) { return (v > lo && v < hi) ? Real(1) : Real(0); });
}

std::vector<Real> softmax_values(std::span<const Real> logits) {
  std::vector<Real> out(logits.size());
  const Real mx = *std::max_element(logits.begin(), logits.end());
  Real z = 0;
  for (std::size_t i = 0; i < logits.size(); ++i) z += (out[i] = std::exp(logits[i] - mx));
  for (Real& v : out) v /= z;
  return out;
}

Tensor softmax(const Tensor& x) {
  const std::size_t rows = x.rows(), cols = x.cols();
  std::vector<Real> out(x.size());
  for (std::size_t r = 0; r < rows; ++r) {
    const auto row = softmax_values(x.data().subspan(r * cols, cols));
    std::copy(row.begin(), row.end(), out.begin() + r * cols);
  }
  return make_result("softmax", x.shape(), std::move(out), {&x}, [rows, cols](Node& self) {
    auto* gx = grad_of(self, 0);
    if (!gx) return;
    for (std::size_t r = 0; r < rows; ++r) {
      const Real* y = self.value.data() + r * cols;
      const Real* dy = self.grad.data() + r * cols;
      Real dot = 0;
      for (std::size_t c = 0; c < cols; ++c) dot += y[c] * dy[c];
      for (std::size_t c = 0; c < cols; ++c) (*gx)[r * cols + c] += y[c] * (dy[c] - dot);
    }
  });
}

Tensor log_softmax(const Tensor& x) {
  const std::size_t rows = x.rows(), cols = x.cols();
  std::vector<Real> out(x.size());
  const auto xv = x.data();
  for (std::size_t r = 0; r < rows; ++r) {
    const Real* xr = xv.data() + r * cols;
    const Real mx = *std::max_element(xr, xr + cols);
    Real z = 0;
    for (std::size_t c = 0; c < cols; ++c) z += std::exp(xr[c] - mx);
    const Real lse = mx + std::log(z);
    for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] = xr[c] - lse;
  }
  return make_result("log_softmax", x.shape(), std::move(out), {&x}, [rows, cols](Node& self) {
    auto* gx = grad_of(self, 0);
    if (!gx) return;
    for (std::size_t r = 0; r < rows; ++r) {
      const Real* y = self.value.data() + r * cols;
      const Real* dy = self.grad.data() + r * cols;
      Real total = 0;
      for (std::size_t c = 0; c < cols; ++c) total += dy[c];
      for (std::size_t c = 0; c < cols; ++c) (*gx)[r * cols + c] += dy[c] - std::exp(y[c]) * total;
    }
  });
}

Tensor embedding_lookup(const Tensor& table, std::span<const int> indices, std::size_t rows) {
  if (table.shape().size() != 2) throw std::invalid_argument("embedding_lookup: table must be 2-D, got " + shape_string(table.shape()));
  if (rows == 0 || indices.size() % rows != 0)
    throw std::invalid_argument("embedding_lookup: " + std::to_string(indices.size()) + " indices do not split into " +
                                std::to_string(rows) + " rows");
  const std::size_t vocab = table.dim(0), width = table.dim(1);
  std::vector<int> idx(indices.begin(), indices.end());
  std::vector<Real> out(idx.size() * width);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] < 0 || static_cast<std::size_t>(idx[i]) >= vocab)
      throw std::out_of_range("embedding_lookup: index " + std::to_string(idx[i]) + " outside table of " +
                              std::to_string(vocab) + " rows");
    std::copy_n(table.data().begin() + static_cast<std::ptrdiff_t>(idx[i] * width), width, out.begin() + i * width);
  }
  Shape shape = matrix_shape(rows, idx.size() / rows * width);
  return make_result("embedding", std::move(shape), std::move(out), {&table},
                     [idx = std::move(idx), width](Node& self) {
                       auto* gt = grad_of(self, 0);
                       if (!gt) return;
                       for (std::size_t i = 0; i < idx.size(); ++i)
                         for (std::size_t d = 0; d < width; ++d)
                           (*gt)[static_cast<std::size_t>(idx[i]) * width + d] += self.grad[i * width + d];
                     });
}

Tensor concat(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat: no inputs");
  const std::size_t rows = parts[0].rows();
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (const Tensor& p : parts) {
    require(p.rows() == rows, "concat", parts[0], p);
    widths.push_back(p.cols());
    total += p.cols();
  }
  std::vector<Real> out(rows * total);
  std::size_t offset = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const auto pv = parts[k].data();
    for (std::size_t r = 0; r < rows; ++r)
      std::copy_n(pv.begin() + static_cast<std::ptrdiff_t>(r * widths[k]), widths[k], out.begin() + r * total + offset);
    offset += widths[k];
  }
  return make_result("concat", matrix_shape(rows, total), std::move(out), parts, [rows, total, widths](Node& self) {
    std::size_t offset = 0;
    for (std::size_t k = 0; k < widths.size(); ++k) {
      if (auto* g = grad_of(self, k))
        for (std::size_t r = 0; r < rows; ++r)
          for (std::size_t c = 0; c < widths[k]; ++c) (*g)[r * widths[k] + c] += self.grad[r * total + offset + c];
      offset += widths[k];
    }
  });
}

Tensor slice_cols(const Tensor& x, std::size_t begin, std::size_t end) {
  const std::size_t rows = x.rows(), cols = x.cols();
  if (begin > end || end > cols)
    throw std::invalid_argument("slice_cols: range [" + std::to_string(begin) + ", " + std::to_string(end) +
                                ") outside " + shape_string(x.shape()));
  const std::size_t width = end - begin;
  std::vector<Real> out(rows * width);
  for (std::size_t r = 0; r < rows; ++r)
    std::copy_n(x.data().begin() + static_cast<std::ptrdiff_t>(r * cols + begin), width, out.begin() + r * width);
  return make_result("slice_cols", matrix_shape(rows, width), std::move(out), {&x}, [rows, cols, begin, width](Node& self) {
    auto* gx = grad_of(self, 0);
    if (!gx) return;
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < width; ++c) (*gx)[r * cols + begin + c] += self.grad[r * width + c];
  });
}

Tensor reshape(const Tensor& x, Shape shape) {
  if (shape_size(shape) != x.size())
    throw std::invalid_argument("reshape: cannot view " + shape_string(x.shape()) + " as " + shape_string(shape));
  std::vector<Real> out(x.data().begin(), x.data().end());
  return make_result("reshape", std::move(shape), std::move(out), {&x}, [](Node& self) {
    if (auto* gx = grad_of(self, 0))
      for (std::size_t i = 0; i < self.grad.size(); ++i) (*gx)[i] += self.grad[i];
  });
}

Tensor gather_cols(const Tensor& x, std::span<const int> index) {
  const std::size_t rows = x.rows(), cols = x.cols();
  if (index.size() != rows)
    throw std::invalid_argument("gather_cols: " + std::to_string(index.size()) + " indices for " + shape_string(x.shape()));
  std::vector<int> idx(index.begin(), index.end());
  std::vector<Real> out(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    if (idx[r] < 0 || static_cast<std::size_t>(idx[r]) >= cols)
      throw std::out_of_range("gather_cols: index " + std::to_string(idx[r]) + " outside " + std::to_string(cols) + " columns");
    out[r] = x.data()[r * cols + static_cast<std::size_t>(idx[r])];
  }
  return make_result("gather_cols", matrix_shape(rows, 1), std::move(out), {&x}, [idx = std::move(idx), cols](Node& self) {
    auto* gx = grad_of(self, 0);
    if (!gx) return;
    for (std::size_t r = 0; r < idx.size(); ++r) (*gx)[r * cols + static_cast<std::size_t>(idx[r])] += self.grad[r];
  });
}

Tensor sum(const Tensor& x) {
  Real total = 0;
  for (Real v : x.data()) total += v;
  return make_result("sum", {1}, {total}, {&x}, [](Node& self) {
    if (auto* gx = grad_of(self, 0))
      for (Real& g : *gx) g += self.grad[0];
  });
}

Tensor mean(const Tensor& x) {
  const Real inv = Real(1) / static_cast<Real>(x.size());
  Real total = 0;
  for (Real v : x.data()) total += v;
  return make_result("mean", {1}, {total * inv}, {&x}, [inv](Node& self) {
    if (auto* gx = grad_of(self, 0))
      for (Real& g : *gx) g += self.grad[0] * inv;
  });
}

Tensor row_sum(const Tensor& x) {
  const std::size_t rows = x.rows(), cols = x.cols();
  std::vector<Real> out(rows, Real(0));
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) out[r] += x.data()[r * cols + c];
  return make_result("row_sum", matrix_shape(rows, 1), std::move(out), {&x}, [rows, cols](Node& self) {
    if (auto* gx = grad_of(self, 0))
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) (*gx)[r * cols + c] += self.grad[r];
  });
}

Tensor norm_l2(const Tensor& x) {
  Real ss = 0;
  for (Real v : x.data()) ss += v * v;
  return make_result("norm_l2", {1}, {std::sqrt(ss)}, {&x}, [](Node& self) {
    auto* gx = grad_of(self, 0);
    const Real n = self.value[0];
    if (!gx || n == 0) return;
    const auto& xv = self.parents[0]->value;
    for (std::size_t i = 0; i < xv.size(); ++i) (*gx)[i] += self.grad[0] * xv[i] / n;
  });
}

Tensor row_norm_l2(const Tensor& x) {
  const std::size_t rows = x.rows(), cols = x.cols();
  std::vector<Real> out(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    Real ss = 0;
    for (std::size_t c = 0; c < cols; ++c) ss += x.data()[r * cols + c] * x.data()[r * cols + c];
    out[r] = std::sqrt(ss);
  }
  return make_result("row_norm_l2", matrix_shape(rows, 1), std::move(out), {&x}, [rows, cols](Node& self) {
    auto* gx = grad_of(self, 0);
    if (!gx) return;
    const auto& xv = self.parents[0]->value;
    for (std::size_t r = 0; r < rows; ++r) {
      const Real n = self.value[r];
      if (n == 0) continue;
      for (std::size_t c = 0; c < cols; ++c) (*gx)[r * cols + c] += self.grad[r] * xv[r * cols + c] / n;
    }
  });
}

namespace {
inline Real sigm(Real v) { return Real(1) / (Real(1) + std::exp(-v)); }
}  // namespace

Tensor lstm_cell(const Tensor& x, const Tensor& h, const Tensor& c, const Tensor& w_ih, const Tensor& w_hh,
                 const Tensor& bias) {
  const std::size_t batch = x.rows(), in = x.cols(), hidden = h.cols();
  require(w_ih.shape().size() == 2 && w_ih.dim(0) == 4 * hidden && w_ih.dim(1) == in, "lstm_cell(w_ih)", x, w_ih);
  require(w_hh.shape().size() == 2 && w_hh.dim(0) == 4 * hidden && w_hh.dim(1) == hidden, "lstm_cell(w_hh)", h, w_hh);
  require(h.rows() == batch && c.rows() == batch && c.cols() == hidden, "lstm_cell(state)", h, c);
  require(bias.size() == 4 * hidden, "lstm_cell(bias)", w_ih, bias);

  const std::size_t g4 = 4 * hidden;
  // Activated gates per row: [i | f | g | o].
  std::vector<Real> gates(batch * g4);
  for (std::size_t r = 0; r < batch; ++r) std::copy(bias.data().begin(), bias.data().end(), gates.begin() + r * g4);
  kernels::gemm_nt(x.data().data(), w_ih.data().data(), gates.data(), batch, g4, in);
  kernels::gemm_nt(h.data().data(), w_hh.data().data(), gates.data(), batch, g4, hidden);

  std::vector<Real> out(batch * 2 * hidden);
  std::vector<Real> tanh_c(batch * hidden);
  for (std::size_t r = 0; r < batch; ++r) {
    Real* gr = gates.data() + r * g4;
    for (std::size_t j = 0; j < hidden; ++j) {
      const Real ig = sigm(gr[j]);
      const Real fg = sigm(gr[hidden + j]);
      const Real cg = std::tanh(gr[2 * hidden + j]);
      const Real og = sigm(gr[3 * hidden + j]);
      gr[j] = ig;
      gr[hidden + j] = fg;
      gr[2 * hidden + j] = cg;
      gr[3 * hidden + j] = og;
      const Real c_new = fg * c.data()[r * hidden + j] + ig * cg;
      const Real tc = std::tanh(c_new);
      tanh_c[r * hidden + j] = tc;
      out[r * 2 * hidden + j] = og * tc;
      out[r * 2 * hidden + hidden + j] = c_new;
    }
  }

  return make_result(
      "lstm_cell", matrix_shape(batch, 2 * hidden), std::move(out), {&x, &h, &c, &w_ih, &w_hh, &bias},
      [batch, in, hidden, g4, gates = std::move(gates), tanh_c = std::move(tanh_c)](Node& self) {
        const auto& cv = self.parents[2]->value;
        std::vector<Real> dgates(batch * g4);
        auto* gc = grad_of(self, 2);
        for (std::size_t r = 0; r < batch; ++r) {
          const Real* gr = gates.data() + r * g4;
          Real* dg = dgates.data() + r * g4;
          for (std::size_t j = 0; j < hidden; ++j) {
            const Real ig = gr[j], fg = gr[hidden + j], cg = gr[2 * hidden + j], og = gr[3 * hidden + j];
            const Real tc = tanh_c[r * hidden + j];
            const Real dh = self.grad[r * 2 * hidden + j];
            const Real dc = self.grad[r * 2 * hidden + hidden + j] + dh * og * (Real(1) - tc * tc);
            dg[j] = dc * cg * ig * (Real(1) - ig);
            dg[hidden + j] = dc * cv[r * hidden + j] * fg * (Real(1) - fg);
            dg[2 * hidden + j] = dc * ig * (Real(1) - cg * cg);
            dg[3 * hidden + j] = dh * tc * og * (Real(1) - og);
            if (gc) (*gc)[r * hidden + j] += dc * fg;
          }
        }
        const Real* xv = self.parents[0]->value.data();
        const Real* hv = self.parents[1]->value.data();
        if (auto* gx = grad_of(self, 0))
          kernels::gemm_nn(dgates.data(), self.parents[3]->value.data(), gx->data(), batch, in, g4);
        if (auto* gh = grad_of(self, 1))
          kernels::gemm_nn(dgates.data(), self.parents[4]->value.data(), gh->data(), batch, hidden, g4);
        if (auto* gw = grad_of(self, 3)) kernels::gemm_tn(dgates.data(), xv, gw->data(), g4, in, batch);
        if (auto* gw = grad_of(self, 4)) kernels::gemm_tn(dgates.data(), hv, gw->data(), g4, hidden, batch);
        if (auto* gb = grad_of(self, 5))
          for (std::size_t r = 0; r < batch; ++r)
            for (std::size_t j = 0; j < g4; ++j) (*gb)[j] += dgates[r * g4 + j];
      });
}

Tensor one_hot(std::span<const int> indices, std::size_t depth, std::size_t rows) {
  if (rows == 0 || indices.size() % rows != 0)
    throw std::invalid_argument("one_hot: " + std::to_string(indices.size()) + " indices do not split into " +
                                std::to_string(rows) + " rows");
  std::vector<Real> out(indices.size() * depth, Real(0));
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] < 0 || static_cast<std::size_t>(indices[i]) >= depth)
      throw std::out_of_range("one_hot: index " + std::to_string(indices[i]) + " outside depth " + std::to_string(depth));
    out[i * depth + static_cast<std::size_t>(indices[i])] = Real(1);
  }
  return Tensor::from({rows, indices.size() / rows * depth}, std::move(out));
}

}  // namespace ad
CSG_NAMESPACE_END
