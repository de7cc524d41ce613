#ifndef CSG_AUTODIFF_OPS_HPP_
#define CSG_AUTODIFF_OPS_HPP_

#include <span>
#include <vector>

#include "csg/autodiff/tensor.hpp"

CSG_NAMESPACE_BEGIN
namespace ad {

// Every op validates shapes and throws std::invalid_argument naming both
// operand shapes on mismatch. Ops act on the last axis; leading axes are
// flattened into rows.

// a[m,k] * b[k,n]
Tensor matmul(const Tensor& a, const Tensor& b);
// x[m,in] * w[out,in]^T + bias[out]; bias may be undefined.
Tensor linear(const Tensor& x, const Tensor& w, const Tensor& bias = {});

// Binary ops accept equal shapes, a row vector b (size == a.cols()), or a
// column b of shape [a.rows(), 1].
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, Real s);
Tensor add_scalar(const Tensor& a, Real s);

Tensor relu(const Tensor& x);
Tensor tanh(const Tensor& x);
Tensor sigmoid(const Tensor& x);
// log(1 + exp(x)), stable for large |x|.
Tensor softplus(const Tensor& x);
Tensor exp(const Tensor& x);
Tensor log(const Tensor& x);
Tensor square(const Tensor& x);
Tensor abs(const Tensor& x);
// Values clipped to [lo, hi]; gradient passes only strictly inside.
Tensor clamp(const Tensor& x, Real lo, Real hi);

Tensor softmax(const Tensor& x);
Tensor log_softmax(const Tensor& x);

// table[V,D] looked up at `indices`, grouped into `rows` rows:
// result [rows, (indices.size() / rows) * D].
Tensor embedding_lookup(const Tensor& table, std::span<const int> indices, std::size_t rows);

Tensor concat(const std::vector<Tensor>& parts);
Tensor slice_cols(const Tensor& x, std::size_t begin, std::size_t end);
Tensor reshape(const Tensor& x, Shape shape);
// x[m,n] -> [m,1] holding x[i, index[i]].
Tensor gather_cols(const Tensor& x, std::span<const int> index);

Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);
// [m,n] -> [m,1]
Tensor row_sum(const Tensor& x);
Tensor norm_l2(const Tensor& x);
// [m,n] -> [m,1]
Tensor row_norm_l2(const Tensor& x);

// Fused LSTM cell with gate order (input, forget, candidate, output).
// Returns [B, 2H] holding the new hidden state followed by the new cell.
Tensor lstm_cell(const Tensor& x, const Tensor& h, const Tensor& c, const Tensor& w_ih, const Tensor& w_hh,
                 const Tensor& bias);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }
inline Tensor operator*(const Tensor& a, Real s) { return scale(a, s); }
inline Tensor operator*(Real s, const Tensor& a) { return scale(a, s); }

// Non-differentiable helpers.
Tensor one_hot(std::span<const int> indices, std::size_t depth, std::size_t rows);
std::vector<Real> softmax_values(std::span<const Real> logits);

}  // namespace ad
CSG_NAMESPACE_END

#endif  // CSG_AUTODIFF_OPS_HPP_
