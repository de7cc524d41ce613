#include "csg/autodiff/layers.hpp"

#include <stdexcept>

CSG_NAMESPACE_BEGIN
namespace ad {

Linear::Linear(ParamSet& params, const std::string& name, std::size_t in_dim, std::size_t out_dim, Rng& rng)
    : weight(name + ".w"), bias(name + ".b"), in(in_dim), out(out_dim) {
  params.add(weight, uniform_fan_in(out, in, rng));
  params.add(bias, Tensor::zeros({out}));
}

Tensor Linear::operator()(const ParamSet& params, const Tensor& x) const {
  return linear(x, params.at(weight), params.at(bias));
}

Embedding::Embedding(ParamSet& params, const std::string& name, std::size_t vocab_size, std::size_t dim, Rng& rng)
    : table(name + ".table"), vocab(vocab_size), width(dim) {
  params.add(table, normal({vocab, width}, Real(0.01), rng));
}

Tensor Embedding::operator()(const ParamSet& params, std::span<const int> indices, std::size_t rows) const {
  return embedding_lookup(params.at(table), indices, rows);
}

LstmState LstmState::zeros(std::size_t batch, std::size_t hidden) {
  return {Tensor::zeros({batch, hidden}), Tensor::zeros({batch, hidden})};
}

Lstm::Lstm(ParamSet& params, const std::string& name, std::size_t in_dim, std::size_t hidden_dim, Rng& rng)
    : w_ih(name + ".w_ih"), w_hh(name + ".w_hh"), bias(name + ".b"), in(in_dim), hidden(hidden_dim) {
  params.add(w_ih, uniform_fan_in(4 * hidden, in, rng));
  std::vector<Real> rec(4 * hidden * hidden);
  for (std::size_t g = 0; g < 4; ++g) {
    const Tensor block = orthogonal(hidden, hidden, rng);
    std::copy(block.data().begin(), block.data().end(), rec.begin() + static_cast<std::ptrdiff_t>(g * hidden * hidden));
  }
  params.add(w_hh, Tensor::from({4 * hidden, hidden}, std::move(rec)));
  params.add(bias, Tensor::zeros({4 * hidden}));
}

LstmState Lstm::operator()(const ParamSet& params, const Tensor& x, const LstmState& state) const {
  return lstm_step(x, state, params.at(w_ih), params.at(w_hh), params.at(bias));
}

LstmState lstm_step(const Tensor& x, const LstmState& state, const Tensor& w_ih, const Tensor& w_hh, const Tensor& bias) {
  const std::size_t hidden = state.h.cols();
  const Tensor hc = lstm_cell(x, state.h, state.c, w_ih, w_hh, bias);
  return {slice_cols(hc, 0, hidden), slice_cols(hc, hidden, 2 * hidden)};
}

LstmState mask_rows(const LstmState& state, std::span<const Real> mask) {
  if (mask.size() != state.h.rows())
    throw std::invalid_argument("mask_rows: mask of " + std::to_string(mask.size()) + " for state " +
                                shape_string(state.h.shape()));
  bool all_ones = true;
  for (Real m : mask) all_ones = all_ones && m == Real(1);
  if (all_ones) return state;
  const Tensor col = Tensor::from({mask.size(), 1}, std::vector<Real>(mask.begin(), mask.end()));
  return {mul(state.h, col), mul(state.c, col)};
}

}  // namespace ad
CSG_NAMESPACE_END
