#ifndef CSG_AUTODIFF_LAYERS_HPP_
#define CSG_AUTODIFF_LAYERS_HPP_

#include <span>
#include <string>

#include "csg/autodiff/ops.hpp"
#include "csg/autodiff/param_set.hpp"

CSG_NAMESPACE_BEGIN
namespace ad {

// Layer descriptors hold parameter names and sizes only; the weights live in
// whichever ParamSet is passed to the forward call, so one descriptor serves
// the learner's trainable set and every actor snapshot.

struct Linear {
  std::string weight, bias;
  std::size_t in = 0, out = 0;

  Linear() = default;
  Linear(ParamSet& params, const std::string& name, std::size_t in, std::size_t out, Rng& rng);
  Tensor operator()(const ParamSet& params, const Tensor& x) const;
};

struct Embedding {
  std::string table;
  std::size_t vocab = 0, width = 0;

  Embedding() = default;
  // Entries drawn from N(0, 0.01).
  Embedding(ParamSet& params, const std::string& name, std::size_t vocab, std::size_t width, Rng& rng);
  Tensor operator()(const ParamSet& params, std::span<const int> indices, std::size_t rows) const;
};

struct LstmState {
  Tensor h, c;
  static LstmState zeros(std::size_t batch, std::size_t hidden);
};

struct Lstm {
  std::string w_ih, w_hh, bias;
  std::size_t in = 0, hidden = 0;

  Lstm() = default;
  // Fan-in uniform input weights, orthogonal recurrent blocks, zero bias.
  Lstm(ParamSet& params, const std::string& name, std::size_t in, std::size_t hidden, Rng& rng);
  LstmState operator()(const ParamSet& params, const Tensor& x, const LstmState& state) const;
};

// Standalone cell over explicit tensors.
LstmState lstm_step(const Tensor& x, const LstmState& state, const Tensor& w_ih, const Tensor& w_hh, const Tensor& bias);

// Rows of `state` multiplied by mask[r] (0 resets a row, 1 keeps it).
LstmState mask_rows(const LstmState& state, std::span<const Real> mask);

}  // namespace ad
CSG_NAMESPACE_END

#endif  // CSG_AUTODIFF_LAYERS_HPP_
