#ifndef CSG_AGENT_POLICY_NET_HPP_
#define CSG_AGENT_POLICY_NET_HPP_

#include <span>
#include <string>
#include <vector>

#include "csg/autodiff/layers.hpp"
#include "csg/autodiff/param_set.hpp"

CSG_NAMESPACE_BEGIN
namespace agent {

using ad::ParamSet;
using ad::Rng;
using ad::Tensor;

struct PolicyNetConfig {
  int view = 5;
  int embed = 8;
  int hidden = 128;
  int head = 6;  // policy logits
  bool goal_conditioned = true;

  int tiles() const { return view * view; }
};

// Hidden and cell states of both LSTM layers, one row per environment.
struct RecurrentState {
  Tensor h1, c1, h2, c2;

  static RecurrentState zeros(std::size_t batch, std::size_t hidden);
  std::size_t batch() const { return h1.rows(); }
  // Row r as four concatenated vectors, and the inverse.
  std::vector<Real> row(std::size_t r) const;
  static RecurrentState from_rows(const std::vector<std::vector<Real>>& rows, std::size_t hidden);
  RecurrentState detached() const;
};

struct PolicyOutput {
  Tensor logits;  // [B, head]
  Tensor value;   // [B, 1]
  RecurrentState state;
};

// Tile embedding (shared by goal values), goal position embedding,
// FC + ReLU, two stacked LSTMs, then policy and value heads.
class PolicyNet {
 public:
  PolicyNet() = default;
  static PolicyNet create(const PolicyNetConfig& config, ParamSet& params, Rng& rng);
  static PolicyNet describe(const PolicyNetConfig& config);

  const PolicyNetConfig& config() const { return config_; }

  // tiles: B * view^2 indices. goal_pos / goal_value: B entries each, ignored
  // when the network is not goal-conditioned.
  PolicyOutput forward(const ParamSet& params, std::span<const int> tiles, std::span<const int> goal_pos,
                       std::span<const int> goal_value, const RecurrentState& state) const;

 private:
  PolicyNetConfig config_;
  ad::Embedding tile_embed_, pos_embed_;
  ad::Linear fc_, policy_, value_;
  ad::Lstm lstm1_, lstm2_;
};

// Index drawn from softmax(logits).
int sample_categorical(std::span<const Real> logits, Rng& rng);
int argmax(std::span<const Real> logits);
// log softmax(logits)[index]
Real log_prob_at(std::span<const Real> logits, int index);
Real entropy_of(std::span<const Real> logits);

}  // namespace agent
CSG_NAMESPACE_END

#endif  // CSG_AGENT_POLICY_NET_HPP_
