#include "csg/agent/policy_net.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "csg/autodiff/ops.hpp"

CSG_NAMESPACE_BEGIN
namespace agent {

using namespace ad;

namespace {

constexpr int kTileVocab = 8;

Linear describe_linear(const std::string& name, std::size_t in, std::size_t out) {
  Linear l;
  l.weight = name + ".w";
  l.bias = name + ".b";
  l.in = in;
  l.out = out;
  return l;
}

Lstm describe_lstm(const std::string& name, std::size_t in, std::size_t hidden) {
  Lstm l;
  l.w_ih = name + ".w_ih";
  l.w_hh = name + ".w_hh";
  l.bias = name + ".b";
  l.in = in;
  l.hidden = hidden;
  return l;
}

Embedding describe_embedding(const std::string& name, std::size_t vocab, std::size_t width) {
  Embedding e;
  e.table = name + ".table";
  e.vocab = vocab;
  e.width = width;
  return e;
}

std::size_t fc_input(const PolicyNetConfig& c) {
  const auto e = static_cast<std::size_t>(c.embed);
  return static_cast<std::size_t>(c.tiles()) * e + (c.goal_conditioned ? 2 * e : 0);
}

}  // namespace

RecurrentState RecurrentState::zeros(std::size_t batch, std::size_t hidden) {
  return {Tensor::zeros({batch, hidden}), Tensor::zeros({batch, hidden}), Tensor::zeros({batch, hidden}),
          Tensor::zeros({batch, hidden})};
}

std::vector<Real> RecurrentState::row(std::size_t r) const {
  const std::size_t h = h1.cols();
  std::vector<Real> out;
  out.reserve(4 * h);
  for (const Tensor* t : {&h1, &c1, &h2, &c2}) {
    const auto d = t->data().subspan(r * h, h);
    out.insert(out.end(), d.begin(), d.end());
  }
  return out;
}

RecurrentState RecurrentState::from_rows(const std::vector<std::vector<Real>>& rows, std::size_t hidden) {
  const std::size_t b = rows.size();
  std::vector<Real> parts[4];
  for (auto& p : parts) p.resize(b * hidden);
  for (std::size_t r = 0; r < b; ++r) {
    if (rows[r].size() != 4 * hidden)
      throw std::invalid_argument("recurrent state row of " + std::to_string(rows[r].size()) + " values, expected " +
                                  std::to_string(4 * hidden));
    for (std::size_t k = 0; k < 4; ++k)
      std::copy_n(rows[r].begin() + static_cast<std::ptrdiff_t>(k * hidden), hidden, parts[k].begin() + r * hidden);
  }
  return {Tensor::from({b, hidden}, std::move(parts[0])), Tensor::from({b, hidden}, std::move(parts[1])),
          Tensor::from({b, hidden}, std::move(parts[2])), Tensor::from({b, hidden}, std::move(parts[3]))};
}

RecurrentState RecurrentState::detached() const { return {h1.detach(), c1.detach(), h2.detach(), c2.detach()}; }

PolicyNet PolicyNet::describe(const PolicyNetConfig& c) {
  if (c.view < 3 || c.view % 2 == 0) throw std::invalid_argument("policy net: view must be odd and >= 3");
  if (c.embed < 1 || c.hidden < 1 || c.head < 1) throw std::invalid_argument("policy net: sizes must be positive");
  PolicyNet n;
  n.config_ = c;
  const auto e = static_cast<std::size_t>(c.embed);
  const auto h = static_cast<std::size_t>(c.hidden);
  n.tile_embed_ = describe_embedding("tile_embed", kTileVocab, e);
  if (c.goal_conditioned) n.pos_embed_ = describe_embedding("goal_pos_embed", static_cast<std::size_t>(c.tiles()), e);
  n.fc_ = describe_linear("fc", fc_input(c), h);
  n.lstm1_ = describe_lstm("lstm1", h, h);
  n.lstm2_ = describe_lstm("lstm2", h, h);
  n.policy_ = describe_linear("policy", h, static_cast<std::size_t>(c.head));
  n.value_ = describe_linear("value", h, 1);
  return n;
}

PolicyNet PolicyNet::create(const PolicyNetConfig& c, ParamSet& params, Rng& rng) {
  const auto e = static_cast<std::size_t>(c.embed);
  const auto h = static_cast<std::size_t>(c.hidden);
  PolicyNet n;
  n.config_ = c;
  n.tile_embed_ = Embedding(params, "tile_embed", kTileVocab, e, rng);
  if (c.goal_conditioned) n.pos_embed_ = Embedding(params, "goal_pos_embed", static_cast<std::size_t>(c.tiles()), e, rng);
  n.fc_ = Linear(params, "fc", fc_input(c), h, rng);
  n.lstm1_ = Lstm(params, "lstm1", h, h, rng);
  n.lstm2_ = Lstm(params, "lstm2", h, h, rng);
  n.policy_ = Linear(params, "policy", h, static_cast<std::size_t>(c.head), rng);
  n.value_ = Linear(params, "value", h, 1, rng);
  // Small policy head so the initial policy is close to uniform.
  for (Real& w : params.at(n.policy_.weight).data()) w *= Real(0.01);
  return n;
}

PolicyOutput PolicyNet::forward(const ParamSet& params, std::span<const int> tiles, std::span<const int> goal_pos,
                                std::span<const int> goal_value, const RecurrentState& state) const {
  const std::size_t batch = state.batch();
  if (tiles.size() != batch * static_cast<std::size_t>(config_.tiles()))
    throw std::invalid_argument("policy net: " + std::to_string(tiles.size()) + " tiles for batch " +
                                std::to_string(batch));
  Tensor x = tile_embed_(params, tiles, batch);
  if (config_.goal_conditioned) {
    if (goal_pos.size() != batch || goal_value.size() != batch)
      throw std::invalid_argument("policy net: goal batch mismatch");
    x = concat({x, pos_embed_(params, goal_pos, batch), tile_embed_(params, goal_value, batch)});
  }
  const Tensor h = relu(fc_(params, x));
  const LstmState s1 = lstm1_(params, h, {state.h1, state.c1});
  const LstmState s2 = lstm2_(params, s1.h, {state.h2, state.c2});
  return {policy_(params, s2.h), value_(params, s2.h), {s1.h, s1.c, s2.h, s2.c}};
}

int sample_categorical(std::span<const Real> logits, Rng& rng) {
  const std::vector<Real> p = softmax_values(logits);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double x = u(rng);
  double acc = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    acc += p[i];
    if (x < acc) return static_cast<int>(i);
  }
  return static_cast<int>(p.size()) - 1;
}

int argmax(std::span<const Real> logits) {
  return static_cast<int>(std::max_element(logits.begin(), logits.end()) - logits.begin());
}

Real log_prob_at(std::span<const Real> logits, int index) {
  const Real m = *std::max_element(logits.begin(), logits.end());
  double s = 0;
  for (Real v : logits) s += std::exp(static_cast<double>(v - m));
  return static_cast<Real>(logits[static_cast<std::size_t>(index)] - m - std::log(s));
}

Real entropy_of(std::span<const Real> logits) {
  const std::vector<Real> p = softmax_values(logits);
  double h = 0;
  for (Real v : p)
    if (v > 0) h -= v * std::log(static_cast<double>(v));
  return static_cast<Real>(h);
}

}  // namespace agent
CSG_NAMESPACE_END
