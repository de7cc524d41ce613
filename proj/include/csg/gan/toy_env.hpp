#ifndef CSG_GAN_TOY_ENV_HPP_
#define CSG_GAN_TOY_ENV_HPP_

#include <string>
#include <vector>

#include "csg/gan/transition_gan.hpp"

CSG_NAMESPACE_BEGIN
namespace gan {

// 3x3 single-active-tile transition fixtures for exercising the GAN.
//
// The centre tile holds a value v in [1, 7]; the eight surrounding tiles
// form a background pattern of empty/wall cells that never changes. Action a
// moves the centre to 1 + (v + a) % 7. In the coin-flip variant, action
// kFlipAction instead yields key or goal with probability 1/2 each.
//
// A fixed hashed quarter of the background patterns is held out of training.
class ToyEnv {
 public:
  enum class Kind { deterministic, coin_flip };
  static constexpr int kView = 3;
  static constexpr int kTiles = kView * kView;
  static constexpr int kCentre = 4;
  static constexpr int kPatterns = 256;
  static constexpr int kFlipAction = 5;
  static constexpr int kFlipOutcomeA = 3;  // yellow key
  static constexpr int kFlipOutcomeB = 7;  // green goal

  explicit ToyEnv(Kind kind) : kind_(kind) {}
  Kind kind() const { return kind_; }

  static bool held_out(int pattern) { return ((static_cast<unsigned>(pattern) * 2654435761u) >> 13 & 3u) == 0; }
  static std::vector<int> observation(int pattern, int centre);
  static int rule(int centre, int action) { return 1 + (centre + action) % 7; }

  // Possible next centre values for (centre, action).
  std::vector<int> outcomes(int centre, int action) const;

  // Random transition from a training (or held-out) background.
  void sample(Rng& rng, bool from_held_out, std::vector<int>& obs, int& action, std::vector<int>& next) const;
  GanBatch batch(Rng& rng, std::size_t size, bool from_held_out) const;

  // A transition that can never occur: the centre takes a value outside
  // outcomes(centre, action).
  void impossible(Rng& rng, bool from_held_out, std::vector<int>& obs, int& action, std::vector<int>& next) const;

 private:
  Kind kind_;
};

GanConfig toy_gan_config();

// Curiosity on the coin-flip fixture before and after training.
struct RobustnessReport {
  int steps = 0;
  double untrained_outcome_a = 0, untrained_outcome_b = 0, untrained_impossible = 0;
  double trained_outcome_a = 0, trained_outcome_b = 0, trained_impossible = 0;
  double seconds = 0;

  double untrained_familiar() const { return (untrained_outcome_a + untrained_outcome_b) / 2; }
  double trained_familiar() const { return (trained_outcome_a + trained_outcome_b) / 2; }
  // Familiar curiosity dropped, and stays under half the impossible level.
  bool robust() const;
  std::string table() const;
};

// Trains a toy GAN on coin-flip transitions for `steps` updates of
// `batch_size` and scores the flip action's two outcomes and an impossible
// outcome over `eval_count` fixed training-background observations.
RobustnessReport robustness_probe(const GanConfig& config, int steps, std::uint64_t seed, std::size_t batch_size = 32,
                                  std::size_t eval_count = 256);

}  // namespace gan
CSG_NAMESPACE_END

#endif  // CSG_GAN_TOY_ENV_HPP_
