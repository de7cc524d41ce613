#ifndef CSG_LEARNER_TRAIN_HPP_
#define CSG_LEARNER_TRAIN_HPP_

#include <deque>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "csg/learner/update.hpp"

CSG_NAMESPACE_BEGIN
namespace learner {

struct TrainConfig {
  AgentConfig agent;
  long total_steps = 5'000'000;
  std::uint64_t seed = 1;
  int actors = 4;
  int envs_per_actor = 8;
  int unroll = 80;
  int queue_capacity = 4;
  bool deterministic = false;
  VtraceConfig vtrace;
  ad::OptimizerConfig nav_optimizer{ad::OptimizerAlgo::rmsprop, Real(4e-4), Real(0.9), Real(0.999), Real(0.99),
                                    Real(0.01), Real(40)};
  ad::OptimizerConfig sg_optimizer = nav_optimizer;
  double sg_entropy_weight = 0.01;
  int gan_batch = 32;
  // Updates of each component per consumed trajectory.
  int nav_updates = 1, sg_updates = 1, gan_updates = 1;
  long log_interval = 20'000;           // environment steps between metrics rows
  long checkpoint_interval = 1'000'000;  // environment steps; 0 keeps only the final one
  std::filesystem::path out_dir;        // empty: no files are written
  // Stop once the trailing mean episodic r_e reaches this value; 0 disables.
  double stop_at_mean_r_e = 0;
  int trailing_episodes = 100;

  // Throws std::invalid_argument naming the offending field.
  void validate() const;
};

struct MetricsRow {
  long step = 0;
  long episodes = 0;
  double mean_r_e = 0, mean_r_c = 0, sg_reach_rate = 0;
  double nav_loss = 0, sg_loss = 0, d_loss = 0, g_loss = 0;

  static std::string header();
  std::string csv() const;
  friend bool operator==(const MetricsRow&, const MetricsRow&) = default;
};

struct TrainResult {
  std::vector<MetricsRow> rows;
  SnapshotPtr snapshot;
  long env_steps = 0;
  long episodes = 0;
  double trailing_mean_r_e = 0;
  bool target_reached = false;
  std::size_t produced = 0, consumed = 0, queue_high_water = 0;
  double seconds = 0;
};

// Owns every trainable parameter and optimizer; the single writer.
class Learner {
 public:
  Learner(const TrainConfig& config);

  // Runs the navigator, generator, GAN and RND updates on one trajectory.
  void consume(const Trajectory& traj);
  SnapshotPtr publish() const;

  // Accumulated statistics, cleared by take_row().
  MetricsRow take_row(long env_steps);
  double trailing_mean() const;
  std::size_t trailing_count() const { return trailing_.size(); }
  long episodes() const { return episodes_; }

 private:
  TrainConfig config_;
  Nets nets_;
  Snapshot params_;
  ad::Optimizer nav_opt_, sg_opt_;
  std::unique_ptr<gan::TransitionGan> gan_;
  std::unique_ptr<baselines::RndTrainer> rnd_;
  baselines::RunningStd rnd_std_;
  Rng rng_;
  std::uint64_t version_ = 0;
  std::deque<double> trailing_;
  long episodes_ = 0;
  // Since the last metrics row.
  double sum_r_c_ = 0, n_r_c_ = 0;
  long reached_ = 0, abandoned_ = 0;
  double sum_nav_ = 0, sum_sg_ = 0, sum_d_ = 0, sum_g_ = 0;
  long n_nav_ = 0, n_sg_ = 0, n_gan_ = 0;
};

// Actor count after the CSG_THREADS cap (unset or invalid: no cap).
int capped_actor_count(int requested);

// Runs actors and the learner until total_steps environment steps have been
// consumed or the trailing-mean target is met. Writes metrics.csv and
// checkpoints under out_dir when it is set; throws std::runtime_error if a
// file cannot be written.
TrainResult train(const TrainConfig& config, const std::function<void(const MetricsRow&)>& on_row = {});

}  // namespace learner
CSG_NAMESPACE_END

#endif  // CSG_LEARNER_TRAIN_HPP_
