#include "csg/learner/train.hpp"

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "csg/learner/queue.hpp"

CSG_NAMESPACE_BEGIN
namespace learner {

void TrainConfig::validate() const {
  auto positive = [](long v, const char* name) {
    if (v < 1) throw std::invalid_argument(std::string(name) + " must be >= 1");
  };
  positive(total_steps, "total_steps");
  positive(actors, "actors");
  positive(envs_per_actor, "envs_per_actor");
  positive(unroll, "unroll");
  positive(queue_capacity, "queue_capacity");
  positive(gan_batch, "gan_batch");
  positive(log_interval, "log_interval");
  positive(trailing_episodes, "trailing_episodes");
  if (nav_updates < 0 || sg_updates < 0 || gan_updates < 0)
    throw std::invalid_argument("update counts must be >= 0");
  if (checkpoint_interval < 0) throw std::invalid_argument("checkpoint_interval must be >= 0");
  if (stop_at_mean_r_e < 0) throw std::invalid_argument("stop_at_mean_r_e must be >= 0");
  if (!(sg_entropy_weight >= 0)) throw std::invalid_argument("sg_entropy_weight must be >= 0");
  vtrace.validate();
  AgentConfig a = agent;
  a.finalize();
}

std::string MetricsRow::header() { return "step,episodes,mean_r_e,mean_r_c,sg_reach_rate,nav_loss,sg_loss,d_loss,g_loss"; }

std::string MetricsRow::csv() const {
  std::ostringstream os;
  os.precision(9);
  os << step << ',' << episodes << ',' << mean_r_e << ',' << mean_r_c << ',' << sg_reach_rate << ',' << nav_loss << ','
     << sg_loss << ',' << d_loss << ',' << g_loss;
  return os.str();
}

Learner::Learner(const TrainConfig& config)
    : config_(config),
      nets_(Nets::describe([&] {
        AgentConfig a = config.agent;
        a.finalize();
        return a;
      }())),
      nav_opt_(config.nav_optimizer),
      sg_opt_(config.sg_optimizer),
      rng_(config.seed ^ 0x5bd1e995u) {
  config_.agent.finalize();
  params_ = initial_snapshot(config_.agent, config_.seed);
  for (auto& [name, t] : params_.nav) t.set_requires_grad(true);
  for (auto& [name, t] : params_.sg) t.set_requires_grad(true);
  if (config_.agent.algo == Algo::csg) gan_ = std::make_unique<gan::TransitionGan>(config_.agent.gan, params_.gan.clone());
  if (config_.agent.algo == Algo::rnd) {
    rnd_ = std::make_unique<baselines::RndTrainer>(config_.agent.rnd, config_.seed + 17);
  }
}

void Learner::consume(const Trajectory& tr) {
  tr.validate();
  const AgentConfig& a = config_.agent;
  for (const EpisodeSummary& e : tr.episodes) {
    trailing_.push_back(e.r_e);
    if (trailing_.size() > static_cast<std::size_t>(config_.trailing_episodes)) trailing_.pop_front();
    ++episodes_;
  }
  double rnd_scale = 1;
  if (a.algo == Algo::rnd) {
    rnd_std_.update(tr.r_i);
    rnd_scale = rnd_std_.stddev();
  }

  const SequenceBatch nav = navigator_batch(tr, navigator_rewards(tr, a.algo, rnd_scale),
                                            navigator_discounts(tr, config_.vtrace.gamma,
                                                                a.algo == Algo::csg && a.nav_cut_at_subgoal));
  for (int k = 0; k < config_.nav_updates; ++k) {
    sum_nav_ += actor_critic_update(nets_.nav, params_.nav, nav_opt_, nav, config_.vtrace).total;
    ++n_nav_;
  }

  if (a.algo == Algo::csg) {
    for (double r : tr.r_c) sum_r_c_ += r;
    n_r_c_ += static_cast<double>(tr.r_c.size());
    reached_ += tr.sg_reached;
    abandoned_ += tr.sg_abandoned;
    const SequenceBatch sg = subgoal_batch(tr, a.view);
    if (sg.B > 0)
      for (int k = 0; k < config_.sg_updates; ++k) {
        VtraceConfig v = config_.vtrace;
        v.gamma = a.goal.gamma;
        v.entropy_weight = config_.sg_entropy_weight;
        sum_sg_ += actor_critic_update(nets_.sg, params_.sg, sg_opt_, sg, v).total;
        ++n_sg_;
      }
    const std::size_t n = tr.T * tr.B;
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    for (int k = 0; k < config_.gan_updates; ++k) {
      gan::GanBatch batch;
      for (int j = 0; j < config_.gan_batch; ++j) {
        const std::size_t i = pick(rng_);
        batch.add(std::span<const int>(tr.obs.data() + i * tr.tiles, tr.tiles), tr.actions[i],
                  std::span<const int>(tr.next_obs.data() + i * tr.tiles, tr.tiles));
      }
      const gan::GanLossReport r = gan_->train_step(batch, rng_);
      sum_d_ += r.d_loss;
      sum_g_ += r.g_mali_loss;
      ++n_gan_;
    }
  }
  if (a.algo == Algo::rnd) {
    sum_g_ += rnd_->train_step(tr.next_obs, tr.T * tr.B);
    ++n_gan_;
  }
  ++version_;
}

SnapshotPtr Learner::publish() const {
  auto s = std::make_shared<Snapshot>();
  s->version = version_;
  s->nav = params_.nav.clone();
  s->sg = params_.sg.clone();
  if (gan_) s->gan = gan_->snapshot();
  if (rnd_) s->rnd = {rnd_->params().target.clone(), rnd_->params().predictor.clone()};
  return s;
}

double Learner::trailing_mean() const {
  if (trailing_.empty()) return 0;
  double s = 0;
  for (double r : trailing_) s += r;
  return s / static_cast<double>(trailing_.size());
}

MetricsRow Learner::take_row(long env_steps) {
  MetricsRow row;
  row.step = env_steps;
  row.episodes = episodes_;
  row.mean_r_e = trailing_mean();
  row.mean_r_c = n_r_c_ > 0 ? sum_r_c_ / n_r_c_ : 0;
  row.sg_reach_rate = reached_ + abandoned_ > 0 ? static_cast<double>(reached_) / double(reached_ + abandoned_) : 0;
  row.nav_loss = n_nav_ ? sum_nav_ / double(n_nav_) : 0;
  row.sg_loss = n_sg_ ? sum_sg_ / double(n_sg_) : 0;
  const bool rnd = config_.agent.algo == Algo::rnd;
  row.d_loss = n_gan_ && !rnd ? sum_d_ / double(n_gan_) : 0;
  row.g_loss = n_gan_ ? sum_g_ / double(n_gan_) : 0;
  sum_r_c_ = n_r_c_ = 0;
  reached_ = abandoned_ = 0;
  sum_nav_ = sum_sg_ = sum_d_ = sum_g_ = 0;
  n_nav_ = n_sg_ = n_gan_ = 0;
  return row;
}

int capped_actor_count(int requested) {
  if (const char* env = std::getenv("CSG_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && cap >= 1 && cap < requested) return static_cast<int>(cap);
  }
  return requested;
}

namespace {

std::uint64_t actor_seed(std::uint64_t seed, int index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), 0xac7u};
  std::uint64_t out[1];
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  out[0] = (std::uint64_t(words[0]) << 32) | words[1];
  return out[0];
}

}  // namespace

TrainResult train(const TrainConfig& cfg_in, const std::function<void(const MetricsRow&)>& on_row) {
  TrainConfig cfg = cfg_in;
  cfg.validate();
  cfg.agent.finalize();
  const int actor_count = cfg.deterministic ? cfg.actors : capped_actor_count(cfg.actors);
  const auto start = std::chrono::steady_clock::now();

  std::ofstream metrics;
  std::filesystem::path ckpt_dir;
  if (!cfg.out_dir.empty()) {
    std::filesystem::create_directories(cfg.out_dir);
    ckpt_dir = cfg.out_dir / "checkpoints";
    std::filesystem::create_directories(ckpt_dir);
    metrics.open(cfg.out_dir / "metrics.csv");
    if (!metrics) throw std::runtime_error("cannot write " + (cfg.out_dir / "metrics.csv").string());
    metrics << MetricsRow::header() << '\n';
  }

  Learner learner(cfg);
  SnapshotPtr current = learner.publish();
  std::mutex snap_mu;

  TrainResult result;
  long next_log = cfg.log_interval;
  long next_ckpt = cfg.checkpoint_interval > 0 ? cfg.checkpoint_interval : -1;

  auto emit = [&](long steps) {
    const MetricsRow row = learner.take_row(steps);
    result.rows.push_back(row);
    if (metrics) metrics << row.csv() << '\n' << std::flush;
    if (on_row) on_row(row);
  };
  auto save = [&](const std::filesystem::path& path, const Snapshot& snap, long steps) {
    save_agent_checkpoint(path, cfg.agent, snap, steps);
  };
  // Returns true when training should stop.
  auto after_update = [&](const Trajectory& tr) {
    result.env_steps += static_cast<long>(tr.T * tr.B);
    ++result.consumed;
    SnapshotPtr snap = learner.publish();
    {
      std::lock_guard lock(snap_mu);
      current = snap;
    }
    if (result.env_steps >= next_log) {
      emit(result.env_steps);
      while (next_log <= result.env_steps) next_log += cfg.log_interval;
    }
    if (!ckpt_dir.empty() && next_ckpt > 0 && result.env_steps >= next_ckpt) {
      save(ckpt_dir / ("step_" + std::to_string(result.env_steps) + ".ckpt"), *snap, result.env_steps);
      while (next_ckpt <= result.env_steps) next_ckpt += cfg.checkpoint_interval;
    }
    const bool target = cfg.stop_at_mean_r_e > 0 &&
                        learner.trailing_count() >= static_cast<std::size_t>(cfg.trailing_episodes) &&
                        learner.trailing_mean() >= cfg.stop_at_mean_r_e;
    if (target) result.target_reached = true;
    return target || result.env_steps >= cfg.total_steps;
  };

  ActorOptions opts;
  opts.num_envs = static_cast<std::size_t>(cfg.envs_per_actor);
  opts.unroll = static_cast<std::size_t>(cfg.unroll);

  if (cfg.deterministic) {
    std::vector<Actor> actors;
    for (int i = 0; i < actor_count; ++i) actors.emplace_back(cfg.agent, opts, actor_seed(cfg.seed, i));
    bool stop = false;
    while (!stop)
      for (Actor& actor : actors) {
        const Trajectory tr = actor.collect(*current);
        ++result.produced;
        learner.consume(tr);
        if ((stop = after_update(tr))) break;
      }
    result.queue_high_water = 0;
  } else {
    BoundedQueue<Trajectory> queue(static_cast<std::size_t>(cfg.queue_capacity));
    std::atomic<bool> stop{false};
    std::vector<std::thread> threads;
    std::exception_ptr actor_error;
    std::mutex error_mu;
    for (int i = 0; i < actor_count; ++i)
      threads.emplace_back([&, i] {
        try {
          Actor actor(cfg.agent, opts, actor_seed(cfg.seed, i));
          while (!stop.load()) {
            SnapshotPtr snap;
            {
              std::lock_guard lock(snap_mu);
              snap = current;
            }
            if (!queue.push(actor.collect(*snap))) break;
          }
        } catch (...) {
          std::lock_guard lock(error_mu);
          if (!actor_error) actor_error = std::current_exception();
          queue.close();
        }
      });
    try {
      bool done = false;
      while (!done) {
        std::optional<Trajectory> tr = queue.pop();
        if (!tr) break;
        learner.consume(*tr);
        done = after_update(*tr);
      }
      stop = true;
      queue.close();
      // Anything already queued is still consumed exactly once.
      while (std::optional<Trajectory> tr = queue.pop()) {
        learner.consume(*tr);
        result.env_steps += static_cast<long>(tr->T * tr->B);
        ++result.consumed;
      }
    } catch (...) {
      stop = true;
      queue.close();
      for (std::thread& t : threads) t.join();
      throw;
    }
    for (std::thread& t : threads) t.join();
    if (actor_error) std::rethrow_exception(actor_error);
    result.produced = queue.pushed();
    result.queue_high_water = queue.high_water();
  }

  result.snapshot = learner.publish();
  result.episodes = learner.episodes();
  result.trailing_mean_r_e = learner.trailing_mean();
  if (result.rows.empty() || result.rows.back().step != result.env_steps) emit(result.env_steps);
  if (!ckpt_dir.empty()) save(ckpt_dir / "final.ckpt", *result.snapshot, result.env_steps);
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace learner
CSG_NAMESPACE_END
