#ifndef CSG_LEARNER_MODEL_HPP_
#define CSG_LEARNER_MODEL_HPP_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>

#include "csg/agent/agent.hpp"
#include "csg/baselines/rnd.hpp"
#include "csg/gan/transition_gan.hpp"

CSG_NAMESPACE_BEGIN
namespace learner {

using ad::ParamSet;
using ad::Rng;
using ad::Tensor;

enum class Algo { csg, vanilla, rnd };
std::string_view algo_name(Algo a);
// Throws std::invalid_argument for an unknown name.
Algo algo_from_name(std::string_view name);

// Everything an actor needs to act: architecture and reward settings.
struct AgentConfig {
  Algo algo = Algo::csg;
  int size = 5;  // N
  int view = 5;  // M
  int hidden = 128;
  int embed = 8;
  agent::GoalRewardConfig goal;
  gan::GanConfig gan;
  baselines::RndConfig rnd;
  // Treat reached/abandoned subgoals as terminal for the navigator's returns.
  bool nav_cut_at_subgoal = true;

  agent::PolicyNetConfig nav_config() const;
  agent::PolicyNetConfig sg_config() const;
  // Propagates the view size into the GAN and RND configs and validates.
  void finalize();
};

// Layer descriptors for one agent configuration.
struct Nets {
  agent::PolicyNet nav, sg;
  gan::GanModel gan;
  baselines::RndModel rnd;

  static Nets describe(const AgentConfig& config);
};

// Immutable parameter set published by the learner and read by actors.
struct Snapshot {
  std::uint64_t version = 0;
  ParamSet nav, sg;
  gan::GanParams gan;
  baselines::RndParams rnd;
};
using SnapshotPtr = std::shared_ptr<const Snapshot>;

// Freshly initialized parameters for every network the algorithm uses.
Snapshot initial_snapshot(const AgentConfig& config, std::uint64_t seed);

// Checkpoint = flattened snapshot ("nav.", "sg.", "gan.", "rnd_t.", "rnd_p.")
// plus the agent config in the meta block.
void save_agent_checkpoint(const std::filesystem::path& path, const AgentConfig& config, const Snapshot& snap,
                           long env_steps);
struct LoadedAgent {
  AgentConfig config;
  Snapshot snapshot;
  long env_steps = 0;
};
// Throws std::runtime_error when the file is unreadable or its parameter
// shapes do not match the recorded config.
LoadedAgent load_agent_checkpoint(const std::filesystem::path& path);

}  // namespace learner
CSG_NAMESPACE_END

#endif  // CSG_LEARNER_MODEL_HPP_
