#ifndef CSG_CLI_COMMANDS_HPP_
#define CSG_CLI_COMMANDS_HPP_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "csg/cli/run_config.hpp"
#include "csg/learner/model.hpp"

CSG_NAMESPACE_BEGIN
namespace cli {

// Normalizes the config, writes out_dir/config.txt and trains.
learner::TrainResult run_train(RunConfig config, const std::function<void(const learner::MetricsRow&)>& on_row = {});

struct EvalResult {
  int episodes = 0;
  int successes = 0;
  double mean = 0;
  double stderr_mean = 0;
  std::string summary() const;  // "mean_r_e 0.9100 +- 0.0030 over 100 episodes (...)"
};

// Runs `episodes` episodes on fresh layouts drawn from `seed`. Greedy takes
// the argmax action (and proposal); otherwise actions are sampled.
EvalResult evaluate(const learner::LoadedAgent& agent, int episodes, std::uint64_t seed, bool greedy);

struct ReplayResult {
  std::vector<agent::TraceRecord> records;  // one per environment step
  std::string frames;                       // ASCII frames at subgoal events and the episode end
  bool success = false;
};

// Replays one episode on the layout `layout_seed`.
ReplayResult replay(const learner::LoadedAgent& agent, std::uint64_t layout_seed, bool greedy, std::uint64_t seed);

std::string trace_to_json_line(const agent::TraceRecord& r);
// Throws std::invalid_argument on a malformed line.
agent::TraceRecord trace_from_json_line(const std::string& line);

}  // namespace cli
CSG_NAMESPACE_END

#endif  // CSG_CLI_COMMANDS_HPP_
