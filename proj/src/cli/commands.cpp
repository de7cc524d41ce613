#include "csg/cli/commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "csg/learner/rollout.hpp"

CSG_NAMESPACE_BEGIN
namespace cli {

std::string EvalResult::summary() const {
  char buf[160];
  std::snprintf(buf, sizeof buf, "mean_r_e %.4f +- %.4f over %d episodes (%d solved)", mean, stderr_mean, episodes,
                successes);
  return buf;
}

learner::TrainResult run_train(RunConfig config, const std::function<void(const learner::MetricsRow&)>& on_row) {
  config.normalize();
  if (!config.train.out_dir.empty()) {
    std::filesystem::create_directories(config.train.out_dir);
    std::ofstream out(config.train.out_dir / "config.txt");
    if (!out) throw std::runtime_error("cannot write " + (config.train.out_dir / "config.txt").string());
    out << to_text(config);
  }
  return learner::train(config.train, on_row);
}

EvalResult evaluate(const learner::LoadedAgent& agent, int episodes, std::uint64_t seed, bool greedy) {
  if (episodes < 1) throw std::invalid_argument("episodes must be >= 1");
  learner::ActorOptions o;
  o.num_envs = static_cast<std::size_t>(std::min(episodes, 16));
  o.unroll = 50;
  o.greedy = greedy;
  learner::Actor actor(agent.config, o, seed);
  std::vector<learner::EpisodeSummary> done;
  while (done.size() < static_cast<std::size_t>(episodes)) {
    const learner::Trajectory tr = actor.collect(agent.snapshot);
    done.insert(done.end(), tr.episodes.begin(), tr.episodes.end());
  }
  done.resize(static_cast<std::size_t>(episodes));
  EvalResult r;
  r.episodes = episodes;
  for (const auto& e : done) {
    r.mean += e.r_e;
    r.successes += e.success;
  }
  r.mean /= episodes;
  if (episodes > 1) {
    double ss = 0;
    for (const auto& e : done) ss += (e.r_e - r.mean) * (e.r_e - r.mean);
    r.stderr_mean = std::sqrt(ss / (episodes - 1)) / std::sqrt(static_cast<double>(episodes));
  }
  return r;
}

ReplayResult replay(const learner::LoadedAgent& agent, std::uint64_t layout_seed, bool greedy, std::uint64_t seed) {
  learner::ActorOptions o;
  o.num_envs = 1;
  o.unroll = 1;
  o.greedy = greedy;
  o.layout_seed = layout_seed;
  o.record_trace = true;
  learner::Actor actor(agent.config, o, seed);
  ReplayResult out;
  bool finished = false;
  {
    const grid::GridState start = grid::generate(layout_seed, agent.config.size);
    out.frames += "episode start\n" + grid::render_ascii(start) + "\n";
  }
  actor.on_step = [&](const grid::GridState& s, const agent::TraceRecord& r) {
    const bool event = r.event == agent::TraceEvent::proposed || r.event == agent::TraceEvent::reached ||
                       r.event == agent::TraceEvent::abandoned;
    if (!event && !r.done) return;
    std::ostringstream os;
    os << "step " << r.step << " action " << grid::action_name(static_cast<grid::Action>(r.action));
    if (event) os << " | " << agent::event_name(r.event) << ": " << r.subgoal_text;
    if (r.done) os << " | episode end r_e " << r.r_e;
    out.frames += os.str() + "\n" + grid::render_ascii(s) + "\n";
  };
  while (!finished) {
    const learner::Trajectory tr = actor.collect(agent.snapshot);
    if (!tr.episodes.empty()) {
      finished = true;
      out.success = tr.episodes.front().success;
    }
  }
  out.records = actor.take_trace();
  return out;
}

std::string trace_to_json_line(const agent::TraceRecord& r) {
  nlohmann::json j;
  j["episode"] = r.episode;
  j["step"] = r.step;
  j["action"] = std::string(grid::action_name(static_cast<grid::Action>(r.action)));
  j["subgoal_id"] = r.subgoal_id;
  j["subgoal_pos"] = r.subgoal_pos;
  j["subgoal_value"] = r.subgoal_value;
  j["env_goal"] = r.env_goal;
  j["subgoal_text"] = r.subgoal_text;
  j["event"] = std::string(agent::event_name(r.event));
  j["steps_on_goal"] = r.steps_on_goal;
  j["done"] = r.done;
  j["r_e"] = r.r_e;
  j["r_c"] = r.r_c;
  j["r_g"] = r.r_g;
  return j.dump();
}

agent::TraceRecord trace_from_json_line(const std::string& line) {
  try {
    const nlohmann::json j = nlohmann::json::parse(line);
    agent::TraceRecord r;
    r.episode = j.at("episode").get<int>();
    r.step = j.at("step").get<int>();
    const std::string action = j.at("action").get<std::string>();
    r.action = -1;
    for (int a = 0; a < grid::kNumActions; ++a)
      if (grid::action_name(static_cast<grid::Action>(a)) == action) r.action = a;
    if (r.action < 0) throw std::invalid_argument("unknown action '" + action + "'");
    r.subgoal_id = j.at("subgoal_id").get<int>();
    r.subgoal_pos = j.at("subgoal_pos").get<int>();
    r.subgoal_value = j.at("subgoal_value").get<int>();
    r.env_goal = j.at("env_goal").get<bool>();
    r.subgoal_text = j.at("subgoal_text").get<std::string>();
    r.event = agent::event_from_name(j.at("event").get<std::string>());
    r.steps_on_goal = j.at("steps_on_goal").get<int>();
    r.done = j.at("done").get<bool>();
    r.r_e = j.at("r_e").get<double>();
    r.r_c = j.at("r_c").get<double>();
    r.r_g = j.at("r_g").get<double>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("trace line: ") + e.what());
  }
}

}  // namespace cli
CSG_NAMESPACE_END
