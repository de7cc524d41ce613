#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "csg/cli/commands.hpp"
#include "csg/gan/toy_env.hpp"

using namespace csg;

namespace {

// Applies the shared training flags on top of an optional config file.
cli::RunConfig build_config(const std::string& path, const std::vector<std::string>& sets,
                            const std::vector<std::pair<std::string, std::string>>& flags) {
  cli::RunConfig c;
  if (!path.empty()) c = cli::load_config(path);
  for (const auto& [k, v] : flags) cli::set_key(c, k, v);
  for (const std::string& kv : sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("--set expects key=value, got '" + kv + "'");
    cli::set_key(c, kv.substr(0, eq), kv.substr(eq + 1));
  }
  c.normalize();
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"curious sub-goal agents on key-door gridworlds"};
  app.require_subcommand(1);

  std::string config_path, algo, out, ckpt, trace_path;
  int size = 0;
  long steps = 0;
  long seed = -1;
  bool deterministic = false, sample = false;
  std::vector<std::string> sets;

  CLI::App* train = app.add_subcommand("train", "train an agent");
  train->add_option("--config", config_path, "key = value config file");
  train->add_option("--algo", algo, "csg, vanilla or rnd");
  train->add_option("--size", size, "grid size");
  train->add_option("--steps", steps, "environment step budget");
  train->add_option("--seed", seed, "random seed");
  train->add_option("--out", out, "output directory");
  train->add_flag("--deterministic", deterministic, "single-threaded reproducible run");
  train->add_option("--set", sets, "override one config key (key=value)");

  int episodes = 100;
  CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  eval->add_option("--checkpoint", ckpt, "checkpoint file")->required();
  eval->add_option("--episodes", episodes, "episode count");
  eval->add_option("--seed", seed, "layout seed");
  eval->add_flag("--sample", sample, "sample actions instead of taking the argmax");

  long layout = 0;
  CLI::App* replay = app.add_subcommand("replay", "replay one episode and print its trace");
  replay->add_option("--checkpoint", ckpt, "checkpoint file")->required();
  replay->add_option("--layout", layout, "layout seed");
  replay->add_option("--seed", seed, "action seed");
  replay->add_option("--trace", trace_path, "write the JSONL trace here instead of stdout");
  replay->add_flag("--sample", sample, "sample actions instead of taking the argmax");

  int probe_steps = 5000;
  CLI::App* probe = app.add_subcommand("gan-probe", "train the transition model on the toy worlds and report");
  probe->add_option("--steps", probe_steps, "training steps");
  probe->add_option("--seed", seed, "random seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) {
      std::vector<std::pair<std::string, std::string>> flags;
      if (!algo.empty()) flags.emplace_back("algo", algo);
      if (size > 0) flags.emplace_back("size", std::to_string(size));
      if (steps > 0) flags.emplace_back("total_steps", std::to_string(steps));
      if (seed >= 0) flags.emplace_back("seed", std::to_string(seed));
      if (!out.empty()) flags.emplace_back("out_dir", out);
      if (deterministic) flags.emplace_back("deterministic", "true");
      const cli::RunConfig c = build_config(config_path, sets, flags);
      std::cout << learner::MetricsRow::header() << '\n';
      const learner::TrainResult r =
          cli::run_train(c, [](const learner::MetricsRow& row) { std::cout << row.csv() << std::endl; });
      std::printf("steps %ld episodes %ld trailing_mean_r_e %.4f seconds %.1f\n", r.env_steps,
                  static_cast<long>(r.episodes), r.trailing_mean_r_e, r.seconds);
    } else if (*eval) {
      const learner::LoadedAgent a = learner::load_agent_checkpoint(ckpt);
      const cli::EvalResult r = cli::evaluate(a, episodes, seed >= 0 ? seed : 12345, !sample);
      std::cout << r.summary() << '\n';
    } else if (*replay) {
      const learner::LoadedAgent a = learner::load_agent_checkpoint(ckpt);
      const cli::ReplayResult r = cli::replay(a, layout, !sample, seed >= 0 ? seed : 1);
      std::ofstream file;
      if (!trace_path.empty()) {
        file.open(trace_path);
        if (!file) throw std::runtime_error("cannot write " + trace_path);
      }
      std::ostream& trace = trace_path.empty() ? std::cout : file;
      for (const auto& rec : r.records) trace << cli::trace_to_json_line(rec) << '\n';
      std::cerr << r.frames << (r.success ? "solved\n" : "not solved\n");
    } else if (*probe) {
      const auto report = gan::robustness_probe(gan::toy_gan_config(), probe_steps, seed >= 0 ? seed : 1);
      std::cout << report.table();
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
