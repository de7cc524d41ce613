#include "csg/cli/run_config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>

CSG_NAMESPACE_BEGIN
namespace cli {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, const char* want) {
  throw std::invalid_argument("config key '" + std::string(key) + "': '" + std::string(value) + "' is not " + want);
}

long parse_long(std::string_view key, std::string_view v) {
  long out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) bad_value(key, v, "an integer");
  return out;
}

double parse_double(std::string_view key, std::string_view v) {
  const std::string s(v);
  std::size_t used = 0;
  double out = 0;
  try {
    out = std::stod(s, &used);
  } catch (const std::exception&) {
    bad_value(key, v, "a number");
  }
  if (used != s.size()) bad_value(key, v, "a number");
  return out;
}

bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  bad_value(key, v, "a boolean");
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

struct Key {
  std::function<void(RunConfig&, std::string_view key, std::string_view value)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <typename F>
Key int_key(F field) {
  return {[field](RunConfig& c, std::string_view k, std::string_view v) {
            field(c) = static_cast<std::remove_reference_t<decltype(field(c))>>(parse_long(k, v));
          },
          [field](const RunConfig& c) { return std::to_string(field(const_cast<RunConfig&>(c))); }};
}

template <typename F>
Key real_key(F field) {
  return {[field](RunConfig& c, std::string_view k, std::string_view v) {
            field(c) = static_cast<std::remove_reference_t<decltype(field(c))>>(parse_double(k, v));
          },
          [field](const RunConfig& c) { return fmt(static_cast<double>(field(const_cast<RunConfig&>(c)))); }};
}

template <typename F>
Key bool_key(F field) {
  return {[field](RunConfig& c, std::string_view k, std::string_view v) { field(c) = parse_bool(k, v); },
          [field](const RunConfig& c) { return std::string(field(const_cast<RunConfig&>(c)) ? "true" : "false"); }};
}

#define CSG_FIELD(expr) [](RunConfig& c) -> auto& { return expr; }

const std::map<std::string, Key, std::less<>>& table() {
  static const std::map<std::string, Key, std::less<>> t = [] {
    std::map<std::string, Key, std::less<>> m;
    m["algo"] = {[](RunConfig& c, std::string_view, std::string_view v) { c.train.agent.algo = learner::algo_from_name(v); },
                 [](const RunConfig& c) { return std::string(learner::algo_name(c.train.agent.algo)); }};
    m["out_dir"] = {[](RunConfig& c, std::string_view, std::string_view v) { c.train.out_dir = std::string(v); },
                    [](const RunConfig& c) { return c.train.out_dir.string(); }};
    m["seed"] = {[](RunConfig& c, std::string_view k, std::string_view v) {
                   c.train.seed = static_cast<std::uint64_t>(parse_long(k, v));
                 },
                 [](const RunConfig& c) { return std::to_string(c.train.seed); }};
    m["size"] = int_key(CSG_FIELD(c.train.agent.size));
    m["view"] = int_key(CSG_FIELD(c.view));
    m["total_steps"] = int_key(CSG_FIELD(c.total_steps));
    m["actors"] = int_key(CSG_FIELD(c.train.actors));
    m["envs_per_actor"] = int_key(CSG_FIELD(c.train.envs_per_actor));
    m["unroll"] = int_key(CSG_FIELD(c.train.unroll));
    m["queue_capacity"] = int_key(CSG_FIELD(c.train.queue_capacity));
    m["deterministic"] = bool_key(CSG_FIELD(c.train.deterministic));
    m["hidden"] = int_key(CSG_FIELD(c.train.agent.hidden));
    m["embed"] = int_key(CSG_FIELD(c.train.agent.embed));
    m["gamma"] = real_key(CSG_FIELD(c.train.vtrace.gamma));
    m["rho_bar"] = real_key(CSG_FIELD(c.train.vtrace.rho_bar));
    m["c_bar"] = real_key(CSG_FIELD(c.train.vtrace.c_bar));
    m["policy_weight"] = real_key(CSG_FIELD(c.train.vtrace.policy_weight));
    m["baseline_weight"] = real_key(CSG_FIELD(c.train.vtrace.baseline_weight));
    m["entropy_weight"] = real_key(CSG_FIELD(c.train.vtrace.entropy_weight));
    m["sg_entropy_weight"] = real_key(CSG_FIELD(c.train.sg_entropy_weight));
    m["lr"] = real_key(CSG_FIELD(c.train.nav_optimizer.lr));
    m["sg_lr"] = real_key(CSG_FIELD(c.train.sg_optimizer.lr));
    m["rmsprop_eps"] = real_key(CSG_FIELD(c.train.nav_optimizer.eps));
    m["sg_rmsprop_eps"] = real_key(CSG_FIELD(c.train.sg_optimizer.eps));
    m["max_grad_norm"] = real_key(CSG_FIELD(c.train.nav_optimizer.max_grad_norm));
    m["nav_updates"] = int_key(CSG_FIELD(c.train.nav_updates));
    m["sg_updates"] = int_key(CSG_FIELD(c.train.sg_updates));
    m["gan_updates"] = int_key(CSG_FIELD(c.train.gan_updates));
    m["goal_r"] = real_key(CSG_FIELD(c.train.agent.goal.r));
    m["goal_gamma"] = real_key(CSG_FIELD(c.train.agent.goal.gamma));
    m["beta"] = real_key(CSG_FIELD(c.train.agent.goal.beta));
    m["abandon_limit"] = int_key(CSG_FIELD(c.train.agent.goal.abandon_limit));
    m["nav_cut_at_subgoal"] = bool_key(CSG_FIELD(c.train.agent.nav_cut_at_subgoal));
    m["gan_alpha"] = real_key(CSG_FIELD(c.train.agent.gan.alpha));
    m["gan_z_dim"] = int_key(CSG_FIELD(c.train.agent.gan.z_dim));
    m["gan_hidden"] = int_key(CSG_FIELD(c.train.agent.gan.hidden));
    m["gan_k_samples"] = int_key(CSG_FIELD(c.train.agent.gan.k_samples));
    m["gan_d_steps"] = int_key(CSG_FIELD(c.train.agent.gan.d_steps));
    m["gan_lambda_kl"] = real_key(CSG_FIELD(c.train.agent.gan.lambda_kl));
    m["gan_lambda_latent"] = real_key(CSG_FIELD(c.train.agent.gan.lambda_latent));
    m["gan_lambda_recon"] = real_key(CSG_FIELD(c.train.agent.gan.lambda_recon));
    m["gan_lr"] = real_key(CSG_FIELD(c.train.agent.gan.optimizer.lr));
    m["gan_batch"] = int_key(CSG_FIELD(c.train.gan_batch));
    m["rnd_scale"] = real_key(CSG_FIELD(c.train.agent.rnd.scale));
    m["rnd_hidden"] = int_key(CSG_FIELD(c.train.agent.rnd.hidden));
    m["rnd_feature_dim"] = int_key(CSG_FIELD(c.train.agent.rnd.feature_dim));
    m["rnd_lr"] = real_key(CSG_FIELD(c.train.agent.rnd.optimizer.lr));
    m["log_interval"] = int_key(CSG_FIELD(c.train.log_interval));
    m["checkpoint_interval"] = int_key(CSG_FIELD(c.train.checkpoint_interval));
    m["stop_at_mean_r_e"] = real_key(CSG_FIELD(c.train.stop_at_mean_r_e));
    m["trailing_episodes"] = int_key(CSG_FIELD(c.train.trailing_episodes));
    return m;
  }();
  return t;
}

#undef CSG_FIELD

}  // namespace

long default_budget(int size) {
  if (size <= 5) return 5'000'000;
  if (size <= 6) return 30'000'000;
  if (size <= 8) return 60'000'000;
  return 90'000'000;
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& [name, key] : table()) k.push_back(name);
    return k;
  }();
  return keys;
}

void set_key(RunConfig& c, std::string_view key, std::string_view value) {
  const auto it = table().find(key);
  if (it == table().end()) throw std::invalid_argument("unknown config key '" + std::string(key) + "'");
  it->second.set(c, key, value);
}

std::string get_key(const RunConfig& c, std::string_view key) {
  const auto it = table().find(key);
  if (it == table().end()) throw std::invalid_argument("unknown config key '" + std::string(key) + "'");
  return it->second.get(c);
}

void RunConfig::normalize() {
  learner::AgentConfig& a = train.agent;
  if (a.size < 5) throw std::invalid_argument("config key 'size': must be >= 5");
  if (view == 0) view = grid::default_view_size(a.size);
  if (view < 3 || view % 2 == 0) throw std::invalid_argument("config key 'view': must be odd and >= 3");
  if (total_steps == 0) total_steps = default_budget(a.size);
  a.view = view;
  train.total_steps = total_steps;
  train.sg_optimizer.max_grad_norm = train.nav_optimizer.max_grad_norm;
  try {
    train.validate();
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  a.finalize();
}

RunConfig parse_config(std::string_view text, RunConfig base) {
  std::istringstream in{std::string(text)};
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(number) + ": expected 'key = value'");
    set_key(base, trim(std::string_view(t).substr(0, eq)), trim(std::string_view(t).substr(eq + 1)));
  }
  return base;
}

RunConfig load_config(const std::string& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), std::move(base));
}

std::string to_text(const RunConfig& c) {
  std::string out;
  for (const std::string& k : config_keys()) out += k + " = " + get_key(c, k) + "\n";
  return out;
}

}  // namespace cli
CSG_NAMESPACE_END
