#include "csg/learner/model.hpp"

#include <sstream>
#include <stdexcept>

#include "csg/autodiff/checkpoint.hpp"

CSG_NAMESPACE_BEGIN
namespace learner {

std::string_view algo_name(Algo a) {
  switch (a) {
    case Algo::csg: return "csg";
    case Algo::vanilla: return "vanilla";
    case Algo::rnd: return "rnd";
  }
  return "?";
}

Algo algo_from_name(std::string_view name) {
  for (Algo a : {Algo::csg, Algo::vanilla, Algo::rnd})
    if (algo_name(a) == name) return a;
  throw std::invalid_argument("unknown algo '" + std::string(name) + "' (expected csg, vanilla or rnd)");
}

agent::PolicyNetConfig AgentConfig::nav_config() const {
  agent::PolicyNetConfig c;
  c.view = view;
  c.embed = embed;
  c.hidden = hidden;
  c.head = grid::kNumActions;
  c.goal_conditioned = algo == Algo::csg;
  return c;
}

agent::PolicyNetConfig AgentConfig::sg_config() const {
  agent::PolicyNetConfig c = nav_config();
  c.head = view * view * agent::kVocab;
  c.goal_conditioned = true;
  return c;
}

void AgentConfig::finalize() {
  if (size < 5) throw std::invalid_argument("size must be >= 5");
  if (view < 3 || view % 2 == 0) throw std::invalid_argument("view must be odd and >= 3");
  if (hidden < 1) throw std::invalid_argument("hidden must be >= 1");
  if (embed < 1) throw std::invalid_argument("embed must be >= 1");
  gan.view = view;
  rnd.view = view;
  goal.validate();
  gan.validate();
  rnd.validate();
}

Nets Nets::describe(const AgentConfig& c) {
  Nets n;
  n.nav = agent::PolicyNet::describe(c.nav_config());
  if (c.algo == Algo::csg) {
    n.sg = agent::PolicyNet::describe(c.sg_config());
    gan::GanParams gp;
    Rng rng(0);
    n.gan = gan::GanModel::create(c.gan, gp, rng);
  }
  if (c.algo == Algo::rnd) n.rnd = baselines::RndModel::describe(c.rnd);
  return n;
}

Snapshot initial_snapshot(const AgentConfig& c, std::uint64_t seed) {
  Snapshot s;
  Rng rng(seed);
  agent::PolicyNet::create(c.nav_config(), s.nav, rng);
  if (c.algo == Algo::csg) {
    agent::PolicyNet::create(c.sg_config(), s.sg, rng);
    gan::GanModel::create(c.gan, s.gan, rng);
  }
  if (c.algo == Algo::rnd) s.rnd = baselines::make_rnd_params(baselines::RndModel::describe(c.rnd), rng());
  return s;
}

namespace {

void put(ad::CheckpointMeta& m, const std::string& k, double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  m[k] = os.str();
}

double get(const ad::CheckpointMeta& m, const std::string& k) {
  const auto it = m.find(k);
  if (it == m.end()) throw std::runtime_error("checkpoint meta lacks '" + k + "'");
  return std::stod(it->second);
}

void split(const ParamSet& flat, std::string_view prefix, ParamSet& into) {
  for (const auto& [name, t] : flat)
    if (name.starts_with(prefix)) into.add(name.substr(prefix.size()), t.clone());
}

void check_shapes(const ParamSet& fresh, const ParamSet& loaded, const std::string& what) {
  if (fresh.size() != loaded.size())
    throw std::runtime_error("checkpoint " + what + " holds " + std::to_string(loaded.size()) + " tensors, config needs " +
                             std::to_string(fresh.size()));
  for (const auto& [name, t] : fresh) {
    if (!loaded.contains(name)) throw std::runtime_error("checkpoint " + what + " lacks '" + name + "'");
    if (loaded.at(name).shape() != t.shape())
      throw std::runtime_error("checkpoint tensor " + what + name + " has shape " +
                               ad::shape_string(loaded.at(name).shape()) + ", config needs " + ad::shape_string(t.shape()));
  }
}

}  // namespace

void save_agent_checkpoint(const std::filesystem::path& path, const AgentConfig& c, const Snapshot& s, long env_steps) {
  ParamSet flat;
  flat.merge(s.nav, "nav.");
  flat.merge(s.sg, "sg.");
  flat.merge(s.gan.flatten(), "gan.");
  flat.merge(s.rnd.target, "rnd_t.");
  flat.merge(s.rnd.predictor, "rnd_p.");
  ad::CheckpointMeta m;
  m["algo"] = std::string(algo_name(c.algo));
  put(m, "size", c.size);
  put(m, "view", c.view);
  put(m, "hidden", c.hidden);
  put(m, "embed", c.embed);
  put(m, "gan.z_dim", c.gan.z_dim);
  put(m, "gan.hidden", c.gan.hidden);
  put(m, "gan.alpha", c.gan.alpha);
  put(m, "rnd.hidden", c.rnd.hidden);
  put(m, "rnd.feature_dim", c.rnd.feature_dim);
  put(m, "rnd.scale", c.rnd.scale);
  put(m, "goal.r", c.goal.r);
  put(m, "goal.gamma", c.goal.gamma);
  put(m, "goal.beta", c.goal.beta);
  put(m, "goal.abandon_limit", c.goal.abandon_limit);
  put(m, "nav_cut_at_subgoal", c.nav_cut_at_subgoal ? 1 : 0);
  put(m, "env_steps", static_cast<double>(env_steps));
  m["version"] = std::to_string(s.version);
  ad::save_checkpoint(path, flat, m);
}

LoadedAgent load_agent_checkpoint(const std::filesystem::path& path) {
  const ad::Checkpoint ck = ad::load_checkpoint(path);
  LoadedAgent out;
  AgentConfig& c = out.config;
  const auto algo = ck.meta.find("algo");
  if (algo == ck.meta.end()) throw std::runtime_error("checkpoint " + path.string() + " is not an agent checkpoint");
  c.algo = algo_from_name(algo->second);
  c.size = static_cast<int>(get(ck.meta, "size"));
  c.view = static_cast<int>(get(ck.meta, "view"));
  c.hidden = static_cast<int>(get(ck.meta, "hidden"));
  c.embed = static_cast<int>(get(ck.meta, "embed"));
  c.gan.z_dim = static_cast<int>(get(ck.meta, "gan.z_dim"));
  c.gan.hidden = static_cast<int>(get(ck.meta, "gan.hidden"));
  c.gan.alpha = static_cast<Real>(get(ck.meta, "gan.alpha"));
  c.rnd.hidden = static_cast<int>(get(ck.meta, "rnd.hidden"));
  c.rnd.feature_dim = static_cast<int>(get(ck.meta, "rnd.feature_dim"));
  c.rnd.scale = static_cast<Real>(get(ck.meta, "rnd.scale"));
  c.goal.r = static_cast<Real>(get(ck.meta, "goal.r"));
  c.goal.gamma = static_cast<Real>(get(ck.meta, "goal.gamma"));
  c.goal.beta = static_cast<Real>(get(ck.meta, "goal.beta"));
  c.goal.abandon_limit = static_cast<int>(get(ck.meta, "goal.abandon_limit"));
  c.nav_cut_at_subgoal = get(ck.meta, "nav_cut_at_subgoal") != 0;
  c.finalize();
  out.env_steps = static_cast<long>(get(ck.meta, "env_steps"));

  Snapshot& s = out.snapshot;
  s.version = ck.params.version();
  split(ck.params, "nav.", s.nav);
  split(ck.params, "sg.", s.sg);
  ParamSet gan_flat;
  split(ck.params, "gan.", gan_flat);
  if (gan_flat.size() > 0) s.gan = gan::GanParams::unflatten(gan_flat);
  split(ck.params, "rnd_t.", s.rnd.target);
  split(ck.params, "rnd_p.", s.rnd.predictor);

  const Snapshot fresh = initial_snapshot(c, 0);
  check_shapes(fresh.nav, s.nav, "nav.");
  check_shapes(fresh.sg, s.sg, "sg.");
  check_shapes(fresh.gan.flatten(), s.gan.flatten(), "gan.");
  check_shapes(fresh.rnd.target, s.rnd.target, "rnd_t.");
  check_shapes(fresh.rnd.predictor, s.rnd.predictor, "rnd_p.");
  return out;
}

}  // namespace learner
CSG_NAMESPACE_END
