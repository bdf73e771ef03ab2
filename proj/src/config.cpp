#include "cbb/config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <yaml-cpp/yaml.h>

#include "json.hpp"

namespace cbb {
namespace {

using Problems = std::vector<std::string>;

void check_keys(const YAML::Node& node, const std::string& where,
                const std::set<std::string>& allowed, Problems& problems) {
  if (!node.IsMap()) {
    problems.push_back(where + ": expected a mapping");
    return;
  }
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.contains(key)) problems.push_back(where + ": unknown key '" + key + "'");
  }
}

template <typename T>
void read(const YAML::Node& node, const char* key, T& out, const std::string& where,
          Problems& problems) {
  if (!node[key]) return;
  try {
    out = node[key].as<T>();
  } catch (const YAML::Exception&) {
    problems.push_back(where + "." + key + ": wrong type");
  }
}

PolicyConfig read_policy(const YAML::Node& node, const PolicyConfig& defaults,
                         const std::string& where, Problems& problems) {
  static const std::set<std::string> keys = {
      "name",      "algorithm",   "lambda",     "gamma",   "eta",
      "omega",     "alpha",       "sketch_size", "num_blocks", "identity_sketch",
      "reward_map", "rff_dim",    "rff_width",  "seed"};
  check_keys(node, where, keys, problems);
  PolicyConfig p = defaults;
  if (!node.IsMap()) return p;
  read(node, "name", p.name, where, problems);
  if (node["algorithm"]) {
    try {
      p.algorithm = parse_algorithm(node["algorithm"].as<std::string>());
    } catch (const std::exception& e) {
      problems.push_back(where + ".algorithm: " + e.what());
    }
  }
  if (node["reward_map"]) {
    try {
      p.reward_map = parse_reward_map(node["reward_map"].as<std::string>());
    } catch (const std::exception& e) {
      problems.push_back(where + ".reward_map: " + e.what());
    }
  }
  read(node, "lambda", p.lambda, where, problems);
  read(node, "gamma", p.gamma, where, problems);
  read(node, "eta", p.eta, where, problems);
  read(node, "omega", p.omega, where, problems);
  read(node, "alpha", p.alpha, where, problems);
  read(node, "sketch_size", p.sketch_size, where, problems);
  read(node, "num_blocks", p.num_blocks, where, problems);
  read(node, "identity_sketch", p.identity_sketch, where, problems);
  read(node, "rff_dim", p.rff_dim, where, problems);
  read(node, "rff_width", p.rff_width, where, problems);
  if (node["seed"]) {
    std::uint64_t seed = 0;
    read(node, "seed", seed, where, problems);
    p.seed = seed;
  }
  if (p.name.empty()) p.name = std::string(to_string(p.algorithm));
  return p;
}

}  // namespace

ExperimentConfig parse_config(std::string_view yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(yaml_text));
  } catch (const YAML::Exception& e) {
    throw std::invalid_argument(std::string("config: YAML parse error: ") + e.what());
  }
  Problems problems;
  ExperimentConfig cfg = desk_preset();
  cfg.policies.clear();
  if (!root.IsMap()) throw std::invalid_argument("config: top level must be a mapping");
  check_keys(root, "config", {"experiment", "environment", "policy_defaults", "policies"},
             problems);

  if (const auto exp = root["experiment"]) {
    check_keys(exp, "experiment",
               {"episodes", "batch_size", "repetitions", "master_seed", "feedback",
                "init_counts", "workers", "step_budget", "output"},
               problems);
    read(exp, "episodes", cfg.episodes, "experiment", problems);
    read(exp, "batch_size", cfg.batch_size, "experiment", problems);
    read(exp, "repetitions", cfg.repetitions, "experiment", problems);
    read(exp, "master_seed", cfg.master_seed, "experiment", problems);
    read(exp, "init_counts", cfg.init_counts, "experiment", problems);
    read(exp, "workers", cfg.workers, "experiment", problems);
    read(exp, "step_budget", cfg.step_budget, "experiment", problems);
    read(exp, "output", cfg.output, "experiment", problems);
    if (exp["feedback"]) {
      try {
        cfg.feedback = FeedbackMode::parse(exp["feedback"].as<std::string>());
      } catch (const std::exception& e) {
        problems.push_back(std::string("experiment.feedback: ") + e.what());
      }
    }
  }

  if (const auto env = root["environment"]) {
    check_keys(env, "environment",
               {"context_dim", "ctr", "conversion_mean", "conversion_std", "reward_mix",
                "context_mean", "context_std"},
               problems);
    auto& e = cfg.environment;
    read(env, "context_dim", e.context_dim, "environment", problems);
    read(env, "ctr", e.ctr, "environment", problems);
    read(env, "conversion_mean", e.conversion_mean, "environment", problems);
    read(env, "conversion_std", e.conversion_std, "environment", problems);
    read(env, "reward_mix", e.reward_mix, "environment", problems);
    read(env, "context_mean", e.context_mean, "environment", problems);
    read(env, "context_std", e.context_std, "environment", problems);
  }

  PolicyConfig defaults;
  defaults.num_actions = cfg.environment.num_actions();
  defaults.context_dim = cfg.environment.context_dim;
  if (const auto pd = root["policy_defaults"]) {
    defaults = read_policy(pd, defaults, "policy_defaults", problems);
    defaults.name.clear();
  }

  if (const auto list = root["policies"]) {
    if (!list.IsSequence()) {
      problems.push_back("policies: expected a list of tables");
    } else {
      for (std::size_t i = 0; i < list.size(); ++i) {
        cfg.policies.push_back(
            read_policy(list[i], defaults, "policies[" + std::to_string(i) + "]", problems));
      }
    }
  } else {
    cfg.policies = synthetic_policies(cfg.environment.num_actions(), cfg.environment.context_dim);
  }

  for (auto& v : cfg.violations()) problems.push_back(std::move(v));
  if (!problems.empty()) {
    std::string msg = "invalid experiment config:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw std::invalid_argument(msg);
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

std::string metadata_json(const ExperimentConfig& cfg) {
  using nlohmann::json;
  json policies = json::array();
  for (const auto& p : cfg.policies) {
    json j = {{"name", p.name},
              {"algorithm", std::string(to_string(p.algorithm))},
              {"lambda", p.lambda},
              {"gamma", p.gamma},
              {"eta", p.eta},
              {"omega", p.omega},
              {"alpha", p.alpha},
              {"sketch_size", p.sketch_size},
              {"num_blocks", p.num_blocks},
              {"identity_sketch", p.identity_sketch},
              {"reward_map", std::string(to_string(p.reward_map))},
              {"rff_dim", p.rff_dim},
              {"rff_width", p.rff_width}};
    if (p.seed) j["seed"] = *p.seed;
    policies.push_back(std::move(j));
  }
  const auto& e = cfg.environment;
  json meta = {
      {"version", version_string()},
      {"experiment",
       {{"episodes", cfg.episodes},
        {"batch_size", cfg.batch_size},
        {"repetitions", cfg.repetitions},
        {"master_seed", cfg.master_seed},
        {"feedback", cfg.feedback.to_string()},
        {"init_counts", cfg.init_counts},
        {"workers", cfg.workers},
        {"step_budget", cfg.step_budget},
        {"output", cfg.output}}},
      {"environment",
       {{"context_dim", e.context_dim},
        {"ctr", e.ctr},
        {"conversion_mean", e.conversion_mean},
        {"conversion_std", e.conversion_std},
        {"reward_mix", e.reward_mix},
        {"context_mean", e.context_mean},
        {"context_std", e.context_std}}},
      {"policies", policies}};
  return meta.dump(2) + "\n";
}

}  // namespace cbb
