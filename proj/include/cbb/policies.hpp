#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cbb/dense.hpp"
#include "cbb/reward_model.hpp"

namespace cbb {

enum class Algorithm {
  spuir,     // sketched, imputed rewards, fixed gamma
  puir,      // exact, imputed rewards, fixed gamma
  spuir_rs,  // sketched, decile gamma schedule
  puir_rs,   // exact, decile gamma schedule
  sbucb,     // exact, no imputation
  fi_ucb,    // exact, full-information feedback, lambda = 1
  uniform,   // seeded uniform action
};

std::string_view to_string(Algorithm a);
Algorithm parse_algorithm(std::string_view text);
std::string_view to_string(RewardMap m);
RewardMap parse_reward_map(std::string_view text);

struct PolicyConfig {
  std::string name;
  Algorithm algorithm = Algorithm::spuir;
  std::size_t num_actions = 5;
  std::size_t context_dim = 40;

  double lambda = 1.0;
  double gamma = 0.7;
  double eta = 0.9;
  double omega = 0.2;  // exploration weight of the exact policies
  double alpha = 0.6;  // exploration weight of the sketched policies
  std::size_t sketch_size = 150;
  std::size_t num_blocks = 1;
  /// Replace the SJLT by the identity (test hook; sketched algorithms only).
  bool identity_sketch = false;

  RewardMap reward_map = RewardMap::linear;
  std::size_t rff_dim = 50;
  double rff_width = 1.0;

  /// Explicit seed; otherwise the harness derives one per replica.
  std::optional<std::uint64_t> seed;

  bool sketched() const noexcept;
  bool imputes() const noexcept;
  bool scheduled() const noexcept;
  /// Dimension of the reward model (2 * rff_dim under random features).
  std::size_t model_dim() const noexcept;
  double exploration() const noexcept;

  std::vector<std::string> violations() const;
  void validate() const;
};

/**
 * phi(s) = d_r^{-1/2} [cos(u_1's) .. cos(u_dr's), sin(u_1's) .. sin(u_dr's)]
 * with u_i ~ N(0, width^{-2} I). <phi(s), phi(t)> approximates
 * exp(-|s - t|^2 / (2 width^2)) and |phi(s)| = 1.
 */
class RandomFeatureMap {
 public:
  RandomFeatureMap(std::size_t input_dim, std::size_t num_features, double width,
                   std::uint64_t seed);

  std::size_t input_dim() const noexcept { return static_cast<std::size_t>(freqs_.cols()); }
  std::size_t num_features() const noexcept { return static_cast<std::size_t>(freqs_.rows()); }
  std::size_t output_dim() const noexcept { return 2 * num_features(); }
  double width() const noexcept { return width_; }
  const Matrix& frequencies() const noexcept { return freqs_; }

  Vector operator()(const Vector& s) const;
  Matrix apply(const Matrix& contexts) const;

 private:
  Matrix freqs_;  // num_features x input_dim, row i is u_i
  double width_;
};

/// f(theta, s) for all reward maps; RFF ignores theta.
Vector feature_map(RewardMap map, const Vector& theta, const Vector& s,
                   const RandomFeatureMap* rff = nullptr);

/// gamma = ceil(10 (n + 1) / N) / 10, clamped to [0.1, 1].
double imputation_rate_schedule(std::size_t episode, std::size_t total_episodes);

/// What the agent sees of one step. Hidden rewards are stored as zero.
struct LoggedStep {
  Vector context;
  std::size_t action = 0;
  Vector rewards;              // length M
  std::vector<bool> revealed;  // length M; revealed[action] is always true

  double reward() const { return rewards(static_cast<Eigen::Index>(action)); }
};

struct EpisodeLog {
  std::size_t episode = 0;         // index n of the update consuming this log
  std::size_t total_episodes = 1;  // N
  std::vector<LoggedStep> steps;
};

class Policy {
 public:
  explicit Policy(PolicyConfig config, std::uint64_t seed);

  /// Argmax of the UCB score; lowest index wins ties. `step` keys the draw of
  /// the uniform policy and is ignored otherwise.
  std::size_t select_action(const Vector& context, std::uint64_t step = 0) const;
  double score(std::size_t action, const Vector& context) const;

  /// Policy update on one episode's data (impute, update, solve per action).
  void end_episode(const EpisodeLog& log);

  const PolicyConfig& config() const noexcept { return config_; }
  std::uint64_t seed() const noexcept { return seed_; }
  const ActionModel& model(std::size_t action) const { return models_.at(action); }
  RidgeHyperparams hyperparams(std::size_t episode, std::size_t total_episodes) const;
  const RandomFeatureMap* random_features() const noexcept {
    return rff_ ? &*rff_ : nullptr;
  }
  std::size_t updates() const noexcept { return updates_; }
  /// Model-side cost of the last end_episode(), summed over actions.
  const UpdateCost& last_update_cost() const noexcept { return last_cost_; }
  std::size_t clamped_rows() const noexcept { return clamped_rows_; }

 private:
  Vector model_input(const Vector& context) const;
  Vector scoring_feature(std::size_t action, const Vector& input) const;

  PolicyConfig config_;
  std::uint64_t seed_;
  std::optional<RandomFeatureMap> rff_;
  std::vector<ActionModel> models_;
  std::size_t updates_ = 0;
  std::size_t clamped_rows_ = 0;
  UpdateCost last_cost_;
};

}  // namespace cbb
