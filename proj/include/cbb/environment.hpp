#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "cbb/dense.hpp"
#include "cbb/policies.hpp"

namespace cbb {

/// Which rewards the agent gets to see at each step.
struct FeedbackMode {
  enum class Kind { partial, percent, full };

  Kind kind = Kind::partial;
  double fraction = 0.0;  // reveal probability of each non-executed action (percent)

  static FeedbackMode partial() { return {}; }
  static FeedbackMode full() { return {Kind::full, 1.0}; }
  /// percent(1.0) is normalized to full().
  static FeedbackMode percent(double x);
  /// "partial", "full", or "percent:<x>" with x in (0, 1].
  static FeedbackMode parse(std::string_view text);

  std::string to_string() const;
  bool operator==(const FeedbackMode&) const = default;
};

struct SyntheticEnvConfig {
  std::size_t context_dim = 40;
  std::vector<double> ctr{0.10, 0.15, 0.25, 0.20, 0.30};
  std::vector<double> conversion_mean{0.0, -0.2, -0.4, -0.6, -0.8};
  std::vector<double> conversion_std{0.01, 0.02, 0.03, 0.04, 0.05};
  double reward_mix = 0.01;  // weight of the click in the reward
  double context_mean = 0.1;
  double context_std = 0.2;
  std::uint64_t seed = 0;

  std::size_t num_actions() const noexcept { return ctr.size(); }
  std::vector<std::string> violations() const;
  void validate() const;
};

/// Full latent outcome of one step. Only the environment and the protocol
/// see this; policies receive a LoggedStep built by agent_view().
struct StepOutcome {
  Vector context;
  Vector rewards;             // realized reward of every action
  std::vector<bool> revealed; // filled by apply_feedback()
  Vector expected_rewards;    // regret oracle
};

/**
 * Click / conversion environment.
 *
 * Context coordinates are i.i.d. N(context_mean, context_std^2). Action j
 * clicks with probability ctr[j]; given a click it converts with probability
 * sigmoid(<w_j, s>), w_j ~ N(conversion_mean[j] 1, conversion_std[j]^2 I)
 * drawn once. The reward is reward_mix * click + (1 - reward_mix) * conversion.
 *
 * Draws are counter-based per (step, action): whatever the feedback mode, the
 * same seed yields the same latent outcomes.
 */
class SyntheticEnv {
 public:
  explicit SyntheticEnv(SyntheticEnvConfig config);

  Vector sample_context();
  StepOutcome realize_rewards(const Vector& context);
  double expected_reward(std::size_t action, const Vector& context) const;

  const SyntheticEnvConfig& config() const noexcept { return config_; }
  std::size_t num_actions() const noexcept { return config_.num_actions(); }
  std::size_t context_dim() const noexcept { return config_.context_dim; }
  const Matrix& conversion_weights() const noexcept { return weights_; }
  std::uint64_t contexts_drawn() const noexcept { return contexts_drawn_; }
  std::uint64_t outcomes_drawn() const noexcept { return outcomes_drawn_; }

 private:
  SyntheticEnvConfig config_;
  Matrix weights_;  // M x d
  std::uint64_t contexts_drawn_ = 0;
  std::uint64_t outcomes_drawn_ = 0;
};

/// Set outcome.revealed: the executed action, plus the rest per mode. For
/// percent mode each other action is revealed independently, keyed by reveal_key.
void apply_feedback(StepOutcome& outcome, const FeedbackMode& mode, std::size_t executed,
                    std::uint64_t reveal_key);

/// The agent-facing record: context, executed action, revealed rewards only.
LoggedStep agent_view(const StepOutcome& outcome, std::size_t executed);

}  // namespace cbb
