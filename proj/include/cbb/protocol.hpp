#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "cbb/environment.hpp"
#include "cbb/policies.hpp"

namespace cbb {

struct RunSpec {
  std::size_t episodes = 1;    // N
  std::size_t batch_size = 1;  // B
  FeedbackMode feedback;
  /// Per-action size of the initialization buffer collected before episode 1.
  std::vector<std::size_t> init_counts;
  /// Keys the initialization order and percent-mode reveals. Keep it equal
  /// across policies for paired comparisons.
  std::uint64_t schedule_seed = 0;
};

struct TraceStep {
  std::size_t episode = 0;  // 0 for the initialization buffer, 1..N afterwards
  bool initialization = false;
  std::size_t action = 0;
  double reward = 0.0;           // realized reward of the executed action
  double expected_chosen = 0.0;  // oracle only
  double expected_best = 0.0;    // oracle only
  std::size_t revealed = 0;      // number of actions whose reward was revealed
};

struct RunTrace {
  std::size_t episodes = 0;
  std::size_t batch_size = 0;
  std::size_t init_steps = 0;
  std::vector<TraceStep> steps;
  std::vector<double> update_ms;  // per episode, wall time of the policy update
  std::vector<double> gram_ms;    // per episode, Gram/moment accumulation only

  /// Average realized reward over decision steps up to the end of each episode.
  std::vector<double> average_reward_curve() const;
  /// Cumulative expected regret against the per-context best action, per episode.
  std::vector<double> regret_curve() const;
  double cumulative_regret() const;
  /// Canonical text of every decision (no timings); equal traces compare equal.
  std::string fingerprint() const;
};

/// Initialization with the designated actions, then N episodes of
/// {update policy on the previous buffer; act B times with the frozen policy}.
RunTrace run_protocol(SyntheticEnv& env, Policy& policy, const RunSpec& spec);

}  // namespace cbb
