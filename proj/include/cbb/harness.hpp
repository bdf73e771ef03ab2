#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "cbb/environment.hpp"
#include "cbb/policies.hpp"
#include "cbb/protocol.hpp"

namespace cbb {

struct ExperimentConfig {
  SyntheticEnvConfig environment;
  std::vector<PolicyConfig> policies;
  std::size_t episodes = 30;
  std::size_t batch_size = 400;
  FeedbackMode feedback;
  std::vector<std::size_t> init_counts{40, 60, 100, 80, 120};
  std::size_t repetitions = 10;
  std::uint64_t master_seed = 20230101;
  std::string output = "report.csv";
  std::size_t workers = 1;
  std::size_t step_budget = 50'000'000;

  std::vector<std::string> violations() const;
  void validate() const;
};

/// Full-size synthetic setup: N = 90, B = 1400, 20 repetitions.
ExperimentConfig full_preset();
/// Reduced synthetic setup for CI: N = 30, B = 400, 10 repetitions.
ExperimentConfig desk_preset();
/// SBUCB, PUIR, SPUIR, PUIR-RS, SPUIR-RS with the synthetic hyperparameters.
std::vector<PolicyConfig> synthetic_policies(std::size_t num_actions, std::size_t context_dim);

struct ReplicaSeeds {
  std::uint64_t environment = 0;
  std::uint64_t schedule = 0;
  std::uint64_t policy = 0;
};

/// Environment and schedule seeds depend on (master, replica) only, so every
/// policy in a replica faces the same contexts and latent outcomes.
ReplicaSeeds replica_seeds(std::uint64_t master, const PolicyConfig& policy, std::size_t replica);

struct ReplicaResult {
  std::vector<double> average_reward;
  std::vector<double> cumulative_regret;
  std::vector<double> update_ms;
  std::vector<double> gram_ms;
  std::string fingerprint;
};

ReplicaResult run_replica(const ExperimentConfig& cfg, std::size_t policy_index,
                          std::size_t replica);

struct MetricsRecord {
  std::size_t episode = 0;
  std::string policy;
  double avg_reward_mean = 0.0;
  double avg_reward_std = 0.0;
  double cum_regret_mean = 0.0;
  double cum_regret_std = 0.0;
  double update_ms_median = 0.0;
  double gram_ms_median = 0.0;
};

struct MetricsReport {
  std::vector<std::string> policies;
  std::size_t episodes = 0;
  std::vector<MetricsRecord> records;  // policy-major, episode-minor
  /// [policy][replica]; empty when the report was read back from CSV.
  std::vector<std::vector<ReplicaResult>> replicas;
};

/// Per-episode mean / sample std / median over replicas.
MetricsReport aggregate(const std::vector<std::string>& policies,
                        const std::vector<std::vector<ReplicaResult>>& replicas);

/// Run every (policy, replica) pair on up to cfg.workers threads and aggregate.
MetricsReport run_experiment(const ExperimentConfig& cfg);

struct SummaryRow {
  std::string policy;
  double mean = 0.0;
  double std = 0.0;
};

/// Final-episode average reward per policy, in report order.
std::vector<SummaryRow> compare_report(const MetricsReport& report);
std::string format_summary(const std::vector<SummaryRow>& rows);

/// episode,policy,avg_reward_mean,avg_reward_std,cum_regret_mean,cum_regret_std,update_ms_median
void write_metrics_csv(const MetricsReport& report, std::ostream& os);
MetricsReport read_metrics_csv(std::istream& is);
/// episode,policy,update_ms_median,gram_ms_median
void emit_timing(const MetricsReport& report, std::ostream& os);

double mean_of(std::span<const double> xs);
double sample_std_of(std::span<const double> xs);
double median_of(std::vector<double> xs);
/// Shortest round-trip decimal, independent of the global locale.
std::string format_number(double x);

std::string version_string();

}  // namespace cbb
