#include "cbb/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <iomanip>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "cbb/counter_rng.hpp"

#ifndef CBB_VERSION
#define CBB_VERSION "unknown"
#endif

namespace cbb {
namespace {

constexpr std::uint64_t kEnvironmentStream = rng::hash_label("environment");
constexpr std::uint64_t kScheduleStream = rng::hash_label("schedule");
constexpr const char* kCsvHeader =
    "episode,policy,avg_reward_mean,avg_reward_std,cum_regret_mean,cum_regret_std,"
    "update_ms_median";

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& text) {
  double x = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), x);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw std::runtime_error("report: bad number '" + text + "'");
  }
  return x;
}

}  // namespace

std::vector<std::string> ExperimentConfig::violations() const {
  std::vector<std::string> out = environment.violations();
  if (episodes < 1) out.push_back("episodes must be >= 1");
  if (batch_size < 1) out.push_back("batch_size must be >= 1");
  if (repetitions < 1) out.push_back("repetitions must be >= 1");
  if (workers < 1) out.push_back("workers must be >= 1");
  if (episodes * batch_size > step_budget) {
    out.push_back("episodes * batch_size = " + std::to_string(episodes * batch_size) +
                  " exceeds step_budget " + std::to_string(step_budget));
  }
  if (init_counts.size() != environment.num_actions()) {
    out.push_back("init_counts must have one entry per action (" +
                  std::to_string(environment.num_actions()) + ")");
  }
  if (policies.empty()) out.push_back("at least one policy is required");
  std::set<std::string> names;
  for (const auto& p : policies) {
    if (!names.insert(p.name).second) out.push_back("duplicate policy name '" + p.name + "'");
    if (p.num_actions != environment.num_actions()) {
      out.push_back(p.name + ": num_actions differs from the environment");
    }
    if (p.context_dim != environment.context_dim) {
      out.push_back(p.name + ": context_dim differs from the environment");
    }
    if (p.algorithm == Algorithm::fi_ucb && feedback.kind != FeedbackMode::Kind::full) {
      out.push_back(p.name + ": fi_ucb requires feedback: full");
    }
    for (auto& v : p.violations()) out.push_back(std::move(v));
  }
  return out;
}

void ExperimentConfig::validate() const {
  const auto v = violations();
  if (v.empty()) return;
  std::string msg = "invalid experiment config:";
  for (const auto& s : v) msg += "\n  " + s;
  throw std::invalid_argument(msg);
}

std::vector<PolicyConfig> synthetic_policies(std::size_t num_actions, std::size_t context_dim) {
  auto make = [&](std::string name, Algorithm algo) {
    PolicyConfig p;
    p.name = std::move(name);
    p.algorithm = algo;
    p.num_actions = num_actions;
    p.context_dim = context_dim;
    return p;
  };
  return {make("SBUCB", Algorithm::sbucb), make("PUIR", Algorithm::puir),
          make("SPUIR", Algorithm::spuir), make("PUIR-RS", Algorithm::puir_rs),
          make("SPUIR-RS", Algorithm::spuir_rs)};
}

ExperimentConfig full_preset() {
  ExperimentConfig cfg;
  cfg.episodes = 90;
  cfg.batch_size = 1400;
  cfg.repetitions = 20;
  cfg.init_counts = {140, 210, 350, 280, 420};
  cfg.policies = synthetic_policies(cfg.environment.num_actions(), cfg.environment.context_dim);
  return cfg;
}

ExperimentConfig desk_preset() {
  ExperimentConfig cfg;
  cfg.episodes = 30;
  cfg.batch_size = 400;
  cfg.repetitions = 10;
  cfg.init_counts = {40, 60, 100, 80, 120};
  cfg.policies = synthetic_policies(cfg.environment.num_actions(), cfg.environment.context_dim);
  return cfg;
}

ReplicaSeeds replica_seeds(std::uint64_t master, const PolicyConfig& policy,
                           std::size_t replica) {
  ReplicaSeeds seeds;
  seeds.environment = rng::derive(master, kEnvironmentStream, replica);
  seeds.schedule = rng::derive(master, kScheduleStream, replica);
  seeds.policy = policy.seed.value_or(rng::derive(master, rng::hash_label(policy.name), replica));
  return seeds;
}

ReplicaResult run_replica(const ExperimentConfig& cfg, std::size_t policy_index,
                          std::size_t replica) {
  const PolicyConfig& pc = cfg.policies.at(policy_index);
  const ReplicaSeeds seeds = replica_seeds(cfg.master_seed, pc, replica);

  SyntheticEnvConfig env_cfg = cfg.environment;
  env_cfg.seed = seeds.environment;
  SyntheticEnv env(env_cfg);
  Policy policy(pc, seeds.policy);

  RunSpec spec;
  spec.episodes = cfg.episodes;
  spec.batch_size = cfg.batch_size;
  spec.feedback = cfg.feedback;
  spec.init_counts = cfg.init_counts;
  spec.schedule_seed = seeds.schedule;
  const RunTrace trace = run_protocol(env, policy, spec);

  ReplicaResult out;
  out.average_reward = trace.average_reward_curve();
  out.cumulative_regret = trace.regret_curve();
  out.update_ms = trace.update_ms;
  out.gram_ms = trace.gram_ms;
  out.fingerprint = trace.fingerprint();
  return out;
}

double mean_of(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double sample_std_of(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean_of(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

double median_of(std::vector<double> xs) {
  if (xs.empty()) return 0.0;
  std::sort(xs.begin(), xs.end());
  const std::size_t h = xs.size() / 2;
  return xs.size() % 2 == 1 ? xs[h] : 0.5 * (xs[h - 1] + xs[h]);
}

MetricsReport aggregate(const std::vector<std::string>& policies,
                        const std::vector<std::vector<ReplicaResult>>& replicas) {
  if (policies.size() != replicas.size()) {
    throw std::invalid_argument("aggregate: one replica set per policy is required");
  }
  MetricsReport report;
  report.policies = policies;
  report.replicas = replicas;
  report.episodes = replicas.empty() || replicas[0].empty()
                        ? 0
                        : replicas[0][0].average_reward.size();
  for (std::size_t p = 0; p < policies.size(); ++p) {
    const auto& reps = replicas[p];
    for (std::size_t n = 0; n < report.episodes; ++n) {
      std::vector<double> reward, regret, update, gram;
      for (const auto& r : reps) {
        reward.push_back(r.average_reward.at(n));
        regret.push_back(r.cumulative_regret.at(n));
        update.push_back(r.update_ms.at(n));
        gram.push_back(r.gram_ms.at(n));
      }
      MetricsRecord rec;
      rec.episode = n + 1;
      rec.policy = policies[p];
      rec.avg_reward_mean = mean_of(reward);
      rec.avg_reward_std = sample_std_of(reward);
      rec.cum_regret_mean = mean_of(regret);
      rec.cum_regret_std = sample_std_of(regret);
      rec.update_ms_median = median_of(update);
      rec.gram_ms_median = median_of(gram);
      report.records.push_back(std::move(rec));
    }
  }
  return report;
}

MetricsReport run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::size_t num_policies = cfg.policies.size();
  const std::size_t tasks = num_policies * cfg.repetitions;
  std::vector<std::vector<ReplicaResult>> results(
      num_policies, std::vector<ReplicaResult>(cfg.repetitions));
  std::vector<std::exception_ptr> errors(tasks);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t = next++; t < tasks; t = next++) {
      const std::size_t p = t / cfg.repetitions;
      const std::size_t r = t % cfg.repetitions;
      try {
        results[p][r] = run_replica(cfg, p, r);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::min(cfg.workers, tasks);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::vector<std::string> names;
  for (const auto& p : cfg.policies) names.push_back(p.name);
  return aggregate(names, results);
}

std::vector<SummaryRow> compare_report(const MetricsReport& report) {
  std::vector<SummaryRow> rows;
  for (const auto& name : report.policies) {
    const MetricsRecord* last = nullptr;
    for (const auto& rec : report.records) {
      if (rec.policy == name && (last == nullptr || rec.episode > last->episode)) last = &rec;
    }
    if (last != nullptr) rows.push_back({name, last->avg_reward_mean, last->avg_reward_std});
  }
  return rows;
}

std::string format_summary(const std::vector<SummaryRow>& rows) {
  std::size_t width = 9;
  for (const auto& r : rows) width = std::max(width, r.policy.size());
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << std::left << std::setw(static_cast<int>(width)) << "algorithm"
     << "  average reward (mean ± std)\n";
  os << std::fixed << std::setprecision(4);
  for (const auto& r : rows) {
    os << std::left << std::setw(static_cast<int>(width)) << r.policy << "  " << r.mean
       << " ± " << r.std << '\n';
  }
  return os.str();
}

std::string format_number(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

void write_metrics_csv(const MetricsReport& report, std::ostream& os) {
  os << kCsvHeader << '\n';
  for (const auto& r : report.records) {
    os << r.episode << ',' << r.policy << ',' << format_number(r.avg_reward_mean) << ','
       << format_number(r.avg_reward_std) << ',' << format_number(r.cum_regret_mean) << ','
       << format_number(r.cum_regret_std) << ',' << format_number(r.update_ms_median) << '\n';
  }
}

MetricsReport read_metrics_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kCsvHeader) {
    throw std::runtime_error("report: missing or unexpected CSV header");
  }
  MetricsReport report;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 7) {
      throw std::runtime_error("report: line " + std::to_string(line_no) + " has " +
                               std::to_string(f.size()) + " fields, expected 7");
    }
    MetricsRecord r;
    r.episode = static_cast<std::size_t>(parse_double(f[0]));
    r.policy = f[1];
    r.avg_reward_mean = parse_double(f[2]);
    r.avg_reward_std = parse_double(f[3]);
    r.cum_regret_mean = parse_double(f[4]);
    r.cum_regret_std = parse_double(f[5]);
    r.update_ms_median = parse_double(f[6]);
    if (std::find(report.policies.begin(), report.policies.end(), r.policy) ==
        report.policies.end()) {
      report.policies.push_back(r.policy);
    }
    report.episodes = std::max(report.episodes, r.episode);
    report.records.push_back(std::move(r));
  }
  return report;
}

void emit_timing(const MetricsReport& report, std::ostream& os) {
  os << "episode,policy,update_ms_median,gram_ms_median\n";
  for (const auto& r : report.records) {
    os << r.episode << ',' << r.policy << ',' << format_number(r.update_ms_median) << ','
       << format_number(r.gram_ms_median) << '\n';
  }
}

std::string version_string() { return CBB_VERSION; }

}  // namespace cbb
