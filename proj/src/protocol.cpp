#include "cbb/protocol.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "cbb/counter_rng.hpp"

namespace cbb {
namespace {

constexpr std::uint64_t kInitStream = rng::hash_label("init-order");
constexpr std::uint64_t kRevealStream = rng::hash_label("reveal");

std::vector<std::size_t> initialization_order(const std::vector<std::size_t>& counts,
                                              std::uint64_t seed) {
  std::vector<std::size_t> order;
  for (std::size_t a = 0; a < counts.size(); ++a) order.insert(order.end(), counts[a], a);
  rng::Stream stream(rng::derive(seed, kInitStream));
  for (std::size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[stream.below(i)]);
  }
  return order;
}

}  // namespace

std::vector<double> RunTrace::average_reward_curve() const {
  std::vector<double> curve;
  curve.reserve(episodes);
  double total = 0.0;
  std::size_t count = 0;
  std::size_t i = init_steps;
  for (std::size_t n = 1; n <= episodes; ++n) {
    for (; i < steps.size() && steps[i].episode == n; ++i, ++count) total += steps[i].reward;
    curve.push_back(count > 0 ? total / static_cast<double>(count) : 0.0);
  }
  return curve;
}

std::vector<double> RunTrace::regret_curve() const {
  std::vector<double> curve;
  curve.reserve(episodes);
  double regret = 0.0;
  std::size_t i = init_steps;
  for (std::size_t n = 1; n <= episodes; ++n) {
    for (; i < steps.size() && steps[i].episode == n; ++i) {
      regret += steps[i].expected_best - steps[i].expected_chosen;
    }
    curve.push_back(regret);
  }
  return curve;
}

double RunTrace::cumulative_regret() const {
  const auto curve = regret_curve();
  return curve.empty() ? 0.0 : curve.back();
}

std::string RunTrace::fingerprint() const {
  std::ostringstream os;
  os.precision(17);
  os << episodes << ' ' << batch_size << ' ' << init_steps << '\n';
  for (const auto& s : steps) {
    os << s.episode << ' ' << s.initialization << ' ' << s.action << ' ' << s.reward << ' '
       << s.expected_chosen << ' ' << s.expected_best << ' ' << s.revealed << '\n';
  }
  return os.str();
}

RunTrace run_protocol(SyntheticEnv& env, Policy& policy, const RunSpec& spec) {
  const std::size_t m = env.num_actions();
  if (spec.episodes < 1 || spec.batch_size < 1) {
    throw std::invalid_argument("run_protocol: episodes and batch size must be >= 1");
  }
  if (spec.init_counts.size() != m) {
    throw std::invalid_argument("run_protocol: init_counts must have one entry per action");
  }
  if (policy.config().num_actions != m || policy.config().context_dim != env.context_dim()) {
    throw std::invalid_argument("run_protocol: policy and environment shapes differ");
  }

  RunTrace trace;
  trace.episodes = spec.episodes;
  trace.batch_size = spec.batch_size;
  trace.steps.reserve(std::accumulate(spec.init_counts.begin(), spec.init_counts.end(),
                                      std::size_t{0}) +
                      spec.episodes * spec.batch_size);

  std::uint64_t global_step = 0;
  auto play = [&](std::size_t episode, bool init, std::size_t forced, EpisodeLog& log) {
    const Vector context = env.sample_context();
    StepOutcome outcome = env.realize_rewards(context);
    if (!outcome.rewards.allFinite()) {
      throw std::runtime_error("run_protocol: environment produced a non-finite reward");
    }
    const std::size_t action = init ? forced : policy.select_action(context, global_step);
    apply_feedback(outcome, spec.feedback, action,
                   rng::derive(spec.schedule_seed, kRevealStream, global_step));
    ++global_step;

    TraceStep rec;
    rec.episode = episode;
    rec.initialization = init;
    rec.action = action;
    rec.reward = outcome.rewards(static_cast<Eigen::Index>(action));
    rec.expected_chosen = outcome.expected_rewards(static_cast<Eigen::Index>(action));
    rec.expected_best = outcome.expected_rewards.maxCoeff();
    for (bool r : outcome.revealed) rec.revealed += r ? 1 : 0;
    trace.steps.push_back(rec);
    log.steps.push_back(agent_view(outcome, action));
  };

  EpisodeLog buffer;
  for (std::size_t forced : initialization_order(spec.init_counts, spec.schedule_seed)) {
    play(0, true, forced, buffer);
  }
  trace.init_steps = trace.steps.size();

  using Clock = std::chrono::steady_clock;
  for (std::size_t n = 0; n < spec.episodes; ++n) {
    buffer.episode = n;
    buffer.total_episodes = spec.episodes;
    const auto t0 = Clock::now();
    policy.end_episode(buffer);
    trace.update_ms.push_back(
        std::chrono::duration<double, std::milli>(Clock::now() - t0).count());
    trace.gram_ms.push_back(policy.last_update_cost().gram_ms);

    EpisodeLog next;
    next.steps.reserve(spec.batch_size);
    for (std::size_t b = 0; b < spec.batch_size; ++b) play(n + 1, false, 0, next);
    buffer = std::move(next);
  }
  return trace;
}

}  // namespace cbb
