#include "cbb/environment.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

#include "cbb/counter_rng.hpp"

namespace cbb {
namespace {

constexpr std::uint64_t kWeightStream = rng::hash_label("conversion-weights");
constexpr std::uint64_t kContextStream = rng::hash_label("context");
constexpr std::uint64_t kClickStream = rng::hash_label("click");
constexpr std::uint64_t kConversionStream = rng::hash_label("conversion");

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

FeedbackMode FeedbackMode::percent(double x) {
  if (!(x > 0.0 && x <= 1.0)) {
    throw std::invalid_argument("feedback fraction must lie in (0, 1]");
  }
  if (x == 1.0) return full();
  return {Kind::percent, x};
}

FeedbackMode FeedbackMode::parse(std::string_view text) {
  if (text == "partial") return partial();
  if (text == "full") return full();
  constexpr std::string_view prefix = "percent:";
  if (text.starts_with(prefix)) {
    const std::string_view number = text.substr(prefix.size());
    double x = 0.0;
    const auto [ptr, ec] = std::from_chars(number.data(), number.data() + number.size(), x);
    if (ec == std::errc() && ptr == number.data() + number.size()) return percent(x);
  }
  throw std::invalid_argument("bad feedback mode '" + std::string(text) +
                              "' (expected partial, full or percent:<x>)");
}

std::string FeedbackMode::to_string() const {
  switch (kind) {
    case Kind::partial: return "partial";
    case Kind::full: return "full";
    case Kind::percent: {
      char buf[32];
      const auto res = std::to_chars(buf, buf + sizeof buf, fraction);
      return "percent:" + std::string(buf, res.ptr);
    }
  }
  return "?";
}

std::vector<std::string> SyntheticEnvConfig::violations() const {
  std::vector<std::string> out;
  const std::size_t m = ctr.size();
  if (context_dim < 1) out.push_back("environment: context_dim must be >= 1");
  if (m < 1) out.push_back("environment: at least one action (ctr entry) is required");
  if (conversion_mean.size() != m || conversion_std.size() != m) {
    out.push_back("environment: ctr, conversion_mean and conversion_std must have equal length");
  }
  for (double p : ctr) {
    if (!(p >= 0.0 && p <= 1.0)) {
      out.push_back("environment: ctr entries must lie in [0, 1]");
      break;
    }
  }
  for (double s : conversion_std) {
    if (!(s >= 0.0) || !std::isfinite(s)) {
      out.push_back("environment: conversion_std entries must be >= 0");
      break;
    }
  }
  for (double k : conversion_mean) {
    if (!std::isfinite(k)) {
      out.push_back("environment: conversion_mean entries must be finite");
      break;
    }
  }
  if (!(reward_mix >= 0.0 && reward_mix <= 1.0)) {
    out.push_back("environment: reward_mix must lie in [0, 1]");
  }
  if (!std::isfinite(context_mean)) out.push_back("environment: context_mean must be finite");
  if (!(context_std >= 0.0) || !std::isfinite(context_std)) {
    out.push_back("environment: context_std must be >= 0");
  }
  return out;
}

void SyntheticEnvConfig::validate() const {
  const auto v = violations();
  if (v.empty()) return;
  std::string msg = "invalid environment config:";
  for (const auto& s : v) msg += "\n  " + s;
  throw std::invalid_argument(msg);
}

SyntheticEnv::SyntheticEnv(SyntheticEnvConfig config) : config_(std::move(config)) {
  config_.validate();
  const auto m = static_cast<Eigen::Index>(config_.num_actions());
  const auto d = static_cast<Eigen::Index>(config_.context_dim);
  weights_.resize(m, d);
  rng::Stream stream(rng::derive(config_.seed, kWeightStream));
  for (Eigen::Index j = 0; j < m; ++j) {
    const double mean = config_.conversion_mean[static_cast<std::size_t>(j)];
    const double sd = config_.conversion_std[static_cast<std::size_t>(j)];
    for (Eigen::Index i = 0; i < d; ++i) weights_(j, i) = stream.normal(mean, sd);
  }
}

Vector SyntheticEnv::sample_context() {
  rng::Stream stream(rng::derive(config_.seed, kContextStream, contexts_drawn_++));
  Vector s(static_cast<Eigen::Index>(config_.context_dim));
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    s(i) = stream.normal(config_.context_mean, config_.context_std);
  }
  return s;
}

double SyntheticEnv::expected_reward(std::size_t action, const Vector& context) const {
  const double p = config_.ctr.at(action);
  const double cvr = sigmoid(weights_.row(static_cast<Eigen::Index>(action)).dot(context));
  return p * (config_.reward_mix + (1.0 - config_.reward_mix) * cvr);
}

StepOutcome SyntheticEnv::realize_rewards(const Vector& context) {
  if (static_cast<std::size_t>(context.size()) != config_.context_dim) {
    throw std::invalid_argument("environment: context dimension mismatch");
  }
  const std::uint64_t t = outcomes_drawn_++;
  const std::size_t m = num_actions();
  StepOutcome out;
  out.context = context;
  out.rewards.resize(static_cast<Eigen::Index>(m));
  out.expected_rewards.resize(static_cast<Eigen::Index>(m));
  out.revealed.assign(m, false);
  for (std::size_t j = 0; j < m; ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    const double cvr = sigmoid(weights_.row(jj).dot(context));
    const bool click = rng::to_unit(rng::derive(config_.seed, kClickStream, t, j)) < config_.ctr[j];
    const bool conversion =
        click && rng::to_unit(rng::derive(config_.seed, kConversionStream, t, j)) < cvr;
    out.rewards(jj) = config_.reward_mix * (click ? 1.0 : 0.0) +
                      (1.0 - config_.reward_mix) * (conversion ? 1.0 : 0.0);
    out.expected_rewards(jj) =
        config_.ctr[j] * (config_.reward_mix + (1.0 - config_.reward_mix) * cvr);
  }
  return out;
}

void apply_feedback(StepOutcome& outcome, const FeedbackMode& mode, std::size_t executed,
                    std::uint64_t reveal_key) {
  const std::size_t m = static_cast<std::size_t>(outcome.rewards.size());
  if (executed >= m) throw std::out_of_range("apply_feedback: executed action out of range");
  outcome.revealed.assign(m, mode.kind == FeedbackMode::Kind::full);
  if (mode.kind == FeedbackMode::Kind::percent) {
    for (std::size_t j = 0; j < m; ++j) {
      outcome.revealed[j] = rng::to_unit(rng::derive(reveal_key, j)) < mode.fraction;
    }
  }
  outcome.revealed[executed] = true;
}

LoggedStep agent_view(const StepOutcome& outcome, std::size_t executed) {
  LoggedStep step;
  step.context = outcome.context;
  step.action = executed;
  step.revealed = outcome.revealed;
  step.rewards = Vector::Zero(outcome.rewards.size());
  for (std::size_t j = 0; j < step.revealed.size(); ++j) {
    if (step.revealed[j]) {
      step.rewards(static_cast<Eigen::Index>(j)) = outcome.rewards(static_cast<Eigen::Index>(j));
    }
  }
  return step;
}

}  // namespace cbb
