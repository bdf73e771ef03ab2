#include "cbb/policies.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "cbb/counter_rng.hpp"

namespace cbb {
namespace {

std::string normalize(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char ch : text) {
    out.push_back(ch == '-' ? '_' : static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
  }
  return out;
}

constexpr std::uint64_t kUniformStream = rng::hash_label("uniform");
constexpr std::uint64_t kRffStream = rng::hash_label("rff");

}  // namespace

std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::spuir: return "spuir";
    case Algorithm::puir: return "puir";
    case Algorithm::spuir_rs: return "spuir_rs";
    case Algorithm::puir_rs: return "puir_rs";
    case Algorithm::sbucb: return "sbucb";
    case Algorithm::fi_ucb: return "fi_ucb";
    case Algorithm::uniform: return "uniform";
  }
  return "?";
}

Algorithm parse_algorithm(std::string_view text) {
  const std::string t = normalize(text);
  for (Algorithm a : {Algorithm::spuir, Algorithm::puir, Algorithm::spuir_rs, Algorithm::puir_rs,
                      Algorithm::sbucb, Algorithm::fi_ucb, Algorithm::uniform}) {
    if (t == to_string(a)) return a;
  }
  throw std::invalid_argument("unknown algorithm '" + std::string(text) + "'");
}

std::string_view to_string(RewardMap m) {
  switch (m) {
    case RewardMap::linear: return "linear";
    case RewardMap::exp: return "exp";
    case RewardMap::poly: return "poly";
    case RewardMap::rff: return "rff";
  }
  return "?";
}

RewardMap parse_reward_map(std::string_view text) {
  const std::string t = normalize(text);
  for (RewardMap m : {RewardMap::linear, RewardMap::exp, RewardMap::poly, RewardMap::rff}) {
    if (t == to_string(m)) return m;
  }
  if (t == "kernel") return RewardMap::rff;
  throw std::invalid_argument("unknown reward map '" + std::string(text) + "'");
}

bool PolicyConfig::sketched() const noexcept {
  return algorithm == Algorithm::spuir || algorithm == Algorithm::spuir_rs;
}

bool PolicyConfig::imputes() const noexcept {
  return algorithm == Algorithm::spuir || algorithm == Algorithm::puir ||
         algorithm == Algorithm::spuir_rs || algorithm == Algorithm::puir_rs;
}

bool PolicyConfig::scheduled() const noexcept {
  return algorithm == Algorithm::spuir_rs || algorithm == Algorithm::puir_rs;
}

std::size_t PolicyConfig::model_dim() const noexcept {
  return reward_map == RewardMap::rff ? 2 * rff_dim : context_dim;
}

double PolicyConfig::exploration() const noexcept { return sketched() ? alpha : omega; }

std::vector<std::string> PolicyConfig::violations() const {
  std::vector<std::string> out;
  const std::string who = name.empty() ? std::string(to_string(algorithm)) : name;
  auto bad = [&](const std::string& what) { out.push_back(who + ": " + what); };
  if (num_actions < 1) bad("num_actions must be >= 1");
  if (context_dim < 1) bad("context_dim must be >= 1");
  if (!(omega >= 0.0) || !std::isfinite(omega)) bad("omega must be >= 0");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) bad("alpha must be >= 0");
  if (reward_map == RewardMap::rff) {
    if (rff_dim < 1) bad("rff_dim must be >= 1");
    if (!(rff_width > 0.0) || !std::isfinite(rff_width)) bad("rff_width must be > 0");
  }
  if (identity_sketch && !sketched()) bad("identity_sketch requires a sketched algorithm");
  RidgeHyperparams hp;
  hp.lambda = lambda;
  hp.gamma = scheduled() ? 0.1 : gamma;
  hp.eta = eta;
  hp.sketch = sketched() ? SketchKind::sjlt : SketchKind::none;
  hp.sketch_size = sketch_size;
  hp.num_blocks = num_blocks;
  for (const auto& v : hp.violations()) bad(v);
  return out;
}

void PolicyConfig::validate() const {
  const auto v = violations();
  if (v.empty()) return;
  std::string msg = "invalid policy config:";
  for (const auto& s : v) msg += "\n  " + s;
  throw std::invalid_argument(msg);
}

RandomFeatureMap::RandomFeatureMap(std::size_t input_dim, std::size_t num_features, double width,
                                   std::uint64_t seed)
    : freqs_(static_cast<Eigen::Index>(num_features), static_cast<Eigen::Index>(input_dim)),
      width_(width) {
  if (input_dim == 0 || num_features == 0) {
    throw std::invalid_argument("random features: dimensions must be positive");
  }
  if (!(width > 0.0)) throw std::invalid_argument("random features: width must be > 0");
  rng::Stream stream(seed);
  for (Eigen::Index i = 0; i < freqs_.rows(); ++i) {
    for (Eigen::Index j = 0; j < freqs_.cols(); ++j) freqs_(i, j) = stream.normal() / width;
  }
}

Vector RandomFeatureMap::operator()(const Vector& s) const {
  if (s.size() != freqs_.cols()) {
    throw std::invalid_argument("random features: input dimension mismatch");
  }
  const Eigen::Index r = freqs_.rows();
  const Vector z = freqs_ * s;
  const double scale = 1.0 / std::sqrt(static_cast<double>(r));
  Vector out(2 * r);
  out.head(r) = scale * z.array().cos();
  out.tail(r) = scale * z.array().sin();
  return out;
}

Matrix RandomFeatureMap::apply(const Matrix& contexts) const {
  Matrix out(contexts.rows(), static_cast<Eigen::Index>(output_dim()));
  for (Eigen::Index b = 0; b < contexts.rows(); ++b) {
    out.row(b) = (*this)(contexts.row(b).transpose()).transpose();
  }
  return out;
}

Vector feature_map(RewardMap map, const Vector& theta, const Vector& s,
                   const RandomFeatureMap* rff) {
  if (map == RewardMap::rff) {
    if (rff == nullptr) throw std::invalid_argument("feature_map: rff map requires features");
    return (*rff)(s);
  }
  if (theta.size() != s.size()) throw std::invalid_argument("feature_map: dimension mismatch");
  return linearized_feature(map, theta, s);
}

double imputation_rate_schedule(std::size_t episode, std::size_t total_episodes) {
  if (total_episodes == 0) return 1.0;
  const double decile = std::ceil(10.0 * static_cast<double>(episode + 1) /
                                  static_cast<double>(total_episodes));
  return std::clamp(decile / 10.0, 0.1, 1.0);
}

Policy::Policy(PolicyConfig config, std::uint64_t seed)
    : config_(std::move(config)), seed_(config_.seed.value_or(seed)) {
  config_.validate();
  if (config_.reward_map == RewardMap::rff) {
    rff_.emplace(config_.context_dim, config_.rff_dim, config_.rff_width,
                 rng::derive(seed_, kRffStream));
  }
  models_.reserve(config_.num_actions);
  for (std::size_t a = 0; a < config_.num_actions; ++a) models_.emplace_back(config_.model_dim());
}

RidgeHyperparams Policy::hyperparams(std::size_t episode, std::size_t total_episodes) const {
  RidgeHyperparams hp;
  hp.lambda = config_.algorithm == Algorithm::fi_ucb ? 1.0 : config_.lambda;
  hp.eta = config_.eta;
  if (config_.scheduled()) {
    hp.gamma = imputation_rate_schedule(episode, total_episodes);
  } else if (config_.imputes()) {
    hp.gamma = config_.gamma;
  } else {
    hp.gamma = 0.0;
  }
  if (config_.sketched()) {
    hp.sketch = config_.identity_sketch ? SketchKind::identity : SketchKind::sjlt;
  }
  hp.sketch_size = config_.sketch_size;
  hp.num_blocks = config_.num_blocks;
  return hp;
}

Vector Policy::model_input(const Vector& context) const {
  if (static_cast<std::size_t>(context.size()) != config_.context_dim) {
    throw std::invalid_argument("policy: context has dimension " + std::to_string(context.size()) +
                                ", expected " + std::to_string(config_.context_dim));
  }
  return rff_ ? (*rff_)(context) : context;
}

Vector Policy::scoring_feature(std::size_t action, const Vector& input) const {
  return linearized_feature(config_.reward_map, models_[action].theta(), input);
}

double Policy::score(std::size_t action, const Vector& context) const {
  if (action >= models_.size()) throw std::out_of_range("policy: action index out of range");
  const Vector input = model_input(context);
  return models_[action].ucb_score(scoring_feature(action, input), config_.exploration());
}

std::size_t Policy::select_action(const Vector& context, std::uint64_t step) const {
  if (config_.algorithm == Algorithm::uniform) {
    if (static_cast<std::size_t>(context.size()) != config_.context_dim) {
      throw std::invalid_argument("policy: context dimension mismatch");
    }
    return static_cast<std::size_t>(
        rng::to_range(rng::derive(seed_, kUniformStream, step), config_.num_actions));
  }
  const Vector input = model_input(context);
  const double weight = config_.exploration();
  std::size_t best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < models_.size(); ++a) {
    const double s = models_[a].ucb_score(scoring_feature(a, input), weight);
    if (s > best_score) {
      best_score = s;
      best = a;
    }
  }
  return best;
}

void Policy::end_episode(const EpisodeLog& log) {
  const std::size_t m = config_.num_actions;
  for (const auto& step : log.steps) {
    if (step.action >= m || static_cast<std::size_t>(step.rewards.size()) != m ||
        step.revealed.size() != m || !step.revealed[step.action]) {
      throw std::invalid_argument("end_episode: malformed step record");
    }
    if (config_.algorithm == Algorithm::fi_ucb &&
        std::find(step.revealed.begin(), step.revealed.end(), false) != step.revealed.end()) {
      throw std::invalid_argument("end_episode: fi_ucb requires full-information feedback");
    }
  }
  last_cost_ = {};
  if (config_.algorithm == Algorithm::uniform) {
    ++updates_;
    return;
  }

  const auto rows = static_cast<Eigen::Index>(log.steps.size());
  Matrix inputs(rows, static_cast<Eigen::Index>(config_.model_dim()));
  for (Eigen::Index b = 0; b < rows; ++b) {
    inputs.row(b) = model_input(log.steps[static_cast<std::size_t>(b)].context).transpose();
  }

  const RidgeHyperparams hp = hyperparams(log.episode, log.total_episodes);
  // theta starts at zero, where the poly gradient vanishes; the first update
  // therefore learns from the raw contexts.
  const RewardMap map = updates_ == 0 ? RewardMap::linear : config_.reward_map;

  for (std::size_t a = 0; a < m; ++a) {
    std::vector<Eigen::Index> seen;
    std::vector<Eigen::Index> hidden;
    for (Eigen::Index b = 0; b < rows; ++b) {
      (log.steps[static_cast<std::size_t>(b)].revealed[a] ? seen : hidden).push_back(b);
    }
    ActionModel& model = models_[a];
    const Vector theta = model.theta();
    model.reset_cost();

    const Matrix seen_inputs = inputs(seen, Eigen::all);
    Vector seen_rewards(static_cast<Eigen::Index>(seen.size()));
    for (std::size_t i = 0; i < seen.size(); ++i) {
      seen_rewards(static_cast<Eigen::Index>(i)) =
          log.steps[static_cast<std::size_t>(seen[i])].rewards(static_cast<Eigen::Index>(a));
    }
    std::vector<std::size_t> clamped;
    const Matrix seen_features = linearized_features(map, theta, seen_inputs, &clamped);
    model.update_observed(seen_features, seen_rewards, hp,
                          rng::derive(seed_, log.episode, a, 0));

    if (config_.imputes()) {
      const Matrix hidden_inputs = inputs(hidden, Eigen::all);
      const Matrix hidden_features = linearized_features(map, theta, hidden_inputs, &clamped);
      const Vector imputed =
          hidden_features.rows() > 0 ? Vector(hidden_features * theta) : Vector(0);
      model.update_imputed(hidden_features, imputed, hp, rng::derive(seed_, log.episode, a, 1));
    }
    model.solve(hp);
    clamped_rows_ += clamped.size();

    last_cost_.sketch_ms += model.cost().sketch_ms;
    last_cost_.gram_ms += model.cost().gram_ms;
    last_cost_.solve_ms += model.cost().solve_ms;
  }
  ++updates_;
}

}  // namespace cbb
