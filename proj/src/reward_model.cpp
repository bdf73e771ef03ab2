#include "cbb/reward_model.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "cbb/sketching.hpp"

namespace cbb {
namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

// gram += x'x, keeping gram exactly symmetric.
void add_gram(SquareMatrix& gram, const Matrix& x) {
  gram.selfadjointView<Eigen::Lower>().rankUpdate(x.transpose());
  gram.triangularView<Eigen::StrictlyUpper>() = gram.transpose();
}

}  // namespace

std::vector<std::string> RidgeHyperparams::violations() const {
  std::vector<std::string> out;
  if (!(lambda > 0.0) || !std::isfinite(lambda)) out.push_back("lambda must be > 0");
  if (!(gamma >= 0.0 && gamma <= 1.0)) out.push_back("gamma must lie in [0, 1]");
  if (!(eta > 0.0 && eta <= 1.0)) out.push_back("eta must lie in (0, 1]");
  if (sketch == SketchKind::sjlt) {
    if (num_blocks == 0 || sketch_size < num_blocks || sketch_size % num_blocks != 0) {
      out.push_back("sketch size must be a positive multiple of the number of blocks");
    }
  }
  return out;
}

void RidgeHyperparams::validate() const {
  const auto v = violations();
  if (!v.empty()) {
    std::string msg = "invalid ridge hyperparameters:";
    for (const auto& s : v) msg += " " + s + ";";
    throw std::invalid_argument(msg);
  }
}

ActionModel::ActionModel(std::size_t dim)
    : dim_(dim),
      gram_(SquareMatrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim))),
      gram_imputed_(gram_),
      moment_(Vector::Zero(static_cast<Eigen::Index>(dim))),
      moment_imputed_(moment_),
      theta_(moment_),
      ridge_(gram_) {
  if (dim == 0) throw std::invalid_argument("action model: dimension must be positive");
}

void ActionModel::check_rows(const Matrix& contexts, const Vector& targets,
                             const char* what) const {
  if (static_cast<std::size_t>(contexts.cols()) != dim_ && contexts.rows() > 0) {
    throw std::invalid_argument(std::string(what) + ": context dimension " +
                                std::to_string(contexts.cols()) + " != model dimension " +
                                std::to_string(dim_));
  }
  if (targets.size() != contexts.rows()) {
    throw std::invalid_argument(std::string(what) + ": " + std::to_string(contexts.rows()) +
                                " contexts but " + std::to_string(targets.size()) + " rewards");
  }
  require_finite(contexts, what);
  require_finite(targets, what);
}

void ActionModel::accumulate(SquareMatrix& gram, Vector& moment, const Matrix& contexts,
                             const Vector& targets, const RidgeHyperparams& hp,
                             std::uint64_t sketch_seed) {
  if (hp.sketch == SketchKind::sjlt) {
    auto t0 = Clock::now();
    const SjltSketch sk(hp.sketch_size, hp.num_blocks,
                        static_cast<std::size_t>(contexts.rows()), sketch_seed);
    const Matrix gamma_ctx = sk.apply(contexts);
    const Vector lambda_rew = sk.apply(targets);
    cost_.sketch_ms += elapsed_ms(t0);

    t0 = Clock::now();
    add_gram(gram, gamma_ctx);
    moment.noalias() += gamma_ctx.transpose() * lambda_rew;
    cost_.gram_ms += elapsed_ms(t0);
    return;
  }
  // none and identity share this path: Pi = I leaves the data untouched.
  const auto t0 = Clock::now();
  add_gram(gram, contexts);
  moment.noalias() += contexts.transpose() * targets;
  cost_.gram_ms += elapsed_ms(t0);
}

void ActionModel::update_observed(const Matrix& contexts, const Vector& rewards,
                                  const RidgeHyperparams& hp, std::uint64_t sketch_seed) {
  check_rows(contexts, rewards, "update_observed");
  if (contexts.rows() == 0) return;
  accumulate(gram_, moment_, contexts, rewards, hp, sketch_seed);
  ++version_;
}

void ActionModel::update_imputed(const Matrix& contexts, const Vector& imputed_rewards,
                                 const RidgeHyperparams& hp, std::uint64_t sketch_seed) {
  check_rows(contexts, imputed_rewards, "update_imputed");
  if (!(hp.eta > 0.0 && hp.eta <= 1.0)) throw std::invalid_argument("eta must lie in (0, 1]");
  if (hp.eta != 1.0) {
    gram_imputed_ *= hp.eta;
    moment_imputed_ *= hp.eta;
  }
  if (contexts.rows() > 0) {
    accumulate(gram_imputed_, moment_imputed_, contexts, imputed_rewards, hp, sketch_seed);
  }
  ++version_;
}

const Vector& ActionModel::solve(const RidgeHyperparams& hp) {
  hp.validate();
  const auto t0 = Clock::now();
  ridge_ = gram_;
  ridge_.noalias() += hp.gamma * gram_imputed_;
  ridge_.diagonal().array() += hp.lambda;
  factor_.compute(ridge_);
  if (factor_.info() != Eigen::Success) {
    throw std::runtime_error("action model: ridge matrix is not positive definite");
  }
  theta_ = factor_.solve(moment_ + hp.gamma * moment_imputed_);
  solved_version_ = version_;
  cost_.solve_ms += elapsed_ms(t0);
  return theta_;
}

double ActionModel::width(const Vector& s) const {
  if (static_cast<std::size_t>(s.size()) != dim_) {
    throw std::invalid_argument("ucb: context dimension " + std::to_string(s.size()) +
                                " != model dimension " + std::to_string(dim_));
  }
  if (!fresh()) {
    throw std::logic_error("ucb: model was updated after the last solve()");
  }
  return factor_.matrixL().solve(s).norm();
}

double ActionModel::ucb_score(const Vector& s, double alpha) const {
  const double w = width(s);
  return theta_.dot(s) + alpha * w;
}

Vector linearized_feature(RewardMap map, const Vector& theta, const Vector& s, bool* clamped) {
  switch (map) {
    case RewardMap::linear:
    case RewardMap::rff:
      return s;
    case RewardMap::exp: {
      const double z = theta.dot(s);
      const double zc = std::clamp(z, -kExpClamp, kExpClamp);
      if (clamped != nullptr) *clamped = zc != z;
      return std::exp(zc) * s;
    }
    case RewardMap::poly:
      return 2.0 * theta.dot(s) * s;
  }
  throw std::invalid_argument("unknown reward map");
}

Matrix linearized_features(RewardMap map, const Vector& theta, const Matrix& contexts,
                           std::vector<std::size_t>* clamped_rows) {
  if (map == RewardMap::linear || map == RewardMap::rff) return contexts;
  Matrix out(contexts.rows(), contexts.cols());
  for (Eigen::Index b = 0; b < contexts.rows(); ++b) {
    bool clamped = false;
    out.row(b) = linearized_feature(map, theta, contexts.row(b).transpose(), &clamped).transpose();
    if (clamped && clamped_rows != nullptr) clamped_rows->push_back(static_cast<std::size_t>(b));
  }
  return out;
}

Imputation impute_rewards(const Vector& theta, const Matrix& contexts, RewardMap map) {
  if (contexts.rows() > 0 && contexts.cols() != theta.size()) {
    throw std::invalid_argument("impute_rewards: context dimension does not match theta");
  }
  Imputation out;
  const Matrix features = linearized_features(map, theta, contexts, &out.clamped_rows);
  out.rewards = features.rows() > 0 ? Vector(features * theta) : Vector(0);
  return out;
}

}  // namespace cbb
