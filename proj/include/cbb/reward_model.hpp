#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "cbb/dense.hpp"

namespace cbb {

/// How a context enters the linear reward model.
enum class RewardMap {
  linear,  // s
  exp,     // exp(theta's) s, gradient of exp(theta's)
  poly,    // 2 (theta's) s, gradient of (theta's)^2
  rff,     // random Fourier features; rows are already mapped by the caller
};

enum class SketchKind {
  none,      // exact accumulators
  sjlt,      // block SJLT, fresh per episode and per action
  identity,  // Pi = I; test hook that must reproduce `none`
};

struct RidgeHyperparams {
  double lambda = 1.0;
  double gamma = 0.0;  // imputation rate
  double eta = 1.0;    // discount on imputed-side statistics only
  SketchKind sketch = SketchKind::none;
  std::size_t sketch_size = 150;
  std::size_t num_blocks = 1;

  bool sketched() const noexcept { return sketch != SketchKind::none; }
  std::vector<std::string> violations() const;
  void validate() const;
};

/// Wall time spent inside the model since the last reset, split by phase.
struct UpdateCost {
  double sketch_ms = 0.0;
  double gram_ms = 0.0;
  double solve_ms = 0.0;

  double total_ms() const noexcept { return sketch_ms + gram_ms + solve_ms; }
};

/**
 * Per-action sufficient statistics of the imputation-regularized ridge
 * regression.
 *
 *   observed:  Gram += X'X,            moment += X'y
 *   imputed:   GramI = eta GramI + Z'Z, momentI = eta momentI + Z'r
 *   solve:     theta = (lambda I + Gram + gamma GramI)^{-1} (moment + gamma momentI)
 *
 * In sketched mode X, y (resp. Z, r) are replaced by their SJLT sketches, so
 * the Gram cost per episode is O(c d^2) instead of O(B d^2).
 *
 * ucb_score() needs a factorization of the current ridge matrix; every update
 * bumps a version counter and scoring before the next solve() throws.
 */
class ActionModel {
 public:
  explicit ActionModel(std::size_t dim);

  void update_observed(const Matrix& contexts, const Vector& rewards,
                       const RidgeHyperparams& hp, std::uint64_t sketch_seed);
  void update_imputed(const Matrix& contexts, const Vector& imputed_rewards,
                      const RidgeHyperparams& hp, std::uint64_t sketch_seed);
  const Vector& solve(const RidgeHyperparams& hp);

  /// <theta, s> + alpha sqrt(s' W^{-1} s) with one triangular solve.
  double ucb_score(const Vector& s, double alpha) const;
  /// sqrt(s' W^{-1} s).
  double width(const Vector& s) const;

  std::size_t dim() const noexcept { return dim_; }
  bool fresh() const noexcept { return version_ == solved_version_; }
  std::uint64_t version() const noexcept { return version_; }

  const SquareMatrix& gram() const noexcept { return gram_; }
  const SquareMatrix& gram_imputed() const noexcept { return gram_imputed_; }
  const Vector& moment() const noexcept { return moment_; }
  const Vector& moment_imputed() const noexcept { return moment_imputed_; }
  const Vector& theta() const noexcept { return theta_; }
  /// lambda I + Gram + gamma GramI as of the last solve().
  const SquareMatrix& ridge_matrix() const noexcept { return ridge_; }

  const UpdateCost& cost() const noexcept { return cost_; }
  void reset_cost() noexcept { cost_ = {}; }

 private:
  void check_rows(const Matrix& contexts, const Vector& targets, const char* what) const;
  void accumulate(SquareMatrix& gram, Vector& moment, const Matrix& contexts,
                  const Vector& targets, const RidgeHyperparams& hp, std::uint64_t sketch_seed);

  std::size_t dim_;
  SquareMatrix gram_;
  SquareMatrix gram_imputed_;
  Vector moment_;
  Vector moment_imputed_;
  Vector theta_;
  SquareMatrix ridge_;
  Eigen::LLT<SquareMatrix> factor_;
  std::uint64_t version_ = 1;
  std::uint64_t solved_version_ = 0;
  UpdateCost cost_;
};

/// Exponent clamp for the exp reward map.
inline constexpr double kExpClamp = 30.0;

/// f(theta, s) for one context; sets *clamped when the exp argument hit the clamp.
Vector linearized_feature(RewardMap map, const Vector& theta, const Vector& s,
                          bool* clamped = nullptr);

/// Row-wise linearized_feature.
Matrix linearized_features(RewardMap map, const Vector& theta, const Matrix& contexts,
                           std::vector<std::size_t>* clamped_rows = nullptr);

struct Imputation {
  Vector rewards;
  std::vector<std::size_t> clamped_rows;
};

/// Row b gets <theta, f(theta, s_b)>. For RewardMap::rff the rows must already
/// be feature vectors.
Imputation impute_rewards(const Vector& theta, const Matrix& contexts, RewardMap map);

}  // namespace cbb
