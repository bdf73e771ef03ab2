#include <cmath>
#include <limits>
#include <random>

#include "cbb/reward_model.hpp"
#include "cbb/sketching.hpp"
#include "doctest.h"
#include "oracles.hpp"

using cbb::ActionModel;
using cbb::Matrix;
using cbb::RewardMap;
using cbb::RidgeHyperparams;
using cbb::SketchKind;
using cbb::Vector;

namespace {

RidgeHyperparams exact(double lambda, double gamma, double eta) {
  RidgeHyperparams hp;
  hp.lambda = lambda;
  hp.gamma = gamma;
  hp.eta = eta;
  return hp;
}

// Algorithm order for one episode: impute with the old theta, then update, then solve.
void run_episode(ActionModel& m, const oracle::ActionEpisode& ep, const RidgeHyperparams& hp,
                 std::uint64_t seed) {
  const Vector imputed =
      ep.hidden.rows() > 0 ? Vector(ep.hidden * m.theta()) : Vector(0);
  m.update_observed(ep.seen, ep.rewards, hp, seed);
  m.update_imputed(ep.hidden, imputed, hp, seed + 1);
  m.solve(hp);
}

oracle::ActionEpisode random_episode(std::mt19937_64& gen, Eigen::Index d, Eigen::Index batch) {
  const Eigen::Index seen = static_cast<Eigen::Index>(gen() % static_cast<std::uint64_t>(batch + 1));
  oracle::ActionEpisode ep;
  ep.seen = oracle::random_matrix(gen, seen, d);
  ep.rewards = oracle::random_vector(gen, seen);
  ep.hidden = oracle::random_matrix(gen, batch - seen, d);
  return ep;
}

}  // namespace

TEST_CASE("update_observed: empty batch leaves the state unchanged") {
  ActionModel m(3);
  m.update_observed(Matrix(0, 3), Vector(0), exact(1, 0.5, 0.9), 1);
  CHECK(m.gram().isZero(0.0));
  CHECK(m.moment().isZero(0.0));
}

TEST_CASE("update_observed: exact accumulation from zero") {
  ActionModel m(2);
  Matrix s(2, 2);
  s << 1, 0, 0, 1;
  Vector r(2);
  r << 1, 2;
  m.update_observed(s, r, exact(1, 0, 1), 0);
  CHECK(m.gram() == Eigen::MatrixXd::Identity(2, 2));
  CHECK(m.moment() == r);
}

TEST_CASE("update_observed: sketched Gram increment equals the dense product") {
  std::mt19937_64 gen(4);
  const Matrix s = oracle::random_matrix(gen, 12, 3);
  const Vector r = oracle::random_vector(gen, 12);
  for (std::size_t blocks : {1u, 2u, 3u}) {
    RidgeHyperparams hp = exact(1, 0.5, 0.9);
    hp.sketch = SketchKind::sjlt;
    hp.sketch_size = 12;
    hp.num_blocks = blocks;
    ActionModel m(3);
    m.update_observed(s, r, hp, 555);
    const Matrix pi = cbb::SjltSketch(12, blocks, 12, 555).materialize();
    const Matrix ps = pi * s;
    const Eigen::MatrixXd g = ps.transpose() * ps;
    const Vector p = ps.transpose() * (pi * r);
    CHECK((m.gram() - g).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((m.moment() - p).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("update_imputed: single row with eta = 1") {
  ActionModel m(2);
  Matrix s(1, 2);
  s << 1, 0;
  Vector r(1);
  r << 0.5;
  m.update_imputed(s, r, exact(1, 0.5, 1.0), 0);
  Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(2, 2);
  expected(0, 0) = 1;
  CHECK(m.gram_imputed() == expected);
  CHECK(m.moment_imputed() == Vector((Vector(2) << 0.5, 0).finished()));
}

TEST_CASE("update_imputed: discount unrolls") {
  std::mt19937_64 gen(9);
  const Matrix s = oracle::random_matrix(gen, 3, 2);
  const Vector r = oracle::random_vector(gen, 3);
  ActionModel m(2);
  m.update_imputed(s, r, exact(1, 0.5, 0.5), 0);
  m.update_imputed(s, r, exact(1, 0.5, 0.5), 0);
  const Eigen::MatrixXd sts = s.transpose() * s;
  CHECK((m.gram_imputed() - (0.5 * sts + sts)).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("update_imputed: incremental equals discounted batch sum") {
  std::mt19937_64 gen(10);
  const double eta = 0.7;
  ActionModel m(4);
  std::vector<Matrix> batches;
  for (int k = 0; k < 6; ++k) {
    batches.push_back(oracle::random_matrix(gen, 1 + static_cast<Eigen::Index>(gen() % 8), 4));
    m.update_imputed(batches.back(), Vector::Zero(batches.back().rows()), exact(1, 0.5, eta), 0);
  }
  Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(4, 4);
  for (std::size_t i = 0; i < batches.size(); ++i) {
    expected += std::pow(eta, static_cast<double>(batches.size() - 1 - i)) *
                Eigen::MatrixXd(batches[i].transpose() * batches[i]);
  }
  CHECK((m.gram_imputed() - expected).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK((m.gram_imputed() - m.gram_imputed().transpose()).isZero(0.0));
}

TEST_CASE("update: rejects mismatched or non-finite input") {
  ActionModel m(3);
  const auto hp = exact(1, 0.5, 0.9);
  CHECK_THROWS_AS(m.update_observed(Matrix::Zero(2, 2), Vector::Zero(2), hp, 0),
                  std::invalid_argument);
  CHECK_THROWS_AS(m.update_observed(Matrix::Zero(2, 3), Vector::Zero(3), hp, 0),
                  std::invalid_argument);
  Matrix bad = Matrix::Zero(2, 3);
  bad(1, 1) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(m.update_imputed(bad, Vector::Zero(2), hp, 0), std::invalid_argument);
}

TEST_CASE("hyperparameters are validated") {
  CHECK_THROWS(exact(0, 0.5, 0.9).validate());
  CHECK_THROWS(exact(1, 1.5, 0.9).validate());
  CHECK_THROWS(exact(1, 0.5, 0.0).validate());
  CHECK_THROWS(exact(1, 0.5, 1.1).validate());
  RidgeHyperparams hp = exact(1, 0.5, 0.9);
  hp.sketch = SketchKind::sjlt;
  hp.sketch_size = 10;
  hp.num_blocks = 4;
  CHECK(hp.violations().size() == 1);
  ActionModel m(2);
  CHECK_THROWS_AS(m.solve(exact(-1, 0, 1)), std::invalid_argument);
}

TEST_CASE("solve: zero state gives zero theta") {
  for (double lambda : {0.1, 1.0, 7.0}) {
    ActionModel m(5);
    CHECK(m.solve(exact(lambda, 0.3, 0.9)).isZero(0.0));
  }
}

TEST_CASE("solve: identity Gram with gamma = 0") {
  ActionModel m(2);
  Matrix s(2, 2);
  s << 1, 0, 0, 1;
  Vector r(2);
  r << 1, 2;
  m.update_observed(s, r, exact(1, 0, 1), 0);
  const Vector theta = m.solve(exact(1, 0, 1));
  CHECK(theta(0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(theta(1) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("solve: matches the batch imputation-regularized minimizer") {
  std::mt19937_64 gen(12);
  const auto hp = exact(1.0, 0.7, 0.9);
  std::vector<oracle::ActionEpisode> eps = {random_episode(gen, 4, 8), random_episode(gen, 4, 8)};
  ActionModel m(4);
  for (const auto& ep : eps) run_episode(m, ep, hp, 0);
  const Vector expected = oracle::imputed_ridge_batch(eps, 1.0, 0.7, 0.9, 4);
  CHECK((m.theta() - expected).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("solve: incremental equals batch over random episode sequences") {
  std::mt19937_64 gen(13);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index d = 1 + static_cast<Eigen::Index>(gen() % 6);
    const double gamma = std::uniform_real_distribution<>(0, 1)(gen);
    const double eta = std::uniform_real_distribution<>(0.05, 1)(gen);
    const double lambda = std::uniform_real_distribution<>(0.1, 3)(gen);
    const auto hp = exact(lambda, gamma, eta);
    std::vector<oracle::ActionEpisode> eps;
    ActionModel m(static_cast<std::size_t>(d));
    const int episodes = 1 + static_cast<int>(gen() % 5);
    for (int k = 0; k < episodes; ++k) {
      eps.push_back(random_episode(gen, d, 1 + static_cast<Eigen::Index>(gen() % 20)));
      run_episode(m, eps.back(), hp, 0);
    }
    const Vector expected = oracle::imputed_ridge_batch(eps, lambda, gamma, eta, d);
    CHECK((m.theta() - expected).cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("solve: gamma = 0 reduces to ridge on observed data") {
  std::mt19937_64 gen(14);
  const auto hp = exact(1.0, 0.0, 0.9);
  ActionModel with_imputation(5), without(5);
  std::vector<oracle::Block> blocks;
  for (int k = 0; k < 4; ++k) {
    const auto ep = random_episode(gen, 5, 15);
    run_episode(with_imputation, ep, hp, 0);
    without.update_observed(ep.seen, ep.rewards, hp, 0);
    without.solve(hp);
    blocks.push_back({ep.seen, ep.rewards, 1.0});
  }
  CHECK(with_imputation.theta() == without.theta());
  CHECK((without.theta() - oracle::ridge_qr(blocks, 1.0, 5)).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("solve: identity sketch reproduces the exact path") {
  std::mt19937_64 gen(15);
  auto hp_exact = exact(1.0, 0.6, 0.8);
  auto hp_id = hp_exact;
  hp_id.sketch = SketchKind::identity;
  ActionModel a(4), b(4);
  for (int k = 0; k < 5; ++k) {
    const auto ep = random_episode(gen, 4, 12);
    run_episode(a, ep, hp_exact, 0);
    run_episode(b, ep, hp_id, 0);
  }
  CHECK((a.theta() - b.theta()).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("solve: ridge matrix stays positive definite") {
  std::mt19937_64 gen(16);
  for (int trial = 0; trial < 20; ++trial) {
    RidgeHyperparams hp = exact(0.01, 1.0, 0.5);
    hp.sketch = trial % 2 == 0 ? SketchKind::sjlt : SketchKind::none;
    hp.sketch_size = 8;
    hp.num_blocks = 2;
    ActionModel m(6);
    for (int k = 0; k < 8; ++k) {
      const auto ep = random_episode(gen, 6, 1 + static_cast<Eigen::Index>(gen() % 30));
      REQUIRE_NOTHROW(run_episode(m, ep, hp, gen()));
      const auto& w = m.ridge_matrix();
      CHECK(w == w.transpose());
      CHECK(Eigen::LLT<Eigen::MatrixXd>(w).info() == Eigen::Success);
    }
  }
}

TEST_CASE("impute_rewards: reward maps") {
  std::mt19937_64 gen(17);
  const Matrix s = oracle::random_matrix(gen, 4, 3);
  const Vector zero = Vector::Zero(3);
  CHECK(cbb::impute_rewards(zero, s, RewardMap::linear).rewards.isZero(0.0));
  CHECK(cbb::impute_rewards(zero, s, RewardMap::exp).rewards.isZero(0.0));

  Matrix one(1, 2);
  one << 0.3, -0.1;
  const Vector theta = Vector::Ones(2);
  CHECK(cbb::impute_rewards(theta, one, RewardMap::poly).rewards(0) ==
        doctest::Approx(0.08).epsilon(1e-14));
  CHECK(cbb::impute_rewards(theta, one, RewardMap::exp).rewards(0) ==
        doctest::Approx(std::exp(0.2) * 0.2).epsilon(1e-14));
  const Vector w = oracle::random_vector(gen, 3);
  CHECK((cbb::impute_rewards(w, s, RewardMap::linear).rewards - s * w).isZero(1e-15));
}

TEST_CASE("impute_rewards: exp clamps large exponents and flags the row") {
  Matrix s(3, 2);
  s << 100, 0, 0.1, 0.1, -100, 0;
  const Vector theta = Vector::Ones(2);
  const auto out = cbb::impute_rewards(theta, s, RewardMap::exp);
  CHECK(out.rewards.allFinite());
  REQUIRE(out.clamped_rows.size() == 2);
  CHECK(out.clamped_rows[0] == 0);
  CHECK(out.clamped_rows[1] == 2);
  CHECK(out.rewards(0) == doctest::Approx(std::exp(30.0) * 100.0));
}

TEST_CASE("ucb_score: zero state is the prior width") {
  ActionModel m(3);
  m.solve(exact(1, 0, 1));
  const Vector e1 = Vector::Unit(3, 0);
  CHECK(m.ucb_score(e1, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("ucb_score: alpha = 0 is the mean") {
  std::mt19937_64 gen(18);
  ActionModel m(4);
  const auto ep = random_episode(gen, 4, 10);
  run_episode(m, ep, exact(1, 0.5, 0.9), 0);
  const Vector s = oracle::random_vector(gen, 4);
  CHECK(m.ucb_score(s, 0.0) == m.theta().dot(s));
}

TEST_CASE("ucb_score: matches a dense inverse") {
  std::mt19937_64 gen(19);
  for (int trial = 0; trial < 20; ++trial) {
    const auto hp = exact(1.0, 0.4, 0.9);
    oracle::ActionEpisode ep = random_episode(gen, 3, 9);
    ActionModel m(3);
    run_episode(m, ep, hp, 0);
    const Eigen::MatrixXd w = Eigen::MatrixXd::Identity(3, 3) +
                              Eigen::MatrixXd(ep.seen.transpose() * ep.seen) +
                              0.4 * Eigen::MatrixXd(ep.hidden.transpose() * ep.hidden);
    const Vector s = oracle::random_vector(gen, 3);
    CHECK(std::abs(m.ucb_score(s, 0.8) - oracle::ucb_dense(w, m.theta(), s, 0.8)) <= 1e-10);
  }
}

TEST_CASE("ucb_score: refuses a stale factorization") {
  ActionModel m(2);
  CHECK_THROWS_AS(m.ucb_score(Vector::Ones(2), 1.0), std::logic_error);
  m.solve(exact(1, 0, 1));
  CHECK_NOTHROW(m.ucb_score(Vector::Ones(2), 1.0));
  m.update_observed(Matrix::Ones(1, 2), Vector::Ones(1), exact(1, 0, 1), 0);
  CHECK_THROWS_AS(m.ucb_score(Vector::Ones(2), 1.0), std::logic_error);
  m.solve(exact(1, 0, 1));
  CHECK_NOTHROW(m.ucb_score(Vector::Ones(2), 1.0));
  CHECK_THROWS_AS(m.ucb_score(Vector::Ones(3), 1.0), std::invalid_argument);
}

TEST_CASE("variance: imputation never widens the confidence term") {
  std::mt19937_64 gen(20);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index d = 2 + static_cast<Eigen::Index>(gen() % 6);
    const Eigen::MatrixXd phi = oracle::random_psd(gen, d, 1 + static_cast<Eigen::Index>(gen() % 10));
    const Eigen::MatrixXd phi_hat = oracle::random_psd(gen, d, 1 + static_cast<Eigen::Index>(gen() % 10));
    const Vector s = oracle::random_vector(gen, d);
    const Eigen::MatrixXd base = Eigen::MatrixXd::Identity(d, d) + phi;
    const double plain = std::sqrt(s.dot(base.inverse() * s));
    double previous = plain * plain;
    for (int g = 1; g <= 10; ++g) {
      const double gamma = 0.1 * g;
      const double q = s.dot(Eigen::MatrixXd(base + gamma * phi_hat).inverse() * s);
      CHECK(std::sqrt(q) <= plain + 1e-12);
      CHECK(q <= previous + 1e-12);
      previous = q;
    }
  }
}
