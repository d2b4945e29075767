#include "c4ucb/linear_model.hpp"

#include <doctest.h>

#include <Eigen/QR>

#include <cmath>
#include <random>
#include <vector>

using namespace c4ucb;

namespace {

Eigen::VectorXd random_ball_vector(std::mt19937_64& rng, int d) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::VectorXd v(d);
  for (int i = 0; i < d; ++i) v(i) = n(rng);
  return v / v.norm() * u(rng);
}

// Batch ridge solution (X^T X + lambda I)^{-1} X^T Y with X rows gamma x^T and Y rows gamma w.
Eigen::VectorXd batch_ridge(const std::vector<Observation>& obs, int d, double lambda) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(obs.size()), d);
  Eigen::VectorXd y(static_cast<Eigen::Index>(obs.size()));
  for (std::size_t i = 0; i < obs.size(); ++i) {
    x.row(static_cast<Eigen::Index>(i)) = obs[i].discount * obs[i].context.transpose();
    y(static_cast<Eigen::Index>(i)) = obs[i].discount * obs[i].weight;
  }
  const Eigen::MatrixXd a = x.transpose() * x + lambda * Eigen::MatrixXd::Identity(d, d);
  return a.colPivHouseholderQr().solve(x.transpose() * y);
}

}  // namespace

TEST_CASE("empty update leaves the initial state untouched") {
  Ellipsoid m(3, EllipsoidParams{});
  const auto report = m.update({});
  CHECK(report.downdate.cols() == 0);
  CHECK(m.theta_hat().isZero());
  CHECK(m.beta() == 1.0);
  CHECK(m.gram().isApprox(0.1 * Eigen::MatrixXd::Identity(3, 3)));
  CHECK(m.log_det() == doctest::Approx(3 * std::log(0.1)));
  CHECK(m.version() == 0);
}

TEST_CASE("one-dimensional ridge step") {
  Ellipsoid m(1, EllipsoidParams{1.0, 0.5, 0.1, 1000});
  std::vector<Observation> obs{{Eigen::VectorXd::Ones(1), 1.0, 1.0}};
  m.update(obs);
  CHECK(m.gram()(0, 0) == doctest::Approx(2.0));
  CHECK(m.response()(0) == doctest::Approx(1.0));
  CHECK(m.theta_hat()(0) == doctest::Approx(0.5));
  // det V = 2, lambda^d = 1
  CHECK(m.beta() == doctest::Approx(0.5 * std::sqrt(std::log(2.0 / 0.01)) + 1.0));
}

TEST_CASE("incremental estimate matches the batch normal equations") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Observation> obs;
  for (int i = 0; i < 50; ++i) obs.push_back({random_ball_vector(rng, 2), u(rng), u(rng)});
  Ellipsoid m(2, EllipsoidParams{0.1, 0.5, 0.1, 1000});
  for (std::size_t i = 0; i < obs.size(); i += 3)
    m.update(std::span<const Observation>(obs).subspan(i, std::min<std::size_t>(3, obs.size() - i)));
  CHECK((m.theta_hat() - batch_ridge(obs, 2, 0.1)).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("estimator equivalence on random instances") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> dim(1, 10), count(1, 500);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 20; ++rep) {
    const int d = dim(rng);
    const int n = count(rng);
    const double lambda = 0.05 + u(rng);
    std::vector<Observation> obs;
    for (int i = 0; i < n; ++i) obs.push_back({random_ball_vector(rng, d), u(rng), u(rng) < 0.5 ? 0.0 : 1.0});
    Ellipsoid m(d, EllipsoidParams{lambda, 0.5, 0.1, 97});
    for (const auto& o : obs) m.update(std::span<const Observation>(&o, 1));
    CHECK((m.theta_hat() - batch_ridge(obs, d, lambda)).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((m.theta_hat() - m.gram_inv() * m.response()).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("log det grows monotonically and tracks the exact determinant") {
  std::mt19937_64 rng(3);
  Ellipsoid m(6, EllipsoidParams{0.1, 0.5, 0.1, 250});
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double prev = m.log_det();
  for (int i = 0; i < 2000; ++i) {
    std::vector<Observation> obs{{random_ball_vector(rng, 6), u(rng), 1.0}};
    if (i % 17 == 0) obs.front().context.setZero();
    m.update(obs);
    CHECK(m.log_det() >= prev);
    prev = m.log_det();
  }
  const double exact = std::log(m.gram().determinant());
  CHECK(m.log_det() == doctest::Approx(exact).epsilon(1e-10));
}

TEST_CASE("inverse stays consistent over 10^4 rank-one updates") {
  std::mt19937_64 rng(8);
  Ellipsoid m(20, EllipsoidParams{});
  for (int i = 0; i < 10000; ++i) {
    std::vector<Observation> obs{{random_ball_vector(rng, 20), 1.0, 0.0}};
    m.update(obs);
  }
  CHECK(m.inverse_error() < 1e-6);
  CHECK((m.gram() - m.gram().transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("downdate factor reproduces the inverse change") {
  std::mt19937_64 rng(21);
  Ellipsoid m(4, EllipsoidParams{});
  std::vector<Observation> warm{{random_ball_vector(rng, 4), 1.0, 1.0}};
  m.update(warm);
  const Eigen::MatrixXd before = m.gram_inv();
  std::vector<Observation> obs{{random_ball_vector(rng, 4), 1.0, 0.0}, {random_ball_vector(rng, 4), 0.7, 1.0}};
  const auto report = m.update(obs);
  REQUIRE_FALSE(report.reinverted);
  const Eigen::MatrixXd rebuilt = before - report.downdate * report.downdate.transpose();
  CHECK((rebuilt - m.gram_inv()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("bounds at initialization") {
  Ellipsoid m(5, EllipsoidParams{0.1, 0.5, 0.1, 1000});
  Eigen::VectorXd x = Eigen::VectorXd::Zero(5);
  x(2) = 1.0;
  const auto b = m.bounds_for(x);
  CHECK(b.mean == 0.0);
  CHECK(b.radius == doctest::Approx(std::sqrt(10.0)));
  CHECK(b.upper == 1.0);
  CHECK(b.lower == 0.0);

  const auto z = m.bounds_for(Eigen::VectorXd::Zero(5));
  CHECK(z.mean == 0.0);
  CHECK(z.radius == 0.0);
  CHECK(z.upper == 0.0);
  CHECK(z.lower == 0.0);
}

TEST_CASE("batched bounds agree with per-item bounds and respect the ordering invariant") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Ellipsoid m(7, EllipsoidParams{});
  for (int i = 0; i < 40; ++i) {
    std::vector<Observation> obs{{random_ball_vector(rng, 7), 1.0, u(rng) < 0.3 ? 1.0 : 0.0}};
    m.update(obs);
  }
  Eigen::MatrixXd xs(7, 30);
  for (int a = 0; a < 30; ++a) xs.col(a) = random_ball_vector(rng, 7);
  const auto all = m.bounds_for_all(xs);
  for (int a = 0; a < 30; ++a) {
    const auto b = m.bounds_for(xs.col(a));
    CHECK(all.mean(a) == doctest::Approx(b.mean).epsilon(1e-12));
    CHECK(all.radius(a) == doctest::Approx(b.radius).epsilon(1e-12));
    CHECK(0.0 <= b.lower);
    CHECK(b.lower <= b.upper);
    CHECK(b.upper <= 1.0);
  }
}

TEST_CASE("bounds cover a fixed arm's weight on most checkpoints") {
  const int d = 3;
  Eigen::VectorXd theta(d);
  theta << 0.4, 0.3, 0.5;
  Eigen::VectorXd x(d);
  x << 0.6, 0.0, 0.72;  // theta^T x = 0.6
  REQUIRE(theta.dot(x) == doctest::Approx(0.6));
  REQUIRE(x.norm() <= 1.0);
  std::mt19937_64 rng(99);
  std::bernoulli_distribution click(0.6);
  const double delta = 0.1;
  Ellipsoid m(d, EllipsoidParams{0.1, 0.5, delta, 1000});
  int covered = 0;
  for (int t = 0; t < 1000; ++t) {
    const auto b = m.bounds_for(x);
    if (b.lower <= 0.6 && 0.6 <= b.upper) ++covered;
    std::vector<Observation> obs{{x, 1.0, click(rng) ? 1.0 : 0.0}};
    m.update(obs);
  }
  CHECK(covered >= static_cast<int>((1.0 - delta) * 1000));
}

TEST_CASE("confidence_contains at initialization") {
  Ellipsoid m(4, EllipsoidParams{0.1, 0.5, 0.1, 1000});
  CHECK(m.confidence_contains(Eigen::VectorXd::Zero(4)));
  Eigen::VectorXd unit = Eigen::VectorXd::Zero(4);
  unit(0) = 1.0;
  // sqrt(0.1) * 1 <= beta_0 = 1
  CHECK(m.confidence_contains(unit));
  CHECK_FALSE(m.confidence_contains(Eigen::VectorXd::Constant(4, 2.0)));
}

TEST_CASE("update rejects malformed observations") {
  Ellipsoid m(2, EllipsoidParams{});
  std::vector<Observation> nan{{Eigen::Vector2d(std::nan(""), 0.0), 1.0, 1.0}};
  CHECK_THROWS_AS(m.update(nan), std::domain_error);
  std::vector<Observation> discount{{Eigen::Vector2d(0.5, 0.0), 1.5, 1.0}};
  CHECK_THROWS_AS(m.update(discount), std::domain_error);
  std::vector<Observation> wrong_dim{{Eigen::Vector3d(0.5, 0.0, 0.0), 1.0, 1.0}};
  CHECK_THROWS_AS(m.update(wrong_dim), std::invalid_argument);
  CHECK_THROWS_AS(m.bounds_for(Eigen::Vector2d(INFINITY, 0.0)), std::domain_error);
  CHECK(m.version() == 0);
  CHECK_THROWS_AS(Ellipsoid(2, EllipsoidParams{0.0, 0.5, 0.1, 1000}), std::invalid_argument);
  CHECK_THROWS_AS(Ellipsoid(2, EllipsoidParams{0.1, 0.5, 1.0, 1000}), std::invalid_argument);
}

TEST_CASE("single-precision instantiation") {
  EllipsoidState<float> m(2, EllipsoidParamsT<float>{1.0f, 0.5f, 0.1f, 1000});
  std::vector<ObservationT<float>> obs{{Eigen::Vector2f(1.0f, 0.0f), 1.0f, 1.0f}};
  m.update(obs);
  CHECK(m.theta_hat()(0) == doctest::Approx(0.5f));
  CHECK(m.theta_hat()(1) == 0.0f);
}
