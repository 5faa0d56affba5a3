#include <doctest.h>

#include "wqst/error.hpp"
#include "wqst/models/linear.hpp"
#include "wqst/random.hpp"

using namespace wqst;

TEST_CASE("noiseless line") {
  Eigen::MatrixXd X(10, 1);
  Eigen::VectorXd y(10);
  for (int i = 0; i < 10; ++i) {
    X(i, 0) = i;
    y(i) = 2.0 * i + 1.0;
  }
  const auto m = fit_linear(X, y);
  const auto* s = m.state_as<LinearState>();
  REQUIRE(s);
  CHECK(std::abs(s->coefficients()(0) - 2.0) < 1e-10);
  CHECK(std::abs(s->intercept() - 1.0) < 1e-10);
  CHECK(m.warnings().empty());
}

TEST_CASE("constant target") {
  Rng rng(3);
  Eigen::MatrixXd X(20, 3);
  for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = rng.uniform(-5, 5);
  const auto m = fit_linear(X, Eigen::VectorXd::Constant(20, 3.0));
  const auto* s = m.state_as<LinearState>();
  CHECK(std::abs(s->intercept() - 3.0) < 1e-10);
  for (Eigen::Index j = 0; j < 3; ++j) CHECK(std::abs(s->coefficients()(j)) < 1e-10);
}

TEST_CASE("three-point normal equations") {
  // Sxx = 2, Sxy = 1 about means (1, 5/3): slope 1/2, intercept 5/3 - 1/2.
  Eigen::MatrixXd X(3, 1);
  X << 0, 1, 2;
  Eigen::VectorXd y(3);
  y << 1, 2, 2;
  const auto m = fit_linear(X, y);
  const auto* s = m.state_as<LinearState>();
  CHECK(s->coefficients()(0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(s->intercept() == doctest::Approx(7.0 / 6.0).epsilon(1e-12));
}

TEST_CASE("zero row predicts the intercept") {
  Rng rng(8);
  Eigen::MatrixXd X(30, 2);
  Eigen::VectorXd y(30);
  for (int i = 0; i < 30; ++i) {
    X(i, 0) = rng.uniform(0, 1);
    X(i, 1) = rng.uniform(0, 1);
    y(i) = 1.0 + X(i, 0) - 3.0 * X(i, 1) + 0.1 * rng.normal();
  }
  const auto m = fit_linear(X, y);
  const auto pred = m.predict(Eigen::MatrixXd::Zero(1, 2));
  CHECK(pred(0) == doctest::Approx(m.state_as<LinearState>()->intercept()).epsilon(1e-14));
}

TEST_CASE("matches an independent least-squares solve") {
  Rng rng(21);
  const int n = 200, p = 4;
  Eigen::MatrixXd X(n, p);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) X(i, j) = rng.uniform(-1, 1) * (j + 1) * 100.0;
    y(i) = 5.0 + X.row(i).sum() * 0.01 + rng.normal();
  }
  Eigen::MatrixXd A(n, p + 1);
  A << Eigen::VectorXd::Ones(n), X;
  const Eigen::VectorXd beta = A.colPivHouseholderQr().solve(y);
  const auto m = fit_linear(X, y);
  const auto* s = m.state_as<LinearState>();
  CHECK(s->intercept() == doctest::Approx(beta(0)).epsilon(1e-9));
  for (int j = 0; j < p; ++j) CHECK(s->coefficients()(j) == doctest::Approx(beta(j + 1)).epsilon(1e-9));
}

TEST_CASE("collinear columns fall back with a warning") {
  Eigen::MatrixXd X(10, 2);
  Eigen::VectorXd y(10);
  for (int i = 0; i < 10; ++i) {
    X(i, 0) = i;
    X(i, 1) = 2.0 * i;
    y(i) = 1.0 + i;
  }
  const auto m = fit_linear(X, y);
  REQUIRE(m.warnings().size() == 1);
  CHECK(m.warnings()[0].rfind("RankDeficient", 0) == 0);
  const auto pred = m.predict(X);
  for (int i = 0; i < 10; ++i) CHECK(pred(i) == doctest::Approx(y(i)).epsilon(1e-6));
}

TEST_CASE("bad inputs") {
  CHECK_THROWS_AS(fit_linear(Eigen::MatrixXd(0, 1), Eigen::VectorXd(0)), Error);
  CHECK_THROWS_AS(fit_linear(Eigen::MatrixXd::Zero(3, 1), Eigen::VectorXd::Zero(2)), Error);
  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(3, 1);
  X(1, 0) = std::nan("");
  CHECK_THROWS_AS(fit_linear(X, Eigen::VectorXd::Zero(3)), Error);
}
