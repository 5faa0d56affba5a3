#include <doctest.h>

#include <cmath>
#include <numbers>

#include "wqst/models/additive.hpp"
#include "wqst/models/linear.hpp"
#include "wqst/random.hpp"

using namespace wqst;

namespace {

ModelSpec gam(Hyperparameters hp = {}) { return {ModelKind::ADDITIVE, std::move(hp), 0}; }

double correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Eigen::ArrayXd x = a.array() - a.mean(), y = b.array() - b.mean();
  return (x * y).sum() / std::sqrt((x * x).sum() * (y * y).sum());
}

}  // namespace

TEST_CASE("linear data reproduces least squares") {
  Rng rng(1);
  Eigen::MatrixXd X(80, 1);
  Eigen::VectorXd y(80);
  for (int i = 0; i < 80; ++i) {
    X(i, 0) = rng.uniform(-3, 5);
    y(i) = 1.5 - 0.8 * X(i, 0);
  }
  const auto g = fit_additive(X, y, gam());
  const auto l = fit_linear(X, y);
  Eigen::MatrixXd q(50, 1);
  for (int i = 0; i < 50; ++i) q(i, 0) = -5.0 + 12.0 * i / 49.0;
  CHECK((g.predict(X) - l.predict(X)).cwiseAbs().maxCoeff() < 1e-6);
  CHECK((g.predict(q) - l.predict(q)).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("constant target gives zero components") {
  Rng rng(2);
  Eigen::MatrixXd X(40, 3);
  for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = rng.normal();
  const auto m = fit_additive(X, Eigen::VectorXd::Constant(40, -2.0), gam());
  const auto* s = m.state_as<AdditiveState>();
  CHECK(std::abs(s->intercept() + 2.0) < 1e-12);
  for (std::size_t j = 0; j < 3; ++j) CHECK(s->spline_values(j, X).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("two additive signals are recovered") {
  Rng rng(3);
  const int n = 600;
  Eigen::MatrixXd X(n, 2);
  Eigen::VectorXd y(n), f1(n), f2(n);
  for (int i = 0; i < n; ++i) {
    X(i, 0) = rng.uniform(0, 1);
    X(i, 1) = rng.uniform(-1, 1);
    f1(i) = std::sin(2 * std::numbers::pi * X(i, 0));
    f2(i) = 0.7 * X(i, 1);
    y(i) = 4.0 + f1(i) + f2(i) + 0.05 * rng.normal();
  }
  const auto m = fit_additive(X, y, gam());
  const auto* s = m.state_as<AdditiveState>();
  const Eigen::VectorXd g1 = s->spline_values(0, X), g2 = s->spline_values(1, X);
  CHECK(correlation(g1, f1) > 0.99);
  CHECK(correlation(g2, f2) > 0.99);
  CHECK(std::abs(g1.mean()) <= 1e-8);
  CHECK(std::abs(g2.mean()) <= 1e-8);
  CHECK(m.warnings().empty());
}

TEST_CASE("factor groups take level effects") {
  Rng rng(4);
  const int n = 300;
  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(n, 4);
  Eigen::VectorXd y(n);
  const double effect[] = {-1.0, 0.5, 2.0};
  for (int i = 0; i < n; ++i) {
    X(i, 0) = rng.uniform(0, 1);
    const int lvl = static_cast<int>(rng.uniform_index(3));
    X(i, 1 + lvl) = 1.0;
    y(i) = X(i, 0) + effect[lvl];
  }
  FeatureSchema schema{{"x", "g_a", "g_b", "g_c"}, {{"g", 1, {"a", "b", "c"}}}, std::nullopt};
  const auto m = fit_additive(X, y, gam(), schema);
  CHECK((m.predict(X) - y).cwiseAbs().maxCoeff() < 1e-4);
  const auto* s = m.state_as<AdditiveState>();
  REQUIRE(s->factors().size() == 1);
  const auto& fc = s->factors()[0];
  CHECK(fc.effects(1) - fc.effects(0) == doctest::Approx(1.5).epsilon(1e-4));
  CHECK(fc.effects(2) - fc.effects(0) == doctest::Approx(3.0).epsilon(1e-4));
  double centred = 0;
  for (int i = 0; i < n; ++i) centred += fc.evaluate(X, i);
  CHECK(std::abs(centred / n) <= 1e-8);
}

TEST_CASE("beyond the range the spline is linear") {
  Rng rng(5);
  Eigen::MatrixXd X(200, 1);
  Eigen::VectorXd y(200);
  for (int i = 0; i < 200; ++i) {
    X(i, 0) = rng.uniform(0, 1);
    y(i) = X(i, 0) * X(i, 0) + 0.01 * rng.normal();
  }
  const auto m = fit_additive(X, y, gam());
  Eigen::MatrixXd q(3, 1);
  q << 2.0, 3.0, 4.0;
  const auto p = m.predict(q);
  CHECK(p(2) - p(1) == doctest::Approx(p(1) - p(0)).epsilon(1e-9));
}
