#include <doctest.h>

#include <cmath>

#include "wqst/error.hpp"
#include "wqst/models/gaussian_process.hpp"
#include "wqst/random.hpp"

using namespace wqst;

namespace {

ModelSpec gp(Hyperparameters hp, std::uint64_t seed = 0) {
  return {ModelKind::GAUSSIAN_PROCESS, std::move(hp), seed};
}

}  // namespace

TEST_CASE("single point posterior") {
  Eigen::MatrixXd X(1, 2);
  X << 0.3, -1.2;
  Eigen::VectorXd y(1);
  y << 2.5;
  for (double s2 : {0.5, 1.0, 3.0}) {
    for (double n2 : {0.01, 0.25, 1.0}) {
      const auto m = fit_gaussian_process(
          X, y, gp({{"center_y", 0}, {"signal_variance", s2}, {"noise_variance", n2}, {"lengthscale", 1}}));
      const auto* s = m.state_as<GaussianProcessState>();
      const auto post = s->predict_with_variance(X);
      CHECK(std::abs(post.mean(0) - 2.5 * s2 / (s2 + n2)) < 1e-9);
      CHECK(std::abs(post.variance(0) - (s2 + n2 - s2 * s2 / (s2 + n2))) < 1e-9);
    }
  }
}

TEST_CASE("far from the data the prior returns") {
  Rng rng(4);
  Eigen::MatrixXd X(40, 1);
  Eigen::VectorXd y(40);
  for (int i = 0; i < 40; ++i) {
    X(i, 0) = rng.uniform(0, 1);
    y(i) = 3.0 + std::sin(6 * X(i, 0));
  }
  const auto m = fit_gaussian_process(X, y, gp({}));
  const auto* s = m.state_as<GaussianProcessState>();
  Eigen::MatrixXd far(1, 1);
  far << 1000.0;
  const auto post = s->predict_with_variance(far);
  CHECK(post.mean(0) == doctest::Approx(y.mean()).epsilon(1e-12));
  CHECK(post.variance(0) ==
        doctest::Approx(s->params().signal_variance + s->params().noise_variance).epsilon(1e-12));
}

TEST_CASE("noiseless line is interpolated") {
  Eigen::MatrixXd X(12, 1);
  Eigen::VectorXd y(12);
  for (int i = 0; i < 12; ++i) {
    X(i, 0) = i / 11.0;
    y(i) = X(i, 0);
  }
  const auto m = fit_gaussian_process(X, y, gp({{"noise_variance", 1e-12}}));
  const auto pred = m.predict(X);
  for (int i = 0; i < 12; ++i) CHECK(std::abs(pred(i) - y(i)) < 1e-6);
}

TEST_CASE("posterior variance stays within the prior") {
  Rng rng(5);
  Eigen::MatrixXd X(80, 2);
  Eigen::VectorXd y(80);
  for (int i = 0; i < 80; ++i) {
    X(i, 0) = rng.uniform(-3, 3);
    X(i, 1) = rng.uniform(-3, 3);
    y(i) = X(i, 0) * X(i, 1) + 0.2 * rng.normal();
  }
  const auto m = fit_gaussian_process(X, y, gp({}, 3));
  const auto* s = m.state_as<GaussianProcessState>();
  Eigen::MatrixXd Q(300, 2);
  for (Eigen::Index i = 0; i < Q.size(); ++i) Q.data()[i] = rng.uniform(-6, 6);
  Eigen::MatrixXd all(380, 2);
  all << X, Q;
  const auto post = s->predict_with_variance(all);
  const double cap = s->params().signal_variance + s->params().noise_variance + 1e-9;
  CHECK((post.variance.array() >= 0.0).all());
  CHECK((post.variance.array() <= cap).all());
  CHECK(post.mean == m.predict(all));
}

TEST_CASE("log marginal likelihood agrees with a direct evaluation") {
  Rng rng(6);
  Eigen::MatrixXd Z(15, 2);
  Eigen::VectorXd y(15);
  for (Eigen::Index i = 0; i < Z.size(); ++i) Z.data()[i] = rng.normal();
  for (int i = 0; i < 15; ++i) y(i) = rng.normal();
  Eigen::VectorXd ls(2);
  ls << 0.7, 1.9;
  Eigen::MatrixXd K(15, 15);
  for (int a = 0; a < 15; ++a) {
    for (int b = 0; b < 15; ++b) {
      const double d0 = (Z(a, 0) - Z(b, 0)) / ls(0), d1 = (Z(a, 1) - Z(b, 1)) / ls(1);
      K(a, b) = 1.3 * std::exp(-0.5 * (d0 * d0 + d1 * d1)) + (a == b ? 0.2 : 0.0);
    }
  }
  const double direct = -0.5 * y.dot(K.inverse() * y) - 0.5 * std::log(K.determinant()) -
                        7.5 * std::log(2.0 * 3.14159265358979323846);
  CHECK(gp_log_marginal_likelihood(Z, y, ls, 1.3, 0.2) == doctest::Approx(direct).epsilon(1e-10));
  const Eigen::MatrixXd Ks = squared_exponential(Z, Z, ls, 1.3);
  CHECK((Ks + 0.2 * Eigen::MatrixXd::Identity(15, 15) - K).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("duplicate rows need the nugget") {
  Eigen::MatrixXd X = Eigen::MatrixXd::Ones(5, 1);
  Eigen::VectorXd y(5);
  y << 1, 2, 3, 4, 5;
  const auto m = fit_gaussian_process(X, y, gp({{"noise_variance", 0}, {"lengthscale", 1}, {"signal_variance", 1}}));
  CHECK_FALSE(m.warnings().empty());
  CHECK(m.warnings()[0].rfind("NuggetEscalated", 0) == 0);
  CHECK(std::isfinite(m.predict(X)(0)));
}

TEST_CASE("training rows are capped by subsampling") {
  Rng rng(7);
  Eigen::MatrixXd X(300, 1);
  Eigen::VectorXd y(300);
  for (int i = 0; i < 300; ++i) {
    X(i, 0) = rng.uniform(0, 1);
    y(i) = X(i, 0);
  }
  const auto m = fit_gaussian_process(X, y, gp({{"max_train_points", 100}}));
  CHECK(m.state_as<GaussianProcessState>()->n_train() == 100);
  CHECK(m.summary().n_train == 300);
  const auto again = fit_gaussian_process(X, y, gp({{"max_train_points", 100}}));
  CHECK(again.predict(X) == m.predict(X));
}
