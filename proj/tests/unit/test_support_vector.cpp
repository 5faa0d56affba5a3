#include <doctest.h>

#include <cmath>

#include "wqst/models/support_vector.hpp"
#include "wqst/random.hpp"

using namespace wqst;

namespace {

ModelSpec svr(Hyperparameters hp, std::uint64_t seed = 0) {
  return {ModelKind::SUPPORT_VECTOR, std::move(hp), seed};
}

double dual_objective(const Eigen::MatrixXd& K, const Eigen::VectorXd& z, double eps,
                      const Eigen::VectorXd& b) {
  return 0.5 * b.dot(K * b) + eps * b.cwiseAbs().sum() - z.dot(b);
}

// Enumerates every assignment of each variable to {-C, negative free, 0,
// positive free, +C}. Each pattern is an equality-constrained quadratic
// solved through its KKT system; feasible candidates are kept and the
// smallest objective wins.
double brute_force_dual(const Eigen::MatrixXd& K, const Eigen::VectorXd& z, double eps, double C) {
  const int n = static_cast<int>(z.size());
  int patterns = 1;
  for (int i = 0; i < n; ++i) patterns *= 5;
  double best = std::numeric_limits<double>::infinity();
  for (int code = 0; code < patterns; ++code) {
    std::vector<int> state(n);
    int c = code;
    for (int i = 0; i < n; ++i) {
      state[i] = c % 5;
      c /= 5;
    }
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    std::vector<int> free;
    std::vector<double> sign;
    for (int i = 0; i < n; ++i) {
      if (state[i] == 0) b(i) = -C;
      if (state[i] == 4) b(i) = C;
      if (state[i] == 1 || state[i] == 3) {
        free.push_back(i);
        sign.push_back(state[i] == 1 ? -1.0 : 1.0);
      }
    }
    const int f = static_cast<int>(free.size());
    if (f == 0) {
      if (std::abs(b.sum()) > 1e-12) continue;
    } else {
      Eigen::MatrixXd A = Eigen::MatrixXd::Zero(f + 1, f + 1);
      Eigen::VectorXd rhs(f + 1);
      const Eigen::VectorXd Kb = K * b;
      for (int a = 0; a < f; ++a) {
        for (int d = 0; d < f; ++d) A(a, d) = K(free[a], free[d]);
        A(a, f) = 1.0;
        A(f, a) = 1.0;
        rhs(a) = z(free[a]) - eps * sign[a] - Kb(free[a]);
      }
      rhs(f) = -b.sum();
      const Eigen::VectorXd sol = A.fullPivLu().solve(rhs);
      bool ok = (A * sol - rhs).norm() < 1e-9;
      for (int a = 0; a < f && ok; ++a) {
        const double v = sol(a);
        if (v * sign[a] < 0.0 || std::abs(v) > C) ok = false;
        b(free[a]) = v;
      }
      if (!ok) continue;
    }
    best = std::min(best, dual_objective(K, z, eps, b));
  }
  return best;
}

Eigen::MatrixXd rbf(const Eigen::MatrixXd& X, double gamma) {
  const Eigen::Index n = X.rows();
  Eigen::MatrixXd K(n, n);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b < n; ++b) K(a, b) = std::exp(-gamma * (X.row(a) - X.row(b)).squaredNorm());
  return K;
}

}  // namespace

TEST_CASE("constant target needs no support vectors") {
  Rng rng(1);
  Eigen::MatrixXd X(30, 2);
  for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = rng.normal();
  for (double eps : {0.0, 0.1}) {
    const auto m = fit_support_vector(X, Eigen::VectorXd::Constant(30, 7.5), svr({{"epsilon", eps}}));
    const auto* s = m.state_as<SupportVectorState>();
    CHECK(s->n_support() == 0);
    CHECK((m.predict(X).array() - 7.5).abs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("symmetric pair has zero bias") {
  Eigen::MatrixXd X(2, 1);
  X << -1, 1;
  Eigen::VectorXd y(2);
  y << -2, 2;
  const auto m = fit_support_vector(X, y, svr({{"epsilon", 0.5}, {"C", 10}}));
  CHECK(std::abs(m.state_as<SupportVectorState>()->bias()) < 1e-9);
}

TEST_CASE("five-point duals match the enumerated optimum") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    Rng rng(seed);
    Eigen::MatrixXd X(5, 2);
    Eigen::VectorXd z(5);
    for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = rng.normal();
    for (int i = 0; i < 5; ++i) z(i) = 2.0 * rng.normal();
    const double eps = 0.2, C = seed % 2 ? 1.0 : 100.0;
    const Eigen::MatrixXd K = rbf(X, 0.5);
    const auto sol = solve_svr_dual(
        5, [&](Eigen::Index i, double* out) { for (int j = 0; j < 5; ++j) out[j] = K(i, j); }, z, eps, C,
        1e-3, 100000, 1.0);
    const double oracle = brute_force_dual(K, z, eps, C);
    CHECK(sol.diagnostics.converged);
    CHECK(std::abs(sol.diagnostics.objective - oracle) < 1e-4);
    CHECK(std::abs(dual_objective(K, z, eps, sol.beta) - sol.diagnostics.objective) < 1e-9);
    CHECK(std::abs(sol.beta.sum()) < 1e-12);
    CHECK((sol.beta.array().abs() <= C + 1e-12).all());
  }
}

TEST_CASE("KKT gap at convergence is within tolerance") {
  Rng rng(9);
  Eigen::MatrixXd X(150, 2);
  Eigen::VectorXd y(150);
  for (int i = 0; i < 150; ++i) {
    X(i, 0) = rng.uniform(-2, 2);
    X(i, 1) = rng.uniform(-2, 2);
    y(i) = std::sin(X(i, 0)) + X(i, 1) + 0.1 * rng.normal();
  }
  for (double tol : {1e-3, 1e-6}) {
    const auto m = fit_support_vector(X, y, svr({{"tol", tol}, {"C", 10}}));
    const auto& d = m.state_as<SupportVectorState>()->diagnostics();
    CHECK(d.converged);
    CHECK(d.kkt_gap <= tol);
    CHECK(m.warnings().empty());
  }
}

TEST_CASE("iteration cap is reported") {
  Rng rng(10);
  Eigen::MatrixXd X(100, 1);
  Eigen::VectorXd y(100);
  for (int i = 0; i < 100; ++i) {
    X(i, 0) = rng.uniform(-2, 2);
    y(i) = rng.normal();
  }
  const auto m = fit_support_vector(X, y, svr({{"max_iter", 3}, {"C", 100}}));
  CHECK_FALSE(m.state_as<SupportVectorState>()->diagnostics().converged);
  REQUIRE_FALSE(m.warnings().empty());
  CHECK(m.warnings()[0].rfind("NoConvergence", 0) == 0);
}

TEST_CASE("kernel cache size does not change the answer") {
  Rng rng(11);
  Eigen::MatrixXd X(700, 2);
  Eigen::VectorXd y(700);
  for (int i = 0; i < 700; ++i) {
    X(i, 0) = rng.uniform(-2, 2);
    X(i, 1) = rng.uniform(-2, 2);
    y(i) = X(i, 0) * X(i, 1) + 0.1 * rng.normal();
  }
  // 1 MB holds about 190 rows of 700, so the small cache evicts.
  const auto big = fit_support_vector(X, y, svr({{"cache_mb", 100}}));
  const auto small = fit_support_vector(X, y, svr({{"cache_mb", 1}}));
  CHECK(big.predict(X) == small.predict(X));
}
