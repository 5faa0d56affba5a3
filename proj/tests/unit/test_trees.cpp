#include <doctest.h>

#include <cmath>

#include "wqst/models/tree.hpp"
#include "wqst/random.hpp"

using namespace wqst;

namespace {

struct Data {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
};

Data smooth_data(int n, std::uint64_t seed, double noise = 0.3) {
  Rng rng(seed);
  Data d{Eigen::MatrixXd(n, 3), Eigen::VectorXd(n)};
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < 3; ++j) d.X(i, j) = rng.uniform(-2, 2);
    d.y(i) = std::sin(d.X(i, 0)) + 0.5 * d.X(i, 1) * d.X(i, 1) + noise * rng.normal();
  }
  return d;
}

ModelSpec gb_spec(Hyperparameters hp, std::uint64_t seed = 0) {
  return {ModelKind::GRADIENT_BOOSTING, std::move(hp), seed};
}

ModelSpec rf_spec(Hyperparameters hp, std::uint64_t seed = 0) {
  return {ModelKind::RANDOM_FOREST, std::move(hp), seed};
}

}  // namespace

TEST_CASE("binning codes agree with thresholds") {
  const auto d = smooth_data(500, 1);
  for (std::size_t max_bins : {8u, 256u, 1000u}) {
    const auto bins = FeatureBins::fit(d.X, max_bins);
    const auto codes = bins.encode(d.X);
    for (std::size_t f = 0; f < 3; ++f) {
      CHECK(bins.bins(f) <= max_bins);
      for (std::size_t b = 0; b < bins.bins(f); ++b) {
        for (Eigen::Index i = 0; i < d.X.rows(); ++i) {
          const bool left_code = codes[f * 500 + static_cast<std::size_t>(i)] <= b;
          const bool left_value = d.X(i, static_cast<Eigen::Index>(f)) <= bins.edges[f][b];
          CHECK(left_code == left_value);
        }
      }
    }
  }
}

TEST_CASE("single full tree memorizes") {
  const auto d = smooth_data(200, 2);
  const auto m = fit_random_forest(d.X, d.y,
                                   rf_spec({{"n_trees", 1}, {"bootstrap", 0}, {"max_depth", -1},
                                            {"min_samples_leaf", 1}, {"max_features", 3}}));
  const auto pred = m.predict(d.X);
  for (int i = 0; i < 200; ++i) CHECK(pred(i) == d.y(i));
}

TEST_CASE("constant target gives the constant") {
  const auto d = smooth_data(100, 3);
  const Eigen::VectorXd c = Eigen::VectorXd::Constant(100, 2.75);
  const auto rf = fit_random_forest(d.X, c, rf_spec({{"n_trees", 20}}));
  const auto gb = fit_gradient_boosting(d.X, c, gb_spec({{"n_rounds", 20}}));
  const auto grid = smooth_data(50, 4).X;
  CHECK((rf.predict(grid).array() == 2.75).all());
  CHECK((gb.predict(grid).array() == 2.75).all());
  for (const auto& t : rf.state_as<RandomForestState>()->trees()) CHECK(t.nodes().size() == 1);
}

TEST_CASE("forest variance shrinks with more trees") {
  const auto d = smooth_data(300, 5, 1.0);
  const auto q = smooth_data(40, 6).X;
  auto spread = [&](double trees) {
    std::vector<Eigen::VectorXd> preds;
    for (std::uint64_t s = 0; s < 8; ++s)
      preds.push_back(fit_random_forest(d.X, d.y, rf_spec({{"n_trees", trees}}, 100 + s)).predict(q));
    double total = 0;
    for (Eigen::Index i = 0; i < q.rows(); ++i) {
      double m = 0, v = 0;
      for (const auto& p : preds) m += p(i);
      m /= 8.0;
      for (const auto& p : preds) v += (p(i) - m) * (p(i) - m);
      total += v / 7.0;
    }
    return total / static_cast<double>(q.rows());
  };
  const double v10 = spread(10), v300 = spread(300);
  CHECK(v300 < v10);
  CHECK(v300 < 0.2 * v10);
}

TEST_CASE("boosting two-point exact fit") {
  Eigen::MatrixXd X(2, 1);
  X << 0, 1;
  Eigen::VectorXd y(2);
  y << 0, 10;
  const auto m = fit_gradient_boosting(
      X, y,
      gb_spec({{"n_rounds", 1}, {"learning_rate", 1}, {"max_depth", 1}, {"lambda", 0},
               {"subsample", 1}, {"colsample", 1}, {"min_samples_leaf", 1}}));
  const auto* s = m.state_as<GradientBoostingState>();
  CHECK(s->initial_prediction() == 5.0);
  const auto pred = m.predict(X);
  CHECK(pred(0) == 0.0);
  CHECK(pred(1) == 10.0);
}

TEST_CASE("boosting constant target stays exact") {
  Eigen::MatrixXd X(10, 1);
  for (int i = 0; i < 10; ++i) X(i, 0) = i;
  const auto m = fit_gradient_boosting(
      X, Eigen::VectorXd::Constant(10, 4.0),
      gb_spec({{"n_rounds", 5}, {"learning_rate", 0.5}, {"lambda", 0}, {"subsample", 1}}));
  for (double v : m.state_as<GradientBoostingState>()->training_rmse()) CHECK(v == 0.0);
  CHECK((m.predict(X).array() == 4.0).all());
}

TEST_CASE("boosting training loss never increases with full rows") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto d = smooth_data(400, seed);
    const auto m = fit_gradient_boosting(d.X, d.y, gb_spec({{"n_rounds", 60}, {"subsample", 1}}, seed));
    const auto& loss = m.state_as<GradientBoostingState>()->training_rmse();
    REQUIRE(loss.size() == 61);
    for (std::size_t k = 1; k < loss.size(); ++k) CHECK(loss[k] <= loss[k - 1]);
    CHECK(loss.back() < loss.front());
    CHECK(loss.back() == doctest::Approx(m.summary().in_sample_rmse).epsilon(1e-9));
  }
}

TEST_CASE("tree models ignore positive column scaling") {
  const auto d = smooth_data(300, 9);
  for (double c : {4.0, 1000.0, 0.01}) {
    Eigen::MatrixXd Xs = d.X;
    Xs.col(1) *= c;
    const auto q = smooth_data(60, 10).X;
    Eigen::MatrixXd qs = q;
    qs.col(1) *= c;
    const auto rf = fit_random_forest(d.X, d.y, rf_spec({{"n_trees", 25}}, 3));
    const auto rfs = fit_random_forest(Xs, d.y, rf_spec({{"n_trees", 25}}, 3));
    CHECK(rf.predict(d.X) == rfs.predict(Xs));
    CHECK(rf.predict(q) == rfs.predict(qs));
    const auto gb = fit_gradient_boosting(d.X, d.y, gb_spec({{"n_rounds", 40}}, 3));
    const auto gbs = fit_gradient_boosting(Xs, d.y, gb_spec({{"n_rounds", 40}}, 3));
    CHECK(gb.predict(d.X) == gbs.predict(Xs));
    CHECK(gb.predict(q) == gbs.predict(qs));
  }
}

TEST_CASE("split gain is attributed to the informative feature") {
  Rng rng(12);
  Eigen::MatrixXd X(500, 3);
  Eigen::VectorXd y(500);
  for (int i = 0; i < 500; ++i) {
    for (int j = 0; j < 2; ++j) X(i, j) = rng.uniform(0, 1);
    X(i, 2) = static_cast<double>(rng.uniform_index(10)) / 10.0;
    y(i) = X(i, 2) > 0.5 ? 10.0 : 0.0;
  }
  const auto m = fit_gradient_boosting(X, y, gb_spec({{"n_rounds", 30}, {"colsample", 1}, {"subsample", 1}}));
  const auto g = m.state_as<GradientBoostingState>()->gain_per_feature();
  CHECK(g[2] > 0.0);
  CHECK(g[0] == 0.0);
  CHECK(g[1] == 0.0);
}

TEST_CASE("depth and leaf size limits hold") {
  const auto d = smooth_data(300, 13);
  const auto m = fit_random_forest(d.X, d.y, rf_spec({{"n_trees", 5}, {"max_depth", 3}, {"min_samples_leaf", 10}}));
  for (const auto& t : m.state_as<RandomForestState>()->trees()) {
    std::vector<int> depth(t.nodes().size(), 0);
    for (std::size_t k = 0; k < t.nodes().size(); ++k) {
      const auto& nd = t.nodes()[k];
      if (nd.feature >= 0) {
        depth[static_cast<std::size_t>(nd.left)] = depth[k] + 1;
        depth[static_cast<std::size_t>(nd.right)] = depth[k] + 1;
      }
    }
    CHECK(*std::max_element(depth.begin(), depth.end()) <= 3);
  }
}
