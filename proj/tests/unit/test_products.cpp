#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "wqst/error.hpp"
#include "wqst/models/tree.hpp"
#include "wqst/preprocess.hpp"
#include "wqst/products.hpp"
#include "wqst/random.hpp"
#include "wqst/synth.hpp"

using namespace wqst;

namespace {

const FeatureSchema kSt = regime_schema({RegimeKind::SPATIO_TEMPORAL, Indicator::WATER_TEMPERATURE,
                                         ClimateEncoding::MAJOR});

// Spatio-temporal rows with y = 35 - 0.7 lat + small noise.
struct Data {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
};

Data wt_data(int n, std::uint64_t seed, double noise = 0.05) {
  Rng rng(seed);
  Data d{Eigen::MatrixXd(n, 4), Eigen::VectorXd(n)};
  for (int i = 0; i < n; ++i) {
    d.X.row(i) = spatio_temporal_row(1 + static_cast<int>(rng.uniform_index(12)),
                                     1960 + static_cast<int>(rng.uniform_index(60)),
                                     rng.uniform(32.5, 42.0), rng.uniform(-124.4, -114.2));
    d.y(i) = 35.0 - 0.7 * d.X(i, 2) + noise * rng.normal();
  }
  return d;
}

TrainedModel linear_wt() {
  const auto d = wt_data(300, 1);
  return fit(ModelSpec{ModelKind::LINEAR, {}, 0}, d.X, d.y, kSt);
}

}  // namespace

TEST_CASE("one-cell grid equals predict at the centre") {
  const auto m = linear_wt();
  const BoundingBox bbox{37.0, 37.1, -122.0, -121.9};
  const auto g = interpolate_grid(m, bbox, 0.1, 7, 2023, nullptr);
  REQUIRE(g.rows() == 1);
  REQUIRE(g.cols() == 1);
  const auto want = m.predict(Eigen::MatrixXd(spatio_temporal_row(7, 2023, 37.05, -121.95)));
  CHECK(g.value(0, 0) == want(0));
}

TEST_CASE("grid dimensions follow the extent") {
  const auto m = linear_wt();
  const BoundingBox ca{32.53, 32.53 + 9.47, -124.41, -124.41 + 10.3};
  const auto g = interpolate_grid(m, ca, 0.1, 7, 2023, nullptr);
  CHECK(g.cols() == 103);
  CHECK(g.rows() == 95);
}

TEST_CASE("grid values are exactly the model predictions") {
  const auto d = wt_data(400, 2, 0.5);
  const auto m = fit(ModelSpec{ModelKind::GRADIENT_BOOSTING, {{"n_rounds", 20}}, 0}, d.X, d.y, kSt);
  const BoundingBox bbox{34.0, 36.0, -120.0, -118.0};
  const auto g = interpolate_grid(m, bbox, 0.25, 3, 2000, nullptr);
  for (std::size_t r = 0; r < g.rows(); ++r) {
    for (std::size_t c = 0; c < g.cols(); ++c) {
      const auto centre = g.grid.cell_center(r, c);
      const auto p = m.predict(Eigen::MatrixXd(spatio_temporal_row(3, 2000, centre.lat, centre.lon)));
      CHECK(g.value(r, c) == p(0));
    }
  }
}

TEST_CASE("mask, empty mask and regime checks") {
  const auto m = linear_wt();
  const BoundingBox bbox{34.0, 35.0, -120.0, -119.0};
  const geo::Polygon tri({{34.0, -120.0}, {35.0, -120.0}, {34.0, -119.0}});
  const auto g = interpolate_grid(m, bbox, 0.1, 1, 2000, &tri);
  std::size_t inside = 0;
  for (std::size_t r = 0; r < g.rows(); ++r)
    for (std::size_t c = 0; c < g.cols(); ++c) {
      CHECK(g.in_mask(r, c) == tri.contains(g.grid.cell_center(r, c)));
      inside += g.in_mask(r, c);
    }
  CHECK(inside > 0);
  CHECK(inside < 100);

  const geo::Polygon far({{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}});
  try {
    (void)interpolate_grid(m, bbox, 0.1, 1, 2000, &far);
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyMask);
  }

  Eigen::MatrixXd X = Eigen::MatrixXd::Random(20, 5);
  const auto other = fit(ModelSpec{ModelKind::LINEAR, {}, 0}, X, Eigen::VectorXd::Random(20), FeatureSchema::numeric(5));
  try {
    (void)interpolate_grid(other, bbox, 0.1, 1, 2000, nullptr);
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::RegimeMismatch);
  }
}

TEST_CASE("forecast lengths and residual bands") {
  auto m = linear_wt();
  m.set_cv_rmse(0.5);
  ForecastOptions opt;
  const auto s = forecast_point(m, {37.7749, -122.4194}, opt);
  REQUIRE(s.rows.size() == 1152);
  CHECK(s.rows.front().year == 1975);
  CHECK(s.rows.front().month == 1);
  CHECK(s.rows.back().year == 2070);
  CHECK(s.rows.back().month == 12);
  for (const auto& r : s.rows) {
    CHECK(r.lo <= r.prediction);
    CHECK(r.prediction <= r.hi);
    CHECK(r.hi - r.lo == doctest::Approx(2 * 1.96 * 0.5).epsilon(1e-12));
    CHECK(std::isnan(r.statewide_mean));
  }
  opt.start_year = opt.end_year = 2023;
  CHECK(forecast_point(m, {37.7749, -122.4194}, opt).rows.size() == 12);
}

TEST_CASE("bootstrap bands contain the prediction and are reproducible") {
  const auto d = wt_data(200, 3, 1.0);
  const auto m = fit(ModelSpec{ModelKind::GRADIENT_BOOSTING, {{"n_rounds", 15}}, 4}, d.X, d.y, kSt);
  ForecastOptions opt;
  opt.start_year = 2000;
  opt.end_year = 2001;
  opt.band = BandMethod::BOOTSTRAP;
  opt.bootstrap_samples = 10;
  opt.train_X = &d.X;
  opt.train_y = &d.y;
  opt.stations = {{36.0, -120.0}, {38.0, -121.0}};
  opt.seed = 9;
  const auto a = forecast_point(m, {37.0, -121.0}, opt);
  const auto b = forecast_point(m, {37.0, -121.0}, opt);
  REQUIRE(a.rows.size() == 24);
  std::ostringstream sa, sb;
  a.write_csv(sa);
  b.write_csv(sb);
  CHECK(sa.str() == sb.str());
  for (const auto& r : a.rows) {
    CHECK(r.lo <= r.prediction);
    CHECK(r.prediction <= r.hi);
    CHECK(std::isfinite(r.statewide_mean));
  }
}

TEST_CASE("percentile is the linear-interpolation definition") {
  CHECK(percentile({1, 2, 3, 4}, 0.5) == 2.5);
  CHECK(percentile({4, 1, 3, 2}, 0.0) == 1.0);
  CHECK(percentile({4, 1, 3, 2}, 1.0) == 4.0);
  CHECK(percentile({10, 20}, 0.25) == 12.5);
  // h = (n - 1) q = 0.975 * 9 = 8.775 on 1..10.
  std::vector<double> v{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  CHECK(percentile(v, 0.975) == doctest::Approx(9.775).epsilon(1e-12));
}

TEST_CASE("gain importance") {
  Rng rng(5);
  Eigen::MatrixXd X(500, 4);
  Eigen::VectorXd y(500);
  for (int i = 0; i < 500; ++i) {
    X.row(i) = spatio_temporal_row(1 + static_cast<int>(rng.uniform_index(12)), 1980 + static_cast<int>(rng.uniform_index(40)),
                                   rng.uniform(33, 41), rng.uniform(-123, -115));
    y(i) = std::tanh(X(i, 2) - 37.0);
  }
  for (ModelKind kind : {ModelKind::RANDOM_FOREST, ModelKind::GRADIENT_BOOSTING}) {
    ModelSpec spec{kind, {}, 1};
    if (kind == ModelKind::RANDOM_FOREST) spec.hyperparameters = {{"n_trees", 30}, {"max_features", 4}};
    else spec.hyperparameters = {{"n_rounds", 40}, {"colsample", 1}};
    const auto m = fit(spec, X, y, kSt);
    const auto rep = importance_gain(m);
    REQUIRE(rep.entries.size() == 4);
    CHECK(rep.find("Latitude")->importance > 0.9);
    CHECK(std::abs(rep.total() - 1.0) <= 1e-9);
    for (const auto& e : rep.entries) CHECK(e.importance >= 0.0);
  }
  const auto lm = fit(ModelSpec{ModelKind::LINEAR, {}, 0}, X, y, kSt);
  CHECK_THROWS_AS(importance_gain(lm), Error);
}

TEST_CASE("unused features get zero gain") {
  Rng rng(6);
  Eigen::MatrixXd X(300, 4);
  Eigen::VectorXd y(300);
  for (int i = 0; i < 300; ++i) {
    for (int j = 0; j < 4; ++j) X(i, j) = rng.uniform(0, 1);
    y(i) = X(i, 1) > 0.5 ? 1.0 : 0.0;
  }
  const auto m = fit(ModelSpec{ModelKind::GRADIENT_BOOSTING, {{"n_rounds", 5}, {"colsample", 1}}, 0}, X, y, kSt);
  const auto rep = importance_gain(m);
  CHECK(rep.entries[1].importance == 1.0);
  CHECK(rep.entries[0].importance == 0.0);
}

TEST_CASE("variable-dependent reports list nine variables and keep the mass") {
  synth::SynthSpec spec;
  spec.n_stations = 80;
  spec.samples_per_station = 10;
  const auto ds = synth::generate(spec);
  const FeatureRegime vd{RegimeKind::VARIABLE_DEPENDENT, Indicator::PH, ClimateEncoding::MAJOR};
  const auto dm = assemble(ds.records, vd);
  const auto m = fit(ModelSpec{ModelKind::RANDOM_FOREST, {{"n_trees", 20}}, 2}, dm);
  const auto rep = importance_gain(m);
  std::vector<std::string> names;
  for (const auto& e : rep.entries) names.push_back(e.feature);
  CHECK(names == std::vector<std::string>{"Month", "Year", "Latitude", "Longitude", "Dissolved Oxygen",
                                          "Specific Conductance", "Water Temperature", "Climate Zone",
                                          "Geographical Type"});
  const auto raw = m.state_as<RandomForestState>()->gain_per_feature();
  double total = 0;
  for (double g : raw) total += g;
  double climate = 0;
  for (std::size_t c = 7; c < 10; ++c) climate += raw[c];
  CHECK(rep.find("Climate Zone")->importance == doctest::Approx(climate / total).epsilon(1e-12));
  CHECK(std::abs(rep.total() - 1.0) <= 1e-9);

  const auto perm = importance_permutation(m, dm.X, dm.y, 3, 2);
  CHECK(perm.entries.size() == 9);
  CHECK(std::abs(perm.total() - 1.0) <= 1e-9);
}

TEST_CASE("permutation importance") {
  Rng rng(7);
  Eigen::MatrixXd X(400, 4);
  Eigen::VectorXd y(400);
  for (int i = 0; i < 400; ++i) {
    for (int j = 0; j < 4; ++j) X(i, j) = rng.uniform(-1, 1);
    y(i) = 3.0 * X(i, 2);
  }
  const auto m = fit(ModelSpec{ModelKind::LINEAR, {}, 0}, X, y, kSt);
  const auto a = importance_permutation(m, X, y, 11);
  const auto b = importance_permutation(m, X, y, 11);
  CHECK(a.entries[2].importance >= 0.95);
  CHECK(std::abs(a.total() - 1.0) <= 1e-9);
  for (std::size_t k = 0; k < 4; ++k) CHECK(a.entries[k].importance == b.entries[k].importance);

  const auto flat = fit(ModelSpec{ModelKind::LINEAR, {}, 0}, X, Eigen::VectorXd::Constant(400, 2.0), kSt);
  const auto z = importance_permutation(flat, X, Eigen::VectorXd::Constant(400, 2.0), 11);
  for (const auto& e : z.entries) CHECK(e.importance == 0.0);

  CHECK_THROWS_AS(importance_permutation(m, Eigen::MatrixXd::Zero(3, 2), Eigen::VectorXd::Zero(3), 1), Error);
}
