#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "wqst/error.hpp"
#include "wqst/preprocess.hpp"
#include "wqst/random.hpp"

using namespace wqst;

namespace {

SampleRecord table_row() {
  SampleRecord r;
  r.station_id = 1;
  r.latitude = 37.8019;
  r.longitude = -121.6203;
  r.county = "Alameda";
  r.year = 1975;
  r.month = 1;
  r.ph = 6.9;
  r.dissolved_oxygen = 11.1;
  r.specific_conductance = 415.0;
  r.water_temperature = 8.9;
  r.climate_zone = KoppenSub::BSk;
  r.geographical_type = GeoType::Inland;
  return r;
}

std::vector<SampleRecord> gaussian_records(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<SampleRecord> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i].station_id = static_cast<std::int64_t>(i + 1);
    for (Indicator ind : kAllIndicators) out[i].set_value(ind, rng.normal());
  }
  return out;
}

}  // namespace

TEST_CASE("constant indicators remove nothing") {
  std::vector<SampleRecord> recs(50, table_row());
  auto res = filter_outliers(recs);
  CHECK(res.kept.size() == 50);
  CHECK(res.removed.empty());
}

TEST_CASE("gaussian removal rates") {
  const auto recs = gaussian_records(100000, 2024);
  auto res = filter_outliers(recs);
  for (std::size_t k = 0; k < 4; ++k) {
    const auto& b = res.bounds[k];
    CHECK(b.hi() - b.mean == b.mean - b.lo());
    std::size_t out = 0;
    for (const auto& r : recs)
      if (!b.keeps(r.value(kAllIndicators[k]))) ++out;
    CHECK(std::abs(static_cast<double>(out) / 1e5 - 0.05) <= 0.003);
  }
  const double overall = static_cast<double>(res.removed.size()) / 1e5;
  CHECK(std::abs(overall - (1 - std::pow(0.95, 4))) <= 0.008);
  CHECK(res.kept.size() + res.removed.size() == recs.size());
}

TEST_CASE("bounds match an independent mean and sd") {
  const auto recs = gaussian_records(1000, 9);
  auto res = filter_outliers(recs);
  for (std::size_t k = 0; k < 4; ++k) {
    double m = 0;
    for (const auto& r : recs) m += r.value(kAllIndicators[k]);
    m /= 1000.0;
    double ss = 0;
    for (const auto& r : recs) ss += std::pow(r.value(kAllIndicators[k]) - m, 2);
    const double sd = std::sqrt(ss / 999.0);
    CHECK(res.bounds[k].mean == doctest::Approx(m).epsilon(1e-12));
    CHECK(res.bounds[k].half_width == doctest::Approx(1.96 * sd).epsilon(1e-12));
  }
}

TEST_CASE("a thousand-degree temperature is removed") {
  Rng rng(1);
  std::vector<SampleRecord> recs(500, table_row());
  for (auto& r : recs) r.water_temperature = 15.0 + 5.0 * rng.normal();
  recs[250].water_temperature = 1000.0;
  auto res = filter_outliers(recs);
  CHECK(std::any_of(res.removed.begin(), res.removed.end(),
                    [](const SampleRecord& r) { return r.water_temperature == 1000.0; }));
}

TEST_CASE("split sizes") {
  auto [tr, te] = split_indices(64185, 0.8, 42);
  CHECK(tr.size() == 51348);
  CHECK(te.size() == 12837);
  auto [a, b] = split_indices(10, 0.8, 1);
  CHECK(a.size() == 8);
  CHECK(b.size() == 2);
}

TEST_CASE("split is a seeded partition") {
  const auto recs = gaussian_records(1000, 4);
  auto s1 = split(recs, 0.8, 7);
  auto s2 = split(recs, 0.8, 7);
  auto s3 = split(recs, 0.8, 8);
  CHECK(s1.train == s2.train);
  CHECK(s1.test == s2.test);
  CHECK(s1.train != s3.train);
  std::vector<std::int64_t> ids;
  for (const auto& r : s1.train) ids.push_back(r.station_id);
  for (const auto& r : s1.test) ids.push_back(r.station_id);
  std::sort(ids.begin(), ids.end());
  for (std::size_t i = 0; i < ids.size(); ++i) CHECK(ids[i] == static_cast<std::int64_t>(i + 1));
  CHECK(std::is_sorted(s1.train.begin(), s1.train.end(),
                       [](const auto& x, const auto& y) { return x.station_id < y.station_id; }));
}

TEST_CASE("spatio-temporal row") {
  auto dm = assemble({table_row()}, {RegimeKind::SPATIO_TEMPORAL, Indicator::PH, ClimateEncoding::MAJOR});
  REQUIRE(dm.X.cols() == 4);
  Eigen::RowVectorXd want(4);
  want << 1, 1975, 37.8019, -121.6203;
  CHECK(dm.X.row(0) == want);
  CHECK(dm.y(0) == 6.9);
  CHECK(dm.column_names() == std::vector<std::string>{"month", "year", "latitude", "longitude"});
  CHECK(spatio_temporal_row(1, 1975, 37.8019, -121.6203) == want);
}

TEST_CASE("variable-dependent row") {
  auto dm = assemble({table_row()}, {RegimeKind::VARIABLE_DEPENDENT, Indicator::PH, ClimateEncoding::MAJOR});
  REQUIRE(dm.X.cols() == 12);
  Eigen::RowVectorXd want(12);
  want << 1, 1975, 37.8019, -121.6203, 11.1, 415.0, 8.9, 1, 0, 0, 1, 0;
  CHECK(dm.X.row(0) == want);
  CHECK(dm.schema.groups.size() == 2);
}

TEST_CASE("column counts and one-hot sums for every regime") {
  Rng rng(2);
  std::vector<SampleRecord> recs;
  for (int i = 0; i < 40; ++i) {
    auto r = table_row();
    r.climate_zone = kAllKoppenSubs[rng.uniform_index(9)];
    r.geographical_type = rng.uniform_index(2) ? GeoType::Coastal : GeoType::Inland;
    recs.push_back(r);
  }
  for (RegimeKind kind : {RegimeKind::SPATIO_TEMPORAL, RegimeKind::VARIABLE_DEPENDENT}) {
    for (ClimateEncoding enc : {ClimateEncoding::MAJOR, ClimateEncoding::SUB, ClimateEncoding::NONE}) {
      for (Indicator t : kAllIndicators) {
        const FeatureRegime regime{kind, t, enc};
        const auto dm = assemble(recs, regime);
        std::size_t want = 4;
        if (kind == RegimeKind::VARIABLE_DEPENDENT)
          want += 3 + 2 + (enc == ClimateEncoding::MAJOR ? 3 : enc == ClimateEncoding::SUB ? 9 : 0);
        CHECK(static_cast<std::size_t>(dm.X.cols()) == want);
        CHECK(dm.schema == regime_schema(regime));
        for (const auto& g : dm.schema.groups) {
          for (Eigen::Index i = 0; i < dm.X.rows(); ++i) {
            double s = 0;
            for (std::size_t c = 0; c < g.size(); ++c) s += dm.X(i, static_cast<Eigen::Index>(g.first_column + c));
            CHECK(s == 1.0);
          }
        }
      }
    }
  }
}

TEST_CASE("assembly errors") {
  const FeatureRegime vd{RegimeKind::VARIABLE_DEPENDENT, Indicator::PH, ClimateEncoding::MAJOR};
  CHECK_THROWS_AS(assemble({}, vd), Error);
  auto r = table_row();
  r.climate_zone.reset();
  try {
    (void)assemble({r}, vd);
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnenrichedRecord);
  }
}
