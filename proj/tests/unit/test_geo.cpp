#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "wqst/error.hpp"
#include "wqst/geo.hpp"
#include "wqst/random.hpp"

using namespace wqst;

namespace {

// Central angle from the spherical law of cosines, in km.
double cosine_law_km(LatLon a, LatLon b) {
  const double d2r = std::numbers::pi / 180.0;
  const double c = std::sin(a.lat * d2r) * std::sin(b.lat * d2r) +
                   std::cos(a.lat * d2r) * std::cos(b.lat * d2r) * std::cos((b.lon - a.lon) * d2r);
  return geo::kEarthRadiusKm * std::acos(std::clamp(c, -1.0, 1.0));
}

geo::ClimateRaster diagonal_raster() {
  geo::AsciiGrid g;
  g.ncols = 3;
  g.nrows = 3;
  g.xll = -122.0;
  g.yll = 36.0;
  g.cellsize = 1.0;
  for (int i = 1; i <= 9; ++i) g.cells.push_back(i);
  std::map<int, std::string> legend;
  for (int i = 1; i <= 9; ++i) legend[i] = std::string(koppen_code(kAllKoppenSubs[i - 1]));
  return geo::ClimateRaster(g, legend);
}

}  // namespace

TEST_CASE("haversine examples") {
  const LatLon sf{37.7749, -122.4194}, la{34.0522, -118.2437};
  CHECK(geo::haversine_km(sf, sf) == 0.0);
  const double equator = geo::kEarthRadiusKm * std::numbers::pi / 180.0;
  CHECK(geo::haversine_km({0, 0}, {0, 1}) == doctest::Approx(equator).epsilon(1e-12));
  CHECK(equator == doctest::Approx(111.1951).epsilon(1e-6));
  CHECK(geo::haversine_km(sf, la) == doctest::Approx(cosine_law_km(sf, la)).epsilon(1e-9));
  CHECK(std::abs(geo::haversine_km(sf, la) - 559.1) < 1.0);
}

TEST_CASE("haversine symmetry and triangle inequality") {
  Rng rng(5);
  for (int i = 0; i < 500; ++i) {
    LatLon a{rng.uniform(-80, 80), rng.uniform(-180, 180)};
    LatLon b{rng.uniform(-80, 80), rng.uniform(-180, 180)};
    LatLon c{rng.uniform(-80, 80), rng.uniform(-180, 180)};
    CHECK(geo::haversine_km(a, b) == geo::haversine_km(b, a));
    CHECK(geo::haversine_km(a, c) <= geo::haversine_km(a, b) + geo::haversine_km(b, c) + 1e-9);
  }
}

TEST_CASE("distance to coast") {
  geo::Coastline meridian({{36.0, -122.0}, {38.0, -122.0}});
  CHECK(geo::distance_to_coast_km({36.0, -122.0}, meridian) == 0.0);
  const double east = geo::distance_to_coast_km({37.0, -121.0}, meridian);
  CHECK(std::abs(east - std::cos(37.0 * std::numbers::pi / 180.0) * 111.1951) < 0.1);

  geo::Coastline bent({{36.0, -122.0}, {36.5, -121.8}, {37.0, -122.1}});
  const LatLon far{40.0, -115.0};
  double brute = 1e300;
  for (const auto& v : bent.densified()) brute = std::min(brute, geo::haversine_km(far, v));
  CHECK(geo::distance_to_coast_km(far, bent) == brute);
  CHECK(std::abs(brute - geo::haversine_km(far, {37.0, -122.1})) < 1e-9);
}

TEST_CASE("densified spacing is at most 1 km") {
  geo::Coastline c({{36.0, -122.0}, {36.5, -121.8}, {37.0, -122.1}});
  for (std::size_t i = 1; i < c.densified().size(); ++i)
    CHECK(geo::haversine_km(c.densified()[i - 1], c.densified()[i]) <= 1.0 + 1e-9);
  CHECK(c.densified().front() == c.vertices().front());
  CHECK(c.densified().back() == c.vertices().back());
}

TEST_CASE("invalid coastlines") {
  CHECK_THROWS_AS(geo::Coastline({{36.0, -122.0}}), Error);
  CHECK_THROWS_AS(geo::Coastline({{36.0, -122.0}, {36.0, -122.0}}), Error);
}

TEST_CASE("eight kilometre rule") {
  CHECK(geo::classify_distance(7.9) == GeoType::Coastal);
  CHECK(geo::classify_distance(8.0) == GeoType::Coastal);
  CHECK(geo::classify_distance(8.1) == GeoType::Inland);
}

TEST_CASE("moving away from the coast never turns a point coastal") {
  geo::Coastline meridian({{36.0, -122.0}, {38.0, -122.0}});
  GeoType prev = GeoType::Coastal;
  for (int i = 0; i <= 200; ++i) {
    const GeoType g = geo::classify_geotype({37.0, -122.0 + 0.001 * i}, meridian);
    if (prev == GeoType::Inland) CHECK(g == GeoType::Inland);
    prev = g;
  }
  CHECK(prev == GeoType::Inland);
}

TEST_CASE("3x3 raster lookups") {
  const auto raster = diagonal_raster();
  for (std::size_t row = 0; row < 3; ++row) {
    for (std::size_t col = 0; col < 3; ++col) {
      const auto c = raster.grid().cell_center(row, col);
      const KoppenSub want = kAllKoppenSubs[row * 3 + col];
      CHECK(geo::lookup_climate(c, raster).sub == want);
      // Same cell, different point.
      CHECK(geo::lookup_climate({c.lat + 0.3, c.lon - 0.4}, raster).sub == want);
    }
  }
}

TEST_CASE("NODATA fringe falls back to the nearest class") {
  geo::AsciiGrid g;
  g.ncols = 3;
  g.nrows = 1;
  g.xll = -123.0;
  g.yll = 37.0;
  g.cellsize = 0.25;
  g.cells = {-9999, 6, 4};
  geo::ClimateRaster raster(g, {{4, "BSk"}, {6, "Csb"}});
  CHECK(geo::lookup_climate(g.cell_center(0, 2), raster).sub == KoppenSub::BSk);
  CHECK(geo::lookup_climate(g.cell_center(0, 0), raster).sub == KoppenSub::Csb);
  // Off-grid to the west but within the search radius.
  CHECK(geo::lookup_climate({37.1, -123.2}, raster).sub == KoppenSub::Csb);
  try {
    (void)geo::lookup_climate({10.0, -100.0}, raster);
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::OutsideRaster);
  }
}

TEST_CASE("unknown legend code") {
  geo::AsciiGrid g;
  g.ncols = 1;
  g.nrows = 1;
  g.cells = {7};
  geo::ClimateRaster raster(g, {{7, "Af"}});
  try {
    (void)geo::lookup_climate({0.5, 0.5}, raster);
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnknownClimate);
  }
}

TEST_CASE("ascii grid text round trip") {
  const auto raster = diagonal_raster();
  std::ostringstream out;
  raster.grid().write(out);
  std::istringstream in(out.str());
  const auto back = geo::AsciiGrid::read(in);
  CHECK(back.ncols == 3);
  CHECK(back.nrows == 3);
  CHECK(back.xll == -122.0);
  CHECK(back.cells == raster.grid().cells);
}

TEST_CASE("polygon membership, even-odd") {
  geo::Polygon square({{0, 0}, {0, 1}, {1, 1}, {1, 0}});
  CHECK(square.contains({0.5, 0.5}));
  CHECK_FALSE(square.contains({1.5, 0.5}));
  CHECK_FALSE(square.contains({0.5, -0.5}));
}

TEST_CASE("enrich labels every record") {
  const auto raster = diagonal_raster();
  geo::Coastline coast({{36.0, -122.0}, {39.0, -122.0}});
  std::vector<SampleRecord> recs(2);
  recs[0].latitude = 37.5;
  recs[0].longitude = -121.99;
  recs[1].latitude = 38.5;
  recs[1].longitude = -119.5;
  auto out = geo::enrich(recs, coast, raster);
  CHECK(out[0].is_enriched());
  CHECK(*out[0].geographical_type == GeoType::Coastal);
  CHECK(*out[1].geographical_type == GeoType::Inland);
  CHECK(*out[1].climate_zone == KoppenSub::BSh);
  CHECK(*out[0].climate_zone == KoppenSub::BSk);
}
