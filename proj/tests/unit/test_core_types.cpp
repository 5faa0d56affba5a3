#include <doctest.h>

#include <cmath>
#include <set>

#include "wqst/core_types.hpp"
#include "wqst/error.hpp"

using namespace wqst;

TEST_CASE("major_of takes the first letter of the sub-climate") {
  CHECK(major_of("BSk") == 'B');
  CHECK(major_of("Csb") == 'C');
  CHECK(major_of("Dsc") == 'D');
  for (KoppenSub sub : kAllKoppenSubs) {
    CHECK(koppen_major_letter(major_of(sub)) == koppen_code(sub)[0]);
    CHECK(parse_koppen_sub(koppen_code(sub)) == sub);
  }
}

TEST_CASE("unknown climate codes are rejected") {
  for (const char* code : {"Af", "ET", "Cfa", "", "bsk"}) {
    try {
      (void)major_of(code);
      FAIL("accepted " << code);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::UnknownClimate);
    }
  }
}

TEST_CASE("each indicator has one distinct unit") {
  std::set<std::string_view> units;
  for (Indicator ind : kAllIndicators) {
    units.insert(indicator_unit(ind));
    CHECK(indicator_unit(ind) == indicator_unit(ind));
    CHECK(parse_indicator(indicator_key(ind)) == ind);
    CHECK(parse_indicator(indicator_label(ind)) == ind);
  }
  CHECK(units.size() == 4);
  CHECK(parse_indicator("do") == Indicator::DISSOLVED_OXYGEN);
  CHECK(parse_indicator("wt") == Indicator::WATER_TEMPERATURE);
  CHECK_THROWS_AS(parse_indicator("turbidity"), Error);
}

TEST_CASE("record value accessors address the matching field") {
  SampleRecord r;
  r.set_value(Indicator::PH, 6.9);
  r.set_value(Indicator::DISSOLVED_OXYGEN, 11.1);
  r.set_value(Indicator::SPECIFIC_CONDUCTANCE, 415.0);
  r.set_value(Indicator::WATER_TEMPERATURE, 8.9);
  CHECK(r.ph == 6.9);
  CHECK(r.dissolved_oxygen == 11.1);
  CHECK(r.specific_conductance == 415.0);
  CHECK(r.water_temperature == 8.9);
  CHECK(r.value(Indicator::SPECIFIC_CONDUCTANCE) == 415.0);
  CHECK_FALSE(r.is_enriched());
  r.climate_zone = KoppenSub::BSk;
  r.geographical_type = GeoType::Inland;
  CHECK(r.is_enriched());
}

TEST_CASE("validate_record reports the violated invariant") {
  SampleRecord r;
  r.station_id = 1;
  r.latitude = 37.8;
  r.longitude = -121.6;
  r.month = 1;
  CHECK(validate_record(r).empty());
  r.month = 13;
  CHECK_FALSE(validate_record(r).empty());
  r.month = 1;
  r.ph = std::nan("");
  CHECK_FALSE(validate_record(r).empty());
}

TEST_CASE("schema group lookup") {
  FeatureSchema s = FeatureSchema::numeric(3);
  CHECK(s.column_names == std::vector<std::string>{"x0", "x1", "x2"});
  s.groups.push_back({"g", 1, {"a", "b"}});
  CHECK_FALSE(s.group_of(0).has_value());
  CHECK(*s.group_of(1) == 0);
  CHECK(*s.group_of(2) == 0);
}
