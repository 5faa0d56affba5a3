#include "wqst/core_types.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "wqst/error.hpp"

namespace wqst {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

std::string_view indicator_unit(Indicator ind) {
  switch (ind) {
    case Indicator::PH: return "pH Units";
    case Indicator::DISSOLVED_OXYGEN: return "mg/L";
    case Indicator::SPECIFIC_CONDUCTANCE: return "\xC2\xB5S/cm@25\xC2\xB0" "C";
    case Indicator::WATER_TEMPERATURE: return "\xC2\xB0" "C";
  }
  return "";
}

std::string_view indicator_key(Indicator ind) {
  switch (ind) {
    case Indicator::PH: return "ph";
    case Indicator::DISSOLVED_OXYGEN: return "dissolved_oxygen";
    case Indicator::SPECIFIC_CONDUCTANCE: return "specific_conductance";
    case Indicator::WATER_TEMPERATURE: return "water_temperature";
  }
  return "";
}

std::string_view indicator_label(Indicator ind) {
  switch (ind) {
    case Indicator::PH: return "pH";
    case Indicator::DISSOLVED_OXYGEN: return "Dissolved Oxygen";
    case Indicator::SPECIFIC_CONDUCTANCE: return "Specific Conductance";
    case Indicator::WATER_TEMPERATURE: return "Water Temperature";
  }
  return "";
}

Indicator parse_indicator(std::string_view text) {
  const std::string t = lower(text);
  if (t == "ph") return Indicator::PH;
  if (t == "dissolved_oxygen" || t == "do" || t == "dissolved oxygen" || t == "dissolvedoxygen")
    return Indicator::DISSOLVED_OXYGEN;
  if (t == "specific_conductance" || t == "sc" || t == "specific conductance" ||
      t == "specificconductance")
    return Indicator::SPECIFIC_CONDUCTANCE;
  if (t == "water_temperature" || t == "wt" || t == "water temperature" ||
      t == "watertemperature")
    return Indicator::WATER_TEMPERATURE;
  throw Error(ErrorCode::ConfigError, "unknown indicator '" + std::string(text) + "'");
}

std::string_view koppen_code(KoppenSub sub) {
  switch (sub) {
    case KoppenSub::BWh: return "BWh";
    case KoppenSub::BWk: return "BWk";
    case KoppenSub::BSh: return "BSh";
    case KoppenSub::BSk: return "BSk";
    case KoppenSub::Csa: return "Csa";
    case KoppenSub::Csb: return "Csb";
    case KoppenSub::Dsa: return "Dsa";
    case KoppenSub::Dsb: return "Dsb";
    case KoppenSub::Dsc: return "Dsc";
  }
  return "";
}

char koppen_major_letter(KoppenMajor major) {
  switch (major) {
    case KoppenMajor::B: return 'B';
    case KoppenMajor::C: return 'C';
    case KoppenMajor::D: return 'D';
  }
  return '?';
}

KoppenSub parse_koppen_sub(std::string_view code) {
  for (KoppenSub s : kAllKoppenSubs) {
    if (koppen_code(s) == code) return s;
  }
  throw Error(ErrorCode::UnknownClimate, "'" + std::string(code) + "' is not a California sub-climate");
}

KoppenMajor major_of(KoppenSub sub) {
  switch (koppen_code(sub)[0]) {
    case 'B': return KoppenMajor::B;
    case 'C': return KoppenMajor::C;
    default: return KoppenMajor::D;
  }
}

char major_of(std::string_view sub_code) {
  return koppen_major_letter(major_of(parse_koppen_sub(sub_code)));
}

std::string_view geotype_name(GeoType g) {
  return g == GeoType::Coastal ? "Coastal" : "Inland";
}

GeoType parse_geotype(std::string_view text) {
  const std::string t = lower(text);
  if (t == "coastal") return GeoType::Coastal;
  if (t == "inland") return GeoType::Inland;
  throw Error(ErrorCode::ParseError, "unknown geographical type '" + std::string(text) + "'");
}

double SampleRecord::value(Indicator ind) const {
  switch (ind) {
    case Indicator::PH: return ph;
    case Indicator::DISSOLVED_OXYGEN: return dissolved_oxygen;
    case Indicator::SPECIFIC_CONDUCTANCE: return specific_conductance;
    case Indicator::WATER_TEMPERATURE: return water_temperature;
  }
  return 0.0;
}

void SampleRecord::set_value(Indicator ind, double v) {
  switch (ind) {
    case Indicator::PH: ph = v; break;
    case Indicator::DISSOLVED_OXYGEN: dissolved_oxygen = v; break;
    case Indicator::SPECIFIC_CONDUCTANCE: specific_conductance = v; break;
    case Indicator::WATER_TEMPERATURE: water_temperature = v; break;
  }
}

std::string validate_record(const SampleRecord& r) {
  if (r.station_id <= 0) return "station id must be positive";
  if (!(r.latitude >= -90.0 && r.latitude <= 90.0)) return "latitude out of range";
  if (!(r.longitude >= -180.0 && r.longitude <= 180.0)) return "longitude out of range";
  if (r.month < 1 || r.month > 12) return "month out of range";
  for (Indicator ind : kAllIndicators) {
    if (!std::isfinite(r.value(ind))) return std::string(indicator_key(ind)) + " not finite";
  }
  return {};
}

std::string_view regime_key(RegimeKind k) {
  return k == RegimeKind::SPATIO_TEMPORAL ? "st" : "vd";
}

std::string_view regime_label(RegimeKind k) {
  return k == RegimeKind::SPATIO_TEMPORAL ? "S-T" : "V-D";
}

RegimeKind parse_regime(std::string_view text) {
  const std::string t = lower(text);
  if (t == "st" || t == "s-t" || t == "spatio_temporal" || t == "spatio-temporal")
    return RegimeKind::SPATIO_TEMPORAL;
  if (t == "vd" || t == "v-d" || t == "variable_dependent" || t == "variable-dependent")
    return RegimeKind::VARIABLE_DEPENDENT;
  throw Error(ErrorCode::ConfigError, "unknown regime '" + std::string(text) + "'");
}

std::string_view climate_encoding_key(ClimateEncoding e) {
  switch (e) {
    case ClimateEncoding::MAJOR: return "major";
    case ClimateEncoding::SUB: return "sub";
    case ClimateEncoding::NONE: return "none";
  }
  return "";
}

ClimateEncoding parse_climate_encoding(std::string_view text) {
  const std::string t = lower(text);
  if (t == "major") return ClimateEncoding::MAJOR;
  if (t == "sub") return ClimateEncoding::SUB;
  if (t == "none") return ClimateEncoding::NONE;
  throw Error(ErrorCode::ConfigError, "unknown climate encoding '" + std::string(text) + "'");
}

std::optional<std::size_t> FeatureSchema::group_of(std::size_t col) const {
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (col >= groups[g].first_column && col < groups[g].first_column + groups[g].size())
      return g;
  }
  return std::nullopt;
}

FeatureSchema FeatureSchema::numeric(std::size_t p) {
  FeatureSchema s;
  s.column_names.reserve(p);
  for (std::size_t j = 0; j < p; ++j) s.column_names.push_back("x" + std::to_string(j));
  return s;
}

}  // namespace wqst
