#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace wqst {

// The four field indicators, in the fixed order used for feature columns.
enum class Indicator : std::uint8_t {
  PH,
  DISSOLVED_OXYGEN,
  SPECIFIC_CONDUCTANCE,
  WATER_TEMPERATURE,
};

inline constexpr std::array<Indicator, 4> kAllIndicators = {
    Indicator::PH, Indicator::DISSOLVED_OXYGEN, Indicator::SPECIFIC_CONDUCTANCE,
    Indicator::WATER_TEMPERATURE};

std::string_view indicator_unit(Indicator ind);
// Snake-case key used in files and on the command line ("ph", "dissolved_oxygen", ...).
std::string_view indicator_key(Indicator ind);
// Human-readable label ("pH", "Dissolved Oxygen", ...).
std::string_view indicator_label(Indicator ind);
// Accepts keys, labels and short aliases (do, sc, wt). Throws ConfigError.
Indicator parse_indicator(std::string_view text);

// The nine Koppen sub-climates that occur in California.
enum class KoppenSub : std::uint8_t { BWh, BWk, BSh, BSk, Csa, Csb, Dsa, Dsb, Dsc };

inline constexpr std::array<KoppenSub, 9> kAllKoppenSubs = {
    KoppenSub::BWh, KoppenSub::BWk, KoppenSub::BSh, KoppenSub::BSk, KoppenSub::Csa,
    KoppenSub::Csb, KoppenSub::Dsa, KoppenSub::Dsb, KoppenSub::Dsc};

enum class KoppenMajor : std::uint8_t { B, C, D };

inline constexpr std::array<KoppenMajor, 3> kAllKoppenMajors = {KoppenMajor::B, KoppenMajor::C,
                                                                 KoppenMajor::D};

std::string_view koppen_code(KoppenSub sub);
char koppen_major_letter(KoppenMajor major);
// Throws UnknownClimate for anything outside the nine codes.
KoppenSub parse_koppen_sub(std::string_view code);
KoppenMajor major_of(KoppenSub sub);
// String form: takes a sub-climate code, returns its major letter.
char major_of(std::string_view sub_code);

struct KoppenClass {
  KoppenSub sub;

  KoppenMajor major() const { return major_of(sub); }
  friend bool operator==(const KoppenClass&, const KoppenClass&) = default;
};

enum class GeoType : std::uint8_t { Inland, Coastal };

inline constexpr std::array<GeoType, 2> kAllGeoTypes = {GeoType::Inland, GeoType::Coastal};

std::string_view geotype_name(GeoType g);
GeoType parse_geotype(std::string_view text);

struct LatLon {
  double lat = 0.0;
  double lon = 0.0;
  friend bool operator==(const LatLon&, const LatLon&) = default;
};

// One station-month observation.
struct SampleRecord {
  std::int64_t station_id = 0;
  double latitude = 0.0;
  double longitude = 0.0;
  std::string county;
  int year = 0;
  int month = 1;
  double ph = 0.0;
  double dissolved_oxygen = 0.0;
  double specific_conductance = 0.0;
  double water_temperature = 0.0;
  std::optional<KoppenSub> climate_zone;
  std::optional<GeoType> geographical_type;

  double value(Indicator ind) const;
  void set_value(Indicator ind, double v);
  LatLon location() const { return {latitude, longitude}; }
  bool is_enriched() const { return climate_zone.has_value() && geographical_type.has_value(); }

  friend bool operator==(const SampleRecord&, const SampleRecord&) = default;
};

// Empty string when the record satisfies the value-type invariants, otherwise
// a short description of the first violated one.
std::string validate_record(const SampleRecord& r);

enum class RegimeKind : std::uint8_t { SPATIO_TEMPORAL, VARIABLE_DEPENDENT };
enum class ClimateEncoding : std::uint8_t { MAJOR, SUB, NONE };

std::string_view regime_key(RegimeKind k);  // "st" / "vd"
std::string_view regime_label(RegimeKind k);  // "S-T" / "V-D"
RegimeKind parse_regime(std::string_view text);
std::string_view climate_encoding_key(ClimateEncoding e);
ClimateEncoding parse_climate_encoding(std::string_view text);

struct FeatureRegime {
  RegimeKind kind = RegimeKind::SPATIO_TEMPORAL;
  Indicator target = Indicator::PH;
  ClimateEncoding climate_encoding = ClimateEncoding::MAJOR;

  friend bool operator==(const FeatureRegime&, const FeatureRegime&) = default;
};

// A run of one-hot columns that together encode one categorical variable.
struct CategoricalGroup {
  std::string name;
  std::size_t first_column = 0;
  std::vector<std::string> levels;

  std::size_t size() const { return levels.size(); }
  friend bool operator==(const CategoricalGroup&, const CategoricalGroup&) = default;
};

// Column layout of a design matrix. Models remember it so prediction inputs
// can be checked against the training layout.
struct FeatureSchema {
  std::vector<std::string> column_names;
  std::vector<CategoricalGroup> groups;
  std::optional<FeatureRegime> regime;

  std::size_t size() const { return column_names.size(); }
  // Index of the categorical group owning column `col`, if any.
  std::optional<std::size_t> group_of(std::size_t col) const;
  // Plain numeric schema with generated names x0..x{p-1}.
  static FeatureSchema numeric(std::size_t p);

  friend bool operator==(const FeatureSchema&, const FeatureSchema&) = default;
};

}  // namespace wqst
