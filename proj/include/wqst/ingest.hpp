#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "wqst/core_types.hpp"

namespace wqst {

// Maps each record field to the header name it is read from.
struct ColumnSchema {
  std::string station_id = "StationID";
  std::string latitude = "Latitude";
  std::string longitude = "Longitude";
  std::string county = "County";
  std::string year = "Year";
  std::string month = "Month";
  std::string ph = "pH";
  std::string dissolved_oxygen = "DissolvedOxygen";
  std::string specific_conductance = "SpecificConductance";
  std::string water_temperature = "WaterTemperature";
  // Optional columns, read when present.
  std::string climate_zone = "ClimateZone";
  std::string geographical_type = "GeographicalType";

  // Reads "field=HeaderName" lines; unspecified fields keep their defaults.
  static ColumnSchema load(const std::filesystem::path& path);
};

struct RegionBox {
  double lat_min = 32.5;
  double lat_max = 42.1;
  double lon_min = -124.5;
  double lon_max = -114.1;

  bool contains(double lat, double lon) const {
    return lat >= lat_min && lat <= lat_max && lon >= lon_min && lon <= lon_max;
  }
};

struct IngestReport {
  std::size_t rows_read = 0;
  std::size_t rows_kept = 0;
  std::size_t rows_dropped_na = 0;
  std::size_t rows_dropped_invalid = 0;
  std::size_t stations_merged = 0;
  // Category -> count, e.g. "longitude_sign_corrected", "unparseable".
  std::map<std::string, std::size_t> categories;

  std::size_t corrections() const;
  std::string to_json() const;
};

struct IngestOptions {
  ColumnSchema schema;
  RegionBox region;
};

struct IngestResult {
  std::vector<SampleRecord> records;
  IngestReport report;
};

IngestResult parse_csv(const std::filesystem::path& path, const IngestOptions& options = {});
IngestResult parse_csv(std::istream& in, const IngestOptions& options = {});

// Records sharing coordinates (rounded to 1e-4 degrees) take the smallest
// station id of their group. Count and order are unchanged. When `report`
// is given, the number of reassigned station ids is added to it.
std::vector<SampleRecord> merge_duplicate_stations(std::vector<SampleRecord> records,
                                                   IngestReport* report = nullptr);

// CWQD-shaped header, with climate/geotype columns appended.
std::string records_csv_header(const ColumnSchema& schema = {});
std::string record_to_csv_row(const SampleRecord& r);
void write_records_csv(std::ostream& out, const std::vector<SampleRecord>& records);
void write_records_csv(const std::filesystem::path& path, const std::vector<SampleRecord>& records);

}  // namespace wqst
