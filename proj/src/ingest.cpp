#include "wqst/ingest.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <unordered_map>

#include <json.hpp>

#include "wqst/csv.hpp"
#include "wqst/error.hpp"

namespace wqst {

namespace {

bool is_na(std::string_view field) {
  field = csv::trim(field);
  return field.empty() || field == "NA" || field == "N/A" || field == "NaN" || field == "nan" ||
         field == "null" || field == "NULL" || field == "na";
}

struct ColumnIndex {
  std::size_t station_id, latitude, longitude, county, year, month;
  std::array<std::size_t, 4> indicators;
  std::optional<std::size_t> climate_zone, geographical_type;
};

ColumnIndex resolve_columns(const std::vector<std::string>& header, const ColumnSchema& s) {
  std::unordered_map<std::string, std::size_t> pos;
  for (std::size_t i = 0; i < header.size(); ++i) {
    std::string name(csv::trim(header[i]));
    // Drop a UTF-8 byte-order mark on the first column.
    if (i == 0 && name.rfind("\xEF\xBB\xBF", 0) == 0) name.erase(0, 3);
    pos.emplace(name, i);
  }
  auto need = [&](const std::string& name) {
    auto it = pos.find(name);
    if (it == pos.end()) throw Error(ErrorCode::MissingColumn, "column '" + name + "' not in header");
    return it->second;
  };
  auto maybe = [&](const std::string& name) -> std::optional<std::size_t> {
    auto it = pos.find(name);
    if (it == pos.end()) return std::nullopt;
    return it->second;
  };
  ColumnIndex c{};
  c.station_id = need(s.station_id);
  c.latitude = need(s.latitude);
  c.longitude = need(s.longitude);
  c.county = need(s.county);
  c.year = need(s.year);
  c.month = need(s.month);
  c.indicators = {need(s.ph), need(s.dissolved_oxygen), need(s.specific_conductance),
                  need(s.water_temperature)};
  c.climate_zone = maybe(s.climate_zone);
  c.geographical_type = maybe(s.geographical_type);
  return c;
}

enum class RowOutcome { Kept, DroppedNa, DroppedInvalid };

RowOutcome parse_row(const std::vector<std::string>& f, const ColumnIndex& c,
                     const RegionBox& region, SampleRecord& out, std::string& category) {
  std::size_t needed = std::max({c.station_id, c.latitude, c.longitude, c.county, c.year, c.month,
                                 c.indicators[0], c.indicators[1], c.indicators[2],
                                 c.indicators[3]});
  if (f.size() <= needed) {
    category = "unparseable";
    return RowOutcome::DroppedInvalid;
  }
  for (std::size_t idx : {c.station_id, c.latitude, c.longitude, c.year, c.month, c.indicators[0],
                          c.indicators[1], c.indicators[2], c.indicators[3]}) {
    if (is_na(f[idx])) {
      category = "na_field";
      return RowOutcome::DroppedNa;
    }
  }

  auto id = csv::parse_int(f[c.station_id]);
  auto lat = csv::parse_double(f[c.latitude]);
  auto lon = csv::parse_double(f[c.longitude]);
  auto year = csv::parse_int(f[c.year]);
  auto month = csv::parse_int(f[c.month]);
  if (!id || !lat || !lon || !year || !month) {
    category = "unparseable";
    return RowOutcome::DroppedInvalid;
  }
  SampleRecord r;
  for (std::size_t k = 0; k < 4; ++k) {
    auto v = csv::parse_double(f[c.indicators[k]]);
    if (!v || !std::isfinite(*v)) {
      category = "unparseable";
      return RowOutcome::DroppedInvalid;
    }
    r.set_value(kAllIndicators[k], *v);
  }
  if (!std::isfinite(*lat) || !std::isfinite(*lon)) {
    category = "unparseable";
    return RowOutcome::DroppedInvalid;
  }
  if (*id <= 0) {
    category = "invalid_station_id";
    return RowOutcome::DroppedInvalid;
  }
  if (*month < 1 || *month > 12) {
    category = "month_out_of_range";
    return RowOutcome::DroppedInvalid;
  }
  if (*lat < -90.0 || *lat > 90.0) {
    category = "latitude_out_of_range";
    return RowOutcome::DroppedInvalid;
  }
  if (*lon < -180.0 || *lon > 180.0) {
    category = "longitude_out_of_range";
    return RowOutcome::DroppedInvalid;
  }
  bool corrected = false;
  if (*lon >= 0.0) {
    if (!region.contains(*lat, -*lon)) {
      category = "longitude_outside_region";
      return RowOutcome::DroppedInvalid;
    }
    *lon = -*lon;
    corrected = true;
  }

  r.station_id = *id;
  r.latitude = *lat;
  r.longitude = *lon;
  r.county = std::string(csv::trim(f[c.county]));
  r.year = static_cast<int>(*year);
  r.month = static_cast<int>(*month);
  try {
    if (c.climate_zone && *c.climate_zone < f.size() && !csv::trim(f[*c.climate_zone]).empty())
      r.climate_zone = parse_koppen_sub(csv::trim(f[*c.climate_zone]));
    if (c.geographical_type && *c.geographical_type < f.size() &&
        !csv::trim(f[*c.geographical_type]).empty())
      r.geographical_type = parse_geotype(csv::trim(f[*c.geographical_type]));
  } catch (const Error&) {
    category = "invalid_label";
    return RowOutcome::DroppedInvalid;
  }
  out = std::move(r);
  category = corrected ? "longitude_sign_corrected" : "";
  return RowOutcome::Kept;
}

}  // namespace

ColumnSchema ColumnSchema::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::FileNotFound, path.string());
  ColumnSchema s;
  const std::map<std::string, std::string*> fields = {
      {"station_id", &s.station_id},
      {"latitude", &s.latitude},
      {"longitude", &s.longitude},
      {"county", &s.county},
      {"year", &s.year},
      {"month", &s.month},
      {"ph", &s.ph},
      {"dissolved_oxygen", &s.dissolved_oxygen},
      {"specific_conductance", &s.specific_conductance},
      {"water_temperature", &s.water_temperature},
      {"climate_zone", &s.climate_zone},
      {"geographical_type", &s.geographical_type},
  };
  std::string line;
  while (std::getline(in, line)) {
    auto t = csv::trim(line);
    if (t.empty() || t.front() == '#') continue;
    auto eq = t.find('=');
    if (eq == std::string_view::npos)
      throw Error(ErrorCode::ConfigError, "schema line without '=': " + std::string(t));
    std::string key(csv::trim(t.substr(0, eq)));
    auto it = fields.find(key);
    if (it == fields.end()) throw Error(ErrorCode::ConfigError, "unknown schema field '" + key + "'");
    *it->second = std::string(csv::trim(t.substr(eq + 1)));
  }
  return s;
}

std::size_t IngestReport::corrections() const {
  auto it = categories.find("longitude_sign_corrected");
  return (it == categories.end() ? 0 : it->second) + stations_merged;
}

std::string IngestReport::to_json() const {
  nlohmann::ordered_json j;
  j["rows_read"] = rows_read;
  j["rows_kept"] = rows_kept;
  j["rows_dropped_na"] = rows_dropped_na;
  j["rows_dropped_invalid"] = rows_dropped_invalid;
  j["stations_merged"] = stations_merged;
  j["categories"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : categories) j["categories"][k] = v;
  return j.dump(2);
}

IngestResult parse_csv(std::istream& in, const IngestOptions& options) {
  csv::Reader reader(in);
  std::vector<std::string> fields;
  if (!reader.next(fields)) throw Error(ErrorCode::EmptyInput, "no header row");
  const ColumnIndex columns = resolve_columns(fields, options.schema);

  IngestResult result;
  IngestReport& rep = result.report;
  std::string category;
  while (reader.next(fields)) {
    if (fields.size() == 1 && csv::trim(fields[0]).empty()) continue;  // blank line
    ++rep.rows_read;
    SampleRecord r;
    switch (parse_row(fields, columns, options.region, r, category)) {
      case RowOutcome::Kept:
        ++rep.rows_kept;
        result.records.push_back(std::move(r));
        break;
      case RowOutcome::DroppedNa: ++rep.rows_dropped_na; break;
      case RowOutcome::DroppedInvalid: ++rep.rows_dropped_invalid; break;
    }
    if (!category.empty()) ++rep.categories[category];
  }
  if (rep.rows_read == 0) throw Error(ErrorCode::EmptyInput, "no data rows");
  return result;
}

IngestResult parse_csv(const std::filesystem::path& path, const IngestOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileNotFound, path.string());
  return parse_csv(in, options);
}

std::vector<SampleRecord> merge_duplicate_stations(std::vector<SampleRecord> records,
                                                   IngestReport* report) {
  auto key = [](const SampleRecord& r) {
    return std::pair<long long, long long>(std::llround(r.latitude * 1e4),
                                           std::llround(r.longitude * 1e4));
  };
  std::map<std::pair<long long, long long>, std::int64_t> smallest;
  for (const auto& r : records) {
    auto [it, inserted] = smallest.emplace(key(r), r.station_id);
    if (!inserted && r.station_id < it->second) it->second = r.station_id;
  }
  std::map<std::int64_t, bool> reassigned;
  for (auto& r : records) {
    const std::int64_t target = smallest.at(key(r));
    if (r.station_id != target) {
      reassigned[r.station_id] = true;
      r.station_id = target;
    }
  }
  if (report) {
    report->stations_merged += reassigned.size();
    if (!reassigned.empty()) report->categories["station_id_merged"] += reassigned.size();
  }
  return records;
}

std::string records_csv_header(const ColumnSchema& s) {
  return s.station_id + "," + s.latitude + "," + s.longitude + "," + s.county + "," + s.year + "," +
         s.month + "," + s.ph + "," + s.dissolved_oxygen + "," + s.specific_conductance + "," +
         s.water_temperature + "," + s.climate_zone + "," + s.geographical_type;
}

std::string record_to_csv_row(const SampleRecord& r) {
  std::string row;
  row += std::to_string(r.station_id);
  row += ',' + csv::format_double(r.latitude);
  row += ',' + csv::format_double(r.longitude);
  row += ',' + csv::escape(r.county);
  row += ',' + std::to_string(r.year);
  row += ',' + std::to_string(r.month);
  for (Indicator ind : kAllIndicators) row += ',' + csv::format_double(r.value(ind));
  row += ',';
  if (r.climate_zone) row += koppen_code(*r.climate_zone);
  row += ',';
  if (r.geographical_type) row += geotype_name(*r.geographical_type);
  return row;
}

void write_records_csv(std::ostream& out, const std::vector<SampleRecord>& records) {
  out << records_csv_header() << '\n';
  for (const auto& r : records) out << record_to_csv_row(r) << '\n';
}

void write_records_csv(const std::filesystem::path& path, const std::vector<SampleRecord>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::FileNotFound, "cannot write " + path.string());
  write_records_csv(out, records);
}

}  // namespace wqst
