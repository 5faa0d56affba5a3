#include <fstream>
#include <string>

#include "wqst/cli.hpp"
#include "wqst/csv.hpp"
#include "wqst/error.hpp"

namespace wqst::cli {

namespace {

const std::map<std::string, std::string>& defaults() {
  static const std::map<std::string, std::string> d = {
      {"output_dir", "wqst_out"},
      {"data", ""},
      {"schema", ""},
      {"coastline", ""},
      {"climate_raster", ""},
      {"climate_legend", ""},
      {"region", ""},
      {"seed", "42"},
      {"split_ratio", "0.8"},
      {"climate_encoding", "major"},
      {"models", "all"},
      {"regimes", "st,vd"},
      {"targets", "all"},
      {"tune", "true"},
      {"cv_score", "true"},
      {"folds", "5"},
      {"repeats", "1"},
      {"jobs", "0"},
      {"search_radius", "3"},
      {"grid_resolution", "0.1"},
      {"interpolate_model", "additive"},
      {"interpolate_targets", "all"},
      {"interpolate_month", "7"},
      {"interpolate_year", "2023"},
      {"interpolate_regime", "st"},
      {"companion_source", "none"},
      {"forecast_model", "additive"},
      {"forecast_targets", "all"},
      {"forecast_lat", "37.7749"},
      {"forecast_lon", "-122.4194"},
      {"forecast_start", "1975"},
      {"forecast_end", "2070"},
      {"band_method", "residual"},
      {"bootstrap_samples", "30"},
      {"statewide_max", "500"},
      {"importance_model", "gradient_boosting"},
      {"importance_target", "ph"},
      {"importance_regime", "vd"},
      {"importance_method", "gain"},
      {"importance_repeats", "5"},
      {"include_baseline", "true"},
  };
  return d;
}

// Synth-stage output file for each input role.
const std::map<std::string, std::string>& synth_files() {
  static const std::map<std::string, std::string> f = {
      {"data", "records.csv"},        {"coastline", "coastline.csv"},
      {"region", "region.csv"},       {"climate_raster", "climate.asc"},
      {"climate_legend", "climate_legend.csv"}};
  return f;
}

bool open_family(const std::string& key) {
  return key.rfind("hp.", 0) == 0 || key.rfind("grid.", 0) == 0 || key.rfind("synth.", 0) == 0;
}

}  // namespace

RunConfig::RunConfig() : values_(defaults()) {}

void RunConfig::set(const std::string& key_in, const std::string& value_in) {
  const std::string key(csv::trim(key_in));
  const std::string value(csv::trim(value_in));
  if (key.empty()) throw Error(ErrorCode::ConfigError, "empty config key");
  if (!defaults().count(key) && !open_family(key))
    throw Error(ErrorCode::ConfigError, "unknown config key '" + key + "'");
  values_[key] = value;
}

void RunConfig::set(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos)
    throw Error(ErrorCode::ConfigError, "expected key=value, got '" + assignment + "'");
  set(assignment.substr(0, eq), assignment.substr(eq + 1));
}

void RunConfig::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot read config file " + path.string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (csv::trim(line).empty()) continue;
    if (line.find('=') == std::string::npos)
      throw Error(ErrorCode::ConfigError, path.string() + ":" + std::to_string(lineno) + ": expected key = value");
    set(line);
  }
}

std::string RunConfig::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw Error(ErrorCode::ConfigError, "missing config key '" + key + "'");
  return it->second;
}

double RunConfig::get_double(const std::string& key) const {
  const auto v = csv::parse_double(get(key));
  if (!v) throw Error(ErrorCode::ConfigError, key + ": not a number: '" + get(key) + "'");
  return *v;
}

std::int64_t RunConfig::get_int(const std::string& key) const {
  const auto v = csv::parse_int(get(key));
  if (!v) throw Error(ErrorCode::ConfigError, key + ": not an integer: '" + get(key) + "'");
  return *v;
}

bool RunConfig::get_bool(const std::string& key) const {
  const std::string v = get(key);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw Error(ErrorCode::ConfigError, key + ": not a boolean: '" + v + "'");
}

std::vector<std::string> RunConfig::get_list(const std::string& key) const {
  std::vector<std::string> out;
  const std::string v = get(key);
  std::size_t start = 0;
  while (start <= v.size()) {
    const auto comma = v.find(',', start);
    const std::string item(csv::trim(v.substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
    if (!item.empty()) out.push_back(item);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::map<std::string, std::string> RunConfig::with_prefix(const std::string& prefix) const {
  std::map<std::string, std::string> out;
  for (const auto& [k, v] : values_)
    if (k.rfind(prefix, 0) == 0) out[k.substr(prefix.size())] = v;
  return out;
}

std::filesystem::path RunConfig::input_path(const std::string& key) const {
  const std::string v = get(key);
  if (!v.empty()) return v;
  const auto it = synth_files().find(key);
  if (it == synth_files().end()) return {};
  return output_dir() / "synth" / it->second;
}

}  // namespace wqst::cli
