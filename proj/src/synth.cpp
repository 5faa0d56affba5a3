#include "wqst/synth.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <ostream>

#include "wqst/csv.hpp"
#include "wqst/error.hpp"
#include "wqst/parallel.hpp"
#include "wqst/random.hpp"

namespace wqst::synth {

namespace {

double round4(double v) { return std::round(v * 1e4) / 1e4; }

std::vector<LatLon> coast_vertices() {
  // (lat, lon), north to south.
  return {{42.0, -124.2}, {40.4, -124.4}, {39.0, -123.8}, {37.8, -122.5},
          {36.6, -121.9}, {34.6, -120.6}, {34.0, -118.5}, {32.5, -117.1}};
}

struct Field {
  const char* key;
  double SynthSpec::*member;
};

constexpr Field kDoubleFields[] = {
    {"a0", &SynthSpec::a0},         {"a1", &SynthSpec::a1},
    {"a2", &SynthSpec::a2},         {"a3", &SynthSpec::a3},
    {"wt_noise", &SynthSpec::wt_noise}, {"b0", &SynthSpec::b0},
    {"b1", &SynthSpec::b1},         {"do_noise", &SynthSpec::do_noise},
    {"c0", &SynthSpec::c0},         {"c1", &SynthSpec::c1},
    {"c2", &SynthSpec::c2},         {"ph_lat_mid", &SynthSpec::ph_lat_mid},
    {"ph_noise", &SynthSpec::ph_noise}, {"d0", &SynthSpec::d0},
    {"d1", &SynthSpec::d1},         {"d2", &SynthSpec::d2},
    {"sc_noise", &SynthSpec::sc_noise},
};

}  // namespace

void SynthSpec::validate() const {
  if (n_stations == 0 || samples_per_station == 0)
    throw Error(ErrorCode::InvalidSpec, "need at least one station and one sample");
  if (year_min > year_max) throw Error(ErrorCode::InvalidSpec, "year_min after year_max");
  if (!(bbox.lat_max > bbox.lat_min) || !(bbox.lon_max > bbox.lon_min))
    throw Error(ErrorCode::InvalidSpec, "bounding box has no extent");
  for (double sd : {wt_noise, do_noise, ph_noise, sc_noise})
    if (!(sd >= 0.0)) throw Error(ErrorCode::InvalidSpec, "noise sd must be >= 0");
  if (!(d2 > 0.0)) throw Error(ErrorCode::InvalidSpec, "d2 must be positive");
  for (const auto& f : kDoubleFields)
    if (!std::isfinite(this->*f.member)) throw Error(ErrorCode::InvalidSpec, std::string(f.key) + " not finite");
}

void SynthSpec::set(const std::string& key, const std::string& value) {
  auto num = [&]() {
    const auto v = csv::parse_double(value);
    if (!v) throw Error(ErrorCode::InvalidSpec, "synth." + key + ": not a number: '" + value + "'");
    return *v;
  };
  auto count = [&]() {
    const auto v = csv::parse_int(value);
    if (!v || *v < 0) throw Error(ErrorCode::InvalidSpec, "synth." + key + ": not a count: '" + value + "'");
    return *v;
  };
  for (const auto& f : kDoubleFields) {
    if (key == f.key) {
      this->*f.member = num();
      return;
    }
  }
  if (key == "n_stations") n_stations = static_cast<std::size_t>(count());
  else if (key == "samples_per_station") samples_per_station = static_cast<std::size_t>(count());
  else if (key == "year_min") year_min = static_cast<int>(count());
  else if (key == "year_max") year_max = static_cast<int>(count());
  else if (key == "seed") seed = static_cast<std::uint64_t>(count());
  else if (key == "do_uses_sampled_wt") do_uses_sampled_wt = num() != 0.0;
  else if (key == "lat_min") bbox.lat_min = num();
  else if (key == "lat_max") bbox.lat_max = num();
  else if (key == "lon_min") bbox.lon_min = num();
  else if (key == "lon_max") bbox.lon_max = num();
  else throw Error(ErrorCode::InvalidSpec, "unknown synth field '" + key + "'");
}

std::map<std::string, std::string> SynthSpec::fields() const {
  std::map<std::string, std::string> out;
  out["n_stations"] = std::to_string(n_stations);
  out["samples_per_station"] = std::to_string(samples_per_station);
  out["year_min"] = std::to_string(year_min);
  out["year_max"] = std::to_string(year_max);
  out["seed"] = std::to_string(seed);
  out["do_uses_sampled_wt"] = do_uses_sampled_wt ? "1" : "0";
  out["lat_min"] = csv::format_double(bbox.lat_min);
  out["lat_max"] = csv::format_double(bbox.lat_max);
  out["lon_min"] = csv::format_double(bbox.lon_min);
  out["lon_max"] = csv::format_double(bbox.lon_max);
  for (const auto& f : kDoubleFields) out[f.key] = csv::format_double(this->*f.member);
  return out;
}

KoppenSub climate_rule(double lat, double lon) {
  if (lat >= 41.3 && lon > -121.0) return KoppenSub::Dsc;
  if (lat >= 40.5 && lon > -122.0) return KoppenSub::Dsb;
  if (lat >= 37.0 && lon > -120.5) return KoppenSub::Dsa;
  if (lat < 37.0 && lon > -116.5) return lat < 34.5 ? KoppenSub::BWh : KoppenSub::BWk;
  if (lat < 37.0 && lon > -118.5) return lat < 34.5 ? KoppenSub::BSh : KoppenSub::BSk;
  if (lon < -121.5 || lat < 34.5) return KoppenSub::Csb;
  return KoppenSub::Csa;
}

Geography default_geography() {
  std::vector<LatLon> coast = coast_vertices();
  std::vector<LatLon> outline = coast;
  for (LatLon p : std::vector<LatLon>{{32.7, -114.7}, {35.1, -114.6}, {39.0, -120.0}, {42.0, -120.0}})
    outline.push_back(p);
  geo::Polygon region(outline);

  geo::AsciiGrid grid;
  grid.xll = -124.5;
  grid.yll = 32.5;
  grid.cellsize = 0.25;
  grid.ncols = 42;
  grid.nrows = 39;
  grid.cells.assign(grid.ncols * grid.nrows, grid.nodata);
  for (std::size_t r = 0; r < grid.nrows; ++r) {
    for (std::size_t c = 0; c < grid.ncols; ++c) {
      const LatLon p = grid.cell_center(r, c);
      if (!region.contains(p)) continue;
      grid.cells[r * grid.ncols + c] = static_cast<double>(static_cast<int>(climate_rule(p.lat, p.lon)) + 1);
    }
  }
  std::map<int, std::string> legend;
  for (std::size_t k = 0; k < kAllKoppenSubs.size(); ++k)
    legend[static_cast<int>(k) + 1] = std::string(koppen_code(kAllKoppenSubs[k]));
  return Geography{geo::Coastline(std::move(coast)), std::move(region),
                   geo::ClimateRaster(std::move(grid), std::move(legend))};
}

GroundTruth::GroundTruth(SynthSpec spec, geo::Coastline coastline)
    : spec_(std::move(spec)), coastline_(std::move(coastline)) {}

double GroundTruth::seasonal(int month) const {
  return std::sin(2.0 * std::numbers::pi * (month - 7) / 12.0);
}

double GroundTruth::water_temperature(double lat, int year, int month) const {
  return spec_.a0 - spec_.a1 * lat + spec_.a2 * seasonal(month) + spec_.a3 * (year - 2000);
}

double GroundTruth::dissolved_oxygen(double wt) const { return spec_.b0 - spec_.b1 * wt; }

double GroundTruth::ph(double lat, int month) const {
  return spec_.c0 + spec_.c1 * seasonal(month) + spec_.c2 * std::tanh((lat - spec_.ph_lat_mid) / 2.0);
}

double GroundTruth::specific_conductance(double lat, double lon) const {
  const double km = geo::distance_to_coast_km({lat, lon}, coastline_);
  return spec_.d0 + spec_.d1 * std::exp(-km / spec_.d2);
}

double GroundTruth::expected(Indicator ind, double lat, double lon, int year, int month) const {
  switch (ind) {
    case Indicator::WATER_TEMPERATURE: return water_temperature(lat, year, month);
    case Indicator::DISSOLVED_OXYGEN: return dissolved_oxygen(water_temperature(lat, year, month));
    case Indicator::PH: return ph(lat, month);
    case Indicator::SPECIFIC_CONDUCTANCE: return specific_conductance(lat, lon);
  }
  return 0.0;
}

Dataset generate(const SynthSpec& spec) {
  spec.validate();
  Dataset data{{}, default_geography(), spec};
  const GroundTruth truth(spec, data.geography.coastline);
  const std::size_t per = spec.samples_per_station;
  std::vector<SampleRecord> records(spec.n_stations * per);
  const auto years = static_cast<std::uint64_t>(spec.year_max - spec.year_min + 1);

  parallel_for(spec.n_stations, [&](std::size_t s) {
    Rng rng(mix_seed(spec.seed, s));
    double lat = 0.0;
    double lon = 0.0;
    for (int attempt = 0;; ++attempt) {
      lat = rng.uniform(spec.bbox.lat_min, spec.bbox.lat_max);
      lon = rng.uniform(spec.bbox.lon_min, spec.bbox.lon_max);
      if (data.geography.region.contains({lat, lon})) break;
      if (attempt > 100000) throw Error(ErrorCode::InvalidSpec, "bounding box misses the region");
    }
    lat = round4(lat);
    lon = round4(lon);
    const double sc_mean = truth.specific_conductance(lat, lon);
    for (std::size_t k = 0; k < per; ++k) {
      SampleRecord& r = records[s * per + k];
      r.station_id = static_cast<std::int64_t>(s) + 1;
      r.latitude = lat;
      r.longitude = lon;
      r.county = "Synthetic";
      r.year = spec.year_min + static_cast<int>(rng.uniform_index(years));
      r.month = static_cast<int>(rng.uniform_index(12)) + 1;
      const double wt_mean = truth.water_temperature(lat, r.year, r.month);
      r.water_temperature = wt_mean + spec.wt_noise * rng.normal();
      const double wt_for_do = spec.do_uses_sampled_wt ? r.water_temperature : wt_mean;
      r.dissolved_oxygen = truth.dissolved_oxygen(wt_for_do) + spec.do_noise * rng.normal();
      r.ph = truth.ph(lat, r.month) + spec.ph_noise * rng.normal();
      r.specific_conductance = sc_mean + spec.sc_noise * rng.normal();
    }
  });
  data.records = geo::enrich(std::move(records), data.geography.coastline, data.geography.climate);
  return data;
}

GroundTruth truth_of(const Dataset& data) { return GroundTruth(data.spec, data.geography.coastline); }

void write_truth(std::ostream& out, const SynthSpec& spec) {
  out << "# s = sin(2*pi*(month-7)/12)\n"
      << "# water_temperature = a0 - a1*lat + a2*s + a3*(year-2000) + N(0, wt_noise^2)\n"
      << "# dissolved_oxygen = b0 - b1*WT + N(0, do_noise^2); WT is the sampled water temperature"
         " when do_uses_sampled_wt=1, else its noiseless mean\n"
      << "# ph = c0 + c1*s + c2*tanh((lat-ph_lat_mid)/2) + N(0, ph_noise^2)\n"
      << "# specific_conductance = d0 + d1*exp(-coast_km/d2) + N(0, sc_noise^2)\n";
  for (const auto& [k, v] : spec.fields()) out << k << '=' << v << '\n';
}

std::map<std::string, std::filesystem::path> write_dataset(const Dataset& data,
                                                           const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::map<std::string, std::filesystem::path> paths{
      {"data", dir / "records.csv"},          {"truth", dir / "truth.txt"},
      {"coastline", dir / "coastline.csv"},   {"region", dir / "region.csv"},
      {"climate_raster", dir / "climate.asc"}, {"climate_legend", dir / "climate_legend.csv"}};
  write_records_csv(paths["data"], data.records);
  {
    std::ofstream out(paths["truth"], std::ios::binary);
    if (!out) throw Error(ErrorCode::FileNotFound, "cannot write " + paths["truth"].string());
    write_truth(out, data.spec);
  }
  geo::write_lonlat_csv(paths["coastline"], data.geography.coastline.vertices());
  geo::write_lonlat_csv(paths["region"], data.geography.region.vertices());
  data.geography.climate.grid().write(paths["climate_raster"]);
  {
    std::ofstream out(paths["climate_legend"], std::ios::binary);
    if (!out) throw Error(ErrorCode::FileNotFound, "cannot write " + paths["climate_legend"].string());
    out << "code,label\n";
    for (const auto& [code, label] : data.geography.climate.legend()) out << code << ',' << label << '\n';
  }
  return paths;
}

}  // namespace wqst::synth
