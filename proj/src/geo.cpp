#include "wqst/geo.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "wqst/csv.hpp"
#include "wqst/error.hpp"

namespace wqst::geo {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace

double haversine_km(LatLon a, LatLon b) {
  const double phi1 = a.lat * kDegToRad;
  const double phi2 = b.lat * kDegToRad;
  const double s_dphi = std::sin((phi2 - phi1) / 2.0);
  const double s_dlam = std::sin((b.lon - a.lon) * kDegToRad / 2.0);
  const double h = s_dphi * s_dphi + std::cos(phi1) * std::cos(phi2) * s_dlam * s_dlam;
  return 2.0 * kEarthRadiusKm * std::asin(std::sqrt(std::min(1.0, h)));
}

Coastline::Coastline(std::vector<LatLon> vertices, double max_spacing_km)
    : vertices_(std::move(vertices)) {
  if (vertices_.size() < 2) throw Error(ErrorCode::InvalidGeometry, "coastline needs >= 2 vertices");
  if (!(max_spacing_km > 0.0)) throw Error(ErrorCode::InvalidGeometry, "spacing must be positive");
  densified_.push_back(vertices_.front());
  for (std::size_t i = 1; i < vertices_.size(); ++i) {
    const LatLon a = vertices_[i - 1];
    const LatLon b = vertices_[i];
    if (a == b) throw Error(ErrorCode::InvalidGeometry, "repeated consecutive coastline vertex");
    const double len = haversine_km(a, b);
    const auto pieces = static_cast<std::size_t>(std::max(1.0, std::ceil(len / max_spacing_km)));
    for (std::size_t k = 1; k <= pieces; ++k) {
      const double t = static_cast<double>(k) / static_cast<double>(pieces);
      densified_.push_back(k == pieces ? b
                                       : LatLon{a.lat + t * (b.lat - a.lat),
                                                a.lon + t * (b.lon - a.lon)});
    }
  }
}

Coastline Coastline::load(const std::filesystem::path& path) {
  return Coastline(read_lonlat_csv(path));
}

double distance_to_coast_km(LatLon p, const Coastline& coast) {
  double best = std::numeric_limits<double>::infinity();
  for (const LatLon& v : coast.densified()) best = std::min(best, haversine_km(p, v));
  return best;
}

GeoType classify_distance(double distance_km) {
  return distance_km <= kCoastalThresholdKm ? GeoType::Coastal : GeoType::Inland;
}

GeoType classify_geotype(LatLon p, const Coastline& coast) {
  return classify_distance(distance_to_coast_km(p, coast));
}

LatLon AsciiGrid::cell_center(std::size_t row, std::size_t col) const {
  const double lon = xll + (static_cast<double>(col) + 0.5) * cellsize;
  const double lat = yll + (static_cast<double>(nrows - 1 - row) + 0.5) * cellsize;
  return {lat, lon};
}

AsciiGrid AsciiGrid::read(std::istream& in) {
  AsciiGrid g;
  bool have_ncols = false, have_nrows = false, have_x = false, have_y = false, have_cs = false;
  bool x_center = false, y_center = false;
  std::string key;
  // Header lines are "key value"; the first token that parses as a number starts the data.
  std::streampos data_start = in.tellg();
  while (in >> key) {
    const std::string k = lower(key);
    if (k == "ncols" || k == "nrows" || k == "xllcorner" || k == "yllcorner" || k == "xllcenter" ||
        k == "yllcenter" || k == "cellsize" || k == "nodata_value") {
      std::string value;
      if (!(in >> value)) throw Error(ErrorCode::ParseError, "grid header '" + key + "' without value");
      auto v = csv::parse_double(value);
      if (!v) throw Error(ErrorCode::ParseError, "grid header '" + key + "' value not numeric");
      if (k == "ncols") g.ncols = static_cast<std::size_t>(*v), have_ncols = true;
      else if (k == "nrows") g.nrows = static_cast<std::size_t>(*v), have_nrows = true;
      else if (k == "xllcorner") g.xll = *v, have_x = true;
      else if (k == "yllcorner") g.yll = *v, have_y = true;
      else if (k == "xllcenter") g.xll = *v, have_x = true, x_center = true;
      else if (k == "yllcenter") g.yll = *v, have_y = true, y_center = true;
      else if (k == "cellsize") g.cellsize = *v, have_cs = true;
      else g.nodata = *v;
      data_start = in.tellg();
    } else {
      break;
    }
  }
  if (!(have_ncols && have_nrows && have_x && have_y && have_cs))
    throw Error(ErrorCode::ParseError, "grid header incomplete");
  if (!(g.cellsize > 0.0)) throw Error(ErrorCode::ParseError, "cellsize must be positive");
  if (x_center) g.xll -= g.cellsize / 2.0;
  if (y_center) g.yll -= g.cellsize / 2.0;

  in.clear();
  in.seekg(data_start);
  g.cells.reserve(g.ncols * g.nrows);
  std::string token;
  while (g.cells.size() < g.ncols * g.nrows && in >> token) {
    auto v = csv::parse_double(token);
    if (!v) throw Error(ErrorCode::ParseError, "grid value '" + token + "' not numeric");
    g.cells.push_back(*v);
  }
  if (g.cells.size() != g.ncols * g.nrows)
    throw Error(ErrorCode::ParseError, "grid has " + std::to_string(g.cells.size()) +
                                           " values, header implies " +
                                           std::to_string(g.ncols * g.nrows));
  return g;
}

AsciiGrid AsciiGrid::read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::FileNotFound, path.string());
  return read(in);
}

void AsciiGrid::write(std::ostream& out) const {
  out << "ncols " << ncols << '\n'
      << "nrows " << nrows << '\n'
      << "xllcorner " << csv::format_double(xll) << '\n'
      << "yllcorner " << csv::format_double(yll) << '\n'
      << "cellsize " << csv::format_double(cellsize) << '\n'
      << "NODATA_value " << csv::format_double(nodata) << '\n';
  for (std::size_t r = 0; r < nrows; ++r) {
    for (std::size_t c = 0; c < ncols; ++c) {
      if (c) out << ' ';
      out << csv::format_double(at(r, c));
    }
    out << '\n';
  }
}

void AsciiGrid::write(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::FileNotFound, "cannot write " + path.string());
  write(out);
}

ClimateRaster::ClimateRaster(AsciiGrid grid, std::map<int, std::string> legend)
    : grid_(std::move(grid)), legend_(std::move(legend)) {
  if (grid_.cells.size() != grid_.ncols * grid_.nrows)
    throw Error(ErrorCode::ParseError, "raster dimensions do not match cell count");
  if (!(grid_.cellsize > 0.0)) throw Error(ErrorCode::ParseError, "cellsize must be positive");
}

ClimateRaster ClimateRaster::load(const std::filesystem::path& grid_path,
                                  const std::filesystem::path& legend_path) {
  std::ifstream in(legend_path);
  if (!in) throw Error(ErrorCode::FileNotFound, legend_path.string());
  std::map<int, std::string> legend;
  csv::Reader reader(in);
  std::vector<std::string> f;
  while (reader.next(f)) {
    if (f.size() < 2) continue;
    auto code = csv::parse_int(f[0]);
    if (!code) continue;  // header or comment
    legend[static_cast<int>(*code)] = std::string(csv::trim(f[1]));
  }
  return ClimateRaster(AsciiGrid::read(grid_path), std::move(legend));
}

KoppenClass lookup_climate(LatLon p, const ClimateRaster& raster, int search_radius) {
  const AsciiGrid& g = raster.grid();
  const auto ncols = static_cast<long long>(g.ncols);
  const auto nrows = static_cast<long long>(g.nrows);
  long long col = static_cast<long long>(std::floor((p.lon - g.xll) / g.cellsize));
  long long rfb = static_cast<long long>(std::floor((p.lat - g.yll) / g.cellsize));
  // The outer east/north edges belong to the last cell.
  if (col == ncols && p.lon == g.xll + static_cast<double>(ncols) * g.cellsize) col = ncols - 1;
  if (rfb == nrows && p.lat == g.yll + static_cast<double>(nrows) * g.cellsize) rfb = nrows - 1;
  const long long row = nrows - 1 - rfb;

  auto resolve = [&](double code) {
    auto it = raster.legend().find(static_cast<int>(code));
    if (it == raster.legend().end() || static_cast<double>(it->first) != code)
      throw Error(ErrorCode::UnknownClimate, "raster code " + csv::format_double(code) + " has no legend entry");
    return KoppenClass{parse_koppen_sub(it->second)};
  };

  const bool inside = col >= 0 && col < ncols && row >= 0 && row < nrows;
  if (inside) {
    const double v = g.at(static_cast<std::size_t>(row), static_cast<std::size_t>(col));
    if (!g.is_nodata(v)) return resolve(v);
  }

  double best_d2 = std::numeric_limits<double>::infinity();
  double best_code = g.nodata;
  for (long long r = std::max(0LL, row - search_radius); r <= std::min(nrows - 1, row + search_radius); ++r) {
    for (long long c = std::max(0LL, col - search_radius); c <= std::min(ncols - 1, col + search_radius); ++c) {
      const double v = g.at(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
      if (g.is_nodata(v)) continue;
      const LatLon center = g.cell_center(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
      const double dlat = center.lat - p.lat;
      const double dlon = center.lon - p.lon;
      const double d2 = dlat * dlat + dlon * dlon;
      if (d2 < best_d2) {
        best_d2 = d2;
        best_code = v;
      }
    }
  }
  if (!std::isfinite(best_d2)) {
    std::ostringstream msg;
    msg << "no climate cell within " << search_radius << " cells of (" << p.lat << ", " << p.lon << ")";
    throw Error(ErrorCode::OutsideRaster, msg.str());
  }
  return resolve(best_code);
}

std::vector<SampleRecord> enrich(std::vector<SampleRecord> records, const Coastline& coast,
                                 const ClimateRaster& raster, int search_radius) {
  std::map<std::pair<double, double>, std::pair<KoppenSub, GeoType>> cache;
  for (auto& r : records) {
    const auto key = std::make_pair(r.latitude, r.longitude);
    auto it = cache.find(key);
    if (it == cache.end()) {
      const LatLon p = r.location();
      it = cache.emplace(key, std::make_pair(lookup_climate(p, raster, search_radius).sub,
                                             classify_geotype(p, coast)))
               .first;
    }
    r.climate_zone = it->second.first;
    r.geographical_type = it->second.second;
  }
  return records;
}

Polygon::Polygon(std::vector<LatLon> vertices) : vertices_(std::move(vertices)) {
  if (vertices_.size() > 1 && vertices_.front() == vertices_.back()) vertices_.pop_back();
  if (vertices_.size() < 3) throw Error(ErrorCode::InvalidGeometry, "polygon needs >= 3 vertices");
}

Polygon Polygon::load(const std::filesystem::path& path) { return Polygon(read_lonlat_csv(path)); }

bool Polygon::contains(LatLon p) const {
  bool inside = false;
  const std::size_t n = vertices_.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const LatLon& a = vertices_[i];
    const LatLon& b = vertices_[j];
    if ((a.lat > p.lat) != (b.lat > p.lat)) {
      const double x = a.lon + (p.lat - a.lat) * (b.lon - a.lon) / (b.lat - a.lat);
      if (p.lon < x) inside = !inside;
    }
  }
  return inside;
}

std::vector<LatLon> read_lonlat_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::FileNotFound, path.string());
  csv::Reader reader(in);
  std::vector<std::string> f;
  std::vector<LatLon> pts;
  bool first = true;
  while (reader.next(f)) {
    if (f.size() == 1 && csv::trim(f[0]).empty()) continue;
    if (f.size() < 2) throw Error(ErrorCode::ParseError, path.string() + ": expected lon,lat");
    auto lon = csv::parse_double(f[0]);
    auto lat = csv::parse_double(f[1]);
    if (!lon || !lat) {
      if (first) {
        first = false;
        continue;
      }
      throw Error(ErrorCode::ParseError, path.string() + ": bad coordinate on line " +
                                             std::to_string(reader.line()));
    }
    first = false;
    pts.push_back({*lat, *lon});
  }
  return pts;
}

void write_lonlat_csv(const std::filesystem::path& path, const std::vector<LatLon>& points) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::FileNotFound, "cannot write " + path.string());
  out << "lon,lat\n";
  for (const auto& p : points) out << csv::format_double(p.lon) << ',' << csv::format_double(p.lat) << '\n';
}

}  // namespace wqst::geo
