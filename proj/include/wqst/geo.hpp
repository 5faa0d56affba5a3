#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "wqst/core_types.hpp"

namespace wqst::geo {

// Mean Earth radius (IUGG), kilometers.
inline constexpr double kEarthRadiusKm = 6371.0088;
inline constexpr double kCoastalThresholdKm = 8.0;

double haversine_km(LatLon a, LatLon b);

// Ordered coastline vertices. Distances are measured against a copy of the
// polyline densified so that consecutive points are at most 1 km apart.
class Coastline {
 public:
  // Throws InvalidGeometry for fewer than two vertices or repeated consecutive vertices.
  explicit Coastline(std::vector<LatLon> vertices, double max_spacing_km = 1.0);

  // CSV of lon,lat pairs in coastal order; a non-numeric first line is treated as a header.
  static Coastline load(const std::filesystem::path& path);

  const std::vector<LatLon>& vertices() const { return vertices_; }
  const std::vector<LatLon>& densified() const { return densified_; }

 private:
  std::vector<LatLon> vertices_;
  std::vector<LatLon> densified_;
};

double distance_to_coast_km(LatLon p, const Coastline& coast);

GeoType classify_distance(double distance_km);
GeoType classify_geotype(LatLon p, const Coastline& coast);

// ESRI-style ASCII grid of integer codes; rows run north to south.
struct AsciiGrid {
  std::size_t ncols = 0;
  std::size_t nrows = 0;
  double xll = 0.0;  // lower-left corner longitude
  double yll = 0.0;  // lower-left corner latitude
  double cellsize = 1.0;
  double nodata = -9999.0;
  std::vector<double> cells;  // row-major, row 0 = northernmost

  double at(std::size_t row, std::size_t col) const { return cells[row * ncols + col]; }
  bool is_nodata(double v) const { return v == nodata; }
  LatLon cell_center(std::size_t row, std::size_t col) const;

  static AsciiGrid read(std::istream& in);
  static AsciiGrid read(const std::filesystem::path& path);
  void write(std::ostream& out) const;
  void write(const std::filesystem::path& path) const;
};

class ClimateRaster {
 public:
  // `legend` maps integer grid codes to sub-climate labels. Labels are
  // validated lazily, at lookup time.
  ClimateRaster(AsciiGrid grid, std::map<int, std::string> legend);

  // Grid file plus "code,label" legend CSV.
  static ClimateRaster load(const std::filesystem::path& grid_path,
                            const std::filesystem::path& legend_path);

  const AsciiGrid& grid() const { return grid_; }
  const std::map<int, std::string>& legend() const { return legend_; }

 private:
  AsciiGrid grid_;
  std::map<int, std::string> legend_;
};

// Class of the cell containing p. A NODATA (or off-grid) position falls back
// to the nearest non-NODATA cell centre within `search_radius` cells.
// Throws OutsideRaster when nothing is found, UnknownClimate when the code
// does not name one of the nine sub-climates.
KoppenClass lookup_climate(LatLon p, const ClimateRaster& raster, int search_radius = 3);

// Fills climate_zone and geographical_type on every record. Labels are
// derived once per distinct coordinate.
std::vector<SampleRecord> enrich(std::vector<SampleRecord> records, const Coastline& coast,
                                 const ClimateRaster& raster, int search_radius = 3);

// Simple polygon (lon,lat vertices, implicitly closed). Point membership uses
// the even-odd rule.
class Polygon {
 public:
  explicit Polygon(std::vector<LatLon> vertices);
  static Polygon load(const std::filesystem::path& path);

  bool contains(LatLon p) const;
  const std::vector<LatLon>& vertices() const { return vertices_; }

 private:
  std::vector<LatLon> vertices_;
};

// Reads "lon,lat" rows (used by coastline and polygon files).
std::vector<LatLon> read_lonlat_csv(const std::filesystem::path& path);
void write_lonlat_csv(const std::filesystem::path& path, const std::vector<LatLon>& points);

}  // namespace wqst::geo
