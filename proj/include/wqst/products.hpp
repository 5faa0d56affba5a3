#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wqst/core_types.hpp"
#include "wqst/geo.hpp"
#include "wqst/models/model.hpp"

namespace wqst {

struct BoundingBox {
  double lat_min = 0.0;
  double lat_max = 0.0;
  double lon_min = 0.0;
  double lon_max = 0.0;
};

// Builds the model's feature row for a (month, year, location) query. The
// default builder emits the spatio-temporal row and is only valid for models
// whose columns are exactly month, year, latitude, longitude.
using FeatureRowBuilder = std::function<Eigen::RowVectorXd(int month, int year, LatLon where)>;

struct GridProduct {
  BoundingBox bbox;
  double resolution = 0.1;
  int month = 1;
  int year = 2000;
  std::optional<Indicator> indicator;
  ModelKind model = ModelKind::LINEAR;
  geo::AsciiGrid grid;  // row 0 northernmost; NODATA outside the mask

  std::size_t rows() const { return grid.nrows; }
  std::size_t cols() const { return grid.ncols; }
  double value(std::size_t row, std::size_t col) const { return grid.at(row, col); }
  bool in_mask(std::size_t row, std::size_t col) const { return !grid.is_nodata(grid.at(row, col)); }

  // lat,lon,value for in-mask cells, north to south, west to east.
  void write_csv(std::ostream& out) const;
  void write_csv(const std::filesystem::path& path) const;
  void write_asc(const std::filesystem::path& path) const { grid.write(path); }
};

// Rows and columns: ceil(extent / resolution) each. Cells whose centre lies
// outside `mask` (if given) are NODATA. Throws RegimeMismatch when no builder
// is given and the model is not spatio-temporal, EmptyMask when no cell
// centre is inside the mask.
GridProduct interpolate_grid(const TrainedModel& model, const BoundingBox& bbox, double resolution,
                             int month, int year, const geo::Polygon* mask,
                             const FeatureRowBuilder& builder = {});

enum class BandMethod : std::uint8_t { RESIDUAL, BOOTSTRAP };
BandMethod parse_band_method(std::string_view text);

struct ForecastOptions {
  int start_year = 1975;
  int end_year = 2070;
  BandMethod band = BandMethod::RESIDUAL;
  std::size_t bootstrap_samples = 30;
  // Training data for BOOTSTRAP refits.
  const Eigen::MatrixXd* train_X = nullptr;
  const Eigen::VectorXd* train_y = nullptr;
  // Station coordinates for the statewide mean; empty gives NaN.
  std::vector<LatLon> stations;
  std::size_t statewide_max = 500;
  std::uint64_t seed = 0;
  FeatureRowBuilder builder;
};

struct ForecastRow {
  int year = 0;
  int month = 0;
  double prediction = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  double statewide_mean = 0.0;
};

struct ForecastSeries {
  LatLon location;
  BandMethod band = BandMethod::RESIDUAL;
  std::vector<ForecastRow> rows;  // chronological

  // Columns: year, month, prediction, lo, hi, statewide_mean.
  void write_csv(std::ostream& out) const;
  void write_csv(const std::filesystem::path& path) const;
};

// Monthly forecast from January of start_year to December of end_year.
// RESIDUAL: prediction +/- 1.96 * cross-validated RMSE (in-sample RMSE when
// no CV score is stored). BOOTSTRAP: 2.5 / 97.5 percentiles over refits on
// resampled training rows, widened if needed to contain the prediction.
ForecastSeries forecast_point(const TrainedModel& model, LatLon location, const ForecastOptions& options);

// Linear-interpolation percentile (the usual "type 7" definition); q in [0, 1].
double percentile(std::vector<double> values, double q);

enum class ImportanceMethod : std::uint8_t { GAIN, PERMUTATION };

struct ImportanceEntry {
  std::string feature;  // display name
  double importance = 0.0;
};

struct ImportanceReport {
  ImportanceMethod method = ImportanceMethod::GAIN;
  std::vector<ImportanceEntry> entries;  // model column order, groups collapsed

  double total() const;
  const ImportanceEntry* find(std::string_view feature) const;
  // Columns: feature, importance.
  void write_csv(std::ostream& out) const;
  void write_csv(const std::filesystem::path& path) const;
};

// Human-readable name for a column or categorical group ("latitude" -> "Latitude").
std::string feature_display_name(std::string_view name);

// Total split gain per variable, normalized to 1. One-hot columns of a group
// are summed into one entry. Throws UnsupportedModelKind for non-tree models.
ImportanceReport importance_gain(const TrainedModel& model);

// Mean RMSE increase when a variable (a whole group for one-hot columns) is
// permuted, clamped at 0 and normalized to 1.
ImportanceReport importance_permutation(const TrainedModel& model, const Eigen::MatrixXd& X,
                                        const Eigen::VectorXd& y, std::uint64_t seed,
                                        std::size_t repeats = 5);

}  // namespace wqst
