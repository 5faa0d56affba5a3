#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wqst/core_types.hpp"

namespace wqst {

// mean +/- half_width; half_width = 1.96 * sample sd.
struct OutlierBounds {
  double mean = 0.0;
  double half_width = 0.0;

  double lo() const { return mean - half_width; }
  double hi() const { return mean + half_width; }
  bool keeps(double v) const { return !(v < lo() || v > hi()); }
};

inline constexpr double kOutlierZ = 1.96;

struct OutlierResult {
  std::vector<SampleRecord> kept;
  std::vector<SampleRecord> removed;
  std::array<OutlierBounds, 4> bounds;  // indexed like kAllIndicators
};

// Pooled per-indicator 95% band; a record goes if any indicator lies strictly outside.
OutlierResult filter_outliers(const std::vector<SampleRecord>& records);

struct SplitResult {
  std::vector<SampleRecord> train;
  std::vector<SampleRecord> test;
};

// Seeded uniform shuffle; |train| = floor(ratio * n). Both halves keep input order.
SplitResult split(const std::vector<SampleRecord>& records, double ratio, std::uint64_t seed);
// Index form of the same partition: (train indices, test indices), each ascending.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(std::size_t n,
                                                                            double ratio,
                                                                            std::uint64_t seed);

struct DesignMatrix {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  FeatureSchema schema;

  const std::vector<std::string>& column_names() const { return schema.column_names; }
  const FeatureRegime& regime() const { return *schema.regime; }
};

// Layout for a regime, independent of any records.
FeatureSchema regime_schema(const FeatureRegime& regime);

// Columns: month, year, latitude, longitude[, the three other indicators in
// indicator order, climate one-hot, geotype one-hot (Inland, Coastal)].
DesignMatrix assemble(const std::vector<SampleRecord>& records, const FeatureRegime& regime);

// Feature row for a single (month, year, lat, lon) query under the S-T layout.
Eigen::RowVectorXd spatio_temporal_row(int month, int year, double lat, double lon);

void write_design_csv(std::ostream& out, const DesignMatrix& dm);
void write_outlier_bounds_csv(std::ostream& out, const std::array<OutlierBounds, 4>& bounds);

}  // namespace wqst
