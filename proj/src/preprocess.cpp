#include "wqst/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "wqst/csv.hpp"
#include "wqst/error.hpp"
#include "wqst/random.hpp"

namespace wqst {

OutlierResult filter_outliers(const std::vector<SampleRecord>& records) {
  if (records.empty()) throw Error(ErrorCode::EmptyInput, "no records to filter");
  if (records.size() < 2) throw Error(ErrorCode::TooFewRecords, "outlier filter needs >= 2 records");

  OutlierResult out;
  const double n = static_cast<double>(records.size());
  for (std::size_t k = 0; k < 4; ++k) {
    const Indicator ind = kAllIndicators[k];
    double sum = 0.0;
    for (const auto& r : records) sum += r.value(ind);
    const double mean = sum / n;
    double ss = 0.0;
    for (const auto& r : records) {
      const double d = r.value(ind) - mean;
      ss += d * d;
    }
    const double sd = std::sqrt(ss / (n - 1.0));
    out.bounds[k] = OutlierBounds{mean, kOutlierZ * sd};
  }
  for (const auto& r : records) {
    bool keep = true;
    for (std::size_t k = 0; k < 4 && keep; ++k) keep = out.bounds[k].keeps(r.value(kAllIndicators[k]));
    (keep ? out.kept : out.removed).push_back(r);
  }
  return out;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(std::size_t n,
                                                                            double ratio,
                                                                            std::uint64_t seed) {
  if (n < 5) throw Error(ErrorCode::TooFewRecords, "split needs >= 5 records, got " + std::to_string(n));
  if (!(ratio > 0.0 && ratio < 1.0)) throw Error(ErrorCode::InvalidSpec, "split ratio must be in (0, 1)");
  const auto n_train = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(n)));
  Rng rng(seed);
  std::vector<std::size_t> perm = rng.permutation(n);
  std::vector<std::size_t> train(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<std::size_t> test(perm.begin() + static_cast<std::ptrdiff_t>(n_train), perm.end());
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {std::move(train), std::move(test)};
}

SplitResult split(const std::vector<SampleRecord>& records, double ratio, std::uint64_t seed) {
  auto [train_idx, test_idx] = split_indices(records.size(), ratio, seed);
  SplitResult out;
  out.train.reserve(train_idx.size());
  out.test.reserve(test_idx.size());
  for (std::size_t i : train_idx) out.train.push_back(records[i]);
  for (std::size_t i : test_idx) out.test.push_back(records[i]);
  return out;
}

FeatureSchema regime_schema(const FeatureRegime& regime) {
  FeatureSchema s;
  s.regime = regime;
  s.column_names = {"month", "year", "latitude", "longitude"};
  if (regime.kind == RegimeKind::SPATIO_TEMPORAL) return s;

  for (Indicator ind : kAllIndicators) {
    if (ind != regime.target) s.column_names.emplace_back(indicator_key(ind));
  }
  if (regime.climate_encoding != ClimateEncoding::NONE) {
    CategoricalGroup climate{"climate_zone", s.column_names.size(), {}};
    if (regime.climate_encoding == ClimateEncoding::MAJOR) {
      for (KoppenMajor m : kAllKoppenMajors) climate.levels.emplace_back(1, koppen_major_letter(m));
    } else {
      for (KoppenSub sub : kAllKoppenSubs) climate.levels.emplace_back(koppen_code(sub));
    }
    for (const auto& level : climate.levels) s.column_names.push_back("climate_zone=" + level);
    s.groups.push_back(std::move(climate));
  }
  CategoricalGroup geotype{"geographical_type", s.column_names.size(), {}};
  for (GeoType g : kAllGeoTypes) geotype.levels.emplace_back(geotype_name(g));
  for (const auto& level : geotype.levels) s.column_names.push_back("geographical_type=" + level);
  s.groups.push_back(std::move(geotype));
  return s;
}

DesignMatrix assemble(const std::vector<SampleRecord>& records, const FeatureRegime& regime) {
  if (records.empty()) throw Error(ErrorCode::EmptyInput, "no records to assemble");
  DesignMatrix dm;
  dm.schema = regime_schema(regime);
  const auto n = static_cast<Eigen::Index>(records.size());
  const auto p = static_cast<Eigen::Index>(dm.schema.size());
  const bool vd = regime.kind == RegimeKind::VARIABLE_DEPENDENT;
  dm.X = Eigen::MatrixXd::Zero(n, p);
  dm.y.resize(n);

  for (Eigen::Index i = 0; i < n; ++i) {
    const SampleRecord& r = records[static_cast<std::size_t>(i)];
    if (!r.is_enriched())
      throw Error(ErrorCode::UnenrichedRecord,
                  "record " + std::to_string(i) + " (station " + std::to_string(r.station_id) +
                      ") lacks climate/geotype labels");
    dm.X(i, 0) = r.month;
    dm.X(i, 1) = r.year;
    dm.X(i, 2) = r.latitude;
    dm.X(i, 3) = r.longitude;
    dm.y(i) = r.value(regime.target);
    if (!vd) continue;

    Eigen::Index col = 4;
    for (Indicator ind : kAllIndicators) {
      if (ind != regime.target) dm.X(i, col++) = r.value(ind);
    }
    if (regime.climate_encoding == ClimateEncoding::MAJOR) {
      dm.X(i, col + static_cast<Eigen::Index>(major_of(*r.climate_zone))) = 1.0;
      col += 3;
    } else if (regime.climate_encoding == ClimateEncoding::SUB) {
      dm.X(i, col + static_cast<Eigen::Index>(*r.climate_zone)) = 1.0;
      col += 9;
    }
    dm.X(i, col + static_cast<Eigen::Index>(*r.geographical_type)) = 1.0;
  }
  return dm;
}

Eigen::RowVectorXd spatio_temporal_row(int month, int year, double lat, double lon) {
  Eigen::RowVectorXd row(4);
  row << month, year, lat, lon;
  return row;
}

void write_design_csv(std::ostream& out, const DesignMatrix& dm) {
  for (std::size_t j = 0; j < dm.schema.size(); ++j) out << dm.schema.column_names[j] << ',';
  out << "target:" << indicator_key(dm.regime().target) << '\n';
  for (Eigen::Index i = 0; i < dm.X.rows(); ++i) {
    for (Eigen::Index j = 0; j < dm.X.cols(); ++j) out << csv::format_double(dm.X(i, j)) << ',';
    out << csv::format_double(dm.y(i)) << '\n';
  }
}

void write_outlier_bounds_csv(std::ostream& out, const std::array<OutlierBounds, 4>& bounds) {
  out << "indicator,mean,lo,hi\n";
  for (std::size_t k = 0; k < 4; ++k) {
    out << indicator_key(kAllIndicators[k]) << ',' << csv::format_double(bounds[k].mean) << ','
        << csv::format_double(bounds[k].lo()) << ',' << csv::format_double(bounds[k].hi()) << '\n';
  }
}

}  // namespace wqst
