#include "wqst/products.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>

#include "wqst/csv.hpp"
#include "wqst/error.hpp"
#include "wqst/eval.hpp"
#include "wqst/models/tree.hpp"
#include "wqst/parallel.hpp"
#include "wqst/random.hpp"

namespace wqst {

namespace {

constexpr double kBandZ = 1.96;
constexpr Eigen::Index kPredictChunk = 4096;

bool is_spatio_temporal_layout(const FeatureSchema& s) {
  static const std::vector<std::string> kNames = {"month", "year", "latitude", "longitude"};
  return s.column_names == kNames;
}

FeatureRowBuilder resolve_builder(const TrainedModel& model, const FeatureRowBuilder& builder) {
  if (builder) return builder;
  if (!is_spatio_temporal_layout(model.schema()))
    throw Error(ErrorCode::RegimeMismatch,
                "model columns are not (month, year, latitude, longitude); supply companion features");
  return [](int month, int year, LatLon p) {
    Eigen::RowVectorXd row(4);
    row << month, year, p.lat, p.lon;
    return row;
  };
}

// Predicts in fixed-size blocks to bound kernel-model memory.
Eigen::VectorXd predict_chunked(const TrainedModel& model, const Eigen::MatrixXd& X) {
  Eigen::VectorXd out(X.rows());
  for (Eigen::Index b = 0; b < X.rows(); b += kPredictChunk) {
    const Eigen::Index len = std::min(kPredictChunk, X.rows() - b);
    out.segment(b, len) = model.predict(X.middleRows(b, len));
  }
  return out;
}

void open_for_write(std::ofstream& out, const std::filesystem::path& path) {
  out.open(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::FileNotFound, "cannot write " + path.string());
}

}  // namespace

void GridProduct::write_csv(std::ostream& out) const {
  out << "lat,lon,value\n";
  for (std::size_t r = 0; r < grid.nrows; ++r) {
    for (std::size_t c = 0; c < grid.ncols; ++c) {
      if (!in_mask(r, c)) continue;
      const LatLon p = grid.cell_center(r, c);
      out << csv::format_double(p.lat) << ',' << csv::format_double(p.lon) << ','
          << csv::format_double(grid.at(r, c)) << '\n';
    }
  }
}

void GridProduct::write_csv(const std::filesystem::path& path) const {
  std::ofstream out;
  open_for_write(out, path);
  write_csv(out);
}

GridProduct interpolate_grid(const TrainedModel& model, const BoundingBox& bbox, double resolution,
                             int month, int year, const geo::Polygon* mask, const FeatureRowBuilder& builder) {
  if (!(resolution > 0.0)) throw Error(ErrorCode::InvalidSpec, "grid resolution must be positive");
  if (!(bbox.lat_max > bbox.lat_min) || !(bbox.lon_max > bbox.lon_min))
    throw Error(ErrorCode::InvalidGeometry, "bounding box has no extent");
  const FeatureRowBuilder row_of = resolve_builder(model, builder);

  GridProduct g;
  g.bbox = bbox;
  g.resolution = resolution;
  g.month = month;
  g.year = year;
  g.model = model.kind();
  if (model.schema().regime) g.indicator = model.schema().regime->target;
  g.grid.ncols = static_cast<std::size_t>(std::ceil((bbox.lon_max - bbox.lon_min) / resolution - 1e-9));
  g.grid.nrows = static_cast<std::size_t>(std::ceil((bbox.lat_max - bbox.lat_min) / resolution - 1e-9));
  g.grid.xll = bbox.lon_min;
  g.grid.yll = bbox.lat_min;
  g.grid.cellsize = resolution;
  g.grid.cells.assign(g.grid.ncols * g.grid.nrows, g.grid.nodata);

  std::vector<std::size_t> inside;
  for (std::size_t k = 0; k < g.grid.cells.size(); ++k) {
    const LatLon p = g.grid.cell_center(k / g.grid.ncols, k % g.grid.ncols);
    if (!mask || mask->contains(p)) inside.push_back(k);
  }
  if (inside.empty()) throw Error(ErrorCode::EmptyMask, "no grid cell centre falls inside the mask");

  Eigen::MatrixXd X(static_cast<Eigen::Index>(inside.size()), static_cast<Eigen::Index>(model.schema().size()));
  for (std::size_t k = 0; k < inside.size(); ++k) {
    const LatLon p = g.grid.cell_center(inside[k] / g.grid.ncols, inside[k] % g.grid.ncols);
    X.row(static_cast<Eigen::Index>(k)) = row_of(month, year, p);
  }
  const Eigen::VectorXd pred = predict_chunked(model, X);
  for (std::size_t k = 0; k < inside.size(); ++k) {
    const double v = pred(static_cast<Eigen::Index>(k));
    if (!std::isfinite(v)) throw Error(ErrorCode::DegenerateInput, "model produced a non-finite grid value");
    g.grid.cells[inside[k]] = v;
  }
  return g;
}

BandMethod parse_band_method(std::string_view text) {
  if (text == "residual" || text == "RESIDUAL") return BandMethod::RESIDUAL;
  if (text == "bootstrap" || text == "BOOTSTRAP") return BandMethod::BOOTSTRAP;
  throw Error(ErrorCode::InvalidSpec, "unknown band method '" + std::string(text) + "'");
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw Error(ErrorCode::EmptyInput, "percentile of no values");
  std::sort(values.begin(), values.end());
  const double h = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

void ForecastSeries::write_csv(std::ostream& out) const {
  out << "year,month,prediction,lo,hi,statewide_mean\n";
  for (const auto& r : rows) {
    out << r.year << ',' << r.month << ',' << csv::format_double(r.prediction) << ','
        << csv::format_double(r.lo) << ',' << csv::format_double(r.hi) << ','
        << csv::format_double(r.statewide_mean) << '\n';
  }
}

void ForecastSeries::write_csv(const std::filesystem::path& path) const {
  std::ofstream out;
  open_for_write(out, path);
  write_csv(out);
}

ForecastSeries forecast_point(const TrainedModel& model, LatLon location, const ForecastOptions& o) {
  if (o.start_year > o.end_year) throw Error(ErrorCode::InvalidSpec, "forecast start year after end year");
  const FeatureRowBuilder row_of = resolve_builder(model, o.builder);
  const auto p = static_cast<Eigen::Index>(model.schema().size());
  const auto T = static_cast<std::size_t>(12 * (o.end_year - o.start_year + 1));

  ForecastSeries s;
  s.location = location;
  s.band = o.band;
  s.rows.resize(T);
  Eigen::MatrixXd X(static_cast<Eigen::Index>(T), p);
  for (std::size_t t = 0; t < T; ++t) {
    s.rows[t].year = o.start_year + static_cast<int>(t / 12);
    s.rows[t].month = static_cast<int>(t % 12) + 1;
    X.row(static_cast<Eigen::Index>(t)) = row_of(s.rows[t].month, s.rows[t].year, location);
  }
  const Eigen::VectorXd pred = predict_chunked(model, X);
  for (std::size_t t = 0; t < T; ++t) s.rows[t].prediction = pred(static_cast<Eigen::Index>(t));

  if (o.band == BandMethod::RESIDUAL) {
    const double err = model.summary().cv_rmse.value_or(model.summary().in_sample_rmse);
    const double half = kBandZ * err;
    for (auto& r : s.rows) {
      r.lo = r.prediction - half;
      r.hi = r.prediction + half;
    }
  } else {
    if (!o.train_X || !o.train_y)
      throw Error(ErrorCode::InvalidSpec, "bootstrap band needs the training data");
    const Eigen::MatrixXd& Xtr = *o.train_X;
    const Eigen::VectorXd& ytr = *o.train_y;
    const std::size_t B = o.bootstrap_samples;
    if (B < 2) throw Error(ErrorCode::InvalidSpec, "bootstrap band needs at least 2 samples");
    std::vector<Eigen::VectorXd> draws(B);
    parallel_for(B, [&](std::size_t b) {
      Rng rng(mix_seed(o.seed, 1000 + b));
      const auto n = static_cast<std::size_t>(Xtr.rows());
      Eigen::MatrixXd Xb(Xtr.rows(), Xtr.cols());
      Eigen::VectorXd yb(ytr.size());
      for (std::size_t i = 0; i < n; ++i) {
        const auto j = static_cast<Eigen::Index>(rng.uniform_index(n));
        Xb.row(static_cast<Eigen::Index>(i)) = Xtr.row(j);
        yb(static_cast<Eigen::Index>(i)) = ytr(j);
      }
      ModelSpec spec = model.spec();
      spec.seed = mix_seed(o.seed, b);
      const TrainedModel m = fit(spec, Xb, yb, model.schema());
      draws[b] = predict_chunked(m, X);
    });
    std::vector<double> column(B);
    for (std::size_t t = 0; t < T; ++t) {
      for (std::size_t b = 0; b < B; ++b) column[b] = draws[b](static_cast<Eigen::Index>(t));
      auto& r = s.rows[t];
      r.lo = std::min(percentile(column, 0.025), r.prediction);
      r.hi = std::max(percentile(column, 0.975), r.prediction);
    }
  }

  if (o.stations.empty()) {
    for (auto& r : s.rows) r.statewide_mean = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  std::vector<LatLon> sample = o.stations;
  if (sample.size() > o.statewide_max) {
    Rng rng(o.seed);
    auto perm = rng.permutation(sample.size());
    perm.resize(o.statewide_max);
    std::sort(perm.begin(), perm.end());
    std::vector<LatLon> chosen;
    chosen.reserve(perm.size());
    for (std::size_t i : perm) chosen.push_back(o.stations[i]);
    sample = std::move(chosen);
  }
  const auto S = static_cast<Eigen::Index>(sample.size());
  Eigen::MatrixXd Xs(S, p);
  for (std::size_t t = 0; t < T; ++t) {
    for (Eigen::Index k = 0; k < S; ++k)
      Xs.row(k) = row_of(s.rows[t].month, s.rows[t].year, sample[static_cast<std::size_t>(k)]);
    s.rows[t].statewide_mean = predict_chunked(model, Xs).mean();
  }
  return s;
}

double ImportanceReport::total() const {
  double t = 0.0;
  for (const auto& e : entries) t += e.importance;
  return t;
}

const ImportanceEntry* ImportanceReport::find(std::string_view feature) const {
  for (const auto& e : entries)
    if (e.feature == feature) return &e;
  return nullptr;
}

void ImportanceReport::write_csv(std::ostream& out) const {
  out << "feature,importance\n";
  for (const auto& e : entries) out << csv::escape(e.feature) << ',' << csv::format_double(e.importance) << '\n';
}

void ImportanceReport::write_csv(const std::filesystem::path& path) const {
  std::ofstream out;
  open_for_write(out, path);
  write_csv(out);
}

std::string feature_display_name(std::string_view name) {
  if (name == "month") return "Month";
  if (name == "year") return "Year";
  if (name == "latitude") return "Latitude";
  if (name == "longitude") return "Longitude";
  if (name == "climate_zone") return "Climate Zone";
  if (name == "geographical_type") return "Geographical Type";
  for (Indicator ind : kAllIndicators)
    if (name == indicator_key(ind)) return std::string(indicator_label(ind));
  return std::string(name);
}

namespace {

// A reported variable: one plain column or every column of a group.
struct Unit {
  std::string name;
  std::vector<std::size_t> columns;
};

std::vector<Unit> units_of(const FeatureSchema& schema) {
  std::vector<Unit> units;
  for (std::size_t j = 0; j < schema.size(); ++j) {
    const auto g = schema.group_of(j);
    if (!g) {
      units.push_back({feature_display_name(schema.column_names[j]), {j}});
      continue;
    }
    const CategoricalGroup& grp = schema.groups[*g];
    if (j != grp.first_column) continue;
    Unit u{feature_display_name(grp.name), {}};
    for (std::size_t k = 0; k < grp.size(); ++k) u.columns.push_back(grp.first_column + k);
    units.push_back(std::move(u));
  }
  return units;
}

void normalize(ImportanceReport& r) {
  const double t = r.total();
  for (auto& e : r.entries) e.importance = t > 0.0 ? e.importance / t : 0.0;
}

}  // namespace

ImportanceReport importance_gain(const TrainedModel& model) {
  std::vector<double> per_column;
  if (const auto* rf = model.state_as<RandomForestState>()) {
    per_column = rf->gain_per_feature();
  } else if (const auto* gb = model.state_as<GradientBoostingState>()) {
    per_column = gb->gain_per_feature();
  } else {
    throw Error(ErrorCode::UnsupportedModelKind,
                "gain importance needs a tree ensemble, got " + std::string(model_kind_label(model.kind())));
  }
  ImportanceReport r;
  r.method = ImportanceMethod::GAIN;
  for (const Unit& u : units_of(model.schema())) {
    double g = 0.0;
    for (std::size_t c : u.columns) g += per_column[c];
    r.entries.push_back({u.name, g});
  }
  normalize(r);
  return r;
}

ImportanceReport importance_permutation(const TrainedModel& model, const Eigen::MatrixXd& X,
                                        const Eigen::VectorXd& y, std::uint64_t seed, std::size_t repeats) {
  if (static_cast<std::size_t>(X.cols()) != model.schema().size())
    throw Error(ErrorCode::ColumnMismatch, "permutation importance data has " + std::to_string(X.cols()) +
                                               " columns, model expects " +
                                               std::to_string(model.schema().size()));
  if (repeats == 0) throw Error(ErrorCode::InvalidSpec, "repeats must be >= 1");
  const double base = rmse(predict_chunked(model, X), y);
  const std::vector<Unit> units = units_of(model.schema());
  const auto n = static_cast<std::size_t>(X.rows());

  ImportanceReport r;
  r.method = ImportanceMethod::PERMUTATION;
  r.entries.resize(units.size());
  parallel_for(units.size(), [&](std::size_t u) {
    double sum = 0.0;
    Eigen::MatrixXd Xp = X;
    for (std::size_t rep = 0; rep < repeats; ++rep) {
      Rng rng(mix_seed(seed, rep * units.size() + u));
      const auto perm = rng.permutation(n);
      for (std::size_t c : units[u].columns) {
        const auto col = static_cast<Eigen::Index>(c);
        for (std::size_t i = 0; i < n; ++i)
          Xp(static_cast<Eigen::Index>(i), col) = X(static_cast<Eigen::Index>(perm[i]), col);
      }
      sum += rmse(predict_chunked(model, Xp), y) - base;
    }
    r.entries[u] = {units[u].name, std::max(0.0, sum / static_cast<double>(repeats))};
  });
  normalize(r);
  return r;
}

}  // namespace wqst
