#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "wqst/cli.hpp"
#include "wqst/csv.hpp"
#include "wqst/error.hpp"
#include "wqst/eval.hpp"
#include "wqst/geo.hpp"
#include "wqst/ingest.hpp"
#include "wqst/models/model.hpp"
#include "wqst/models/tune.hpp"
#include "wqst/parallel.hpp"
#include "wqst/preprocess.hpp"
#include "wqst/products.hpp"
#include "wqst/synth.hpp"
#include "wqst/version.hpp"

namespace wqst::cli {

namespace fs = std::filesystem;

namespace {

struct Context {
  RunConfig cfg;
  std::ostream& out;

  fs::path dir() const { return cfg.output_dir(); }
  std::uint64_t seed() const { return static_cast<std::uint64_t>(cfg.get_int("seed")); }
};

void require_file(const fs::path& path, const std::string& producer) {
  if (path.empty() || !fs::exists(path)) {
    std::string msg = "missing input " + (path.empty() ? std::string("(unset path)") : path.string());
    if (!producer.empty()) msg += "; run `wqst " + producer + "` first";
    throw Error(ErrorCode::StageInputMissing, msg);
  }
}

std::vector<SampleRecord> read_records(const fs::path& path, const std::string& producer) {
  require_file(path, producer);
  return parse_csv(path).records;
}

std::vector<ModelKind> parse_models(const std::vector<std::string>& items) {
  std::vector<ModelKind> out;
  for (const auto& s : items) {
    if (s == "all") return {kAllModelKinds.begin(), kAllModelKinds.end()};
    const ModelKind k = parse_model_kind(s);
    if (std::find(out.begin(), out.end(), k) == out.end()) out.push_back(k);
  }
  if (out.empty()) throw Error(ErrorCode::ConfigError, "no models selected");
  return out;
}

std::vector<Indicator> parse_targets(const std::vector<std::string>& items) {
  std::vector<Indicator> out;
  for (const auto& s : items) {
    if (s == "all") return {kAllIndicators.begin(), kAllIndicators.end()};
    Indicator ind;
    try {
      ind = parse_indicator(s);
    } catch (const Error&) {
      throw Error(ErrorCode::ConfigError, "unknown indicator '" + s + "'");
    }
    if (std::find(out.begin(), out.end(), ind) == out.end()) out.push_back(ind);
  }
  if (out.empty()) throw Error(ErrorCode::ConfigError, "no targets selected");
  return out;
}

std::vector<RegimeKind> parse_regimes(const std::vector<std::string>& items) {
  std::vector<RegimeKind> out;
  for (const auto& s : items) {
    if (s == "all") return {RegimeKind::SPATIO_TEMPORAL, RegimeKind::VARIABLE_DEPENDENT};
    const RegimeKind r = parse_regime(s);
    if (std::find(out.begin(), out.end(), r) == out.end()) out.push_back(r);
  }
  if (out.empty()) throw Error(ErrorCode::ConfigError, "no regimes selected");
  return out;
}

ClimateEncoding encoding(const RunConfig& cfg) {
  try {
    return parse_climate_encoding(cfg.get("climate_encoding"));
  } catch (const Error& e) {
    throw Error(ErrorCode::ConfigError, e.what());
  }
}

Hyperparameters hyperparameters_for(const RunConfig& cfg, ModelKind kind) {
  Hyperparameters hp;
  for (const auto& [name, value] : cfg.with_prefix("hp." + std::string(model_kind_key(kind)) + ".")) {
    const auto v = csv::parse_double(value);
    if (!v) throw Error(ErrorCode::ConfigError, "hp." + std::string(model_kind_key(kind)) + "." + name + ": not a number");
    hp[name] = *v;
  }
  // Validates names and ranges up front.
  try {
    ModelSpec{kind, hp, 0}.resolved();
  } catch (const Error& e) {
    throw Error(ErrorCode::ConfigError, e.what());
  }
  return hp;
}

HyperparameterGrid grid_for(const RunConfig& cfg, ModelKind kind) {
  const auto axes_cfg = cfg.with_prefix("grid." + std::string(model_kind_key(kind)) + ".");
  if (axes_cfg.empty()) return default_grid(kind);
  std::vector<std::pair<std::string, std::vector<double>>> axes;
  for (const auto& [name, list] : axes_cfg) {
    std::vector<double> values;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto v = csv::parse_double(csv::trim(item));
      if (!v) throw Error(ErrorCode::ConfigError, "grid value '" + item + "' is not a number");
      values.push_back(*v);
    }
    axes.emplace_back(name, std::move(values));
  }
  HyperparameterGrid grid = grid_product(axes);
  if (grid.size() > 50) throw Error(ErrorCode::ConfigError, "tuning grid exceeds 50 points");
  try {
    for (const auto& point : grid) (void)ModelSpec{kind, point, 0}.resolved();
  } catch (const Error& e) {
    throw Error(ErrorCode::ConfigError, e.what());
  }
  return grid;
}

fs::path model_path(const Context& ctx, ModelKind kind, Indicator ind, RegimeKind regime) {
  return ctx.dir() / "models" /
         (std::string(model_kind_key(kind)) + "_" + std::string(indicator_key(ind)) + "_" +
          std::string(regime_key(regime)) + ".model");
}

fs::path train_csv(const Context& ctx) { return ctx.dir() / "train.csv"; }
fs::path test_csv(const Context& ctx) { return ctx.dir() / "test.csv"; }

// Tune (when enabled), fit on the whole design and attach a CV RMSE.
TrainedModel train_model(const Context& ctx, ModelKind kind, const DesignMatrix& dm) {
  ModelSpec spec{kind, hyperparameters_for(ctx.cfg, kind), ctx.seed()};
  const auto folds = static_cast<std::size_t>(ctx.cfg.get_int("folds"));
  std::optional<double> cv;
  if (ctx.cfg.get_bool("tune")) {
    const TuneResult tr = tune_detailed(spec, dm.X, dm.y, grid_for(ctx.cfg, kind), folds, ctx.seed(), dm.schema);
    spec = tr.best;
    if (!tr.cv_rmse.empty()) cv = tr.cv_rmse[tr.best_index];
  }
  if (!cv && ctx.cfg.get_bool("cv_score"))
    cv = cross_validated_rmse(spec, dm.X, dm.y, dm.schema, folds, ctx.seed());
  TrainedModel model = fit(spec, dm);
  if (cv) model.set_cv_rmse(*cv);
  return model;
}

// Saved model for the cell, trained on train.csv (and saved) when absent.
TrainedModel obtain_model(const Context& ctx, ModelKind kind, Indicator ind, RegimeKind regime,
                          std::vector<fs::path>* inputs = nullptr) {
  const fs::path path = model_path(ctx, kind, ind, regime);
  if (fs::exists(path)) {
    if (inputs) inputs->push_back(path);
    return load_model(path.string());
  }
  const auto train = read_records(train_csv(ctx), "clean");
  if (inputs) inputs->push_back(train_csv(ctx));
  const DesignMatrix dm = assemble(train, FeatureRegime{regime, ind, encoding(ctx.cfg)});
  TrainedModel model = train_model(ctx, kind, dm);
  fs::create_directories(path.parent_path());
  save_model(path.string(), model);
  return model;
}

void write_text_file(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::FileNotFound, "cannot write " + path.string());
  out << text;
}

// ---- stages ----

int cmd_synth(Context& ctx) {
  synth::SynthSpec spec;
  spec.seed = ctx.seed();
  for (const auto& [k, v] : ctx.cfg.with_prefix("synth.")) {
    try {
      spec.set(k, v);
    } catch (const Error& e) {
      throw Error(ErrorCode::ConfigError, e.what());
    }
  }
  const synth::Dataset data = synth::generate(spec);
  const auto paths = synth::write_dataset(data, ctx.dir() / "synth");
  std::vector<fs::path> outputs;
  for (const auto& [role, p] : paths) outputs.push_back(p);
  write_manifest(ctx.cfg, "synth", {}, outputs);
  ctx.out << "synth: " << data.records.size() << " records from " << spec.n_stations << " stations -> "
          << (ctx.dir() / "synth").string() << '\n';
  return kExitOk;
}

int cmd_ingest(Context& ctx) {
  const fs::path data = ctx.cfg.input_path("data");
  require_file(data, ctx.cfg.get("data").empty() ? "synth" : "");
  IngestOptions opt;
  std::vector<fs::path> inputs{data};
  if (!ctx.cfg.get("schema").empty()) {
    require_file(ctx.cfg.get("schema"), "");
    opt.schema = ColumnSchema::load(ctx.cfg.get("schema"));
    inputs.emplace_back(ctx.cfg.get("schema"));
  }
  IngestResult res = parse_csv(data, opt);
  res.records = merge_duplicate_stations(std::move(res.records), &res.report);
  fs::create_directories(ctx.dir());
  const fs::path records = ctx.dir() / "records.csv";
  const fs::path report = ctx.dir() / "ingest_report.json";
  write_records_csv(records, res.records);
  write_text_file(report, res.report.to_json() + "\n");
  write_manifest(ctx.cfg, "ingest", inputs, {records, report});
  ctx.out << "ingest: kept " << res.report.rows_kept << " of " << res.report.rows_read << " rows ("
          << res.report.corrections() << " corrections) -> " << records.string() << '\n';
  return kExitOk;
}

struct GeoInputs {
  geo::Coastline coast;
  geo::ClimateRaster raster;
  std::vector<fs::path> files;
};

GeoInputs load_geo(const Context& ctx) {
  const fs::path coast = ctx.cfg.input_path("coastline");
  const fs::path grid = ctx.cfg.input_path("climate_raster");
  const fs::path legend = ctx.cfg.input_path("climate_legend");
  for (const auto& [p, key] : {std::pair{coast, "coastline"}, {grid, "climate_raster"}, {legend, "climate_legend"}})
    require_file(p, ctx.cfg.get(key).empty() ? "synth" : "");
  return GeoInputs{geo::Coastline::load(coast), geo::ClimateRaster::load(grid, legend), {coast, grid, legend}};
}

int cmd_enrich(Context& ctx) {
  const fs::path in = ctx.dir() / "records.csv";
  auto records = read_records(in, "ingest");
  GeoInputs g = load_geo(ctx);
  const auto radius = static_cast<int>(ctx.cfg.get_int("search_radius"));
  records = geo::enrich(std::move(records), g.coast, g.raster, radius);
  const fs::path out = ctx.dir() / "enriched.csv";
  write_records_csv(out, records);
  g.files.insert(g.files.begin(), in);
  write_manifest(ctx.cfg, "enrich", g.files, {out});
  ctx.out << "enrich: " << records.size() << " records -> " << out.string() << '\n';
  return kExitOk;
}

int cmd_clean(Context& ctx) {
  const fs::path in = ctx.dir() / "enriched.csv";
  const auto records = read_records(in, "enrich");
  const OutlierResult o = filter_outliers(records);
  const SplitResult s = split(o.kept, ctx.cfg.get_double("split_ratio"), ctx.seed());
  const fs::path cleaned = ctx.dir() / "cleaned.csv";
  const fs::path bounds = ctx.dir() / "outlier_bounds.csv";
  write_records_csv(cleaned, o.kept);
  {
    std::ostringstream os;
    write_outlier_bounds_csv(os, o.bounds);
    write_text_file(bounds, os.str());
  }
  write_records_csv(train_csv(ctx), s.train);
  write_records_csv(test_csv(ctx), s.test);
  write_manifest(ctx.cfg, "clean", {in}, {cleaned, bounds, train_csv(ctx), test_csv(ctx)});
  ctx.out << "clean: removed " << o.removed.size() << " outlier records; train " << s.train.size()
          << ", test " << s.test.size() << '\n';
  return kExitOk;
}

struct CellSpec {
  ModelKind model;
  Indicator ind;
  RegimeKind regime;
};

std::vector<CellSpec> selected_cells(const RunConfig& cfg) {
  std::vector<CellSpec> cells;
  for (ModelKind m : parse_models(cfg.get_list("models")))
    for (Indicator i : parse_targets(cfg.get_list("targets")))
      for (RegimeKind r : parse_regimes(cfg.get_list("regimes"))) cells.push_back({m, i, r});
  return cells;
}

int cmd_train(Context& ctx) {
  const auto train = read_records(train_csv(ctx), "clean");
  const auto cells = selected_cells(ctx.cfg);
  const ClimateEncoding enc = encoding(ctx.cfg);
  std::map<std::pair<Indicator, RegimeKind>, DesignMatrix> designs;
  for (const auto& c : cells)
    if (!designs.count({c.ind, c.regime})) designs[{c.ind, c.regime}] = assemble(train, FeatureRegime{c.regime, c.ind, enc});

  std::vector<fs::path> outputs(cells.size());
  std::vector<std::string> failures(cells.size());
  parallel_for(cells.size(), [&](std::size_t k) {
    const CellSpec& c = cells[k];
    try {
      const TrainedModel m = train_model(ctx, c.model, designs.at({c.ind, c.regime}));
      outputs[k] = model_path(ctx, c.model, c.ind, c.regime);
      fs::create_directories(outputs[k].parent_path());
      save_model(outputs[k].string(), m);
    } catch (const std::exception& e) {
      failures[k] = e.what();
    }
  });
  std::vector<fs::path> written;
  int failed = 0;
  for (std::size_t k = 0; k < cells.size(); ++k) {
    if (!failures[k].empty()) {
      ++failed;
      ctx.out << "train: " << model_kind_label(cells[k].model) << ' ' << indicator_key(cells[k].ind) << ' '
              << regime_label(cells[k].regime) << " failed: " << failures[k] << '\n';
    } else {
      written.push_back(outputs[k]);
    }
  }
  write_manifest(ctx.cfg, "train", {train_csv(ctx)}, written);
  ctx.out << "train: " << written.size() << " models -> " << (ctx.dir() / "models").string() << '\n';
  return failed == 0 ? kExitOk : kExitModule;
}

int cmd_evaluate(Context& ctx) {
  const auto repeats = static_cast<std::size_t>(ctx.cfg.get_int("repeats"));
  EvaluationReport report;
  std::vector<fs::path> inputs;
  if (repeats > 1) {
    const fs::path cleaned = ctx.dir() / "cleaned.csv";
    const auto records = read_records(cleaned, "clean");
    inputs.push_back(cleaned);
    ComparisonConfig cc;
    cc.models = parse_models(ctx.cfg.get_list("models"));
    cc.targets = parse_targets(ctx.cfg.get_list("targets"));
    cc.regimes = parse_regimes(ctx.cfg.get_list("regimes"));
    cc.climate_encoding = encoding(ctx.cfg);
    cc.seed = ctx.seed();
    cc.tune = ctx.cfg.get_bool("tune");
    cc.folds = static_cast<std::size_t>(ctx.cfg.get_int("folds"));
    for (ModelKind m : cc.models) {
      cc.hyperparameters[m] = hyperparameters_for(ctx.cfg, m);
      cc.grids[m] = grid_for(ctx.cfg, m);
    }
    report = run_comparison_repeated(records, ctx.cfg.get_double("split_ratio"), cc, repeats);
  } else {
    const auto test = read_records(test_csv(ctx), "clean");
    inputs.push_back(test_csv(ctx));
    const auto cells = selected_cells(ctx.cfg);
    const ClimateEncoding enc = encoding(ctx.cfg);
    std::map<std::pair<Indicator, RegimeKind>, DesignMatrix> designs;
    for (const auto& c : cells)
      if (!designs.count({c.ind, c.regime})) designs[{c.ind, c.regime}] = assemble(test, FeatureRegime{c.regime, c.ind, enc});
    report.entries.resize(cells.size());
    std::vector<std::vector<fs::path>> used(cells.size());
    parallel_for(cells.size(), [&](std::size_t k) {
      const CellSpec& c = cells[k];
      CellResult& r = report.entries[k];
      r.model = c.model;
      r.indicator = c.ind;
      r.regime = c.regime;
      r.seed = ctx.seed();
      const DesignMatrix& dm = designs.at({c.ind, c.regime});
      r.n_test = static_cast<std::size_t>(dm.y.size());
      try {
        const TrainedModel m = obtain_model(ctx, c.model, c.ind, c.regime, &used[k]);
        const Eigen::VectorXd pred = m.predict(dm);
        r.rmse = rmse(pred, dm.y);
        r.cv_rmse = m.summary().cv_rmse;
        try {
          r.r2 = r_squared(pred, dm.y);
        } catch (const Error& e) {
          if (e.code() != ErrorCode::ZeroVariance) throw;
          r.r2 = std::nan("");
        }
      } catch (const Error& e) {
        if (e.code() == ErrorCode::StageInputMissing) throw;
        r.error = e.what();
        r.rmse = r.r2 = std::nan("");
      }
    });
    std::set<fs::path> uniq;
    for (const auto& u : used) uniq.insert(u.begin(), u.end());
    inputs.insert(inputs.end(), uniq.begin(), uniq.end());
  }
  const fs::path csv_path = ctx.dir() / "report.csv";
  const fs::path txt_path = ctx.dir() / "report.txt";
  {
    std::ostringstream os;
    report.write_csv(os);
    write_text_file(csv_path, os.str());
  }
  {
    std::ostringstream os;
    report.write_text(os, ctx.cfg.get_bool("include_baseline"));
    write_text_file(txt_path, os.str());
  }
  write_manifest(ctx.cfg, "evaluate", inputs, {csv_path, txt_path});
  std::ostringstream table;
  report.write_table(table, Metric::R2);
  ctx.out << "evaluate: " << report.entries.size() << " cells -> " << csv_path.string() << "\nTest-set R^2\n"
          << table.str();
  return kExitOk;
}

// Feature rows for V-D models: companion indicators come from the
// spatio-temporal models of the same kind, labels from the geo inputs.
FeatureRowBuilder companion_builder(const Context& ctx, ModelKind kind, Indicator target,
                                    std::vector<fs::path>& inputs) {
  if (ctx.cfg.get("companion_source") != "models")
    throw Error(ErrorCode::RegimeMismatch,
                "V-D products need companion indicators; set companion_source=models");
  auto companions = std::make_shared<std::vector<TrainedModel>>();
  for (Indicator ind : kAllIndicators)
    if (ind != target) companions->push_back(obtain_model(ctx, kind, ind, RegimeKind::SPATIO_TEMPORAL, &inputs));
  auto g = std::make_shared<GeoInputs>(load_geo(ctx));
  inputs.insert(inputs.end(), g->files.begin(), g->files.end());
  const FeatureRegime regime{RegimeKind::VARIABLE_DEPENDENT, target, encoding(ctx.cfg)};
  const FeatureSchema schema = regime_schema(regime);
  const auto radius = static_cast<int>(ctx.cfg.get_int("search_radius"));
  return [companions, g, regime, schema, radius](int month, int year, LatLon p) {
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(static_cast<Eigen::Index>(schema.size()));
    row(0) = month;
    row(1) = year;
    row(2) = p.lat;
    row(3) = p.lon;
    const Eigen::RowVectorXd st = spatio_temporal_row(month, year, p.lat, p.lon);
    Eigen::Index col = 4;
    for (const auto& m : *companions) row(col++) = m.predict(Eigen::MatrixXd(st))(0);
    const KoppenClass climate = geo::lookup_climate(p, g->raster, radius);
    if (regime.climate_encoding == ClimateEncoding::MAJOR) {
      row(col + static_cast<Eigen::Index>(climate.major())) = 1.0;
      col += 3;
    } else if (regime.climate_encoding == ClimateEncoding::SUB) {
      row(col + static_cast<Eigen::Index>(climate.sub)) = 1.0;
      col += 9;
    }
    row(col + static_cast<Eigen::Index>(geo::classify_geotype(p, g->coast))) = 1.0;
    return row;
  };
}

std::string slug(double v) {
  std::string s = csv::format_double(v);
  for (char& c : s)
    if (c == '-') c = 'm';
  return s;
}

int cmd_interpolate(Context& ctx) {
  const ModelKind kind = parse_model_kind(ctx.cfg.get("interpolate_model"));
  const auto targets = parse_targets(ctx.cfg.get_list("interpolate_targets"));
  const RegimeKind regime = parse_regime(ctx.cfg.get("interpolate_regime"));
  const int month = static_cast<int>(ctx.cfg.get_int("interpolate_month"));
  const int year = static_cast<int>(ctx.cfg.get_int("interpolate_year"));
  if (month < 1 || month > 12) throw Error(ErrorCode::ConfigError, "interpolate_month must be 1..12");
  const double res = ctx.cfg.get_double("grid_resolution");

  const fs::path region_path = ctx.cfg.input_path("region");
  require_file(region_path, ctx.cfg.get("region").empty() ? "synth" : "");
  const geo::Polygon region = geo::Polygon::load(region_path);
  const RegionBox box;
  const BoundingBox bbox{box.lat_min, box.lat_max, box.lon_min, box.lon_max};

  std::vector<fs::path> inputs{region_path};
  std::vector<fs::path> outputs;
  for (Indicator ind : targets) {
    const TrainedModel model = obtain_model(ctx, kind, ind, regime, &inputs);
    FeatureRowBuilder builder;
    if (regime == RegimeKind::VARIABLE_DEPENDENT) builder = companion_builder(ctx, kind, ind, inputs);
    const GridProduct g = interpolate_grid(model, bbox, res, month, year, &region, builder);
    const std::string stem = "grid_" + std::string(model_kind_key(kind)) + "_" + std::string(indicator_key(ind)) +
                             "_" + std::string(regime_key(regime)) + "_" + std::to_string(year) + "_" +
                             (month < 10 ? "0" : "") + std::to_string(month);
    const fs::path csv_path = ctx.dir() / (stem + ".csv");
    const fs::path asc_path = ctx.dir() / (stem + ".asc");
    g.write_csv(csv_path);
    g.write_asc(asc_path);
    outputs.push_back(csv_path);
    outputs.push_back(asc_path);
    ctx.out << "interpolate: " << indicator_label(ind) << ' ' << g.rows() << 'x' << g.cols() << " grid -> "
            << csv_path.string() << '\n';
  }
  write_manifest(ctx.cfg, "interpolate", inputs, outputs);
  return kExitOk;
}

std::vector<LatLon> station_locations(const std::vector<SampleRecord>& records) {
  std::set<std::pair<double, double>> seen;
  std::vector<LatLon> out;
  for (const auto& r : records)
    if (seen.insert({r.latitude, r.longitude}).second) out.push_back(r.location());
  return out;
}

int cmd_forecast(Context& ctx) {
  const ModelKind kind = parse_model_kind(ctx.cfg.get("forecast_model"));
  const auto targets = parse_targets(ctx.cfg.get_list("forecast_targets"));
  const LatLon where{ctx.cfg.get_double("forecast_lat"), ctx.cfg.get_double("forecast_lon")};
  ForecastOptions opt;
  opt.start_year = static_cast<int>(ctx.cfg.get_int("forecast_start"));
  opt.end_year = static_cast<int>(ctx.cfg.get_int("forecast_end"));
  if (opt.start_year > opt.end_year) throw Error(ErrorCode::ConfigError, "forecast_start after forecast_end");
  try {
    opt.band = parse_band_method(ctx.cfg.get("band_method"));
  } catch (const Error& e) {
    throw Error(ErrorCode::ConfigError, e.what());
  }
  opt.bootstrap_samples = static_cast<std::size_t>(ctx.cfg.get_int("bootstrap_samples"));
  opt.statewide_max = static_cast<std::size_t>(ctx.cfg.get_int("statewide_max"));
  opt.seed = ctx.seed();

  const auto train = read_records(train_csv(ctx), "clean");
  opt.stations = station_locations(train);
  std::vector<fs::path> inputs{train_csv(ctx)};
  std::vector<fs::path> outputs;
  for (Indicator ind : targets) {
    const TrainedModel model = obtain_model(ctx, kind, ind, RegimeKind::SPATIO_TEMPORAL, &inputs);
    DesignMatrix dm;
    if (opt.band == BandMethod::BOOTSTRAP) {
      dm = assemble(train, FeatureRegime{RegimeKind::SPATIO_TEMPORAL, ind, encoding(ctx.cfg)});
      opt.train_X = &dm.X;
      opt.train_y = &dm.y;
    }
    const ForecastSeries s = forecast_point(model, where, opt);
    const fs::path path = ctx.dir() / ("forecast_" + std::string(model_kind_key(kind)) + "_" +
                                       std::string(indicator_key(ind)) + "_" + slug(where.lat) + "_" +
                                       slug(where.lon) + ".csv");
    s.write_csv(path);
    outputs.push_back(path);
    ctx.out << "forecast: " << indicator_label(ind) << ' ' << s.rows.size() << " months -> " << path.string() << '\n';
  }
  write_manifest(ctx.cfg, "forecast", inputs, outputs);
  return kExitOk;
}

int cmd_importance(Context& ctx) {
  const ModelKind kind = parse_model_kind(ctx.cfg.get("importance_model"));
  const auto targets = parse_targets(ctx.cfg.get_list("importance_target"));
  const RegimeKind regime = parse_regime(ctx.cfg.get("importance_regime"));
  std::vector<std::string> methods = ctx.cfg.get_list("importance_method");
  if (methods.size() == 1 && methods[0] == "both") methods = {"gain", "permutation"};
  std::vector<fs::path> inputs;
  std::vector<fs::path> outputs;
  for (Indicator ind : targets) {
    const TrainedModel model = obtain_model(ctx, kind, ind, regime, &inputs);
    for (const auto& method : methods) {
      ImportanceReport rep;
      if (method == "gain") {
        rep = importance_gain(model);
      } else if (method == "permutation") {
        const auto test = read_records(test_csv(ctx), "clean");
        inputs.push_back(test_csv(ctx));
        const DesignMatrix dm = assemble(test, FeatureRegime{regime, ind, encoding(ctx.cfg)});
        rep = importance_permutation(model, dm.X, dm.y, ctx.seed(),
                                     static_cast<std::size_t>(ctx.cfg.get_int("importance_repeats")));
      } else {
        throw Error(ErrorCode::ConfigError, "unknown importance method '" + method + "'");
      }
      const fs::path path = ctx.dir() / ("importance_" + method + "_" + std::string(model_kind_key(kind)) + "_" +
                                         std::string(indicator_key(ind)) + "_" + std::string(regime_key(regime)) +
                                         ".csv");
      rep.write_csv(path);
      outputs.push_back(path);
      ctx.out << "importance (" << method << ", " << indicator_label(ind) << "):";
      for (const auto& e : rep.entries) ctx.out << ' ' << e.feature << '=' << csv::format_double(e.importance);
      ctx.out << '\n';
    }
  }
  write_manifest(ctx.cfg, "importance", inputs, outputs);
  return kExitOk;
}

}  // namespace

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Water-quality modelling toolkit: synthetic data, preprocessing, six regression models, "
               "comparison reports, maps, forecasts and feature importance."};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1, 1);
  app.fallthrough();

  std::string config_path;
  std::vector<std::string> sets;
  int jobs = -1;
  app.add_option("--config", config_path, "Config file (default: $WQST_CONFIG)");
  app.add_option("--set", sets, "Override a config key (key=value); repeatable")->allow_extra_args(false);
  app.add_option("--jobs", jobs, "Worker thread cap (0 = all cores)");

  // Subcommand flags are translated into config overrides.
  std::vector<std::pair<std::string, std::string>> flag_sets;
  std::map<std::string, std::string> opt_values;
  auto opt = [&](CLI::App* sub, const std::string& flag, const std::string& key, const std::string& help) {
    sub->add_option(flag, opt_values[key], help);
  };

  CLI::App* synth_cmd = app.add_subcommand("synth", "Generate a synthetic dataset and geography");
  opt(synth_cmd, "--stations", "synth.n_stations", "Number of stations");
  opt(synth_cmd, "--samples", "synth.samples_per_station", "Samples per station");

  CLI::App* ingest_cmd = app.add_subcommand("ingest", "Parse and validate the raw CSV");
  opt(ingest_cmd, "--data", "data", "Raw CSV path");
  opt(ingest_cmd, "--schema", "schema", "Column-name mapping file");

  CLI::App* enrich_cmd = app.add_subcommand("enrich", "Attach climate zone and coastal/inland labels");
  opt(enrich_cmd, "--coastline", "coastline", "Coastline lon,lat CSV");
  opt(enrich_cmd, "--climate-raster", "climate_raster", "Climate ASCII grid");
  opt(enrich_cmd, "--climate-legend", "climate_legend", "Climate legend CSV");

  CLI::App* clean_cmd = app.add_subcommand("clean", "Remove outliers and split train/test");
  opt(clean_cmd, "--split-ratio", "split_ratio", "Training fraction");

  CLI::App* train_cmd = app.add_subcommand("train", "Tune and fit models on the training split");
  CLI::App* eval_cmd = app.add_subcommand("evaluate", "Score models on the test split and write the report");
  for (CLI::App* sub : {train_cmd, eval_cmd}) {
    opt(sub, "--models", "models", "Model kinds (comma list or all)");
    opt(sub, "--targets", "targets", "Indicators (comma list or all)");
    opt(sub, "--regimes", "regimes", "Regimes: st, vd");
    opt(sub, "--folds", "folds", "Cross-validation folds");
    sub->add_flag_callback("--no-tune", [&]() { flag_sets.emplace_back("tune", "false"); }, "Skip tuning");
  }
  opt(eval_cmd, "--repeats", "repeats", "Average over this many seeded splits");

  CLI::App* interp_cmd = app.add_subcommand("interpolate", "Predict a masked grid for one month");
  opt(interp_cmd, "--model", "interpolate_model", "Model kind");
  opt(interp_cmd, "--indicator", "interpolate_targets", "Indicators (comma list or all)");
  opt(interp_cmd, "--month", "interpolate_month", "Month 1-12");
  opt(interp_cmd, "--year", "interpolate_year", "Year");
  opt(interp_cmd, "--resolution", "grid_resolution", "Cell size in degrees");
  opt(interp_cmd, "--regime", "interpolate_regime", "st (default) or vd");
  opt(interp_cmd, "--companion-source", "companion_source", "none or models");

  CLI::App* fc_cmd = app.add_subcommand("forecast", "Monthly forecast with a 95% band at one location");
  opt(fc_cmd, "--model", "forecast_model", "Model kind");
  opt(fc_cmd, "--indicator", "forecast_targets", "Indicators (comma list or all)");
  opt(fc_cmd, "--lat", "forecast_lat", "Latitude");
  opt(fc_cmd, "--lon", "forecast_lon", "Longitude");
  opt(fc_cmd, "--start", "forecast_start", "First year");
  opt(fc_cmd, "--end", "forecast_end", "Last year");
  opt(fc_cmd, "--band-method", "band_method", "residual or bootstrap");
  opt(fc_cmd, "--bootstrap-samples", "bootstrap_samples", "Refits for the bootstrap band");

  CLI::App* imp_cmd = app.add_subcommand("importance", "Feature importance report");
  opt(imp_cmd, "--model", "importance_model", "Model kind");
  opt(imp_cmd, "--indicator", "importance_target", "Indicators (comma list or all)");
  opt(imp_cmd, "--regime", "importance_regime", "st or vd");
  opt(imp_cmd, "--method", "importance_method", "gain, permutation or both");
  opt(imp_cmd, "--repeats", "importance_repeats", "Permutation repeats");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    Context ctx{RunConfig{}, out};
    if (config_path.empty()) {
      if (const char* env = std::getenv("WQST_CONFIG"); env && *env) config_path = env;
    }
    if (!config_path.empty()) ctx.cfg.load_file(config_path);
    for (const auto& s : sets) ctx.cfg.set(s);
    for (const auto& [k, v] : opt_values)
      if (!v.empty()) ctx.cfg.set(k, v);
    for (const auto& [k, v] : flag_sets) ctx.cfg.set(k, v);
    if (jobs >= 0) ctx.cfg.set("jobs", std::to_string(jobs));
    if (ctx.cfg.get_int("jobs") < 0) throw Error(ErrorCode::ConfigError, "jobs must be >= 0");
    set_max_threads(static_cast<unsigned>(ctx.cfg.get_int("jobs")));
    (void)ctx.seed();
    for (ModelKind kind : kAllModelKinds) {
      (void)hyperparameters_for(ctx.cfg, kind);
      (void)grid_for(ctx.cfg, kind);
    }

    const std::string name = app.get_subcommands().front()->get_name();
    if (name == "synth") return cmd_synth(ctx);
    if (name == "ingest") return cmd_ingest(ctx);
    if (name == "enrich") return cmd_enrich(ctx);
    if (name == "clean") return cmd_clean(ctx);
    if (name == "train") return cmd_train(ctx);
    if (name == "evaluate") return cmd_evaluate(ctx);
    if (name == "interpolate") return cmd_interpolate(ctx);
    if (name == "forecast") return cmd_forecast(ctx);
    if (name == "importance") return cmd_importance(ctx);
    err << "unknown subcommand " << name << '\n';
    return kExitConfig;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    switch (e.code()) {
      case ErrorCode::ConfigError: return kExitConfig;
      case ErrorCode::StageInputMissing: return kExitStageInput;
      default: return kExitModule;
    }
  } catch (const std::exception& e) {
    err << "unexpected error: " << e.what() << '\n';
    return kExitUnexpected;
  }
}

}  // namespace wqst::cli
