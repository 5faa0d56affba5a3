#include "wqst/eval.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "wqst/csv.hpp"
#include "wqst/error.hpp"
#include "wqst/parallel.hpp"
#include "wqst/preprocess.hpp"
#include "wqst/random.hpp"

namespace wqst {

namespace {

void check_pair(const Eigen::VectorXd& pred, const Eigen::VectorXd& obs, Eigen::Index min_size) {
  if (pred.size() != obs.size())
    throw Error(ErrorCode::LengthMismatch, "pred has " + std::to_string(pred.size()) + " values, obs has " +
                                               std::to_string(obs.size()));
  if (obs.size() < min_size)
    throw Error(ErrorCode::EmptyInput, "need at least " + std::to_string(min_size) + " values");
}

std::string fixed(double v, int digits) {
  if (std::isnan(v)) return "NA";
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

}  // namespace

double rmse(const Eigen::VectorXd& pred, const Eigen::VectorXd& obs) {
  check_pair(pred, obs, 1);
  return std::sqrt((pred - obs).squaredNorm() / static_cast<double>(obs.size()));
}

double r_squared(const Eigen::VectorXd& pred, const Eigen::VectorXd& obs) {
  check_pair(pred, obs, 2);
  const double mean = obs.mean();
  const double ss_tot = (obs.array() - mean).square().sum();
  if (!(ss_tot > 0.0)) throw Error(ErrorCode::ZeroVariance, "observations are constant");
  const double ss_res = (pred - obs).squaredNorm();
  return 1.0 - ss_res / ss_tot;
}

const CellResult* EvaluationReport::find(ModelKind model, Indicator ind, RegimeKind regime) const {
  for (const auto& e : entries)
    if (e.model == model && e.indicator == ind && e.regime == regime) return &e;
  return nullptr;
}

void EvaluationReport::write_csv(std::ostream& out) const {
  out << "model,indicator,regime,rmse,r2,n_test,seed\n";
  for (const auto& e : entries) {
    out << model_kind_key(e.model) << ',' << indicator_key(e.indicator) << ',' << regime_key(e.regime) << ',';
    if (e.error) {
      out << "NaN,NaN";
    } else {
      out << csv::format_double(e.rmse) << ',' << csv::format_double(e.r2);
    }
    out << ',' << e.n_test << ',' << e.seed << '\n';
  }
}

namespace {

struct TableLayout {
  std::vector<ModelKind> models;
  std::vector<Indicator> indicators;
  std::vector<RegimeKind> regimes;
};

TableLayout layout_of(const std::vector<CellResult>& entries) {
  TableLayout t;
  for (ModelKind m : kAllModelKinds)
    if (std::any_of(entries.begin(), entries.end(), [&](const CellResult& e) { return e.model == m; }))
      t.models.push_back(m);
  for (Indicator i : kAllIndicators)
    if (std::any_of(entries.begin(), entries.end(), [&](const CellResult& e) { return e.indicator == i; }))
      t.indicators.push_back(i);
  for (RegimeKind r : {RegimeKind::SPATIO_TEMPORAL, RegimeKind::VARIABLE_DEPENDENT})
    if (std::any_of(entries.begin(), entries.end(), [&](const CellResult& e) { return e.regime == r; }))
      t.regimes.push_back(r);
  return t;
}

void render(std::ostream& out, const TableLayout& t, Metric metric,
            const std::function<std::optional<double>(ModelKind, Indicator, RegimeKind)>& value) {
  constexpr int kLabel = 6;
  constexpr int kCell = 11;
  out << std::left << std::setw(kLabel) << "Model";
  for (Indicator ind : t.indicators) {
    std::string head(indicator_label(ind));
    const int width = kCell * static_cast<int>(t.regimes.size());
    if (static_cast<int>(head.size()) > width - 1) head.resize(static_cast<std::size_t>(width - 1));
    out << std::right << std::setw(width) << head;
  }
  out << '\n' << std::left << std::setw(kLabel) << "";
  for (std::size_t i = 0; i < t.indicators.size(); ++i)
    for (RegimeKind r : t.regimes) out << std::right << std::setw(kCell) << regime_label(r);
  out << '\n';

  // Best value per column: lowest RMSE or highest R^2.
  std::map<std::pair<Indicator, RegimeKind>, double> best;
  for (Indicator ind : t.indicators) {
    for (RegimeKind r : t.regimes) {
      std::optional<double> b;
      for (ModelKind m : t.models) {
        const auto v = value(m, ind, r);
        if (!v || std::isnan(*v)) continue;
        if (!b || (metric == Metric::RMSE ? *v < *b : *v > *b)) b = *v;
      }
      if (b) best[{ind, r}] = *b;
    }
  }
  for (ModelKind m : t.models) {
    out << std::left << std::setw(kLabel) << model_kind_label(m);
    for (Indicator ind : t.indicators) {
      for (RegimeKind r : t.regimes) {
        const auto v = value(m, ind, r);
        std::string cell = v ? fixed(*v, 3) : "NA";
        const auto it = best.find({ind, r});
        cell += (v && it != best.end() && *v == it->second) ? "*" : " ";
        out << std::right << std::setw(kCell) << cell;
      }
    }
    out << '\n';
  }
}

}  // namespace

void EvaluationReport::write_table(std::ostream& out, Metric metric) const {
  const TableLayout t = layout_of(entries);
  render(out, t, metric, [&](ModelKind m, Indicator i, RegimeKind r) -> std::optional<double> {
    const CellResult* c = find(m, i, r);
    if (!c || c->error) return std::nullopt;
    return c->metric(metric);
  });
}

void EvaluationReport::write_text(std::ostream& out, bool include_baseline) const {
  const TableLayout t = layout_of(entries);
  out << "Test-set RMSE (target units)\n";
  write_table(out, Metric::RMSE);
  out << "\nTest-set R^2\n";
  write_table(out, Metric::R2);
  bool any_error = false;
  for (const auto& e : entries) any_error = any_error || e.error.has_value();
  if (any_error) {
    out << "\nFailed cells\n";
    for (const auto& e : entries) {
      if (!e.error) continue;
      out << "  " << model_kind_label(e.model) << ' ' << indicator_key(e.indicator) << ' '
          << regime_label(e.regime) << ": " << *e.error << '\n';
    }
  }
  if (!include_baseline) return;
  for (Metric metric : {Metric::RMSE, Metric::R2}) {
    out << "\nPublished reference " << (metric == Metric::RMSE ? "RMSE" : "R^2") << '\n';
    render(out, t, metric, [&](ModelKind m, Indicator i, RegimeKind r) {
      return published_baseline(m, i, r, metric);
    });
  }
}

EvaluationReport run_comparison(const std::vector<SampleRecord>& train,
                                const std::vector<SampleRecord>& test, const ComparisonConfig& cfg) {
  if (train.empty() || test.empty()) throw Error(ErrorCode::EmptyInput, "empty train or test set");
  struct Cell {
    ModelKind model;
    Indicator ind;
    RegimeKind regime;
  };
  std::vector<Cell> cells;
  for (ModelKind m : cfg.models)
    for (Indicator i : cfg.targets)
      for (RegimeKind r : cfg.regimes) cells.push_back({m, i, r});

  // Design matrices are shared by all models of a (target, regime) pair.
  std::map<std::pair<Indicator, RegimeKind>, std::pair<DesignMatrix, DesignMatrix>> designs;
  for (Indicator i : cfg.targets) {
    for (RegimeKind r : cfg.regimes) {
      const FeatureRegime regime{r, i, cfg.climate_encoding};
      designs.emplace(std::make_pair(i, r), std::make_pair(assemble(train, regime), assemble(test, regime)));
    }
  }

  EvaluationReport report;
  report.entries.resize(cells.size());
  parallel_for(cells.size(), [&](std::size_t k) {
    const Cell& c = cells[k];
    CellResult& res = report.entries[k];
    res.model = c.model;
    res.indicator = c.ind;
    res.regime = c.regime;
    res.seed = cfg.seed;
    const auto& [dtr, dte] = designs.at({c.ind, c.regime});
    res.n_test = static_cast<std::size_t>(dte.y.size());
    try {
      ModelSpec spec{c.model, {}, cfg.seed};
      if (auto it = cfg.hyperparameters.find(c.model); it != cfg.hyperparameters.end())
        spec.hyperparameters = it->second;
      if (cfg.tune) {
        const auto git = cfg.grids.find(c.model);
        const HyperparameterGrid grid = git != cfg.grids.end() ? git->second : default_grid(c.model);
        const TuneResult tr = tune_detailed(spec, dtr.X, dtr.y, grid, cfg.folds, cfg.seed, dtr.schema);
        spec = tr.best;
        res.chosen = grid[tr.best_index];
        if (!tr.cv_rmse.empty()) res.cv_rmse = tr.cv_rmse[tr.best_index];
      }
      TrainedModel model = fit(spec, dtr);
      if (res.cv_rmse) model.set_cv_rmse(*res.cv_rmse);
      const Eigen::VectorXd pred = model.predict(dte);
      res.rmse = rmse(pred, dte.y);
      try {
        res.r2 = r_squared(pred, dte.y);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::ZeroVariance && e.code() != ErrorCode::EmptyInput) throw;
        res.r2 = std::numeric_limits<double>::quiet_NaN();
      }
      if (cfg.on_model) cfg.on_model(res, model);
    } catch (const std::exception& e) {
      res.error = e.what();
      res.rmse = std::numeric_limits<double>::quiet_NaN();
      res.r2 = std::numeric_limits<double>::quiet_NaN();
    }
  });
  report.metadata["seed"] = std::to_string(cfg.seed);
  report.metadata["n_train"] = std::to_string(train.size());
  report.metadata["n_test"] = std::to_string(test.size());
  report.metadata["tuned"] = cfg.tune ? "true" : "false";
  report.metadata["folds"] = std::to_string(cfg.folds);
  return report;
}

EvaluationReport run_comparison_repeated(const std::vector<SampleRecord>& records, double split_ratio,
                                         const ComparisonConfig& cfg, std::size_t repeats) {
  if (repeats == 0) throw Error(ErrorCode::InvalidSpec, "repeats must be >= 1");
  EvaluationReport total;
  for (std::size_t r = 0; r < repeats; ++r) {
    const std::uint64_t seed = r == 0 ? cfg.seed : mix_seed(cfg.seed, r);
    const SplitResult s = split(records, split_ratio, seed);
    ComparisonConfig c = cfg;
    c.seed = seed;
    if (r > 0) c.on_model = nullptr;
    EvaluationReport rep = run_comparison(s.train, s.test, c);
    if (r == 0) {
      total = std::move(rep);
      continue;
    }
    for (std::size_t k = 0; k < total.entries.size(); ++k) {
      CellResult& acc = total.entries[k];
      const CellResult& cur = rep.entries[k];
      if (cur.error && !acc.error) acc.error = cur.error;
      acc.rmse += cur.rmse;
      acc.r2 += cur.r2;
    }
  }
  for (auto& e : total.entries) {
    e.rmse /= static_cast<double>(repeats);
    e.r2 /= static_cast<double>(repeats);
    e.seed = cfg.seed;
  }
  total.metadata["seed"] = std::to_string(cfg.seed);
  total.metadata["repeats"] = std::to_string(repeats);
  return total;
}

}  // namespace wqst
