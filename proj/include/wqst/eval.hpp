#pragma once

#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wqst/core_types.hpp"
#include "wqst/models/model.hpp"
#include "wqst/models/tune.hpp"

namespace wqst {

// sqrt(mean((pred - obs)^2)). Throws LengthMismatch, EmptyInput.
double rmse(const Eigen::VectorXd& pred, const Eigen::VectorXd& obs);
// 1 - SSres/SStot about mean(obs). Throws LengthMismatch, EmptyInput (fewer
// than two values), ZeroVariance (constant obs).
double r_squared(const Eigen::VectorXd& pred, const Eigen::VectorXd& obs);

enum class Metric : std::uint8_t { RMSE, R2 };

struct CellResult {
  ModelKind model = ModelKind::LINEAR;
  Indicator indicator = Indicator::PH;
  RegimeKind regime = RegimeKind::SPATIO_TEMPORAL;
  double rmse = 0.0;
  double r2 = 0.0;  // NaN when the test targets are constant
  std::size_t n_test = 0;
  std::uint64_t seed = 0;
  Hyperparameters chosen;          // tuned overrides
  std::optional<double> cv_rmse;   // of the chosen point, when tuned
  std::optional<std::string> error;

  double metric(Metric m) const { return m == Metric::RMSE ? rmse : r2; }
};

struct EvaluationReport {
  std::vector<CellResult> entries;  // (model, indicator, regime) order
  std::map<std::string, std::string> metadata;

  const CellResult* find(ModelKind model, Indicator ind, RegimeKind regime) const;

  // Columns: model, indicator, regime, rmse, r2, n_test, seed.
  void write_csv(std::ostream& out) const;
  // Rows are models, column pairs S-T/V-D per indicator; the best value in
  // each column carries a '*'.
  void write_table(std::ostream& out, Metric metric) const;
  // Both metric tables, optionally followed by the published reference values.
  void write_text(std::ostream& out, bool include_baseline) const;
};

struct ComparisonConfig {
  std::vector<ModelKind> models{kAllModelKinds.begin(), kAllModelKinds.end()};
  std::vector<Indicator> targets{kAllIndicators.begin(), kAllIndicators.end()};
  std::vector<RegimeKind> regimes{RegimeKind::SPATIO_TEMPORAL, RegimeKind::VARIABLE_DEPENDENT};
  ClimateEncoding climate_encoding = ClimateEncoding::MAJOR;
  std::uint64_t seed = 0;
  bool tune = true;
  std::size_t folds = 5;
  std::map<ModelKind, Hyperparameters> hyperparameters;  // base overrides per kind
  std::map<ModelKind, HyperparameterGrid> grids;         // absent: default_grid(kind)
  // Called once per successful cell with the model fitted on the full training set.
  std::function<void(const CellResult&, const TrainedModel&)> on_model;
};

// Tune on train (k-fold), fit on all of train, score on test, per cell.
// Model errors are recorded on the cell and do not stop the others.
EvaluationReport run_comparison(const std::vector<SampleRecord>& train,
                                const std::vector<SampleRecord>& test, const ComparisonConfig& cfg);

// Averages rmse and r2 over `repeats` seeded splits of `records`. Repeat 0
// uses cfg.seed; repeat r > 0 uses mix_seed(cfg.seed, r).
EvaluationReport run_comparison_repeated(const std::vector<SampleRecord>& records, double split_ratio,
                                         const ComparisonConfig& cfg, std::size_t repeats);

// Published reference values for the six methods; nullopt when not tabulated.
std::optional<double> published_baseline(ModelKind model, Indicator ind, RegimeKind regime, Metric metric);

}  // namespace wqst
