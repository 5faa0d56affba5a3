#include "wqst/models/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "wqst/error.hpp"
#include "wqst/preprocess.hpp"
#include "wqst/random.hpp"

namespace wqst {

namespace {

constexpr double kHuge = 1e300;

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

std::string_view model_kind_key(ModelKind kind) {
  switch (kind) {
    case ModelKind::LINEAR: return "linear";
    case ModelKind::RANDOM_FOREST: return "random_forest";
    case ModelKind::GRADIENT_BOOSTING: return "gradient_boosting";
    case ModelKind::GAUSSIAN_PROCESS: return "gaussian_process";
    case ModelKind::SUPPORT_VECTOR: return "support_vector";
    case ModelKind::ADDITIVE: return "additive";
  }
  return "";
}

std::string_view model_kind_label(ModelKind kind) {
  switch (kind) {
    case ModelKind::LINEAR: return "LM";
    case ModelKind::RANDOM_FOREST: return "RF";
    case ModelKind::GRADIENT_BOOSTING: return "GBT";
    case ModelKind::GAUSSIAN_PROCESS: return "GP";
    case ModelKind::SUPPORT_VECTOR: return "SVM";
    case ModelKind::ADDITIVE: return "GAM";
  }
  return "";
}

ModelKind parse_model_kind(std::string_view text) {
  const std::string t = lower(text);
  if (t == "linear" || t == "lm" || t == "ols") return ModelKind::LINEAR;
  if (t == "random_forest" || t == "rf" || t == "forest") return ModelKind::RANDOM_FOREST;
  if (t == "gradient_boosting" || t == "gbt" || t == "gb" || t == "xgboost" || t == "boosting")
    return ModelKind::GRADIENT_BOOSTING;
  if (t == "gaussian_process" || t == "gp") return ModelKind::GAUSSIAN_PROCESS;
  if (t == "support_vector" || t == "svm" || t == "svr") return ModelKind::SUPPORT_VECTOR;
  if (t == "additive" || t == "gam") return ModelKind::ADDITIVE;
  throw Error(ErrorCode::ConfigError, "unknown model kind '" + std::string(text) + "'");
}

const std::vector<HyperparameterInfo>& hyperparameter_table(ModelKind kind) {
  static const std::vector<HyperparameterInfo> linear = {
      {"fallback_ridge", 1e-8, 0.0, 1.0, false,
       "ridge added to the standardized normal equations when they are singular"},
  };
  static const std::vector<HyperparameterInfo> forest = {
      {"n_trees", 300, 1, 100000, true, "number of trees"},
      {"max_depth", -1, -1, 1000, true, "maximum depth; -1 grows until leaves are pure or minimal"},
      {"min_samples_leaf", 5, 1, 1e9, true, "minimum rows in a leaf"},
      {"max_features", 0, 0, 1e6, true, "features tried per split; 0 means ceil(p/3)"},
      {"bootstrap", 1, 0, 1, true, "sample rows with replacement for each tree"},
      {"max_bins", 256, 2, 65535, true, "histogram bins per feature"},
  };
  static const std::vector<HyperparameterInfo> boosting = {
      {"n_rounds", 500, 0, 1e6, true, "boosting rounds"},
      {"learning_rate", 0.1, 1e-9, 100, false, "shrinkage applied to each tree"},
      {"max_depth", 6, 0, 64, true, "maximum tree depth"},
      {"min_samples_leaf", 5, 1, 1e9, true, "minimum rows in a leaf"},
      {"subsample", 0.8, 1e-9, 1, false, "row fraction drawn without replacement per round"},
      {"colsample", 0.8, 1e-9, 1, false, "column fraction drawn per tree"},
      {"lambda", 1.0, 0, kHuge, false, "L2 penalty on leaf values"},
      {"max_bins", 256, 2, 65535, true, "histogram bins per feature"},
  };
  static const std::vector<HyperparameterInfo> gp = {
      {"max_train_points", 2000, 1, 1e6, true, "seeded subsample cap for the exact posterior"},
      {"tune_points", 500, 1, 1e6, true, "rows used for the marginal-likelihood grid search"},
      {"signal_variance", 0, 0, kHuge, false, "kernel variance; 0 tunes it"},
      {"noise_variance", -1, -1, kHuge, false, "nugget; -1 means 0.01 * var(y)"},
      {"lengthscale", 0, 0, kHuge, false, "shared lengthscale in standardized units; 0 tunes per dimension"},
      {"center_y", 1, 0, 1, true, "subtract mean(y) before fitting"},
  };
  static const std::vector<HyperparameterInfo> svr = {
      {"epsilon", -1, -1, kHuge, false, "insensitive-zone half width; -1 means 0.1 * sd(y)"},
      {"C", 1.0, 1e-12, kHuge, false, "box constraint"},
      {"gamma", 0, 0, kHuge, false, "RBF width; 0 means 1/p"},
      {"tol", 1e-3, 1e-15, 1, false, "stopping tolerance on the maximal KKT violation"},
      {"max_train_points", 5000, 1, 1e7, true, "seeded subsample cap"},
      {"max_iter", 0, 0, 1e15, true, "iteration cap; 0 means max(1e7, 100 * n)"},
      {"cache_mb", 100, 1, 1e6, false, "kernel row cache size"},
  };
  static const std::vector<HyperparameterInfo> additive = {
      {"n_knots", 10, 4, 500, true, "equally spaced knots per numeric feature"},
      {"lambda", 0, 0, kHuge, false, "smoothing penalty; 0 selects per feature by GCV"},
      {"tol", 1e-6, 1e-15, 1, false, "backfitting convergence tolerance (relative to sd(y))"},
      {"max_sweeps", 100, 1, 1e6, true, "backfitting sweep cap"},
  };
  switch (kind) {
    case ModelKind::LINEAR: return linear;
    case ModelKind::RANDOM_FOREST: return forest;
    case ModelKind::GRADIENT_BOOSTING: return boosting;
    case ModelKind::GAUSSIAN_PROCESS: return gp;
    case ModelKind::SUPPORT_VECTOR: return svr;
    case ModelKind::ADDITIVE: return additive;
  }
  return linear;
}

Hyperparameters ModelSpec::resolved() const {
  const auto& table = hyperparameter_table(kind);
  Hyperparameters out;
  for (const auto& info : table) out[info.name] = info.default_value;
  for (const auto& [name, value] : hyperparameters) {
    auto it = std::find_if(table.begin(), table.end(), [&](const auto& i) { return i.name == name; });
    if (it == table.end())
      throw Error(ErrorCode::InvalidHyperparameter,
                  "'" + name + "' is not a " + std::string(model_kind_key(kind)) + " hyperparameter");
    if (!(value >= it->min_value && value <= it->max_value))
      throw Error(ErrorCode::InvalidHyperparameter,
                  name + " = " + std::to_string(value) + " outside [" + std::to_string(it->min_value) +
                      ", " + std::to_string(it->max_value) + "]");
    if (it->integer && std::floor(value) != value)
      throw Error(ErrorCode::InvalidHyperparameter, name + " must be an integer");
    out[name] = value;
  }
  return out;
}

double ModelSpec::get(const std::string& name) const {
  const Hyperparameters r = resolved();
  auto it = r.find(name);
  if (it == r.end()) throw Error(ErrorCode::InvalidHyperparameter, "no hyperparameter '" + name + "'");
  return it->second;
}

TrainedModel::TrainedModel(ModelSpec spec, FeatureSchema schema,
                           std::shared_ptr<const detail::FittedState> state, TrainingSummary summary,
                           std::vector<std::string> warnings)
    : spec_(std::move(spec)),
      schema_(std::move(schema)),
      state_(std::move(state)),
      summary_(summary),
      warnings_(std::move(warnings)) {}

Eigen::VectorXd TrainedModel::predict(const Eigen::MatrixXd& X) const {
  if (static_cast<std::size_t>(X.cols()) != schema_.size())
    throw Error(ErrorCode::ColumnMismatch, "model expects " + std::to_string(schema_.size()) +
                                               " columns, got " + std::to_string(X.cols()));
  return state_->predict(X);
}

Eigen::VectorXd TrainedModel::predict(const DesignMatrix& dm) const {
  if (dm.schema.column_names != schema_.column_names)
    throw Error(ErrorCode::ColumnMismatch, "design matrix columns differ from the training columns");
  return predict(dm.X);
}

TrainedModel fit(const ModelSpec& spec, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                 const FeatureSchema& schema) {
  switch (spec.kind) {
    case ModelKind::LINEAR: return fit_linear(X, y, spec, schema);
    case ModelKind::RANDOM_FOREST: return fit_random_forest(X, y, spec, schema);
    case ModelKind::GRADIENT_BOOSTING: return fit_gradient_boosting(X, y, spec, schema);
    case ModelKind::GAUSSIAN_PROCESS: return fit_gaussian_process(X, y, spec, schema);
    case ModelKind::SUPPORT_VECTOR: return fit_support_vector(X, y, spec, schema);
    case ModelKind::ADDITIVE: return fit_additive(X, y, spec, schema);
  }
  throw Error(ErrorCode::UnsupportedModelKind, "unknown model kind");
}

TrainedModel fit(const ModelSpec& spec, const DesignMatrix& dm) { return fit(spec, dm.X, dm.y, dm.schema); }

namespace detail {

void check_training_data(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, std::size_t min_rows) {
  if (X.rows() != y.size())
    throw Error(ErrorCode::LengthMismatch, "X has " + std::to_string(X.rows()) + " rows, y has " +
                                               std::to_string(y.size()));
  if (static_cast<std::size_t>(X.rows()) < min_rows)
    throw Error(ErrorCode::DegenerateInput, "need at least " + std::to_string(min_rows) +
                                                " training rows, got " + std::to_string(X.rows()));
  if (!X.allFinite() || !y.allFinite())
    throw Error(ErrorCode::DegenerateInput, "training data contains non-finite values");
}

FeatureSchema schema_or_numeric(const FeatureSchema& schema, Eigen::Index p) {
  if (schema.size() == 0 && p > 0) return FeatureSchema::numeric(static_cast<std::size_t>(p));
  if (schema.size() != static_cast<std::size_t>(p))
    throw Error(ErrorCode::ColumnMismatch, "schema names " + std::to_string(schema.size()) +
                                               " columns, X has " + std::to_string(p));
  return schema;
}

double rmse_of(const Eigen::VectorXd& pred, const Eigen::VectorXd& obs) {
  if (obs.size() == 0) return 0.0;
  return std::sqrt((pred - obs).squaredNorm() / static_cast<double>(obs.size()));
}

std::vector<Eigen::Index> subsample_rows(Eigen::Index n, std::size_t cap, std::uint64_t seed) {
  std::vector<Eigen::Index> rows;
  if (static_cast<std::size_t>(n) <= cap) {
    rows.resize(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) rows[static_cast<std::size_t>(i)] = i;
    return rows;
  }
  Rng rng(seed);
  auto perm = rng.permutation(static_cast<std::size_t>(n));
  perm.resize(cap);
  std::sort(perm.begin(), perm.end());
  rows.assign(perm.begin(), perm.end());
  return rows;
}

Standardizer Standardizer::fit(const Eigen::MatrixXd& X) {
  Standardizer s;
  const double n = static_cast<double>(X.rows());
  s.mean = X.colwise().mean();
  s.scale.resize(X.cols());
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    const double var = n > 1 ? (X.col(j).array() - s.mean(j)).square().sum() / (n - 1.0) : 0.0;
    const double sd = std::sqrt(var);
    s.scale(j) = sd > 0.0 ? sd : 1.0;
  }
  return s;
}

Eigen::MatrixXd Standardizer::apply(const Eigen::MatrixXd& X) const {
  return (X.rowwise() - mean).array().rowwise() / scale.array();
}

}  // namespace detail

}  // namespace wqst
