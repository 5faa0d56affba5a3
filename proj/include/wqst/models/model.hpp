#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "wqst/core_types.hpp"

namespace wqst {

struct DesignMatrix;

enum class ModelKind : std::uint8_t {
  LINEAR,
  RANDOM_FOREST,
  GRADIENT_BOOSTING,
  GAUSSIAN_PROCESS,
  SUPPORT_VECTOR,
  ADDITIVE,
};

// Report order: LM, RF, GP, SVM, GAM, gradient boosting.
inline constexpr std::array<ModelKind, 6> kAllModelKinds = {
    ModelKind::LINEAR,         ModelKind::RANDOM_FOREST, ModelKind::GAUSSIAN_PROCESS,
    ModelKind::SUPPORT_VECTOR, ModelKind::ADDITIVE,      ModelKind::GRADIENT_BOOSTING};

std::string_view model_kind_key(ModelKind kind);
std::string_view model_kind_label(ModelKind kind);
// Accepts keys and the usual short names (lm, rf, gbt, xgboost, gp, svm, svr, gam).
ModelKind parse_model_kind(std::string_view text);

using Hyperparameters = std::map<std::string, double>;

struct HyperparameterInfo {
  std::string name;
  double default_value;
  double min_value;
  double max_value;
  bool integer;
  std::string description;
};

const std::vector<HyperparameterInfo>& hyperparameter_table(ModelKind kind);

struct ModelSpec {
  ModelKind kind = ModelKind::LINEAR;
  Hyperparameters hyperparameters;  // overrides; anything absent takes its default
  std::uint64_t seed = 0;

  // Defaults merged with overrides. Throws InvalidHyperparameter for unknown
  // names and out-of-range values.
  Hyperparameters resolved() const;
  double get(const std::string& name) const;
};

struct TrainingSummary {
  std::size_t n_train = 0;
  double in_sample_rmse = 0.0;
  std::optional<double> cv_rmse;
};

namespace detail {

// Kind-specific fitted parameters behind TrainedModel.
class FittedState {
 public:
  virtual ~FittedState() = default;
  virtual ModelKind kind() const = 0;
  virtual Eigen::VectorXd predict(const Eigen::MatrixXd& X) const = 0;
  virtual void save(std::ostream& out) const = 0;
};

}  // namespace detail

class TrainedModel {
 public:
  TrainedModel(ModelSpec spec, FeatureSchema schema, std::shared_ptr<const detail::FittedState> state,
               TrainingSummary summary, std::vector<std::string> warnings);

  ModelKind kind() const { return spec_.kind; }
  const ModelSpec& spec() const { return spec_; }
  const FeatureSchema& schema() const { return schema_; }
  const TrainingSummary& summary() const { return summary_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  void set_cv_rmse(double value) { summary_.cv_rmse = value; }

  // Throws ColumnMismatch when the column count differs from training.
  Eigen::VectorXd predict(const Eigen::MatrixXd& X) const;
  // Also checks column names and order.
  Eigen::VectorXd predict(const DesignMatrix& dm) const;

  template <typename State>
  const State* state_as() const {
    return dynamic_cast<const State*>(state_.get());
  }
  const detail::FittedState& state() const { return *state_; }

 private:
  ModelSpec spec_;
  FeatureSchema schema_;
  std::shared_ptr<const detail::FittedState> state_;
  TrainingSummary summary_;
  std::vector<std::string> warnings_;
};

// Dispatches on spec.kind.
TrainedModel fit(const ModelSpec& spec, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                 const FeatureSchema& schema);
TrainedModel fit(const ModelSpec& spec, const DesignMatrix& dm);

TrainedModel fit_linear(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                        const FeatureSchema& schema = {});
TrainedModel fit_linear(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const ModelSpec& spec,
                        const FeatureSchema& schema = {});
TrainedModel fit_random_forest(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                               const ModelSpec& spec, const FeatureSchema& schema = {});
TrainedModel fit_gradient_boosting(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                   const ModelSpec& spec, const FeatureSchema& schema = {});
TrainedModel fit_gaussian_process(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                  const ModelSpec& spec, const FeatureSchema& schema = {});
TrainedModel fit_support_vector(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                const ModelSpec& spec, const FeatureSchema& schema = {});
TrainedModel fit_additive(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                          const ModelSpec& spec, const FeatureSchema& schema = {});

inline Eigen::VectorXd predict(const TrainedModel& model, const Eigen::MatrixXd& X) {
  return model.predict(X);
}

// Versioned text artifact (kind tag, spec, schema, summary, fitted parameters).
void save_model(std::ostream& out, const TrainedModel& model);
void save_model(const std::string& path, const TrainedModel& model);
TrainedModel load_model(std::istream& in);
TrainedModel load_model(const std::string& path);

// Shared helpers for the fit implementations.
namespace detail {

void check_training_data(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, std::size_t min_rows);
FeatureSchema schema_or_numeric(const FeatureSchema& schema, Eigen::Index p);
double rmse_of(const Eigen::VectorXd& pred, const Eigen::VectorXd& obs);
// Seeded subsample of at most `cap` row indices, ascending. All rows when n <= cap.
std::vector<Eigen::Index> subsample_rows(Eigen::Index n, std::size_t cap, std::uint64_t seed);

// Per-column mean and sd (sd 0 replaced by 1).
struct Standardizer {
  Eigen::RowVectorXd mean;
  Eigen::RowVectorXd scale;

  static Standardizer fit(const Eigen::MatrixXd& X);
  Eigen::MatrixXd apply(const Eigen::MatrixXd& X) const;
};

}  // namespace detail

}  // namespace wqst
