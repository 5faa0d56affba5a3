#pragma once

#include <vector>

#include "wqst/models/model.hpp"

namespace wqst {

// Each grid point overrides a subset of the base spec's hyperparameters.
using HyperparameterGrid = std::vector<Hyperparameters>;

struct TuneResult {
  ModelSpec best;
  std::size_t best_index = 0;
  std::vector<double> cv_rmse;  // per grid point; empty when the grid has one point
};

// Fold f holds positions [f n / k, (f + 1) n / k) of a seeded permutation.
std::vector<std::vector<std::size_t>> kfold_partition(std::size_t n, std::size_t k, std::uint64_t seed);

// Mean over folds of the held-out RMSE.
double cross_validated_rmse(const ModelSpec& spec, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                            const FeatureSchema& schema, std::size_t k, std::uint64_t seed);

// Grid point with the lowest cross-validated RMSE; ties keep the earlier
// point. A single-point grid is returned without cross-validation. Throws
// EmptyGrid for an empty grid.
TuneResult tune_detailed(const ModelSpec& spec, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                         const HyperparameterGrid& grid, std::size_t k, std::uint64_t seed,
                         const FeatureSchema& schema = {});
ModelSpec tune(const ModelSpec& spec, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
               const HyperparameterGrid& grid, std::size_t k = 5, std::uint64_t seed = 0,
               const FeatureSchema& schema = {});

// Cartesian product of per-name value lists, last name varying fastest.
HyperparameterGrid grid_product(const std::vector<std::pair<std::string, std::vector<double>>>& axes);

// Small built-in grid per model kind (at most 50 points).
HyperparameterGrid default_grid(ModelKind kind);

}  // namespace wqst
