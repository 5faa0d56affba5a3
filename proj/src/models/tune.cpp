#include "wqst/models/tune.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "wqst/error.hpp"
#include "wqst/parallel.hpp"
#include "wqst/random.hpp"

namespace wqst {

std::vector<std::vector<std::size_t>> kfold_partition(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw Error(ErrorCode::InvalidSpec, "need at least 2 folds");
  if (n < k)
    throw Error(ErrorCode::TooFewRecords,
                std::to_string(n) + " rows cannot fill " + std::to_string(k) + " folds");
  Rng rng(seed);
  const std::vector<std::size_t> perm = rng.permutation(n);
  std::vector<std::vector<std::size_t>> folds(k);
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t b = f * n / k;
    const std::size_t e = (f + 1) * n / k;
    folds[f].assign(perm.begin() + static_cast<std::ptrdiff_t>(b), perm.begin() + static_cast<std::ptrdiff_t>(e));
    std::sort(folds[f].begin(), folds[f].end());
  }
  return folds;
}

double cross_validated_rmse(const ModelSpec& spec, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                            const FeatureSchema& schema, std::size_t k, std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(X.rows());
  const auto folds = kfold_partition(n, k, seed);
  std::vector<double> scores(k);
  parallel_for(k, [&](std::size_t f) {
    std::vector<char> held(n, 0);
    for (std::size_t i : folds[f]) held[i] = 1;
    const auto n_test = static_cast<Eigen::Index>(folds[f].size());
    const auto n_train = static_cast<Eigen::Index>(n) - n_test;
    Eigen::MatrixXd Xtr(n_train, X.cols());
    Eigen::VectorXd ytr(n_train);
    Eigen::MatrixXd Xte(n_test, X.cols());
    Eigen::VectorXd yte(n_test);
    Eigen::Index a = 0;
    Eigen::Index b = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      if (held[i]) {
        Xte.row(b) = X.row(r);
        yte(b++) = y(r);
      } else {
        Xtr.row(a) = X.row(r);
        ytr(a++) = y(r);
      }
    }
    const TrainedModel m = fit(spec, Xtr, ytr, schema);
    scores[f] = detail::rmse_of(m.predict(Xte), yte);
  });
  double s = 0.0;
  for (double v : scores) s += v;
  return s / static_cast<double>(k);
}

TuneResult tune_detailed(const ModelSpec& spec, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                         const HyperparameterGrid& grid, std::size_t k, std::uint64_t seed,
                         const FeatureSchema& schema) {
  if (grid.empty()) throw Error(ErrorCode::EmptyGrid, "hyperparameter grid is empty");
  auto with_point = [&](const Hyperparameters& point) {
    ModelSpec s = spec;
    for (const auto& [name, value] : point) s.hyperparameters[name] = value;
    s.resolved();  // validate before spending time on it
    return s;
  };
  TuneResult out;
  if (grid.size() == 1) {
    out.best = with_point(grid.front());
    return out;
  }
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const ModelSpec s = with_point(grid[g]);
    double score;
    try {
      score = cross_validated_rmse(s, X, y, schema, k, seed);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::InvalidHyperparameter || e.code() == ErrorCode::TooFewRecords) throw;
      score = std::numeric_limits<double>::infinity();
    }
    if (!std::isfinite(score)) score = std::numeric_limits<double>::infinity();
    out.cv_rmse.push_back(score);
    if (score < best || g == 0) {
      if (score < best) best = score;
      out.best = s;
      out.best_index = g;
    }
  }
  return out;
}

ModelSpec tune(const ModelSpec& spec, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
               const HyperparameterGrid& grid, std::size_t k, std::uint64_t seed,
               const FeatureSchema& schema) {
  return tune_detailed(spec, X, y, grid, k, seed, schema).best;
}

HyperparameterGrid grid_product(const std::vector<std::pair<std::string, std::vector<double>>>& axes) {
  HyperparameterGrid grid{Hyperparameters{}};
  for (const auto& [name, values] : axes) {
    if (values.empty()) throw Error(ErrorCode::EmptyGrid, "no values for " + name);
    HyperparameterGrid next;
    for (const auto& point : grid) {
      for (double v : values) {
        Hyperparameters h = point;
        h[name] = v;
        next.push_back(std::move(h));
      }
    }
    grid = std::move(next);
  }
  return grid;
}

HyperparameterGrid default_grid(ModelKind kind) {
  switch (kind) {
    case ModelKind::RANDOM_FOREST:
      return grid_product({{"min_samples_leaf", {1, 5}}});
    case ModelKind::GRADIENT_BOOSTING:
      return grid_product({{"learning_rate", {0.05, 0.1}}, {"max_depth", {4, 6}}});
    case ModelKind::SUPPORT_VECTOR:
      return grid_product({{"C", {1, 10, 100}}});
    case ModelKind::LINEAR:
    case ModelKind::GAUSSIAN_PROCESS:
    case ModelKind::ADDITIVE:
      break;
  }
  return {Hyperparameters{}};
}

}  // namespace wqst
