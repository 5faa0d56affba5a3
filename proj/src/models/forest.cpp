#include <cmath>
#include <istream>
#include <ostream>

#include "wqst/csv.hpp"
#include "wqst/error.hpp"
#include "wqst/models/artifact_io.hpp"
#include "wqst/models/tree.hpp"
#include "wqst/parallel.hpp"

namespace wqst {

Eigen::VectorXd RandomForestState::predict(const Eigen::MatrixXd& X) const {
  Eigen::VectorXd out(X.rows());
  const double t = static_cast<double>(trees_.size());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    // Mean about the first tree's output, so identical trees average exactly.
    const double p0 = trees_.front().predict_row(X, i);
    double s = 0.0;
    for (std::size_t k = 1; k < trees_.size(); ++k) s += trees_[k].predict_row(X, i) - p0;
    out(i) = p0 + s / t;
  }
  return out;
}

std::vector<double> RandomForestState::gain_per_feature() const {
  std::vector<double> g(p_, 0.0);
  for (const auto& tree : trees_) tree.accumulate_gain(g);
  return g;
}

void RandomForestState::save(std::ostream& out) const {
  detail::artifact::put(out, "features", static_cast<std::int64_t>(p_));
  detail::artifact::put(out, "trees", static_cast<std::int64_t>(trees_.size()));
  for (const auto& tree : trees_) tree.save(out);
}

std::shared_ptr<const RandomForestState> RandomForestState::load(std::istream& in) {
  const auto p = detail::artifact::get_int(in, "features");
  const auto count = detail::artifact::get_int(in, "trees");
  if (p < 0 || count <= 0) throw Error(ErrorCode::ParseError, "bad forest header");
  std::vector<RegressionTree> trees;
  trees.reserve(static_cast<std::size_t>(count));
  for (std::int64_t t = 0; t < count; ++t) trees.push_back(RegressionTree::load(in));
  return std::make_shared<const RandomForestState>(std::move(trees), static_cast<std::size_t>(p));
}

TrainedModel fit_random_forest(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                               const ModelSpec& spec, const FeatureSchema& schema_in) {
  if (spec.kind != ModelKind::RANDOM_FOREST)
    throw Error(ErrorCode::UnsupportedModelKind, "fit_random_forest called with another kind");
  const Hyperparameters hp = spec.resolved();
  detail::check_training_data(X, y, 1);
  FeatureSchema schema = detail::schema_or_numeric(schema_in, X.cols());
  const auto n = static_cast<std::size_t>(X.rows());
  const auto p = static_cast<std::size_t>(X.cols());

  const auto n_trees = static_cast<std::size_t>(hp.at("n_trees"));
  const bool bootstrap = hp.at("bootstrap") != 0.0;
  TreeParams params;
  params.max_depth = static_cast<int>(hp.at("max_depth"));
  params.min_samples_leaf = static_cast<std::size_t>(hp.at("min_samples_leaf"));
  params.lambda = 0.0;
  const auto mtry = static_cast<std::size_t>(hp.at("max_features"));
  params.features_per_node = mtry == 0 ? (p + 2) / 3 : std::min(mtry, p);

  const FeatureBins bins = FeatureBins::fit(X, static_cast<std::size_t>(hp.at("max_bins")));
  const std::vector<std::uint16_t> codes = bins.encode(X);
  std::vector<std::size_t> allowed(p);
  for (std::size_t f = 0; f < p; ++f) allowed[f] = f;

  std::vector<RegressionTree> trees(n_trees);
  parallel_for(n_trees, [&](std::size_t t) {
    Rng rng(mix_seed(spec.seed, t));
    std::vector<std::uint32_t> rows(n);
    for (std::size_t i = 0; i < n; ++i)
      rows[i] = static_cast<std::uint32_t>(bootstrap ? rng.uniform_index(n) : i);
    trees[t] = build_tree(bins, codes, n, y, std::move(rows), allowed, params, rng);
  });

  auto state = std::make_shared<const RandomForestState>(std::move(trees), p);
  TrainingSummary summary{n, detail::rmse_of(state->predict(X), y), std::nullopt};
  return TrainedModel(spec, std::move(schema), state, summary, {});
}

}  // namespace wqst
