#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include "wqst/error.hpp"
#include "wqst/models/artifact_io.hpp"
#include "wqst/models/tree.hpp"

namespace wqst {

Eigen::VectorXd GradientBoostingState::predict(const Eigen::MatrixXd& X) const {
  Eigen::VectorXd out(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    double f = init_;
    for (const auto& tree : trees_) f += learning_rate_ * tree.predict_row(X, i);
    out(i) = f;
  }
  return out;
}

std::vector<double> GradientBoostingState::gain_per_feature() const {
  std::vector<double> g(p_, 0.0);
  for (const auto& tree : trees_) tree.accumulate_gain(g);
  return g;
}

void GradientBoostingState::save(std::ostream& out) const {
  detail::artifact::put(out, "features", static_cast<std::int64_t>(p_));
  detail::artifact::put(out, "init", init_);
  detail::artifact::put(out, "learning_rate", learning_rate_);
  detail::artifact::put(out, "training_rmse", training_rmse_);
  detail::artifact::put(out, "trees", static_cast<std::int64_t>(trees_.size()));
  for (const auto& tree : trees_) tree.save(out);
}

std::shared_ptr<const GradientBoostingState> GradientBoostingState::load(std::istream& in) {
  const auto p = detail::artifact::get_int(in, "features");
  const double init = detail::artifact::get_double(in, "init");
  const double lr = detail::artifact::get_double(in, "learning_rate");
  std::vector<double> loss = detail::artifact::get_doubles(in, "training_rmse");
  const auto count = detail::artifact::get_int(in, "trees");
  if (p < 0 || count < 0) throw Error(ErrorCode::ParseError, "bad boosting header");
  std::vector<RegressionTree> trees;
  trees.reserve(static_cast<std::size_t>(count));
  for (std::int64_t t = 0; t < count; ++t) trees.push_back(RegressionTree::load(in));
  return std::make_shared<const GradientBoostingState>(init, lr, std::move(trees), std::move(loss),
                                                       static_cast<std::size_t>(p));
}

TrainedModel fit_gradient_boosting(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                   const ModelSpec& spec, const FeatureSchema& schema_in) {
  if (spec.kind != ModelKind::GRADIENT_BOOSTING)
    throw Error(ErrorCode::UnsupportedModelKind, "fit_gradient_boosting called with another kind");
  const Hyperparameters hp = spec.resolved();
  detail::check_training_data(X, y, 2);
  FeatureSchema schema = detail::schema_or_numeric(schema_in, X.cols());
  const auto n = static_cast<std::size_t>(X.rows());
  const auto p = static_cast<std::size_t>(X.cols());

  const auto rounds = static_cast<std::size_t>(hp.at("n_rounds"));
  const double lr = hp.at("learning_rate");
  const double subsample = hp.at("subsample");
  const double colsample = hp.at("colsample");
  TreeParams params;
  params.max_depth = static_cast<int>(hp.at("max_depth"));
  params.min_samples_leaf = static_cast<std::size_t>(hp.at("min_samples_leaf"));
  params.lambda = hp.at("lambda");

  const FeatureBins bins = FeatureBins::fit(X, static_cast<std::size_t>(hp.at("max_bins")));
  const std::vector<std::uint16_t> codes = bins.encode(X);

  double shift_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) shift_sum += y(static_cast<Eigen::Index>(i)) - y(0);
  const double init = y(0) + shift_sum / static_cast<double>(n);

  Eigen::VectorXd pred = Eigen::VectorXd::Constant(X.rows(), init);
  Eigen::VectorXd resid(X.rows());
  std::vector<RegressionTree> trees;
  trees.reserve(rounds);
  std::vector<double> loss{detail::rmse_of(pred, y)};
  loss.reserve(rounds + 1);

  const auto n_rows = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::lround(subsample * static_cast<double>(n))));
  const auto n_cols = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::lround(colsample * static_cast<double>(p))));

  for (std::size_t m = 0; m < rounds; ++m) {
    Rng rng(mix_seed(spec.seed, m));
    resid = y - pred;

    std::vector<std::uint32_t> rows;
    if (n_rows >= n) {
      rows.resize(n);
      for (std::size_t i = 0; i < n; ++i) rows[i] = static_cast<std::uint32_t>(i);
    } else {
      std::vector<std::size_t> perm = rng.permutation(n);
      perm.resize(n_rows);
      std::sort(perm.begin(), perm.end());
      rows.assign(perm.begin(), perm.end());
    }
    std::vector<std::size_t> cols(p);
    for (std::size_t f = 0; f < p; ++f) cols[f] = f;
    if (n_cols < p) {
      rng.shuffle(std::span<std::size_t>(cols));
      cols.resize(n_cols);
      std::sort(cols.begin(), cols.end());
    }

    RegressionTree tree = build_tree(bins, codes, n, resid, std::move(rows), cols, params, rng);
    for (std::size_t i = 0; i < n; ++i)
      pred(static_cast<Eigen::Index>(i)) += lr * tree.predict_codes(codes, n, i);
    loss.push_back(detail::rmse_of(pred, y));
    trees.push_back(std::move(tree));
  }

  auto state = std::make_shared<const GradientBoostingState>(init, lr, std::move(trees),
                                                             std::move(loss), p);
  TrainingSummary summary{n, detail::rmse_of(state->predict(X), y), std::nullopt};
  return TrainedModel(spec, std::move(schema), state, summary, {});
}

}  // namespace wqst
