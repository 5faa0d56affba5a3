#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "wqst/models/model.hpp"
#include "wqst/random.hpp"

namespace wqst {

// Per-feature histogram bins. Bin b holds values in (edges[b-1], edges[b]].
// Features with at most max_bins distinct values get one bin per value;
// otherwise edges are order statistics of the column, so they are always
// observed values and scaling a column by a positive constant scales its
// edges without changing any bin code.
struct FeatureBins {
  std::vector<std::vector<double>> edges;

  static FeatureBins fit(const Eigen::MatrixXd& X, std::size_t max_bins);
  std::size_t features() const { return edges.size(); }
  std::size_t bins(std::size_t f) const { return edges[f].size(); }
  // Column-major n x p codes; values above the last edge get code bins(f).
  std::vector<std::uint16_t> encode(const Eigen::MatrixXd& X) const;
};

struct TreeNode {
  std::int32_t feature = -1;  // -1 for leaves
  double threshold = 0.0;     // go left when x <= threshold
  std::uint16_t bin = 0;      // same split expressed on bin codes
  std::int32_t left = -1;
  std::int32_t right = -1;
  double value = 0.0;  // leaf output
  double gain = 0.0;   // split gain (0 for leaves)
};

class RegressionTree {
 public:
  RegressionTree() = default;
  explicit RegressionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {}

  double predict_row(const Eigen::MatrixXd& X, Eigen::Index row) const;
  // Traversal on bin codes of the training encoding.
  double predict_codes(const std::vector<std::uint16_t>& codes, std::size_t n, std::size_t row) const;

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  void accumulate_gain(std::vector<double>& per_feature) const;

  void save(std::ostream& out) const;
  static RegressionTree load(std::istream& in);

 private:
  std::vector<TreeNode> nodes_;
};

struct TreeParams {
  int max_depth = -1;  // -1 unbounded
  std::size_t min_samples_leaf = 1;
  double lambda = 0.0;
  // Features tried per node; 0 means every allowed feature.
  std::size_t features_per_node = 0;
};

// Grows one tree on `rows` (repeats allowed, e.g. a bootstrap sample) against
// targets r. `allowed` lists the candidate features. The rng is consumed only
// when features_per_node samples a strict subset.
RegressionTree build_tree(const FeatureBins& bins, const std::vector<std::uint16_t>& codes,
                          std::size_t n, const Eigen::VectorXd& r, std::vector<std::uint32_t> rows,
                          const std::vector<std::size_t>& allowed, const TreeParams& params, Rng& rng);

class RandomForestState final : public detail::FittedState {
 public:
  RandomForestState(std::vector<RegressionTree> trees, std::size_t p)
      : trees_(std::move(trees)), p_(p) {}

  ModelKind kind() const override { return ModelKind::RANDOM_FOREST; }
  Eigen::VectorXd predict(const Eigen::MatrixXd& X) const override;
  void save(std::ostream& out) const override;
  static std::shared_ptr<const RandomForestState> load(std::istream& in);

  const std::vector<RegressionTree>& trees() const { return trees_; }
  // Total split gain per feature column, summed over trees in order.
  std::vector<double> gain_per_feature() const;

 private:
  std::vector<RegressionTree> trees_;
  std::size_t p_;
};

class GradientBoostingState final : public detail::FittedState {
 public:
  GradientBoostingState(double init, double learning_rate, std::vector<RegressionTree> trees,
                        std::vector<double> training_rmse, std::size_t p)
      : init_(init),
        learning_rate_(learning_rate),
        trees_(std::move(trees)),
        training_rmse_(std::move(training_rmse)),
        p_(p) {}

  ModelKind kind() const override { return ModelKind::GRADIENT_BOOSTING; }
  Eigen::VectorXd predict(const Eigen::MatrixXd& X) const override;
  void save(std::ostream& out) const override;
  static std::shared_ptr<const GradientBoostingState> load(std::istream& in);

  double initial_prediction() const { return init_; }
  double learning_rate() const { return learning_rate_; }
  const std::vector<RegressionTree>& trees() const { return trees_; }
  // Training RMSE after round m (index 0 is the initial constant).
  const std::vector<double>& training_rmse() const { return training_rmse_; }
  std::vector<double> gain_per_feature() const;

 private:
  double init_;
  double learning_rate_;
  std::vector<RegressionTree> trees_;
  std::vector<double> training_rmse_;
  std::size_t p_;
};

}  // namespace wqst
