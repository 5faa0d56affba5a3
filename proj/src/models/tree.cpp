#include "wqst/models/tree.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>

#include "wqst/csv.hpp"
#include "wqst/error.hpp"
#include "wqst/models/artifact_io.hpp"

namespace wqst {

FeatureBins FeatureBins::fit(const Eigen::MatrixXd& X, std::size_t max_bins) {
  if (max_bins < 2 || max_bins > std::numeric_limits<std::uint16_t>::max())
    throw Error(ErrorCode::InvalidHyperparameter, "max_bins out of range");
  FeatureBins out;
  out.edges.resize(static_cast<std::size_t>(X.cols()));
  std::vector<double> col(static_cast<std::size_t>(X.rows()));
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    for (Eigen::Index i = 0; i < X.rows(); ++i) col[static_cast<std::size_t>(i)] = X(i, j);
    std::sort(col.begin(), col.end());
    std::vector<double> uniq = col;
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    auto& e = out.edges[static_cast<std::size_t>(j)];
    if (uniq.size() <= max_bins) {
      e = std::move(uniq);
      continue;
    }
    const std::size_t n = col.size();
    for (std::size_t k = 1; k <= max_bins; ++k) {
      const std::size_t pos = (k * n + max_bins - 1) / max_bins - 1;  // ceil(k n / B) - 1
      const double v = col[std::min(pos, n - 1)];
      if (e.empty() || v > e.back()) e.push_back(v);
    }
    if (e.back() < col.back()) e.push_back(col.back());
  }
  return out;
}

std::vector<std::uint16_t> FeatureBins::encode(const Eigen::MatrixXd& X) const {
  if (static_cast<std::size_t>(X.cols()) != edges.size())
    throw Error(ErrorCode::ColumnMismatch, "bin encoding column count differs");
  const auto n = static_cast<std::size_t>(X.rows());
  std::vector<std::uint16_t> codes(n * edges.size());
  for (std::size_t f = 0; f < edges.size(); ++f) {
    const auto& e = edges[f];
    for (std::size_t i = 0; i < n; ++i) {
      const double x = X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(f));
      codes[f * n + i] =
          static_cast<std::uint16_t>(std::lower_bound(e.begin(), e.end(), x) - e.begin());
    }
  }
  return codes;
}

double RegressionTree::predict_row(const Eigen::MatrixXd& X, Eigen::Index row) const {
  std::size_t k = 0;
  while (nodes_[k].feature >= 0) {
    const TreeNode& nd = nodes_[k];
    k = static_cast<std::size_t>(X(row, nd.feature) <= nd.threshold ? nd.left : nd.right);
  }
  return nodes_[k].value;
}

double RegressionTree::predict_codes(const std::vector<std::uint16_t>& codes, std::size_t n,
                                     std::size_t row) const {
  std::size_t k = 0;
  while (nodes_[k].feature >= 0) {
    const TreeNode& nd = nodes_[k];
    const std::uint16_t c = codes[static_cast<std::size_t>(nd.feature) * n + row];
    k = static_cast<std::size_t>(c <= nd.bin ? nd.left : nd.right);
  }
  return nodes_[k].value;
}

void RegressionTree::accumulate_gain(std::vector<double>& per_feature) const {
  for (const auto& nd : nodes_) {
    if (nd.feature >= 0) per_feature[static_cast<std::size_t>(nd.feature)] += nd.gain;
  }
}

void RegressionTree::save(std::ostream& out) const {
  out << "tree " << nodes_.size() << '\n';
  for (const auto& nd : nodes_) {
    out << nd.feature << ' ' << csv::format_double(nd.threshold) << ' ' << nd.bin << ' ' << nd.left
        << ' ' << nd.right << ' ' << csv::format_double(nd.value) << ' '
        << csv::format_double(nd.gain) << '\n';
  }
}

RegressionTree RegressionTree::load(std::istream& in) {
  const auto count = detail::artifact::get_int(in, "tree");
  if (count <= 0) throw Error(ErrorCode::ParseError, "tree with no nodes");
  std::vector<TreeNode> nodes(static_cast<std::size_t>(count));
  for (auto& nd : nodes) {
    nd.feature = static_cast<std::int32_t>(detail::artifact::parse_token_int(detail::artifact::next_token(in)));
    nd.threshold = detail::artifact::parse_token_double(detail::artifact::next_token(in));
    nd.bin = static_cast<std::uint16_t>(detail::artifact::parse_token_int(detail::artifact::next_token(in)));
    nd.left = static_cast<std::int32_t>(detail::artifact::parse_token_int(detail::artifact::next_token(in)));
    nd.right = static_cast<std::int32_t>(detail::artifact::parse_token_int(detail::artifact::next_token(in)));
    nd.value = detail::artifact::parse_token_double(detail::artifact::next_token(in));
    nd.gain = detail::artifact::parse_token_double(detail::artifact::next_token(in));
  }
  for (const auto& nd : nodes) {
    if (nd.feature >= 0 && (nd.left <= 0 || nd.right <= 0 || nd.left >= count || nd.right >= count))
      throw Error(ErrorCode::ParseError, "tree node has out-of-range children");
  }
  return RegressionTree(std::move(nodes));
}

namespace {

struct Task {
  std::size_t node;
  std::size_t begin;
  std::size_t end;
  int depth;
};

struct Candidate {
  double gain = 0.0;
  std::int32_t feature = -1;
  std::uint16_t bin = 0;
};

class Builder {
 public:
  Builder(const FeatureBins& bins, const std::vector<std::uint16_t>& codes, std::size_t n,
          const Eigen::VectorXd& r, const TreeParams& params)
      : bins_(bins), codes_(codes), n_(n), r_(r), params_(params) {
    std::size_t max_b = 0;
    for (std::size_t f = 0; f < bins.features(); ++f) max_b = std::max(max_b, bins.bins(f));
    sum_.resize(max_b + 1);
    cnt_.resize(max_b + 1);
  }

  double leaf_value(const std::vector<std::uint32_t>& rows, std::size_t b, std::size_t e) const {
    const double count = static_cast<double>(e - b);
    if (params_.lambda == 0.0) {
      // Shifted mean: exact for constant targets.
      const double r0 = r_(rows[b]);
      double s = 0.0;
      for (std::size_t k = b; k < e; ++k) s += r_(rows[k]) - r0;
      return r0 + s / count;
    }
    double s = 0.0;
    for (std::size_t k = b; k < e; ++k) s += r_(rows[k]);
    return s / (count + params_.lambda);
  }

  // Best split of one feature for rows[b, e). Gain is relative to the parent.
  Candidate scan(std::size_t f, const std::vector<std::uint32_t>& rows, std::size_t b,
                 std::size_t e, double total, double shift) {
    const std::size_t nb = bins_.bins(f) + 1;
    std::fill(sum_.begin(), sum_.begin() + static_cast<std::ptrdiff_t>(nb), 0.0);
    std::fill(cnt_.begin(), cnt_.begin() + static_cast<std::ptrdiff_t>(nb), 0u);
    const std::uint16_t* col = codes_.data() + f * n_;
    for (std::size_t k = b; k < e; ++k) {
      const std::uint32_t i = rows[k];
      sum_[col[i]] += r_(i) - shift;
      ++cnt_[col[i]];
    }
    const double n = static_cast<double>(e - b);
    const double lambda = params_.lambda;
    const auto min_leaf = params_.min_samples_leaf;
    Candidate best;
    double gl = 0.0;
    std::size_t nl = 0;
    for (std::size_t bin = 0; bin + 1 < nb; ++bin) {
      if (cnt_[bin] == 0) continue;
      gl += sum_[bin];
      nl += cnt_[bin];
      const std::size_t nr = (e - b) - nl;
      if (nr == 0) break;
      if (nl < min_leaf || nr < min_leaf) continue;
      const double nld = static_cast<double>(nl);
      const double nrd = static_cast<double>(nr);
      const double gr = total - gl;
      double gain;
      if (lambda == 0.0) {
        const double d = gl / nld - gr / nrd;
        gain = nld * nrd / n * d * d;
      } else {
        gain = gl * gl / (nld + lambda) + gr * gr / (nrd + lambda) - total * total / (n + lambda);
      }
      if (gain > best.gain) {
        best.gain = gain;
        best.feature = static_cast<std::int32_t>(f);
        best.bin = static_cast<std::uint16_t>(bin);
      }
    }
    return best;
  }

  RegressionTree run(std::vector<std::uint32_t> rows, const std::vector<std::size_t>& allowed,
                     Rng& rng) {
    std::vector<TreeNode> nodes(1);
    std::vector<Task> stack{{0, 0, rows.size(), 0}};
    std::vector<std::size_t> order = allowed;
    const std::size_t per_node = params_.features_per_node == 0
                                     ? allowed.size()
                                     : std::min(params_.features_per_node, allowed.size());
    while (!stack.empty()) {
      const Task t = stack.back();
      stack.pop_back();
      const std::size_t b = t.begin;
      const std::size_t e = t.end;
      nodes[t.node].value = leaf_value(rows, b, e);

      const bool depth_ok = params_.max_depth < 0 || t.depth < params_.max_depth;
      if (!depth_ok || e - b < 2 * params_.min_samples_leaf || allowed.empty()) continue;

      // Node SSE around the shifted mean; pure nodes stay leaves.
      const double shift = r_(rows[b]);
      double total = 0.0;
      for (std::size_t k = b; k < e; ++k) total += r_(rows[k]) - shift;
      const double mean = total / static_cast<double>(e - b);
      double sse = 0.0;
      for (std::size_t k = b; k < e; ++k) {
        const double d = r_(rows[k]) - shift - mean;
        sse += d * d;
      }
      if (!(sse > 0.0)) continue;
      // With a penalty the gain is not shift invariant; use raw sums then.
      const double s = params_.lambda == 0.0 ? shift : 0.0;
      if (params_.lambda != 0.0) total += shift * static_cast<double>(e - b);

      Candidate best;
      if (per_node < allowed.size()) {
        // Sample features; if none of them can split, keep drawing the rest.
        order = allowed;
        for (std::size_t k = 0; k < order.size(); ++k) {
          const std::size_t j = k + rng.uniform_index(order.size() - k);
          std::swap(order[k], order[j]);
          const Candidate c = scan(order[k], rows, b, e, total, s);
          if (c.feature >= 0 && c.gain > best.gain) best = c;
          if (k + 1 >= per_node && best.feature >= 0) break;
        }
      } else {
        for (std::size_t f : allowed) {
          const Candidate c = scan(f, rows, b, e, total, s);
          if (c.feature >= 0 && c.gain > best.gain) best = c;
        }
      }
      if (best.feature < 0 || !(best.gain > 1e-12 * sse)) continue;

      const std::uint16_t* col = codes_.data() + static_cast<std::size_t>(best.feature) * n_;
      const auto mid_it = std::stable_partition(
          rows.begin() + static_cast<std::ptrdiff_t>(b), rows.begin() + static_cast<std::ptrdiff_t>(e),
          [&](std::uint32_t i) { return col[i] <= best.bin; });
      const auto mid = static_cast<std::size_t>(mid_it - rows.begin());

      TreeNode& nd = nodes[t.node];
      nd.feature = best.feature;
      nd.bin = best.bin;
      nd.threshold = bins_.edges[static_cast<std::size_t>(best.feature)][best.bin];
      nd.gain = best.gain;
      const auto left = static_cast<std::int32_t>(nodes.size());
      nd.left = left;
      nd.right = left + 1;
      nodes.emplace_back();
      nodes.emplace_back();
      stack.push_back({static_cast<std::size_t>(left + 1), mid, e, t.depth + 1});
      stack.push_back({static_cast<std::size_t>(left), b, mid, t.depth + 1});
    }
    return RegressionTree(std::move(nodes));
  }

 private:
  const FeatureBins& bins_;
  const std::vector<std::uint16_t>& codes_;
  std::size_t n_;
  const Eigen::VectorXd& r_;
  TreeParams params_;
  std::vector<double> sum_;
  std::vector<std::uint32_t> cnt_;
};

}  // namespace

RegressionTree build_tree(const FeatureBins& bins, const std::vector<std::uint16_t>& codes,
                          std::size_t n, const Eigen::VectorXd& r, std::vector<std::uint32_t> rows,
                          const std::vector<std::size_t>& allowed, const TreeParams& params, Rng& rng) {
  if (rows.empty()) throw Error(ErrorCode::DegenerateInput, "tree needs at least one row");
  Builder builder(bins, codes, n, r, params);
  return builder.run(std::move(rows), allowed, rng);
}

}  // namespace wqst
