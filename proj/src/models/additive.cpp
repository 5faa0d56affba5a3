#include "wqst/models/additive.hpp"

#include <array>
#include <cmath>
#include <limits>

#include "wqst/error.hpp"
#include "wqst/models/artifact_io.hpp"

namespace wqst {

namespace {

// Relative smoothing grid; lambda = rho * tr(B'B) / tr(P).
constexpr std::array<double, 10> kRhoGrid = {1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3};
constexpr int kSelectionSweeps = 5;

struct LocalBasis {
  std::size_t first;  // index of the first nonzero basis function
  std::array<double, 4> value;
  std::array<double, 4> slope;  // d/dx
};

LocalBasis local_basis(double x, double lo, double h, std::size_t intervals) {
  double u = (x - lo) / h;
  std::size_t s;
  if (u >= static_cast<double>(intervals)) {
    s = intervals - 1;
  } else if (u <= 0.0) {
    s = 0;
  } else {
    s = static_cast<std::size_t>(u);
  }
  const double t = u - static_cast<double>(s);
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double w = 1.0 - t;
  LocalBasis b;
  b.first = s;
  b.value = {w * w * w / 6.0, (3.0 * t3 - 6.0 * t2 + 4.0) / 6.0,
             (-3.0 * t3 + 3.0 * t2 + 3.0 * t + 1.0) / 6.0, t3 / 6.0};
  b.slope = {-w * w / (2.0 * h), (9.0 * t2 - 12.0 * t) / (6.0 * h),
             (-9.0 * t2 + 6.0 * t + 3.0) / (6.0 * h), t2 / (2.0 * h)};
  return b;
}

double spline_at(const Eigen::VectorXd& c, const LocalBasis& b) {
  double v = 0.0;
  for (std::size_t k = 0; k < 4; ++k) v += c(static_cast<Eigen::Index>(b.first + k)) * b.value[k];
  return v;
}

double spline_slope(const Eigen::VectorXd& c, const LocalBasis& b) {
  double v = 0.0;
  for (std::size_t k = 0; k < 4; ++k) v += c(static_cast<Eigen::Index>(b.first + k)) * b.slope[k];
  return v;
}

// Raw spline value (before centring), linear outside [lo, hi].
double raw_spline(const SplineComponent& s, double x) {
  const std::size_t intervals = s.n_knots - 1;
  const double h = (s.hi - s.lo) / static_cast<double>(intervals);
  if (x < s.lo) {
    const LocalBasis b = local_basis(s.lo, s.lo, h, intervals);
    return spline_at(s.coefficients, b) + spline_slope(s.coefficients, b) * (x - s.lo);
  }
  if (x > s.hi) {
    const LocalBasis b = local_basis(s.hi, s.lo, h, intervals);
    return spline_at(s.coefficients, b) + spline_slope(s.coefficients, b) * (x - s.hi);
  }
  return spline_at(s.coefficients, local_basis(x, s.lo, h, intervals));
}

Eigen::MatrixXd second_difference_penalty(std::size_t K) {
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(K - 2), static_cast<Eigen::Index>(K));
  for (Eigen::Index r = 0; r < D.rows(); ++r) {
    D(r, r) = 1.0;
    D(r, r + 1) = -2.0;
    D(r, r + 2) = 1.0;
  }
  return D.transpose() * D;
}

// Training-side data for one numeric column.
struct SplineWork {
  SplineComponent comp;
  std::vector<LocalBasis> basis;  // per training row
  Eigen::MatrixXd BtB;
  Eigen::MatrixXd P;
  double lambda_scale = 1.0;  // tr(B'B) / tr(P)
  bool fixed_lambda = false;
  Eigen::VectorXd fitted;  // centred component at training rows
};

Eigen::VectorXd Bt_times(const SplineWork& w, const Eigen::VectorXd& r, std::size_t K) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(K));
  for (std::size_t i = 0; i < w.basis.size(); ++i) {
    const auto& b = w.basis[i];
    for (std::size_t k = 0; k < 4; ++k)
      out(static_cast<Eigen::Index>(b.first + k)) += b.value[k] * r(static_cast<Eigen::Index>(i));
  }
  return out;
}

Eigen::VectorXd B_times(const SplineWork& w, const Eigen::VectorXd& c) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(w.basis.size()));
  for (std::size_t i = 0; i < w.basis.size(); ++i)
    out(static_cast<Eigen::Index>(i)) = spline_at(c, w.basis[i]);
  return out;
}

// Penalized fit of r; optionally re-selects lambda by GCV.
void smooth(SplineWork& w, const Eigen::VectorXd& r, bool select) {
  const std::size_t K = w.comp.n_knots + 2;
  const Eigen::VectorXd Btr = Bt_times(w, r, K);
  const double n = static_cast<double>(r.size());
  auto solve = [&](double lambda, Eigen::VectorXd& c, double& edf) {
    const Eigen::MatrixXd A = w.BtB + lambda * w.P;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
    c = ldlt.solve(Btr);
    edf = ldlt.solve(w.BtB).trace();
    return ldlt.info() == Eigen::Success && c.allFinite();
  };
  if (select && !w.fixed_lambda) {
    double best = std::numeric_limits<double>::infinity();
    for (double rho : kRhoGrid) {
      const double lambda = rho * w.lambda_scale;
      Eigen::VectorXd c;
      double edf = 0.0;
      if (!solve(lambda, c, edf)) continue;
      const double rss = (r - B_times(w, c)).squaredNorm();
      const double denom = n - edf;
      if (!(denom > 0.0)) continue;
      const double gcv = n * rss / (denom * denom);
      if (gcv < best) {
        best = gcv;
        w.comp.lambda = lambda;
      }
    }
  }
  Eigen::VectorXd c;
  double edf = 0.0;
  if (!solve(w.comp.lambda, c, edf))
    throw Error(ErrorCode::DegenerateInput, "spline system singular for column " + std::to_string(w.comp.column));
  Eigen::VectorXd f = B_times(w, c);
  const double offset = f.mean();
  w.comp.coefficients = std::move(c);
  w.comp.offset = offset;
  w.fitted = f.array() - offset;
}

struct FactorWork {
  FactorComponent comp;
  std::vector<std::size_t> level;  // per training row
  std::vector<double> counts;
  Eigen::VectorXd fitted;
};

std::size_t level_of(const Eigen::MatrixXd& X, Eigen::Index row, std::size_t first, std::size_t levels) {
  for (std::size_t k = 0; k < levels; ++k)
    if (X(row, static_cast<Eigen::Index>(first + k)) > 0.5) return k;
  return levels;
}

void fit_factor(FactorWork& w, const Eigen::VectorXd& r) {
  const std::size_t L = w.comp.levels + 1;
  Eigen::VectorXd sums = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(L));
  for (std::size_t i = 0; i < w.level.size(); ++i) sums(static_cast<Eigen::Index>(w.level[i])) += r(static_cast<Eigen::Index>(i));
  Eigen::VectorXd effects = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(L));
  double mean = 0.0;
  for (std::size_t k = 0; k < L; ++k) {
    if (w.counts[k] > 0) effects(static_cast<Eigen::Index>(k)) = sums(static_cast<Eigen::Index>(k)) / w.counts[k];
    mean += effects(static_cast<Eigen::Index>(k)) * w.counts[k];
  }
  mean /= static_cast<double>(w.level.size());
  effects.array() -= mean;
  w.comp.effects = effects;
  w.fitted.resize(static_cast<Eigen::Index>(w.level.size()));
  for (std::size_t i = 0; i < w.level.size(); ++i)
    w.fitted(static_cast<Eigen::Index>(i)) = effects(static_cast<Eigen::Index>(w.level[i]));
}

}  // namespace

double SplineComponent::evaluate(double x) const {
  if (coefficients.size() == 0) return 0.0;
  return raw_spline(*this, x) - offset;
}

double FactorComponent::evaluate(const Eigen::MatrixXd& X, Eigen::Index row) const {
  return effects(static_cast<Eigen::Index>(level_of(X, row, first_column, levels)));
}

Eigen::VectorXd AdditiveState::predict(const Eigen::MatrixXd& X) const {
  Eigen::VectorXd out = Eigen::VectorXd::Constant(X.rows(), intercept_);
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    for (const auto& s : splines_) out(i) += s.evaluate(X(i, static_cast<Eigen::Index>(s.column)));
    for (const auto& f : factors_) out(i) += f.evaluate(X, i);
  }
  return out;
}

Eigen::VectorXd AdditiveState::spline_values(std::size_t column, const Eigen::MatrixXd& X) const {
  for (const auto& s : splines_) {
    if (s.column != column) continue;
    Eigen::VectorXd out(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) out(i) = s.evaluate(X(i, static_cast<Eigen::Index>(column)));
    return out;
  }
  throw Error(ErrorCode::InvalidSpec, "no spline component for column " + std::to_string(column));
}

void AdditiveState::save(std::ostream& out) const {
  namespace a = detail::artifact;
  a::put(out, "intercept", intercept_);
  a::put(out, "splines", static_cast<std::int64_t>(splines_.size()));
  for (const auto& s : splines_) {
    a::put(out, "column", static_cast<std::int64_t>(s.column));
    a::put(out, "lo", s.lo);
    a::put(out, "hi", s.hi);
    a::put(out, "n_knots", static_cast<std::int64_t>(s.n_knots));
    a::put(out, "lambda", s.lambda);
    a::put(out, "offset", s.offset);
    a::put(out, "coefficients", s.coefficients);
  }
  a::put(out, "factors", static_cast<std::int64_t>(factors_.size()));
  for (const auto& f : factors_) {
    a::put(out, "first_column", static_cast<std::int64_t>(f.first_column));
    a::put(out, "levels", static_cast<std::int64_t>(f.levels));
    a::put(out, "effects", f.effects);
  }
}

std::shared_ptr<const AdditiveState> AdditiveState::load(std::istream& in) {
  namespace a = detail::artifact;
  const double intercept = a::get_double(in, "intercept");
  const auto ns = a::get_int(in, "splines");
  if (ns < 0) throw Error(ErrorCode::ParseError, "bad spline count");
  std::vector<SplineComponent> splines(static_cast<std::size_t>(ns));
  for (auto& s : splines) {
    s.column = static_cast<std::size_t>(a::get_int(in, "column"));
    s.lo = a::get_double(in, "lo");
    s.hi = a::get_double(in, "hi");
    s.n_knots = static_cast<std::size_t>(a::get_int(in, "n_knots"));
    s.lambda = a::get_double(in, "lambda");
    s.offset = a::get_double(in, "offset");
    s.coefficients = a::get_vector(in, "coefficients");
    if (s.coefficients.size() != 0 &&
        (s.n_knots < 2 || static_cast<std::size_t>(s.coefficients.size()) != s.n_knots + 2))
      throw Error(ErrorCode::ParseError, "spline coefficient count mismatch");
  }
  const auto nf = a::get_int(in, "factors");
  if (nf < 0) throw Error(ErrorCode::ParseError, "bad factor count");
  std::vector<FactorComponent> factors(static_cast<std::size_t>(nf));
  for (auto& f : factors) {
    f.first_column = static_cast<std::size_t>(a::get_int(in, "first_column"));
    f.levels = static_cast<std::size_t>(a::get_int(in, "levels"));
    f.effects = a::get_vector(in, "effects");
    if (static_cast<std::size_t>(f.effects.size()) != f.levels + 1)
      throw Error(ErrorCode::ParseError, "factor effect count mismatch");
  }
  return std::make_shared<const AdditiveState>(intercept, std::move(splines), std::move(factors));
}

TrainedModel fit_additive(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const ModelSpec& spec,
                          const FeatureSchema& schema_in) {
  if (spec.kind != ModelKind::ADDITIVE)
    throw Error(ErrorCode::UnsupportedModelKind, "fit_additive called with another kind");
  const Hyperparameters hp = spec.resolved();
  detail::check_training_data(X, y, 2);
  FeatureSchema schema = detail::schema_or_numeric(schema_in, X.cols());
  std::vector<std::string> warnings;
  const auto n = static_cast<std::size_t>(X.rows());
  const auto n_knots = static_cast<std::size_t>(hp.at("n_knots"));
  const double fixed_lambda = hp.at("lambda");
  const double tol = hp.at("tol");
  const auto max_sweeps = static_cast<int>(hp.at("max_sweeps"));

  std::vector<SplineWork> splines;
  std::vector<FactorWork> factors;
  for (const auto& g : schema.groups) {
    FactorWork w;
    w.comp.first_column = g.first_column;
    w.comp.levels = g.levels.size();
    w.level.resize(n);
    w.counts.assign(g.levels.size() + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      w.level[i] = level_of(X, static_cast<Eigen::Index>(i), g.first_column, g.levels.size());
      w.counts[w.level[i]] += 1.0;
    }
    w.fitted = Eigen::VectorXd::Zero(X.rows());
    factors.push_back(std::move(w));
  }
  std::vector<SplineComponent> constant_columns;
  for (std::size_t j = 0; j < schema.size(); ++j) {
    if (schema.group_of(j)) continue;
    SplineWork w;
    w.comp.column = j;
    w.comp.n_knots = n_knots;
    w.comp.lo = X.col(static_cast<Eigen::Index>(j)).minCoeff();
    w.comp.hi = X.col(static_cast<Eigen::Index>(j)).maxCoeff();
    if (!(w.comp.hi > w.comp.lo)) {
      constant_columns.push_back(w.comp);
      continue;
    }
    const std::size_t K = n_knots + 2;
    const double h = (w.comp.hi - w.comp.lo) / static_cast<double>(n_knots - 1);
    w.basis.reserve(n);
    w.BtB = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(K));
    for (std::size_t i = 0; i < n; ++i) {
      const LocalBasis b =
          local_basis(X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)), w.comp.lo, h, n_knots - 1);
      for (std::size_t a = 0; a < 4; ++a)
        for (std::size_t c = 0; c < 4; ++c)
          w.BtB(static_cast<Eigen::Index>(b.first + a), static_cast<Eigen::Index>(b.first + c)) +=
              b.value[a] * b.value[c];
      w.basis.push_back(b);
    }
    w.P = second_difference_penalty(K);
    w.lambda_scale = w.BtB.trace() / w.P.trace();
    w.fixed_lambda = fixed_lambda > 0.0;
    w.comp.lambda = w.fixed_lambda ? fixed_lambda : w.lambda_scale;
    w.fitted = Eigen::VectorXd::Zero(X.rows());
    splines.push_back(std::move(w));
  }

  double shift_sum = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) shift_sum += y(i) - y(0);
  const double intercept = y(0) + shift_sum / static_cast<double>(n);
  const double sd_y = std::sqrt((y.array() - intercept).square().sum() / static_cast<double>(n > 1 ? n - 1 : 1));
  const double threshold = tol * (sd_y > 0.0 ? sd_y : 1.0);

  Eigen::VectorXd total = Eigen::VectorXd::Zero(X.rows());
  bool converged = splines.empty() && factors.empty();
  for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
    const Eigen::VectorXd before = total;
    const bool select = sweep < kSelectionSweeps;
    for (auto& w : splines) {
      const Eigen::VectorXd r = (y.array() - intercept).matrix() - (total - w.fitted);
      total -= w.fitted;
      smooth(w, r, select);
      total += w.fitted;
    }
    for (auto& w : factors) {
      const Eigen::VectorXd r = (y.array() - intercept).matrix() - (total - w.fitted);
      total -= w.fitted;
      fit_factor(w, r);
      total += w.fitted;
    }
    const double change = std::sqrt((total - before).squaredNorm() / static_cast<double>(n));
    converged = change <= threshold && sweep > 0;
    if (sweep == 0 && splines.size() + factors.size() == 1) converged = true;
  }
  if (!converged)
    warnings.push_back("NoConvergence: backfitting stopped after " + std::to_string(max_sweeps) + " sweeps");

  std::vector<SplineComponent> comps;
  for (auto& w : splines) comps.push_back(std::move(w.comp));
  for (auto& c : constant_columns) comps.push_back(std::move(c));
  std::sort(comps.begin(), comps.end(),
            [](const SplineComponent& a, const SplineComponent& b) { return a.column < b.column; });
  std::vector<FactorComponent> fcomps;
  for (auto& w : factors) fcomps.push_back(std::move(w.comp));

  auto state = std::make_shared<const AdditiveState>(intercept, std::move(comps), std::move(fcomps));
  TrainingSummary summary{n, detail::rmse_of(state->predict(X), y), std::nullopt};
  return TrainedModel(spec, std::move(schema), state, summary, std::move(warnings));
}

}  // namespace wqst
