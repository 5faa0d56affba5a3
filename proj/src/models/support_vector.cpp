#include "wqst/models/support_vector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <list>
#include <unordered_map>

#include "wqst/error.hpp"
#include "wqst/models/artifact_io.hpp"
#include "wqst/random.hpp"

namespace wqst {

namespace {

constexpr double kTau = 1e-12;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Least-recently-used cache of kernel rows.
class KernelCache {
 public:
  KernelCache(Eigen::Index n, const std::function<void(Eigen::Index, double*)>& fill, double cache_mb)
      : n_(n), fill_(fill) {
    const double bytes = cache_mb * 1024.0 * 1024.0;
    const double per_row = static_cast<double>(std::max<Eigen::Index>(n, 1)) * sizeof(double);
    capacity_ = std::max<std::size_t>(2, static_cast<std::size_t>(bytes / per_row));
  }

  const double* row(Eigen::Index i) {
    auto it = index_.find(i);
    if (it != index_.end()) {
      order_.splice(order_.begin(), order_, it->second);
      return it->second->second.data();
    }
    if (index_.size() >= capacity_) {
      auto& victim = order_.back();
      index_.erase(victim.first);
      std::vector<double> buf = std::move(victim.second);
      order_.pop_back();
      order_.emplace_front(i, std::move(buf));
    } else {
      order_.emplace_front(i, std::vector<double>(static_cast<std::size_t>(n_)));
    }
    fill_(i, order_.front().second.data());
    index_[i] = order_.begin();
    return order_.front().second.data();
  }

 private:
  using Entry = std::pair<Eigen::Index, std::vector<double>>;
  Eigen::Index n_;
  const std::function<void(Eigen::Index, double*)>& fill_;
  std::size_t capacity_;
  std::list<Entry> order_;
  std::unordered_map<Eigen::Index, std::list<Entry>::iterator> index_;
};

}  // namespace

// Variables 0..l-1 carry sign +1 (alpha), l..2l-1 sign -1 (alpha*), both
// referring to kernel row (t mod l). Q_st = y_s y_t K.
SvrSolution solve_svr_dual(Eigen::Index l, const std::function<void(Eigen::Index, double*)>& kernel_row,
                           const Eigen::VectorXd& z, double epsilon, double C, double tol,
                           std::int64_t max_iter, double cache_mb) {
  const Eigen::Index n = 2 * l;
  std::vector<double> alpha(static_cast<std::size_t>(n), 0.0);
  std::vector<double> G(static_cast<std::size_t>(n));
  std::vector<double> p(static_cast<std::size_t>(n));
  std::vector<signed char> y(static_cast<std::size_t>(n));
  std::vector<double> QD(static_cast<std::size_t>(n));
  KernelCache cache(l, kernel_row, cache_mb);

  for (Eigen::Index i = 0; i < l; ++i) {
    const auto a = static_cast<std::size_t>(i);
    const auto b = static_cast<std::size_t>(i + l);
    p[a] = epsilon - z(i);
    p[b] = epsilon + z(i);
    y[a] = 1;
    y[b] = -1;
    const double kii = cache.row(i)[i];
    QD[a] = kii;
    QD[b] = kii;
  }
  G = p;

  auto upper = [&](std::size_t t) { return alpha[t] >= C; };
  auto lower = [&](std::size_t t) { return alpha[t] <= 0.0; };
  auto krow = [&](std::size_t t) { return cache.row(static_cast<Eigen::Index>(t) % l); };
  const auto N = static_cast<std::size_t>(n);
  const auto L = static_cast<std::size_t>(l);

  SvrDiagnostics diag;
  std::int64_t iter = 0;
  double gap = 0.0;
  for (;;) {
    // Second-order working set selection.
    double gmax = -kInf;
    double gmax2 = -kInf;
    std::ptrdiff_t gi = -1;
    std::ptrdiff_t gj = -1;
    double obj_min = kInf;
    for (std::size_t t = 0; t < N; ++t) {
      if (y[t] == 1) {
        if (!upper(t) && -G[t] >= gmax) {
          gmax = -G[t];
          gi = static_cast<std::ptrdiff_t>(t);
        }
      } else if (!lower(t) && G[t] >= gmax) {
        gmax = G[t];
        gi = static_cast<std::ptrdiff_t>(t);
      }
    }
    const double* Ki = gi >= 0 ? krow(static_cast<std::size_t>(gi)) : nullptr;
    const double yi = gi >= 0 ? y[static_cast<std::size_t>(gi)] : 0.0;
    const double QDi = gi >= 0 ? QD[static_cast<std::size_t>(gi)] : 0.0;
    for (std::size_t t = 0; t < N; ++t) {
      if (y[t] == 1) {
        if (lower(t)) continue;
        const double diff = gmax + G[t];
        if (G[t] >= gmax2) gmax2 = G[t];
        if (diff > 0.0 && Ki) {
          // y_i Q_it = y_t K_it
          const double quad = QDi + QD[t] - 2.0 * Ki[t % L];
          const double od = -(diff * diff) / (quad > 0.0 ? quad : kTau);
          if (od <= obj_min) {
            obj_min = od;
            gj = static_cast<std::ptrdiff_t>(t);
          }
        }
      } else {
        if (upper(t)) continue;
        const double diff = gmax - G[t];
        if (-G[t] >= gmax2) gmax2 = -G[t];
        if (diff > 0.0 && Ki) {
          const double quad = QDi + QD[t] - 2.0 * Ki[t % L];
          const double od = -(diff * diff) / (quad > 0.0 ? quad : kTau);
          if (od <= obj_min) {
            obj_min = od;
            gj = static_cast<std::ptrdiff_t>(t);
          }
        }
      }
    }
    (void)yi;
    gap = gmax + gmax2;
    if (gap < tol || gj < 0) {
      diag.converged = true;
      break;
    }
    if (iter >= max_iter) break;
    ++iter;

    const auto i = static_cast<std::size_t>(gi);
    const auto j = static_cast<std::size_t>(gj);
    const double* Kj = krow(j);
    Ki = krow(i);
    const double Qij = y[i] * y[j] * Ki[j % L];
    const double old_i = alpha[i];
    const double old_j = alpha[j];
    if (y[i] != y[j]) {
      double quad = QD[i] + QD[j] + 2.0 * Qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (-G[i] - G[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0.0) {
        if (alpha[j] < 0.0) {
          alpha[j] = 0.0;
          alpha[i] = diff;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = -diff;
      }
      if (diff > 0.0) {
        if (alpha[i] > C) {
          alpha[i] = C;
          alpha[j] = C - diff;
        }
      } else if (alpha[j] > C) {
        alpha[j] = C;
        alpha[i] = C + diff;
      }
    } else {
      double quad = QD[i] + QD[j] - 2.0 * Qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (G[i] - G[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > C) {
        if (alpha[i] > C) {
          alpha[i] = C;
          alpha[j] = sum - C;
        }
      } else if (alpha[j] < 0.0) {
        alpha[j] = 0.0;
        alpha[i] = sum;
      }
      if (sum > C) {
        if (alpha[j] > C) {
          alpha[j] = C;
          alpha[i] = sum - C;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = sum;
      }
    }
    const double di = (alpha[i] - old_i) * y[i];
    const double dj = (alpha[j] - old_j) * y[j];
    // G_t += Q_ti d_alpha_i + Q_tj d_alpha_j with Q_ts = y_t y_s K.
    for (std::size_t t = 0; t < N; ++t) {
      const std::size_t r = t % L;
      G[t] += y[t] * (Ki[r] * di + Kj[r] * dj);
    }
  }

  // Bias from free variables, else the midpoint of the feasible interval.
  double ub = kInf;
  double lb = -kInf;
  double sum_free = 0.0;
  std::size_t n_free = 0;
  for (std::size_t t = 0; t < N; ++t) {
    const double yG = y[t] * G[t];
    if (upper(t)) {
      if (y[t] == -1) ub = std::min(ub, yG);
      else lb = std::max(lb, yG);
    } else if (lower(t)) {
      if (y[t] == 1) ub = std::min(ub, yG);
      else lb = std::max(lb, yG);
    } else {
      ++n_free;
      sum_free += yG;
    }
  }
  const double rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : 0.5 * (ub + lb);

  double obj = 0.0;
  for (std::size_t t = 0; t < N; ++t) obj += alpha[t] * (G[t] + p[t]);
  diag.objective = 0.5 * obj;
  diag.iterations = iter;
  diag.kkt_gap = gap;

  SvrSolution out;
  out.beta.resize(l);
  for (std::size_t i = 0; i < L; ++i) out.beta(static_cast<Eigen::Index>(i)) = alpha[i] - alpha[i + L];
  out.bias = -rho;
  out.diagnostics = diag;
  return out;
}

Eigen::VectorXd SupportVectorState::predict(const Eigen::MatrixXd& X) const {
  Eigen::VectorXd out = Eigen::VectorXd::Constant(X.rows(), bias_);
  if (support_.rows() == 0) return out;
  const Eigen::MatrixXd Z = standardizer_.apply(X);
  const Eigen::VectorXd sn = support_.rowwise().squaredNorm();
  for (Eigen::Index i = 0; i < Z.rows(); ++i) {
    const Eigen::VectorXd d2 =
        ((sn.array() + Z.row(i).squaredNorm()) - 2.0 * (support_ * Z.row(i).transpose()).array())
            .max(0.0);
    out(i) += coefficients_.dot((-gamma_ * d2.array()).exp().matrix());
  }
  return out;
}

void SupportVectorState::save(std::ostream& out) const {
  detail::artifact::put(out, "input_mean", Eigen::VectorXd(standardizer_.mean.transpose()));
  detail::artifact::put(out, "input_scale", Eigen::VectorXd(standardizer_.scale.transpose()));
  detail::artifact::put(out, "gamma", gamma_);
  detail::artifact::put(out, "bias", bias_);
  detail::artifact::put(out, "objective", diagnostics_.objective);
  detail::artifact::put(out, "iterations", diagnostics_.iterations);
  detail::artifact::put(out, "kkt_gap", diagnostics_.kkt_gap);
  detail::artifact::put(out, "converged", static_cast<std::int64_t>(diagnostics_.converged));
  detail::artifact::put(out, "coefficients", coefficients_);
  detail::artifact::put(out, "support", support_);
}

std::shared_ptr<const SupportVectorState> SupportVectorState::load(std::istream& in) {
  detail::Standardizer st;
  st.mean = detail::artifact::get_vector(in, "input_mean").transpose();
  st.scale = detail::artifact::get_vector(in, "input_scale").transpose();
  const double gamma = detail::artifact::get_double(in, "gamma");
  const double bias = detail::artifact::get_double(in, "bias");
  SvrDiagnostics diag;
  diag.objective = detail::artifact::get_double(in, "objective");
  diag.iterations = detail::artifact::get_int(in, "iterations");
  diag.kkt_gap = detail::artifact::get_double(in, "kkt_gap");
  diag.converged = detail::artifact::get_int(in, "converged") != 0;
  Eigen::VectorXd coef = detail::artifact::get_vector(in, "coefficients");
  Eigen::MatrixXd support = detail::artifact::get_matrix(in, "support");
  if (support.rows() != coef.size() || (support.rows() > 0 && support.cols() != st.mean.size()))
    throw Error(ErrorCode::ParseError, "inconsistent support vector state");
  if (support.rows() == 0) support.resize(0, st.mean.size());
  return std::make_shared<const SupportVectorState>(std::move(st), std::move(support), std::move(coef),
                                                    bias, gamma, diag);
}

TrainedModel fit_support_vector(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                const ModelSpec& spec, const FeatureSchema& schema_in) {
  if (spec.kind != ModelKind::SUPPORT_VECTOR)
    throw Error(ErrorCode::UnsupportedModelKind, "fit_support_vector called with another kind");
  const Hyperparameters hp = spec.resolved();
  detail::check_training_data(X, y, 1);
  FeatureSchema schema = detail::schema_or_numeric(schema_in, X.cols());
  std::vector<std::string> warnings;
  const Eigen::Index p = X.cols();

  const auto rows = detail::subsample_rows(
      X.rows(), static_cast<std::size_t>(hp.at("max_train_points")), mix_seed(spec.seed, 0));
  const auto m = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd Xs(m, p);
  Eigen::VectorXd ys(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    Xs.row(k) = X.row(rows[static_cast<std::size_t>(k)]);
    ys(k) = y(rows[static_cast<std::size_t>(k)]);
  }
  if (m < X.rows())
    warnings.push_back("Subsampled: trained on " + std::to_string(m) + " of " +
                       std::to_string(X.rows()) + " rows");

  detail::Standardizer st = detail::Standardizer::fit(Xs);
  const Eigen::MatrixXd Z = st.apply(Xs);
  const double sd_y =
      m > 1 ? std::sqrt((ys.array() - ys.mean()).square().sum() / static_cast<double>(m - 1)) : 0.0;
  const double epsilon = hp.at("epsilon") >= 0.0 ? hp.at("epsilon") : 0.1 * sd_y;
  const double gamma = hp.at("gamma") > 0.0 ? hp.at("gamma") : 1.0 / static_cast<double>(std::max<Eigen::Index>(p, 1));
  const double C = hp.at("C");
  auto max_iter = static_cast<std::int64_t>(hp.at("max_iter"));
  if (max_iter == 0) max_iter = std::max<std::int64_t>(10000000, 100 * static_cast<std::int64_t>(m));

  const Eigen::VectorXd sn = Z.rowwise().squaredNorm();
  const std::function<void(Eigen::Index, double*)> kernel_row = [&](Eigen::Index i, double* out) {
    for (Eigen::Index j = 0; j < m; ++j) {
      const double d2 = std::max(0.0, sn(i) + sn(j) - 2.0 * Z.row(i).dot(Z.row(j)));
      out[j] = std::exp(-gamma * d2);
    }
  };
  SvrSolution sol = solve_svr_dual(m, kernel_row, ys, epsilon, C, hp.at("tol"), max_iter,
                                   hp.at("cache_mb"));
  if (!sol.diagnostics.converged)
    warnings.push_back("NoConvergence: iteration cap reached with KKT gap " +
                       std::to_string(sol.diagnostics.kkt_gap));

  std::vector<Eigen::Index> sv;
  for (Eigen::Index i = 0; i < m; ++i)
    if (sol.beta(i) != 0.0) sv.push_back(i);
  Eigen::MatrixXd support(static_cast<Eigen::Index>(sv.size()), p);
  Eigen::VectorXd coef(static_cast<Eigen::Index>(sv.size()));
  for (std::size_t k = 0; k < sv.size(); ++k) {
    support.row(static_cast<Eigen::Index>(k)) = Z.row(sv[k]);
    coef(static_cast<Eigen::Index>(k)) = sol.beta(sv[k]);
  }
  auto state = std::make_shared<const SupportVectorState>(std::move(st), std::move(support), std::move(coef),
                                                          sol.bias, gamma, sol.diagnostics);
  TrainingSummary summary{static_cast<std::size_t>(X.rows()),
                          detail::rmse_of(state->predict(X), y), std::nullopt};
  return TrainedModel(spec, std::move(schema), state, summary, std::move(warnings));
}

}  // namespace wqst
