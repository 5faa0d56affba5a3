#include "wqst/models/gaussian_process.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "wqst/error.hpp"
#include "wqst/models/artifact_io.hpp"
#include "wqst/random.hpp"

namespace wqst {

namespace {

constexpr std::array<double, 5> kLengthscaleGrid = {0.25, 0.5, 1.0, 2.0, 4.0};
constexpr std::array<double, 4> kSignalGrid = {0.1, 0.3, 1.0, 3.0};
constexpr int kTunePasses = 2;
constexpr int kNuggetEscalations = 3;

Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& Z, const Eigen::VectorXd& ls, double s2,
                              double noise) {
  Eigen::MatrixXd K = squared_exponential(Z, Z, ls, s2);
  K.diagonal().array() += noise;
  return K;
}

}  // namespace

Eigen::MatrixXd squared_exponential(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                    const Eigen::VectorXd& lengthscales, double signal_variance) {
  const Eigen::RowVectorXd inv = lengthscales.cwiseInverse().transpose();
  const Eigen::MatrixXd As = A.array().rowwise() * inv.array();
  const Eigen::MatrixXd Bs = B.array().rowwise() * inv.array();
  const Eigen::VectorXd an = As.rowwise().squaredNorm();
  const Eigen::VectorXd bn = Bs.rowwise().squaredNorm();
  Eigen::MatrixXd D = -2.0 * As * Bs.transpose();
  D.colwise() += an;
  D.rowwise() += bn.transpose();
  D = D.cwiseMax(0.0);
  return signal_variance * (-0.5 * D.array()).exp().matrix();
}

double gp_log_marginal_likelihood(const Eigen::MatrixXd& Z, const Eigen::VectorXd& yc,
                                  const Eigen::VectorXd& lengthscales, double signal_variance,
                                  double noise_variance) {
  Eigen::LLT<Eigen::MatrixXd> llt(kernel_matrix(Z, lengthscales, signal_variance, noise_variance));
  if (llt.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();
  const Eigen::VectorXd alpha = llt.solve(yc);
  const double logdet = llt.matrixLLT().diagonal().array().log().sum();
  const double n = static_cast<double>(Z.rows());
  const double v = -0.5 * yc.dot(alpha) - logdet - 0.5 * n * std::log(2.0 * std::numbers::pi);
  return std::isfinite(v) ? v : -std::numeric_limits<double>::infinity();
}

GaussianProcessState::GaussianProcessState(detail::Standardizer standardizer, Eigen::MatrixXd Z,
                                           Eigen::VectorXd y, GaussianProcessParams params)
    : standardizer_(std::move(standardizer)),
      Z_(std::move(Z)),
      y_(std::move(y)),
      params_(std::move(params)) {
  Eigen::LLT<Eigen::MatrixXd> llt(
      kernel_matrix(Z_, params_.lengthscales, params_.signal_variance, params_.noise_variance));
  if (llt.info() != Eigen::Success)
    throw Error(ErrorCode::SingularKernel, "kernel matrix is not positive definite");
  L_ = llt.matrixL();
  const Eigen::VectorXd yc = y_.array() - params_.y_offset;
  alpha_ = llt.solve(yc);
}

Eigen::MatrixXd GaussianProcessState::cross_kernel(const Eigen::MatrixXd& Zq) const {
  return squared_exponential(Zq, Z_, params_.lengthscales, params_.signal_variance);
}

Eigen::VectorXd GaussianProcessState::predict(const Eigen::MatrixXd& X) const {
  constexpr Eigen::Index kBlock = 2048;
  Eigen::VectorXd mean(X.rows());
  for (Eigen::Index b = 0; b < X.rows(); b += kBlock) {
    const Eigen::Index len = std::min(kBlock, X.rows() - b);
    mean.segment(b, len) = cross_kernel(standardizer_.apply(X.middleRows(b, len))) * alpha_;
  }
  mean.array() += params_.y_offset;
  return mean;
}

GaussianProcessPrediction GaussianProcessState::predict_with_variance(const Eigen::MatrixXd& X) const {
  const Eigen::MatrixXd Ks = cross_kernel(standardizer_.apply(X));
  GaussianProcessPrediction out;
  out.mean = Ks * alpha_;
  out.mean.array() += params_.y_offset;
  const Eigen::MatrixXd V = L_.triangularView<Eigen::Lower>().solve(Ks.transpose());
  const double prior = params_.signal_variance + params_.noise_variance;
  out.variance = (prior - V.colwise().squaredNorm().array()).max(0.0).matrix().transpose();
  return out;
}

void GaussianProcessState::save(std::ostream& out) const {
  detail::artifact::put(out, "input_mean", Eigen::VectorXd(standardizer_.mean.transpose()));
  detail::artifact::put(out, "input_scale", Eigen::VectorXd(standardizer_.scale.transpose()));
  detail::artifact::put(out, "lengthscales", params_.lengthscales);
  detail::artifact::put(out, "signal_variance", params_.signal_variance);
  detail::artifact::put(out, "noise_variance", params_.noise_variance);
  detail::artifact::put(out, "y_offset", params_.y_offset);
  detail::artifact::put(out, "inputs", Z_);
  detail::artifact::put(out, "targets", y_);
}

std::shared_ptr<const GaussianProcessState> GaussianProcessState::load(std::istream& in) {
  detail::Standardizer st;
  st.mean = detail::artifact::get_vector(in, "input_mean").transpose();
  st.scale = detail::artifact::get_vector(in, "input_scale").transpose();
  GaussianProcessParams params;
  params.lengthscales = detail::artifact::get_vector(in, "lengthscales");
  params.signal_variance = detail::artifact::get_double(in, "signal_variance");
  params.noise_variance = detail::artifact::get_double(in, "noise_variance");
  params.y_offset = detail::artifact::get_double(in, "y_offset");
  Eigen::MatrixXd Z = detail::artifact::get_matrix(in, "inputs");
  Eigen::VectorXd y = detail::artifact::get_vector(in, "targets");
  if (Z.rows() != y.size() || Z.cols() != params.lengthscales.size())
    throw Error(ErrorCode::ParseError, "inconsistent Gaussian process state");
  return std::make_shared<const GaussianProcessState>(std::move(st), std::move(Z), std::move(y),
                                                      std::move(params));
}

TrainedModel fit_gaussian_process(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                  const ModelSpec& spec, const FeatureSchema& schema_in) {
  if (spec.kind != ModelKind::GAUSSIAN_PROCESS)
    throw Error(ErrorCode::UnsupportedModelKind, "fit_gaussian_process called with another kind");
  const Hyperparameters hp = spec.resolved();
  detail::check_training_data(X, y, 1);
  FeatureSchema schema = detail::schema_or_numeric(schema_in, X.cols());
  std::vector<std::string> warnings;
  const Eigen::Index p = X.cols();

  const auto rows = detail::subsample_rows(X.rows(), static_cast<std::size_t>(hp.at("max_train_points")),
                                           mix_seed(spec.seed, 0));
  const auto m = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd Xs(m, p);
  Eigen::VectorXd ys(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    Xs.row(k) = X.row(rows[static_cast<std::size_t>(k)]);
    ys(k) = y(rows[static_cast<std::size_t>(k)]);
  }
  if (m < X.rows())
    warnings.push_back("Subsampled: exact posterior on " + std::to_string(m) + " of " +
                       std::to_string(X.rows()) + " rows");

  detail::Standardizer st = detail::Standardizer::fit(Xs);
  Eigen::MatrixXd Z = st.apply(Xs);

  GaussianProcessParams params;
  params.y_offset = hp.at("center_y") != 0.0 ? ys.mean() : 0.0;
  const Eigen::VectorXd yc = ys.array() - params.y_offset;
  const double var_y = m > 1 ? (ys.array() - ys.mean()).square().sum() / static_cast<double>(m - 1) : 0.0;
  const double scale = var_y > 0.0 ? var_y : 1.0;
  params.noise_variance = hp.at("noise_variance") >= 0.0 ? hp.at("noise_variance") : 1e-2 * scale;

  const bool tune_s2 = hp.at("signal_variance") == 0.0;
  const bool tune_ls = hp.at("lengthscale") == 0.0;
  params.signal_variance = tune_s2 ? scale : hp.at("signal_variance");
  params.lengthscales = Eigen::VectorXd::Constant(p, tune_ls ? 1.0 : hp.at("lengthscale"));

  if (tune_s2 || tune_ls) {
    const auto tune_rows = detail::subsample_rows(m, static_cast<std::size_t>(hp.at("tune_points")),
                                                  mix_seed(spec.seed, 1));
    Eigen::MatrixXd Zt(static_cast<Eigen::Index>(tune_rows.size()), p);
    Eigen::VectorXd yt(Zt.rows());
    for (Eigen::Index k = 0; k < Zt.rows(); ++k) {
      Zt.row(k) = Z.row(tune_rows[static_cast<std::size_t>(k)]);
      yt(k) = yc(tune_rows[static_cast<std::size_t>(k)]);
    }
    double best = gp_log_marginal_likelihood(Zt, yt, params.lengthscales, params.signal_variance,
                                             params.noise_variance);
    for (int pass = 0; pass < kTunePasses; ++pass) {
      if (tune_ls) {
        for (Eigen::Index d = 0; d < p; ++d) {
          Eigen::VectorXd trial = params.lengthscales;
          for (double l : kLengthscaleGrid) {
            trial(d) = l;
            const double v = gp_log_marginal_likelihood(Zt, yt, trial, params.signal_variance,
                                                        params.noise_variance);
            if (v > best) {
              best = v;
              params.lengthscales(d) = l;
            }
          }
        }
      }
      if (tune_s2) {
        for (double f : kSignalGrid) {
          const double v = gp_log_marginal_likelihood(Zt, yt, params.lengthscales, f * scale,
                                                      params.noise_variance);
          if (v > best) {
            best = v;
            params.signal_variance = f * scale;
          }
        }
      }
    }
  }

  std::shared_ptr<const GaussianProcessState> state;
  for (int attempt = 0;; ++attempt) {
    try {
      state = std::make_shared<const GaussianProcessState>(st, Z, ys, params);
      break;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::SingularKernel || attempt >= kNuggetEscalations) throw;
      const double floor = 1e-10 * scale;
      params.noise_variance = std::max(params.noise_variance, floor) * 10.0;
      warnings.push_back("NuggetEscalated: noise variance raised to " +
                         std::to_string(params.noise_variance));
    }
  }
  TrainingSummary summary{static_cast<std::size_t>(X.rows()),
                          detail::rmse_of(state->predict(X), y), std::nullopt};
  return TrainedModel(spec, std::move(schema), state, summary, std::move(warnings));
}

}  // namespace wqst
