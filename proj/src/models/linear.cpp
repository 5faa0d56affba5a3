#include "wqst/models/linear.hpp"

#include <cmath>

#include "wqst/error.hpp"
#include "wqst/models/artifact_io.hpp"

namespace wqst {

Eigen::VectorXd LinearState::predict(const Eigen::MatrixXd& X) const {
  Eigen::VectorXd out = X * coefficients_;
  out.array() += intercept_;
  return out;
}

void LinearState::save(std::ostream& out) const {
  detail::artifact::put(out, "intercept", intercept_);
  detail::artifact::put(out, "coefficients", coefficients_);
}

std::shared_ptr<const LinearState> LinearState::load(std::istream& in) {
  const double b0 = detail::artifact::get_double(in, "intercept");
  Eigen::VectorXd beta = detail::artifact::get_vector(in, "coefficients");
  return std::make_shared<const LinearState>(b0, std::move(beta));
}

TrainedModel fit_linear(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                        const FeatureSchema& schema) {
  return fit_linear(X, y, ModelSpec{ModelKind::LINEAR, {}, 0}, schema);
}

// Least squares on column-centred (and unit-scaled) data; the intercept is
// recovered from the means. Centring keeps the normal equations well
// conditioned when raw columns such as year sit far from zero.
TrainedModel fit_linear(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const ModelSpec& spec,
                        const FeatureSchema& schema_in) {
  if (spec.kind != ModelKind::LINEAR)
    throw Error(ErrorCode::UnsupportedModelKind, "fit_linear called with a non-linear spec");
  const Hyperparameters hp = spec.resolved();
  detail::check_training_data(X, y, 1);
  FeatureSchema schema = detail::schema_or_numeric(schema_in, X.cols());
  const Eigen::Index p = X.cols();
  std::vector<std::string> warnings;

  const double y_mean = y.mean();
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  if (p > 0) {
    const Eigen::RowVectorXd x_mean = X.colwise().mean();
    Eigen::MatrixXd Xc = X.rowwise() - x_mean;
    Eigen::VectorXd scale(p);
    for (Eigen::Index j = 0; j < p; ++j) {
      const double norm = Xc.col(j).norm();
      scale(j) = norm > 0.0 ? norm : 1.0;
      Xc.col(j) /= scale(j);
    }
    const Eigen::VectorXd yc = y.array() - y_mean;
    Eigen::MatrixXd gram = Xc.transpose() * Xc;
    const Eigen::VectorXd rhs = Xc.transpose() * yc;

    Eigen::LLT<Eigen::MatrixXd> llt(gram);
    bool ok = llt.info() == Eigen::Success;
    if (ok) {
      // Reject numerically singular systems (collinear or constant columns).
      const double dmin = llt.matrixLLT().diagonal().minCoeff();
      const double dmax = llt.matrixLLT().diagonal().maxCoeff();
      ok = dmin > 1e-7 * dmax && dmin > 0.0;
    }
    Eigen::VectorXd z;
    if (ok) {
      z = llt.solve(rhs);
    } else {
      const double ridge = hp.at("fallback_ridge");
      warnings.push_back("RankDeficient: normal equations singular; added ridge " + std::to_string(ridge));
      gram.diagonal().array() += ridge;
      Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
      if (ldlt.info() != Eigen::Success || !(ridge > 0.0))
        throw Error(ErrorCode::DegenerateInput, "normal equations singular even with ridge");
      z = ldlt.solve(rhs);
      if (!z.allFinite()) throw Error(ErrorCode::DegenerateInput, "ridge solution not finite");
    }
    beta = z.array() / scale.array();
  }
  const double intercept =
      p > 0 ? y_mean - (X.colwise().mean() * beta)(0) : y_mean;

  auto state = std::make_shared<const LinearState>(intercept, beta);
  TrainingSummary summary{static_cast<std::size_t>(X.rows()),
                          detail::rmse_of(state->predict(X), y), std::nullopt};
  return TrainedModel(spec, std::move(schema), state, summary, std::move(warnings));
}

}  // namespace wqst
