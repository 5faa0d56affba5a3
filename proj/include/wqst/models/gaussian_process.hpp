#pragma once

#include "wqst/models/model.hpp"

namespace wqst {

struct GaussianProcessParams {
  Eigen::VectorXd lengthscales;  // standardized input units
  double signal_variance = 1.0;
  double noise_variance = 0.0;  // after any escalation
  double y_offset = 0.0;        // mean(y) when centring is on, else 0
};

struct GaussianProcessPrediction {
  Eigen::VectorXd mean;
  Eigen::VectorXd variance;  // latent variance plus nugget
};

class GaussianProcessState final : public detail::FittedState {
 public:
  // Factorizes the kernel matrix; throws SingularKernel if that fails.
  GaussianProcessState(detail::Standardizer standardizer, Eigen::MatrixXd Z, Eigen::VectorXd y,
                       GaussianProcessParams params);

  ModelKind kind() const override { return ModelKind::GAUSSIAN_PROCESS; }
  Eigen::VectorXd predict(const Eigen::MatrixXd& X) const override;
  GaussianProcessPrediction predict_with_variance(const Eigen::MatrixXd& X) const;
  void save(std::ostream& out) const override;
  static std::shared_ptr<const GaussianProcessState> load(std::istream& in);

  const GaussianProcessParams& params() const { return params_; }
  std::size_t n_train() const { return static_cast<std::size_t>(Z_.rows()); }

 private:
  Eigen::MatrixXd cross_kernel(const Eigen::MatrixXd& Zq) const;

  detail::Standardizer standardizer_;
  Eigen::MatrixXd Z_;  // standardized training inputs
  Eigen::VectorXd y_;  // raw training targets
  GaussianProcessParams params_;
  Eigen::MatrixXd L_;
  Eigen::VectorXd alpha_;
};

// Squared-exponential kernel on already-scaled inputs.
Eigen::MatrixXd squared_exponential(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                    const Eigen::VectorXd& lengthscales, double signal_variance);

// Log marginal likelihood of centred targets; -inf when the kernel is not
// positive definite.
double gp_log_marginal_likelihood(const Eigen::MatrixXd& Z, const Eigen::VectorXd& yc,
                                  const Eigen::VectorXd& lengthscales, double signal_variance,
                                  double noise_variance);

}  // namespace wqst
