#pragma once

#include "wqst/models/model.hpp"

namespace wqst {

class LinearState final : public detail::FittedState {
 public:
  LinearState(double intercept, Eigen::VectorXd coefficients)
      : intercept_(intercept), coefficients_(std::move(coefficients)) {}

  ModelKind kind() const override { return ModelKind::LINEAR; }
  Eigen::VectorXd predict(const Eigen::MatrixXd& X) const override;
  void save(std::ostream& out) const override;
  static std::shared_ptr<const LinearState> load(std::istream& in);

  double intercept() const { return intercept_; }
  const Eigen::VectorXd& coefficients() const { return coefficients_; }

 private:
  double intercept_;
  Eigen::VectorXd coefficients_;
};

}  // namespace wqst
