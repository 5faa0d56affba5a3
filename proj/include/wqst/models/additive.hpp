#pragma once

#include "wqst/models/model.hpp"

namespace wqst {

// Uniform cubic B-spline smoother on [lo, hi] with n_knots equally spaced
// knots (n_knots + 2 basis functions); linear beyond the range.
struct SplineComponent {
  std::size_t column = 0;
  double lo = 0.0;
  double hi = 0.0;
  std::size_t n_knots = 0;
  Eigen::VectorXd coefficients;  // empty for a constant column (component is 0)
  double offset = 0.0;           // subtracted so the training mean is zero
  double lambda = 0.0;

  double evaluate(double x) const;
};

// Level effects of a one-hot group; index `levels` is the all-zero row.
struct FactorComponent {
  std::size_t first_column = 0;
  std::size_t levels = 0;
  Eigen::VectorXd effects;  // size levels + 1, centred over training rows

  double evaluate(const Eigen::MatrixXd& X, Eigen::Index row) const;
};

class AdditiveState final : public detail::FittedState {
 public:
  AdditiveState(double intercept, std::vector<SplineComponent> splines,
                std::vector<FactorComponent> factors)
      : intercept_(intercept), splines_(std::move(splines)), factors_(std::move(factors)) {}

  ModelKind kind() const override { return ModelKind::ADDITIVE; }
  Eigen::VectorXd predict(const Eigen::MatrixXd& X) const override;
  void save(std::ostream& out) const override;
  static std::shared_ptr<const AdditiveState> load(std::istream& in);

  double intercept() const { return intercept_; }
  const std::vector<SplineComponent>& splines() const { return splines_; }
  const std::vector<FactorComponent>& factors() const { return factors_; }
  // Fitted component of numeric column `column` at each row of X.
  Eigen::VectorXd spline_values(std::size_t column, const Eigen::MatrixXd& X) const;

 private:
  double intercept_;
  std::vector<SplineComponent> splines_;
  std::vector<FactorComponent> factors_;
};

}  // namespace wqst
