#pragma once

#include <functional>

#include "wqst/models/model.hpp"

namespace wqst {

struct SvrDiagnostics {
  double objective = 0.0;  // dual objective at the returned iterate
  std::int64_t iterations = 0;
  double kkt_gap = 0.0;  // maximal violating-pair gap
  bool converged = false;
};

struct SvrSolution {
  Eigen::VectorXd beta;  // alpha_i - alpha_i^*, one per training row
  double bias = 0.0;     // f(x) = sum beta_i K(x_i, x) + bias
  SvrDiagnostics diagnostics;
};

// epsilon-SVR dual on a precomputable kernel: min 1/2 b'Kb + eps |b|_1 - z'b
// subject to sum b = 0 and |b_i| <= C. Solved by SMO with second-order
// working-set selection. `kernel_row(i, out)` fills row i of K.
SvrSolution solve_svr_dual(Eigen::Index n, const std::function<void(Eigen::Index, double*)>& kernel_row,
                           const Eigen::VectorXd& z, double epsilon, double C, double tol,
                           std::int64_t max_iter, double cache_mb);

class SupportVectorState final : public detail::FittedState {
 public:
  SupportVectorState(detail::Standardizer standardizer, Eigen::MatrixXd support,
                     Eigen::VectorXd coefficients, double bias, double gamma,
                     SvrDiagnostics diagnostics)
      : standardizer_(std::move(standardizer)),
        support_(std::move(support)),
        coefficients_(std::move(coefficients)),
        bias_(bias),
        gamma_(gamma),
        diagnostics_(diagnostics) {}

  ModelKind kind() const override { return ModelKind::SUPPORT_VECTOR; }
  Eigen::VectorXd predict(const Eigen::MatrixXd& X) const override;
  void save(std::ostream& out) const override;
  static std::shared_ptr<const SupportVectorState> load(std::istream& in);

  std::size_t n_support() const { return static_cast<std::size_t>(support_.rows()); }
  double bias() const { return bias_; }
  double gamma() const { return gamma_; }
  const Eigen::VectorXd& coefficients() const { return coefficients_; }
  const SvrDiagnostics& diagnostics() const { return diagnostics_; }

 private:
  detail::Standardizer standardizer_;
  Eigen::MatrixXd support_;  // standardized support vectors
  Eigen::VectorXd coefficients_;
  double bias_;
  double gamma_;
  SvrDiagnostics diagnostics_;
};

}  // namespace wqst
