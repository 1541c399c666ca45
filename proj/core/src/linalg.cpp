#include "netdiag/linalg.hpp"

#include <cmath>
#include <limits>

namespace netdiag {

double log_abs_det(const Eigen::MatrixXd& m) {
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(m);
  double sum = 0.0;
  const auto diag = lu.matrixLU().diagonal();
  for (Eigen::Index i = 0; i < diag.size(); ++i) {
    const double a = std::abs(diag[i]);
    if (a == 0.0) return -std::numeric_limits<double>::infinity();
    sum += std::log(a);
  }
  return sum;
}

RefinedSolve solve_refined(const Eigen::PartialPivLU<Eigen::MatrixXd>& lu,
                           const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                           double tol) {
  const double a_norm = a.cwiseAbs().rowwise().sum().maxCoeff();
  auto rel_residual = [&](const Eigen::MatrixXd& x) {
    const Eigen::MatrixXd r = b - a * x;
    const double denom = a_norm * x.cwiseAbs().maxCoeff() +
                         b.cwiseAbs().maxCoeff() +
                         std::numeric_limits<double>::min();
    return r.cwiseAbs().maxCoeff() / denom;
  };

  Eigen::MatrixXd x = lu.solve(b);
  double res = rel_residual(x);
  if (res > tol) {
    x += lu.solve(Eigen::MatrixXd(b - a * x));
    res = rel_residual(x);
  }
  return {std::move(x), res};
}

}  // namespace netdiag
