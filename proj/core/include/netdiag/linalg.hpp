#pragma once

#include <Eigen/Dense>

namespace netdiag {

// log|det M| from a pivoted LU; -inf for an exactly singular matrix.
double log_abs_det(const Eigen::MatrixXd& m);

struct RefinedSolve {
  Eigen::MatrixXd x;
  double residual;  // ||Ax-b||_inf / (||A||_inf ||x||_inf + ||b||_inf)
};

// Pivoted LU solve with one step of iterative refinement when the first
// residual is above tol. The direction matrices are Vandermonde-like and
// explicit inverses are avoided throughout.
RefinedSolve solve_refined(const Eigen::PartialPivLU<Eigen::MatrixXd>& lu,
                           const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                           double tol = 1e-12);

}  // namespace netdiag
