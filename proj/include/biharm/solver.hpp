#pragma once

#include "biharm/common.hpp"

#include <functional>
#include <utility>
#include <vector>

namespace biharm {

struct SolveReport {
  int iterations = 0;
  bool converged = false;
  double rel_residual = 0.0;
  std::vector<double> residual_history; // ||r_k||_2, including r_0
};

using Preconditioner = std::function<Vec(const Vec&)>;

// Preconditioned conjugate gradients, stopping on ||r_k|| <= tol * ||b||
// (unpreconditioned l2 residual). Non-convergence is reported, not thrown.
std::pair<Vec, SolveReport> pcg(const SpMat& A, const Vec& b, const Preconditioner& M,
                                double tol = 1e-9, int max_iters = 3000);

std::pair<Vec, SolveReport> cg(const SpMat& A, const Vec& b, double tol = 1e-9,
                               int max_iters = 3000);

// Largest eigenvalue of an SPD matrix by power iteration (deterministic
// start, relative stagnation 1e-3).
double power_method(const SpMat& A, int max_iters = 400);

// power_method result with a 10% safety margin; used to seed the smoother
// scaling.
double estimate_lambda(const SpMat& A);

// Extremal eigenvalues of op (symmetric, size n) by Lanczos with full
// reorthogonalization. Returns (min, max) Ritz values.
std::pair<double, double> lanczos_extremal(const std::function<Vec(const Vec&)>& op,
                                           Eigen::Index n, int iters = 200);

// Spectral condition number of an SPD matrix: dense solve up to dense_limit,
// Lanczos beyond.
double condition_number(const SpMat& A, Eigen::Index dense_limit = 3000);

// Condition number of the pencil (A, B): eigenvalues of B^{-1} A through a
// Cholesky factorization of B.
double generalized_condition_number(const SpMat& A, const SpMat& B,
                                    Eigen::Index dense_limit = 3000);

// Chebyshev worst-case PCG iteration bound for reaching a relative residual
// tol when the preconditioned system has condition number kappa.
int cg_iteration_bound(double kappa, double kappa_plain, double tol);

} // namespace biharm
