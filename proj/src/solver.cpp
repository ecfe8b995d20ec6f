#include "biharm/solver.hpp"

#include <Eigen/SparseCholesky>

#include <cmath>
#include <random>
#include <stdexcept>

namespace biharm {

std::pair<Vec, SolveReport> pcg(const SpMat& A, const Vec& b, const Preconditioner& M,
                                double tol, int max_iters) {
  SolveReport rep;
  Vec x = Vec::Zero(b.size());
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    rep.converged = true;
    rep.residual_history.push_back(0.0);
    return {x, rep};
  }
  Vec r = b;
  Vec z = M ? M(r) : r;
  Vec p = z;
  double rz = r.dot(z);
  rep.residual_history.push_back(r.norm());
  for (int it = 0; it < max_iters; ++it) {
    const Vec Ap = A * p;
    const double pAp = p.dot(Ap);
    if (!(pAp > 0.0))
      throw std::runtime_error(
          "solver: matrix is not positive definite (penalties too small?)");
    const double alpha = rz / pAp;
    x += alpha * p;
    r -= alpha * Ap;
    const double rnorm = r.norm();
    rep.residual_history.push_back(rnorm);
    rep.iterations = it + 1;
    if (rnorm <= tol * bnorm) {
      rep.converged = true;
      break;
    }
    z = M ? M(r) : r;
    const double rz_new = r.dot(z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  rep.rel_residual = rep.residual_history.back() / bnorm;
  return {x, rep};
}

std::pair<Vec, SolveReport> cg(const SpMat& A, const Vec& b, double tol, int max_iters) {
  return pcg(A, b, nullptr, tol, max_iters);
}

double power_method(const SpMat& A, int max_iters) {
  const Eigen::Index n = A.rows();
  if (n == 0) return 0.0;
  std::mt19937_64 rng(271828);
  std::normal_distribution<double> dist;
  Vec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = dist(rng);
  v.normalize();
  double lambda = 0.0;
  for (int it = 0; it < max_iters; ++it) {
    Vec Av = A * v;
    const double next = v.dot(Av);
    const double norm = Av.norm();
    if (norm == 0.0) return 0.0;
    v = Av / norm;
    if (it > 0 && std::abs(next - lambda) <= 1e-3 * std::abs(next)) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  return lambda;
}

double estimate_lambda(const SpMat& A) { return 1.1 * power_method(A); }

std::pair<double, double> lanczos_extremal(const std::function<Vec(const Vec&)>& op,
                                           Eigen::Index n, int iters) {
  if (n == 1) {
    Vec e = Vec::Ones(1);
    const double v = op(e)[0];
    return {v, v};
  }
  const int k = static_cast<int>(std::min<Eigen::Index>(iters, n));
  Eigen::MatrixXd V(n, k);
  Eigen::VectorXd alpha(k), beta(k);
  std::mt19937_64 rng(314159);
  std::normal_distribution<double> dist;
  Vec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = dist(rng);
  v.normalize();
  int steps = 0;
  for (int j = 0; j < k; ++j) {
    V.col(j) = v;
    Vec w = op(v);
    alpha[j] = v.dot(w);
    w -= alpha[j] * v;
    if (j > 0) w -= beta[j - 1] * V.col(j - 1);
    // Full reorthogonalization keeps the Ritz values clean.
    w -= V.leftCols(j + 1) * (V.leftCols(j + 1).transpose() * w);
    steps = j + 1;
    const double nb = w.norm();
    if (nb < 1e-13) break;
    beta[j] = nb;
    v = w / nb;
  }
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(steps, steps);
  for (int j = 0; j < steps; ++j) {
    T(j, j) = alpha[j];
    if (j + 1 < steps) {
      T(j, j + 1) = beta[j];
      T(j + 1, j) = beta[j];
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
  return {es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff()};
}

namespace {

std::pair<double, double> extremal_eigenvalues(const SpMat& A, Eigen::Index dense_limit) {
  if (A.rows() <= dense_limit) {
    Eigen::MatrixXd Ad(A);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Ad);
    return {es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff()};
  }
  return lanczos_extremal([&](const Vec& x) { return Vec(A * x); }, A.rows());
}

} // namespace

double condition_number(const SpMat& A, Eigen::Index dense_limit) {
  const auto [lmin, lmax] = extremal_eigenvalues(A, dense_limit);
  if (!(lmin > 0.0)) throw std::runtime_error("solver: matrix is not positive definite");
  return lmax / lmin;
}

double generalized_condition_number(const SpMat& A, const SpMat& B, Eigen::Index dense_limit) {
  if (A.rows() <= dense_limit) {
    Eigen::MatrixXd Ad(A), Bd(B);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(Ad, Bd);
    const double lmin = es.eigenvalues().minCoeff();
    const double lmax = es.eigenvalues().maxCoeff();
    if (!(lmin > 0.0)) throw std::runtime_error("solver: pencil is not positive definite");
    return lmax / lmin;
  }
  Eigen::SimplicialLLT<SpMat> llt(B);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("solver: Cholesky of the low-order matrix failed");
  // Lanczos on Lt^{-1} A Lt^{-T} with B = Lt Lt^T, Lt = P^T L; same spectrum
  // as B^{-1} A.
  const auto op = [&](const Vec& x) {
    Vec y = llt.matrixU().solve(x);
    y = llt.permutationPinv() * y;
    Vec z = A * y;
    z = llt.permutationP() * z;
    return Vec(llt.matrixL().solve(z));
  };
  const auto [lmin, lmax] = lanczos_extremal(op, A.rows());
  if (!(lmin > 0.0)) throw std::runtime_error("solver: pencil is not positive definite");
  return lmax / lmin;
}

int cg_iteration_bound(double kappa, double kappa_plain, double tol) {
  const double rho = (std::sqrt(kappa) - 1.0) / (std::sqrt(kappa) + 1.0);
  if (rho <= 0.0) return 1;
  const double target = tol / (2.0 * std::sqrt(kappa_plain));
  return static_cast<int>(std::ceil(std::log(1.0 / target) / std::log(1.0 / rho))) + 1;
}

} // namespace biharm
