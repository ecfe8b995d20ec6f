#include "biharm/multigrid.hpp"

#include "biharm/solver.hpp"

#include <cmath>
#include <stdexcept>

namespace biharm {

namespace {

void gauss_seidel_forward(const SpMatRow& A, Vec& x, const Vec& b) {
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    double s = b[i];
    double diag = 0.0;
    for (SpMatRow::InnerIterator it(A, i); it; ++it) {
      if (it.col() == i)
        diag = it.value();
      else
        s -= it.value() * x[it.col()];
    }
    x[i] = s / diag;
  }
}

void gauss_seidel_backward(const SpMatRow& A, Vec& x, const Vec& b) {
  for (Eigen::Index i = A.rows() - 1; i >= 0; --i) {
    double s = b[i];
    double diag = 0.0;
    for (SpMatRow::InnerIterator it(A, i); it; ++it) {
      if (it.col() == i)
        diag = it.value();
      else
        s -= it.value() * x[it.col()];
    }
    x[i] = s / diag;
  }
}

SpMat symmetrized(const SpMat& A) {
  SpMat At = A.transpose();
  return 0.5 * (A + At);
}

} // namespace

MGPreconditioner MGPreconditioner::build_smoothed(const SpMat& A_fine,
                                                  const std::vector<SpMat>& prolong,
                                                  double lambda) {
  MGPreconditioner mg;
  mg.variant_ = Variant::SmoothedProlongator;
  const int levels = static_cast<int>(prolong.size()) + 1;

  const double measured = power_method(A_fine);
  double lam = lambda;
  if (lam <= 0.0) {
    lam = 1.1 * measured;
  } else if (lam < 0.99 * measured) {
    throw std::runtime_error("multigrid: spectral bound below the measured radius");
  }

  mg.A_.assign(levels, {});
  mg.T_.assign(levels - 1, {});
  mg.lambda_.assign(levels, 0.0);
  mg.A_[levels - 1] = A_fine;
  mg.lambda_[levels - 1] = lam;
  for (int j = levels - 2; j >= 0; --j) {
    const SpMat& Af = mg.A_[j + 1];
    const double lj = mg.lambda_[j + 1];
    // T = S P assembled without forming S or A^2: P - 2.9/l AP + 2.15/l^2 A(AP).
    SpMat AP = Af * prolong[j];
    SpMat AAP = Af * AP;
    mg.T_[j] = prolong[j] - (2.9 / lj) * AP + (2.15 / (lj * lj)) * AAP;
    mg.A_[j] = symmetrized(SpMat(mg.T_[j].transpose() * Af * mg.T_[j]));
    // The quadratic smoother needs lambda_j >= rho(A_j) on every level; the
    // Galerkin operators of the stiffness matrices do not follow the fixed
    // 16x spectral decay of their mass-normalized counterparts, so measure
    // each level directly.
    mg.lambda_[j] = 1.1 * power_method(mg.A_[j]);
  }

  mg.A_row_.reserve(mg.A_.size());
  for (const SpMat& A : mg.A_) mg.A_row_.emplace_back(A);
  mg.coarse_ = std::make_shared<Eigen::SimplicialLLT<SpMat>>();
  mg.coarse_->compute(mg.A_.front());
  if (mg.coarse_->info() != Eigen::Success)
    throw std::runtime_error("multigrid: coarse factorization failed");
  return mg;
}

MGPreconditioner MGPreconditioner::build_rediscretized(
    const std::vector<SpMat>& level_matrices, const std::vector<SpMat>& prolong) {
  if (level_matrices.size() != prolong.size() + 1)
    throw std::runtime_error("multigrid: level/transfer count mismatch");
  MGPreconditioner mg;
  mg.variant_ = Variant::Rediscretized;
  mg.A_ = level_matrices;
  mg.T_ = prolong;
  mg.lambda_.assign(mg.A_.size(), 0.0);
  mg.A_row_.reserve(mg.A_.size());
  for (const SpMat& A : mg.A_) mg.A_row_.emplace_back(A);
  mg.coarse_ = std::make_shared<Eigen::SimplicialLLT<SpMat>>();
  mg.coarse_->compute(mg.A_.front());
  if (mg.coarse_->info() != Eigen::Success)
    throw std::runtime_error("multigrid: coarse factorization failed");
  return mg;
}

void MGPreconditioner::wcycle(int level, Vec& x, const Vec& b) const {
  if (level == 0) {
    x = coarse_->solve(b);
    return;
  }
  gauss_seidel_forward(A_row_[level], x, b);
  const Vec r = b - A_[level] * x;
  const Vec y = T_[level - 1].transpose() * r;
  Vec z = Vec::Zero(y.size());
  wcycle(level - 1, z, y);
  wcycle(level - 1, z, y); // second visit warm-starts from the first
  x += T_[level - 1] * z;
  gauss_seidel_backward(A_row_[level], x, b);
}

void MGPreconditioner::cycle(Vec& x, const Vec& b) const {
  wcycle(level_count() - 1, x, b);
}

Vec MGPreconditioner::apply(const Vec& r) const {
  Vec x = Vec::Zero(r.size());
  wcycle(level_count() - 1, x, r);
  return x;
}

} // namespace biharm
