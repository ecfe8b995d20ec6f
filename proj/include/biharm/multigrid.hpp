#pragma once

#include "biharm/common.hpp"

#include <Eigen/SparseCholesky>

#include <memory>
#include <vector>

namespace biharm {

// W-cycle multigrid on the low-order form, used as an SPD preconditioner.
// One forward Gauss-Seidel sweep before and one backward sweep after the
// coarse correction keep the cycle symmetric; the coarsest level is solved
// directly. Two variants differ in how coarse operators and transfers arise:
//   SmoothedProlongator: transfers T_j = S_{j+1} P_j with the quadratic
//     smoother S = I - 2.9/lambda A + 2.15/lambda^2 A^2, coarse matrices by
//     the Galerkin product, per-level spectral bounds measured by the power
//     method.
//   Rediscretized: plain embeddings, coarse matrices assembled per level.
class MGPreconditioner {
public:
  enum class Variant { SmoothedProlongator, Rediscretized };

  // prolong[j] maps interior nodal vectors on level j to level j+1 and the
  // last one must target A_fine's space. lambda <= 0 estimates the spectral
  // bound internally; a supplied value below the measured radius of A_fine
  // (1% slack) is an error.
  static MGPreconditioner build_smoothed(const SpMat& A_fine,
                                         const std::vector<SpMat>& prolong,
                                         double lambda = -1.0);

  // level_matrices coarse to fine, one per level.
  static MGPreconditioner build_rediscretized(const std::vector<SpMat>& level_matrices,
                                              const std::vector<SpMat>& prolong);

  // One W-cycle updating x in place; a stationary iteration for A x = b at
  // the finest level.
  void cycle(Vec& x, const Vec& b) const;
  // Preconditioner action: one W-cycle from a zero start.
  Vec apply(const Vec& r) const;

  Variant variant() const { return variant_; }
  int level_count() const { return static_cast<int>(A_.size()); }
  const SpMat& level_matrix(int j) const { return A_[j]; }
  const SpMat& transfer(int j) const { return T_[j]; }
  double level_lambda(int j) const { return lambda_[j]; }

private:
  void wcycle(int level, Vec& x, const Vec& b) const;

  Variant variant_ = Variant::SmoothedProlongator;
  std::vector<SpMat> A_;        // per level, coarse first
  std::vector<SpMatRow> A_row_; // row-major copies for the Gauss-Seidel sweeps
  std::vector<SpMat> T_;        // T_[j]: level j -> j+1
  std::vector<double> lambda_;
  std::shared_ptr<Eigen::SimplicialLLT<SpMat>> coarse_;
};

} // namespace biharm
