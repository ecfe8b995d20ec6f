#pragma once

#include "biharm/common.hpp"
#include "biharm/mesh.hpp"
#include "biharm/patch.hpp"
#include "biharm/polyspace.hpp"

#include <vector>

namespace biharm {

// Default sample-set size ceil(1.5 * dim P_m).
int default_min_nodes(int dim, int degree);

// Map from nodal values on patch.nodes (in that order) to coefficients in
// the element's orthonormal basis. Solves the vertex-constrained least
// squares fit by the null-space method.
struct LocalRecon {
  Index element = -1;
  Eigen::MatrixXd nodal_to_coeff; // l x #I(K)
};

LocalRecon local_reconstruct(const Mesh& mesh, const LocalBasis& basis,
                             const ElementPatch& patch);

// Element-wise reconstruction from C0-linear nodal values into the broken
// degree-m space. Broken coefficients are laid out element by element,
// basis_size entries each.
struct ReconOperator {
  int degree = 1;
  int basis_size = 0;
  int min_nodes = 0;
  std::vector<LocalBasis> bases;
  std::vector<ElementPatch> patches;
  std::vector<LocalRecon> locals;

  // Broken coefficients from values on every mesh node.
  Vec apply_nodal(const Mesh& mesh, const Vec& nodal) const;
  // (ne * l) x nv sparse matrix of apply_nodal.
  SpMat matrix_full(const Mesh& mesh) const;
  // Columns restricted to interior nodes: represents functions vanishing at
  // boundary nodes, (ne * l) x n_p.
  SpMat matrix_interior(const Mesh& mesh) const;
};

// min_nodes <= 0 selects the default. With adaptive = true the sample size
// is increased (at most five times, by dim P_m each) until the global
// stability constant is within a factor 10 of the best per-element one.
ReconOperator build_recon(const Mesh& mesh, int degree, int min_nodes = 0,
                          bool adaptive = false);

struct ReconStats {
  std::vector<double> lambda_K; // per element
  double lambda_m = 0.0;        // max_K (1 + lambda_K * t_K * sqrt(#I))
  double min_lambda_K = 0.0;    // smallest per-element constant
  double min_stability = 0.0;   // min_K (1 + lambda_K * t_K * sqrt(#I))
  int max_depth = 0;
};

// Per-element constants (h_K^d sigma_min(B_K))^{-1/2} from the Gram matrix of
// basis evaluations over the sample nodes, and their global aggregate.
ReconStats stability_constants(const Mesh& mesh, const std::vector<LocalBasis>& bases,
                               const std::vector<ElementPatch>& patches);
ReconStats stability_constants(const Mesh& mesh, const ReconOperator& op);

} // namespace biharm
