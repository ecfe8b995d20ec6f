#pragma once

#include "biharm/common.hpp"
#include "biharm/mesh.hpp"
#include "biharm/polyspace.hpp"
#include "biharm/recon.hpp"

#include <functional>
#include <vector>

namespace biharm {

// Interior-penalty weights; defaults are 12.5 m^2 (m - 1) and 1.25 m^2.
struct Penalties {
  double mu1 = 0.0;
  double mu2 = 0.0;
};
Penalties default_penalties(int degree);

using ScalarField = std::function<double(const Eigen::Vector3d&)>;
// Second argument is the outward unit normal at the evaluation point.
using NormalField = std::function<double(const Eigen::Vector3d&, const Eigen::Vector3d&)>;

// Physical quadrature points on a mesh face (rule dimension dim - 1).
Eigen::MatrixX3d face_quadrature_points(const Mesh& mesh, const Face& f,
                                        const QuadratureRule& rule);

// Interior-penalty bilinear form on the broken degree-m space:
// element Laplacian products, symmetric consistency terms on all faces, and
// the mu1 h^-3 / mu2 h^-1 jump penalties. Boundary faces use single traces.
// Dof block k*l..(k+1)*l-1 holds element k's orthonormal coefficients.
SpMat assemble_broken_form(const Mesh& mesh, const std::vector<LocalBasis>& bases,
                           const Penalties& pen);

// Low-order form on continuous linears vanishing at boundary nodes: per-face
// |e| h_e^-1 [normal gradient jump]^2, boundary faces included. SPD.
SpMat assemble_low_order(const Mesh& mesh);

// Per-element load vector integr(f * p_i), broken layout. quad_degree <= 0
// selects 2m + 4.
Vec assemble_broken_load(const Mesh& mesh, const std::vector<LocalBasis>& bases,
                         const ScalarField& f, int quad_degree = 0);

// Right-hand side carrying inhomogeneous clamped data: the load, minus the
// form applied to the boundary lift w = R^m(g1 at boundary nodes), minus the
// g2 consistency term, plus the penalty couplings with g1 and g2.
// lift_coeffs receives the broken coefficients of the lift; the discrete
// solution of the original problem is (R x) + lift_coeffs.
Vec assemble_rhs_clamped(const Mesh& mesh, const std::vector<LocalBasis>& bases,
                         const ReconOperator& recon, const SpMat& broken_form,
                         const SpMat& R_interior, const ScalarField& f,
                         const ScalarField& g1, const NormalField& g2,
                         const Penalties& pen, Vec* lift_coeffs);

// Energy-type seminorms of a broken function.
//   Energy:      sum ||Lap v||^2_K + sum h^-3 ||[v]||^2_e + h^-1 ||[dn v]||^2_e
//   EnergyTilde: Energy + sum h^3 ||<dn Lap v>||^2_e + h ||<Lap v>||^2_e
//   Hessian:     Energy with the element term replaced by ||D^2 v||^2_F.
enum class BrokenNorm { Energy, EnergyTilde, Hessian };
double broken_norm(const Mesh& mesh, const std::vector<LocalBasis>& bases,
                   const Vec& coeffs, BrokenNorm which);

// Element and jump parts used by the continuity-defect ratio: returns
// (sum ||D^2 v||^2 - sum ||Lap v||^2, interior value-jump sum + all-face
// gradient-jump sum), both unweighted by penalties.
std::pair<double, double> hessian_defect_parts(const Mesh& mesh,
                                               const std::vector<LocalBasis>& bases,
                                               const Vec& coeffs);

// Complete discrete system for one mesh/degree pair.
struct DGSystem {
  int degree = 0;
  Penalties pen;
  SpMat broken;   // bilinear form on broken dofs
  SpMat R;        // interior-node reconstruction matrix
  SpMat A;        // R^T broken R
  SpMat M;        // R^T R (orthonormal element bases)
  SpMat AL;       // low-order form
  Vec b;          // interior-node right-hand side
  Vec lift;       // broken coefficients of the boundary lift (zero when g1 = g2 = 0)
};

DGSystem assemble_system(const Mesh& mesh, const ReconOperator& recon,
                         const Penalties& pen, const ScalarField& f,
                         const ScalarField* g1, const NormalField* g2);

} // namespace biharm
