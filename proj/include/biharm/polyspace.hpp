#pragma once

#include "biharm/common.hpp"
#include "biharm/mesh.hpp"
#include "biharm/quadrature.hpp"

#include <array>
#include <vector>

namespace biharm {

// dim P_m: (m+1)(m+2)/2 in 2D, (m+1)(m+2)(m+3)/6 in 3D.
int poly_space_dim(int dim, int degree);

// Exponent triples of the monomials spanning P_m, graded lexicographic
// (total degree ascending, then x-exponent descending). 2D exponents keep
// z = 0.
std::vector<std::array<int, 3>> monomial_exponents(int dim, int degree);

// L2(K)-orthonormal basis of P_m on one element, represented in the scaled
// monomials ((x - x_K)/h_K)^alpha. coeff is lower triangular: row i holds the
// monomial coefficients of basis function i.
struct LocalBasis {
  int dim = 2;
  int degree = 1;
  Index element = -1;
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  double scale = 1.0;
  Eigen::MatrixXd coeff;

  int size() const { return static_cast<int>(coeff.rows()); }

  // Values of the partial derivative d^|k|/dx^kx dy^ky dz^kz of every basis
  // function at the given physical points; result is (points x functions).
  // |k| up to 3 is supported.
  Eigen::MatrixXd eval(const Eigen::MatrixX3d& pts, std::array<int, 3> deriv = {0, 0, 0}) const;

  Eigen::MatrixXd laplacian(const Eigen::MatrixX3d& pts) const;
  Eigen::MatrixXd normal_gradient(const Eigen::MatrixX3d& pts, const Eigen::Vector3d& n) const;
  // n . grad(Laplacian): third derivatives contracted with the face normal.
  Eigen::MatrixXd normal_gradient_laplacian(const Eigen::MatrixX3d& pts,
                                            const Eigen::Vector3d& n) const;
};

// Modified Gram-Schmidt over the graded-lex scaled monomials in the
// quadrature inner product of element k. The rule must be exact to degree
// 2 * degree.
LocalBasis orthonormalize(const Mesh& mesh, Index k, int degree, const QuadratureRule& rule);

std::vector<LocalBasis> build_all_bases(const Mesh& mesh, int degree);

} // namespace biharm
