#pragma once

#include "biharm/common.hpp"

namespace biharm {

// Quadrature on the unit simplex of dimension dim (segment, triangle,
// tetrahedron). Points are barycentric (rows, dim+1 entries summing to 1),
// weights are positive and sum to the reference measure 1/dim!.
struct QuadratureRule {
  int dim = 1;
  int degree = 1;
  Eigen::MatrixXd bary;
  Eigen::VectorXd weights;

  int point_count() const { return static_cast<int>(weights.size()); }
  double reference_measure() const;
};

// Conical-product Gauss rule exact for polynomials of total degree <= degree.
// Supported degrees: 1..20.
QuadratureRule simplex_quadrature(int dim, int degree);

// Physical quadrature points (rows) for a simplex with the given vertices.
Eigen::MatrixX3d map_points(const QuadratureRule& rule,
                            const std::vector<Eigen::Vector3d>& verts);

// Physical weights: reference weights scaled by measure / reference measure.
Eigen::VectorXd map_weights(const QuadratureRule& rule, double measure);

// Gauss-Legendre nodes/weights on [0, 1] (weight function 1).
void gauss_legendre(int q, Eigen::VectorXd& nodes, Eigen::VectorXd& weights);

// Gauss-Jacobi nodes/weights on [0, 1] for the weight function (1-t)^alpha.
void gauss_jacobi(int q, int alpha, Eigen::VectorXd& nodes, Eigen::VectorXd& weights);

} // namespace biharm
