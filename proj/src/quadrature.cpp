#include "biharm/quadrature.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace biharm {

double QuadratureRule::reference_measure() const {
  double m = 1.0;
  for (int i = 2; i <= dim; ++i) m /= i;
  return m;
}

// Golub-Welsch on the symmetric tridiagonal Jacobi matrix of the Jacobi
// weight (1-x)^alpha on [-1,1], then mapped to [0,1]. alpha = 0 is
// Gauss-Legendre. Weights come out positive.
void gauss_jacobi(int q, int alpha, Eigen::VectorXd& nodes, Eigen::VectorXd& weights) {
  if (q < 1) throw std::runtime_error("quadrature: need at least one point");
  const double a = alpha;
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(q, q);
  for (int k = 0; k < q; ++k) {
    const double den = (2 * k + a) * (2 * k + a + 2);
    J(k, k) = (k == 0 && alpha == 0) ? 0.0 : -a * a / den;
  }
  for (int k = 1; k < q; ++k) {
    const double num = 4.0 * k * k * (k + a) * (k + a);
    const double den = (2 * k + a) * (2 * k + a) * (2 * k + a + 1) * (2 * k + a - 1);
    const double b = std::sqrt(num / den);
    J(k, k - 1) = b;
    J(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("quadrature: eigen decomposition failed");
  const double mu0 = std::pow(2.0, a + 1.0) / (a + 1.0); // integral of (1-x)^a over [-1,1]
  nodes.resize(q);
  weights.resize(q);
  for (int i = 0; i < q; ++i) {
    nodes[i] = 0.5 * (1.0 + es.eigenvalues()[i]);
    const double v0 = es.eigenvectors()(0, i);
    weights[i] = mu0 * v0 * v0 / std::pow(2.0, a + 1.0);
  }
}

void gauss_legendre(int q, Eigen::VectorXd& nodes, Eigen::VectorXd& weights) {
  gauss_jacobi(q, 0, nodes, weights);
}

QuadratureRule simplex_quadrature(int dim, int degree) {
  if (dim < 1 || dim > 3) throw std::runtime_error("quadrature: dim must be 1, 2 or 3");
  if (degree < 1 || degree > 20)
    throw std::runtime_error("quadrature: degree must be in [1, 20]");
  const int q = (degree + 2) / 2; // ceil((degree+1)/2)

  QuadratureRule rule;
  rule.dim = dim;
  rule.degree = degree;

  Eigen::VectorXd xg, wg, xj1, wj1, xj2, wj2;
  gauss_legendre(q, xg, wg);
  if (dim >= 2) gauss_jacobi(q, 1, xj1, wj1);
  if (dim == 3) gauss_jacobi(q, 2, xj2, wj2);

  if (dim == 1) {
    rule.bary.resize(q, 2);
    rule.weights.resize(q);
    for (int i = 0; i < q; ++i) {
      rule.bary(i, 0) = 1.0 - xg[i];
      rule.bary(i, 1) = xg[i];
      rule.weights[i] = wg[i];
    }
  } else if (dim == 2) {
    // Collapsed coordinates: x = s(1-t), y = t with Jacobian (1-t).
    rule.bary.resize(q * q, 3);
    rule.weights.resize(q * q);
    int p = 0;
    for (int j = 0; j < q; ++j)
      for (int i = 0; i < q; ++i, ++p) {
        const double x = xg[i] * (1.0 - xj1[j]);
        const double y = xj1[j];
        rule.bary(p, 0) = 1.0 - x - y;
        rule.bary(p, 1) = x;
        rule.bary(p, 2) = y;
        rule.weights[p] = wg[i] * wj1[j];
      }
  } else {
    // x = s(1-t)(1-u), y = t(1-u), z = u with Jacobian (1-t)(1-u)^2.
    rule.bary.resize(q * q * q, 4);
    rule.weights.resize(q * q * q);
    int p = 0;
    for (int k = 0; k < q; ++k)
      for (int j = 0; j < q; ++j)
        for (int i = 0; i < q; ++i, ++p) {
          const double z = xj2[k];
          const double y = xj1[j] * (1.0 - z);
          const double x = xg[i] * (1.0 - xj1[j]) * (1.0 - z);
          rule.bary(p, 0) = 1.0 - x - y - z;
          rule.bary(p, 1) = x;
          rule.bary(p, 2) = y;
          rule.bary(p, 3) = z;
          rule.weights[p] = wg[i] * wj1[j] * wj2[k];
        }
  }
  return rule;
}

Eigen::MatrixX3d map_points(const QuadratureRule& rule,
                            const std::vector<Eigen::Vector3d>& verts) {
  if (static_cast<int>(verts.size()) != rule.dim + 1)
    throw std::runtime_error("quadrature: vertex count does not match rule dimension");
  Eigen::MatrixX3d pts(rule.point_count(), 3);
  for (int p = 0; p < rule.point_count(); ++p) {
    Eigen::Vector3d x = Eigen::Vector3d::Zero();
    for (int i = 0; i <= rule.dim; ++i) x += rule.bary(p, i) * verts[i];
    pts.row(p) = x;
  }
  return pts;
}

Eigen::VectorXd map_weights(const QuadratureRule& rule, double measure) {
  return rule.weights * (measure / rule.reference_measure());
}

} // namespace biharm
