#include "biharm/polyspace.hpp"

#include "biharm/parallel.hpp"

#include <cmath>
#include <stdexcept>

namespace biharm {

int poly_space_dim(int dim, int degree) {
  if (dim == 2) return (degree + 1) * (degree + 2) / 2;
  if (dim == 3) return (degree + 1) * (degree + 2) * (degree + 3) / 6;
  throw std::runtime_error("polyspace: dim must be 2 or 3");
}

std::vector<std::array<int, 3>> monomial_exponents(int dim, int degree) {
  std::vector<std::array<int, 3>> exps;
  exps.reserve(static_cast<std::size_t>(poly_space_dim(dim, degree)));
  for (int t = 0; t <= degree; ++t)
    for (int ax = t; ax >= 0; --ax) {
      if (dim == 2) {
        exps.push_back({ax, t - ax, 0});
      } else {
        for (int ay = t - ax; ay >= 0; --ay) exps.push_back({ax, ay, t - ax - ay});
      }
    }
  return exps;
}

namespace {

// Falling factorial a(a-1)...(a-b+1); zero when the derivative order exceeds
// the exponent.
double falling(int a, int b) {
  double f = 1.0;
  for (int i = 0; i < b; ++i) f *= (a - i);
  return b > a ? 0.0 : f;
}

// Values of the derivative of each scaled monomial at each point:
// (points x monomials).
Eigen::MatrixXd monomial_eval(const std::vector<std::array<int, 3>>& exps,
                              const Eigen::MatrixX3d& pts, const Eigen::Vector3d& center,
                              double scale, std::array<int, 3> deriv) {
  const int np = static_cast<int>(pts.rows());
  const int l = static_cast<int>(exps.size());
  const int order = deriv[0] + deriv[1] + deriv[2];
  const double chain = std::pow(scale, -order);
  Eigen::MatrixXd vals(np, l);
  for (int p = 0; p < np; ++p) {
    const Eigen::Vector3d u = (pts.row(p).transpose() - center) / scale;
    for (int j = 0; j < l; ++j) {
      double v = chain;
      for (int c = 0; c < 3; ++c) {
        const int a = exps[j][c];
        const int b = deriv[c];
        if (b > a) {
          v = 0.0;
          break;
        }
        v *= falling(a, b) * std::pow(u[c], a - b);
      }
      vals(p, j) = v;
    }
  }
  return vals;
}

} // namespace

Eigen::MatrixXd LocalBasis::eval(const Eigen::MatrixX3d& pts, std::array<int, 3> deriv) const {
  const auto exps = monomial_exponents(dim, degree);
  Eigen::MatrixXd mono = monomial_eval(exps, pts, center, scale, deriv);
  return mono * coeff.transpose();
}

Eigen::MatrixXd LocalBasis::laplacian(const Eigen::MatrixX3d& pts) const {
  Eigen::MatrixXd out = eval(pts, {2, 0, 0}) + eval(pts, {0, 2, 0});
  if (dim == 3) out += eval(pts, {0, 0, 2});
  return out;
}

Eigen::MatrixXd LocalBasis::normal_gradient(const Eigen::MatrixX3d& pts,
                                            const Eigen::Vector3d& n) const {
  Eigen::MatrixXd out = n.x() * eval(pts, {1, 0, 0}) + n.y() * eval(pts, {0, 1, 0});
  if (dim == 3) out += n.z() * eval(pts, {0, 0, 1});
  return out;
}

Eigen::MatrixXd LocalBasis::normal_gradient_laplacian(const Eigen::MatrixX3d& pts,
                                                      const Eigen::Vector3d& n) const {
  Eigen::MatrixXd out(pts.rows(), size());
  out.setZero();
  for (int i = 0; i < dim; ++i) {
    if (n[i] == 0.0) continue;
    for (int j = 0; j < dim; ++j) {
      std::array<int, 3> k{0, 0, 0};
      k[i] += 1;
      k[j] += 2;
      out += n[i] * eval(pts, k);
    }
  }
  return out;
}

LocalBasis orthonormalize(const Mesh& mesh, Index k, int degree, const QuadratureRule& rule) {
  LocalBasis basis;
  basis.dim = mesh.dim;
  basis.degree = degree;
  basis.element = k;
  basis.center = mesh.barycenter(k);
  basis.scale = mesh.element_diameter[k];

  std::vector<Eigen::Vector3d> verts(mesh.dim + 1);
  for (int i = 0; i <= mesh.dim; ++i) verts[i] = mesh.vertices[mesh.elements[k][i]];
  const Eigen::MatrixX3d pts = map_points(rule, verts);
  const Eigen::VectorXd w = map_weights(rule, mesh.element_measure(k));

  const auto exps = monomial_exponents(mesh.dim, degree);
  const int l = static_cast<int>(exps.size());
  Eigen::MatrixXd B = monomial_eval(exps, pts, basis.center, basis.scale, {0, 0, 0});
  for (int p = 0; p < B.rows(); ++p) B.row(p) *= std::sqrt(w[p]);

  // MGS in the weighted evaluation space; R^{-T} maps monomials to the
  // orthonormal functions.
  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(l, l);
  for (int j = 0; j < l; ++j) {
    for (int i = 0; i < j; ++i) {
      const double r = B.col(i).dot(B.col(j));
      R(i, j) = r;
      B.col(j) -= r * B.col(i);
    }
    const double r = B.col(j).norm();
    if (!(r > 1e-13))
      throw std::runtime_error("polyspace: near-singular Gram on element " + std::to_string(k));
    R(j, j) = r;
    B.col(j) /= r;
  }
  basis.coeff = R.transpose()
                    .triangularView<Eigen::Lower>()
                    .solve(Eigen::MatrixXd::Identity(l, l));
  return basis;
}

std::vector<LocalBasis> build_all_bases(const Mesh& mesh, int degree) {
  const QuadratureRule rule = simplex_quadrature(mesh.dim, 2 * degree);
  std::vector<LocalBasis> bases(mesh.element_count());
  parallel_for(bases.size(), [&](std::size_t k) {
    bases[k] = orthonormalize(mesh, static_cast<Index>(k), degree, rule);
  });
  return bases;
}

} // namespace biharm
