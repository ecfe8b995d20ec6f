// Element-local polynomial bases: dimension formulas, monomial ordering,
// orthonormality under an independent quadrature rule, span of P_m,
// derivative evaluation against finite differences, and invariance under
// translation of the element.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <biharm/mesh.hpp>
#include <biharm/polyspace.hpp>
#include <biharm/quadrature.hpp>

#include <cmath>
#include <random>
#include <set>
#include <stdexcept>

using namespace biharm;

namespace {

std::vector<Eigen::Vector3d> element_vertices(const Mesh& mesh, Index k) {
  std::vector<Eigen::Vector3d> verts;
  for (int i = 0; i < mesh.verts_per_element(); ++i) {
    verts.push_back(mesh.vertices[mesh.elements[k][i]]);
  }
  return verts;
}

// Gram matrix of the basis on element k using a rule of the given degree
// (chosen different from the one used to build the basis).
Eigen::MatrixXd gram_matrix(const Mesh& mesh, const LocalBasis& basis, int rule_degree) {
  const QuadratureRule rule = simplex_quadrature(mesh.dim, rule_degree);
  const Eigen::MatrixX3d pts = map_points(rule, element_vertices(mesh, basis.element));
  const Eigen::VectorXd w = map_weights(rule, mesh.element_measure(basis.element));
  const Eigen::MatrixXd vals = basis.eval(pts);
  return vals.transpose() * w.asDiagonal() * vals;
}

// Random points inside element k (barycentric dirichlet-ish sampling).
Eigen::MatrixX3d random_points(const Mesh& mesh, Index k, int count, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> uni(0.05, 0.95);
  const auto verts = element_vertices(mesh, k);
  Eigen::MatrixX3d pts(count, 3);
  for (int i = 0; i < count; ++i) {
    Eigen::VectorXd lambda(verts.size());
    for (int j = 0; j < int(verts.size()); ++j) lambda[j] = uni(rng);
    lambda /= lambda.sum();
    Eigen::Vector3d p = Eigen::Vector3d::Zero();
    for (int j = 0; j < int(verts.size()); ++j) p += lambda[j] * verts[j];
    pts.row(i) = p;
  }
  return pts;
}

} // namespace

TEST_CASE("polynomial space dimensions") {
  CHECK(poly_space_dim(2, 0) == 1);
  CHECK(poly_space_dim(2, 1) == 3);
  CHECK(poly_space_dim(2, 2) == 6);
  CHECK(poly_space_dim(2, 3) == 10);
  CHECK(poly_space_dim(2, 4) == 15);
  CHECK(poly_space_dim(3, 0) == 1);
  CHECK(poly_space_dim(3, 1) == 4);
  CHECK(poly_space_dim(3, 2) == 10);
  CHECK(poly_space_dim(3, 3) == 20);
  CHECK(poly_space_dim(3, 4) == 35);
}

TEST_CASE("monomial exponents: count, degree grading, uniqueness") {
  for (int dim : {2, 3}) {
    for (int degree = 0; degree <= 4; ++degree) {
      const auto exps = monomial_exponents(dim, degree);
      REQUIRE(int(exps.size()) == poly_space_dim(dim, degree));
      std::set<std::array<int, 3>> seen;
      int prev_total = 0;
      for (const auto& e : exps) {
        const int total = e[0] + e[1] + e[2];
        CHECK(total <= degree);
        CHECK(total >= prev_total); // graded: total degree non-decreasing
        prev_total = total;
        if (dim == 2) CHECK(e[2] == 0);
        CHECK(seen.insert(e).second);
      }
    }
  }
}

TEST_CASE("orthonormal under an independent quadrature rule") {
  for (int dim : {2, 3}) {
    const Mesh mesh = dim == 2 ? build_unit_square_crisscross(2) : build_unit_cube_mesh(2);
    for (int degree : {1, 2, 3, 4}) {
      const auto bases = build_all_bases(mesh, degree);
      REQUIRE(Index(bases.size()) == mesh.element_count());
      for (Index k = 0; k < mesh.element_count(); k += 5) {
        const Eigen::MatrixXd g = gram_matrix(mesh, bases[k], 2 * degree + 2);
        const double err =
            (g - Eigen::MatrixXd::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff();
        CHECK(err <= 1e-10);
      }
    }
  }
}

TEST_CASE("coefficient matrix is lower triangular with positive diagonal") {
  const Mesh mesh = build_unit_square_mesh(2);
  const auto bases = build_all_bases(mesh, 3);
  for (const auto& b : bases) {
    REQUIRE(b.coeff.rows() == b.coeff.cols());
    for (int i = 0; i < b.coeff.rows(); ++i) {
      CHECK(b.coeff(i, i) > 0.0);
      for (int j = i + 1; j < b.coeff.cols(); ++j) CHECK(b.coeff(i, j) == 0.0);
    }
  }
}

TEST_CASE("basis spans P_m: monomials are reproduced by projection") {
  // For any monomial q of degree <= m, the L2(K)-projection onto the basis
  // must reproduce q pointwise.
  for (int dim : {2, 3}) {
    const Mesh mesh = dim == 2 ? build_unit_square_mesh(2) : build_unit_cube_mesh(1);
    const int degree = 3;
    const QuadratureRule rule = simplex_quadrature(dim, 2 * degree + 2);
    const Index k = mesh.element_count() / 2;
    const LocalBasis basis = orthonormalize(mesh, k, degree, rule);

    const Eigen::MatrixX3d qpts = map_points(rule, element_vertices(mesh, k));
    const Eigen::VectorXd w = map_weights(rule, mesh.element_measure(k));
    const Eigen::MatrixXd vals = basis.eval(qpts);
    const Eigen::MatrixX3d test_pts = random_points(mesh, k, 20, 7u);
    const Eigen::MatrixXd test_vals = basis.eval(test_pts);

    for (const auto& e : monomial_exponents(dim, degree)) {
      Eigen::VectorXd q(qpts.rows()), qt(test_pts.rows());
      for (int i = 0; i < qpts.rows(); ++i) {
        q[i] = std::pow(qpts(i, 0), e[0]) * std::pow(qpts(i, 1), e[1]) *
               std::pow(qpts(i, 2), e[2]);
      }
      for (int i = 0; i < test_pts.rows(); ++i) {
        qt[i] = std::pow(test_pts(i, 0), e[0]) * std::pow(test_pts(i, 1), e[1]) *
                std::pow(test_pts(i, 2), e[2]);
      }
      const Eigen::VectorXd coeffs = vals.transpose() * (w.asDiagonal() * q);
      const Eigen::VectorXd recon = test_vals * coeffs;
      CHECK((recon - qt).cwiseAbs().maxCoeff() <= 1e-10);
    }
  }
}

TEST_CASE("derivatives match central finite differences") {
  const Mesh mesh = build_unit_square_crisscross(2);
  const int degree = 4;
  const QuadratureRule rule = simplex_quadrature(2, 2 * degree);
  const LocalBasis basis = orthonormalize(mesh, 0, degree, rule);
  const Eigen::MatrixX3d pts = random_points(mesh, 0, 5, 11u);

  // All derivative multi-indices with |k| in {1, 2, 3}.
  const std::vector<std::array<int, 3>> derivs = {
      {1, 0, 0}, {0, 1, 0}, {2, 0, 0}, {1, 1, 0},
      {0, 2, 0}, {3, 0, 0}, {2, 1, 0}, {1, 2, 0}, {0, 3, 0}};
  for (const auto& d : derivs) {
    // Step sizes balance h^2 truncation (the orthonormal basis has steep
    // third derivatives) against eps/h^|k| roundoff per derivative order.
    const int order = d[0] + d[1];
    const double h = order == 1 ? 1e-5 : order == 2 ? 1e-4 : 1e-3;
    const Eigen::MatrixXd got = basis.eval(pts, d);
    // Central differences applied coordinate by coordinate.
    Eigen::MatrixXd fd = Eigen::MatrixXd::Zero(got.rows(), got.cols());
    const int dx = d[0], dy = d[1];
    // Stencil weights for the |k|-th central difference of each coordinate.
    const auto stencil = [](int order) {
      // order 0: {1@0}; 1: {-1/2@-1, 1/2@+1}; 2: {1@-1, -2@0, 1@+1};
      // 3: {-1/2@-2, 1@-1, -1@+1, 1/2@+2}
      std::vector<std::pair<int, double>> s;
      switch (order) {
        case 0: s = {{0, 1.0}}; break;
        case 1: s = {{-1, -0.5}, {1, 0.5}}; break;
        case 2: s = {{-1, 1.0}, {0, -2.0}, {1, 1.0}}; break;
        default: s = {{-2, -0.5}, {-1, 1.0}, {1, -1.0}, {2, 0.5}}; break;
      }
      return s;
    };
    for (const auto& [ox, wx] : stencil(dx)) {
      for (const auto& [oy, wy] : stencil(dy)) {
        Eigen::MatrixX3d shifted = pts;
        shifted.col(0).array() += ox * h;
        shifted.col(1).array() += oy * h;
        fd += wx * wy * basis.eval(shifted);
      }
    }
    fd /= std::pow(h, dx + dy);
    const double scale = got.cwiseAbs().maxCoeff() + 1.0;
    CHECK((got - fd).cwiseAbs().maxCoeff() / scale <= 1e-6);
  }
}

TEST_CASE("laplacian equals the trace of the second-derivative evaluations") {
  for (int dim : {2, 3}) {
    const Mesh mesh = dim == 2 ? build_unit_square_mesh(2) : build_unit_cube_mesh(1);
    const int degree = 3;
    const QuadratureRule rule = simplex_quadrature(dim, 2 * degree);
    const LocalBasis basis = orthonormalize(mesh, 0, degree, rule);
    const Eigen::MatrixX3d pts = random_points(mesh, 0, 7, 13u);
    Eigen::MatrixXd trace = basis.eval(pts, {2, 0, 0}) + basis.eval(pts, {0, 2, 0});
    if (dim == 3) trace += basis.eval(pts, {0, 0, 2});
    const Eigen::MatrixXd lap = basis.laplacian(pts);
    CHECK((trace - lap).cwiseAbs().maxCoeff() <= 1e-12 * (lap.cwiseAbs().maxCoeff() + 1.0));
  }
}

TEST_CASE("normal derivative helpers contract gradients with the normal") {
  const Mesh mesh = build_unit_cube_mesh(1);
  const int degree = 3;
  const QuadratureRule rule = simplex_quadrature(3, 2 * degree);
  const LocalBasis basis = orthonormalize(mesh, 2, degree, rule);
  const Eigen::MatrixX3d pts = random_points(mesh, 2, 6, 17u);
  const Eigen::Vector3d n = Eigen::Vector3d(1.0, -2.0, 0.5).normalized();

  const Eigen::MatrixXd got = basis.normal_gradient(pts, n);
  const Eigen::MatrixXd want = n.x() * basis.eval(pts, {1, 0, 0}) +
                               n.y() * basis.eval(pts, {0, 1, 0}) +
                               n.z() * basis.eval(pts, {0, 0, 1});
  CHECK((got - want).cwiseAbs().maxCoeff() <= 1e-12 * (want.cwiseAbs().maxCoeff() + 1.0));

  // n . grad(Laplacian) via third derivatives.
  const Eigen::MatrixXd got3 = basis.normal_gradient_laplacian(pts, n);
  const Eigen::MatrixXd want3 =
      n.x() * (basis.eval(pts, {3, 0, 0}) + basis.eval(pts, {1, 2, 0}) +
               basis.eval(pts, {1, 0, 2})) +
      n.y() * (basis.eval(pts, {2, 1, 0}) + basis.eval(pts, {0, 3, 0}) +
               basis.eval(pts, {0, 1, 2})) +
      n.z() * (basis.eval(pts, {2, 0, 1}) + basis.eval(pts, {0, 2, 1}) +
               basis.eval(pts, {0, 0, 3}));
  CHECK((got3 - want3).cwiseAbs().maxCoeff() <=
        1e-11 * (want3.cwiseAbs().maxCoeff() + 1.0));
}

TEST_CASE("degree-0 basis is the normalized constant") {
  const Mesh mesh = build_unit_square_mesh(1);
  const QuadratureRule rule = simplex_quadrature(2, 1);
  const LocalBasis basis = orthonormalize(mesh, 0, 0, rule);
  REQUIRE(basis.size() == 1);
  const Eigen::MatrixX3d pts = random_points(mesh, 0, 3, 19u);
  const Eigen::MatrixXd vals = basis.eval(pts);
  const double want = 1.0 / std::sqrt(mesh.element_measure(0)); // 1/sqrt(|K|)
  for (int i = 0; i < vals.rows(); ++i) {
    CHECK(vals(i, 0) == doctest::Approx(want).epsilon(1e-13));
  }
  // Derivatives of the constant vanish.
  CHECK(basis.eval(pts, {1, 0, 0}).cwiseAbs().maxCoeff() == 0.0);
  CHECK(basis.laplacian(pts).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("basis coefficients are invariant under element translation") {
  // Two one-element meshes differing by a rigid shift: centered/scaled
  // monomials make the orthonormalization identical.
  Mesh a;
  a.dim = 2;
  a.vertices = {{0.1, 0.2, 0}, {0.7, 0.3, 0}, {0.4, 0.9, 0}};
  a.elements = {{0, 1, 2, -1}};
  a.finalize();
  Mesh b = a;
  for (auto& v : b.vertices) v += Eigen::Vector3d(5.0, -3.0, 0.0);
  b.finalize();

  const QuadratureRule rule = simplex_quadrature(2, 8);
  const LocalBasis ba = orthonormalize(a, 0, 3, rule);
  const LocalBasis bb = orthonormalize(b, 0, 3, rule);
  CHECK(ba.scale == doctest::Approx(bb.scale).epsilon(1e-14));
  CHECK((ba.coeff - bb.coeff).cwiseAbs().maxCoeff() <=
        1e-12 * ba.coeff.cwiseAbs().maxCoeff());
}

namespace {
LocalBasis make_degenerate_basis() {
  Mesh m;
  m.dim = 2;
  m.vertices = {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}}; // collinear
  m.elements = {{0, 1, 2, -1}};
  m.finalize();
  const QuadratureRule rule = simplex_quadrature(2, 4);
  return orthonormalize(m, 0, 2, rule);
}
} // namespace

TEST_CASE("degenerate elements are rejected") {
  CHECK_THROWS_AS(make_degenerate_basis(), std::exception);
}
