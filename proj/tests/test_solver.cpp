// Krylov solvers, spectral estimators and the W-cycle preconditioner:
// convergence and reporting semantics, guards, eigenvalue oracles, the
// 1x1 arithmetic of the smoothed transfer, per-level spectral bounds,
// symmetry, contraction, and the Chebyshev iteration bound.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <biharm/assemble.hpp>
#include <biharm/mesh.hpp>
#include <biharm/multigrid.hpp>
#include <biharm/solver.hpp>

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

using namespace biharm;

namespace {

SpMat sparse_diag(const std::vector<double>& d) {
  SpMat A(d.size(), d.size());
  for (int i = 0; i < int(d.size()); ++i) A.insert(i, i) = d[i];
  A.makeCompressed();
  return A;
}

SpMat random_spd(int n, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> gauss;
  Eigen::MatrixXd B(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) B(i, j) = gauss(rng);
  }
  const Eigen::MatrixXd dense = B.transpose() * B + n * Eigen::MatrixXd::Identity(n, n);
  return SpMat(dense.sparseView());
}

Vec random_vec(Index n, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> gauss;
  Vec v(n);
  for (Index i = 0; i < n; ++i) v[i] = gauss(rng);
  return v;
}

struct LowOrderLadder {
  std::vector<SpMat> matrices; // coarse to fine
  std::vector<SpMat> prolong;
};

LowOrderLadder low_order_ladder(int dim, int n, int min_base = 0) {
  const MeshHierarchy hier = build_structured_hierarchy(dim, n, min_base);
  LowOrderLadder out;
  for (const Mesh& mesh : hier.levels) out.matrices.push_back(assemble_low_order(mesh));
  for (int j = 0; j + 1 < hier.level_count(); ++j) {
    out.prolong.push_back(hier.interior_prolongation(j));
  }
  return out;
}

double a_norm(const SpMat& A, const Vec& v) { return std::sqrt(v.dot(A * v)); }

} // namespace

TEST_CASE("cg solves the identity in one iteration") {
  SpMat I = sparse_diag(std::vector<double>(5, 1.0));
  const Vec b = random_vec(5, 1u);
  const auto [x, report] = cg(I, b);
  CHECK(report.converged);
  CHECK(report.iterations == 1);
  CHECK((x - b).cwiseAbs().maxCoeff() <= 1e-14);
  REQUIRE(report.residual_history.size() == 2); // r_0 and r_1
  CHECK(report.residual_history[0] == doctest::Approx(b.norm()).epsilon(1e-13));
}

TEST_CASE("cg and pcg reach the direct solution on a random SPD system") {
  const SpMat A = random_spd(40, 2u);
  const Vec b = random_vec(40, 3u);
  const Vec want = Eigen::SimplicialLLT<SpMat>(A).solve(b);

  const auto [x1, r1] = cg(A, b, 1e-12);
  CHECK(r1.converged);
  CHECK((x1 - want).norm() <= 1e-9 * want.norm());
  CHECK((b - A * x1).norm() <= 1e-12 * b.norm() * 1.001);
  CHECK(r1.rel_residual <= 1e-12);
  CHECK(int(r1.residual_history.size()) == r1.iterations + 1);

  // Exact preconditioner: one iteration.
  Eigen::SimplicialLLT<SpMat> llt(A);
  const auto [x2, r2] = pcg(A, b, [&](const Vec& r) { return Vec(llt.solve(r)); });
  CHECK(r2.converged);
  CHECK(r2.iterations <= 2);
  CHECK((x2 - want).norm() <= 1e-9 * want.norm());
}

TEST_CASE("jacobi preconditioning trivializes a diagonal system") {
  std::vector<double> d(50);
  for (int i = 0; i < 50; ++i) d[i] = 1.0 + i * i;
  const SpMat A = sparse_diag(d);
  const Vec b = random_vec(50, 4u);
  const auto [x, report] =
      pcg(A, b, [&](const Vec& r) { return Vec(r.array() / A.diagonal().array()); });
  CHECK(report.converged);
  CHECK(report.iterations == 1);
}

TEST_CASE("non-convergence is reported, not thrown") {
  const SpMat A = random_spd(30, 5u);
  const Vec b = random_vec(30, 6u);
  const auto [x, report] = cg(A, b, 1e-14, 2);
  CHECK(!report.converged);
  CHECK(report.iterations == 2);
  CHECK(report.rel_residual > 1e-14);
}

TEST_CASE("indefinite matrices are rejected by the curvature guard") {
  const SpMat A = sparse_diag({1.0, -1.0});
  Vec b(2);
  b << 1.0, 1.0;
  CHECK_THROWS_AS(cg(A, b), std::exception);
}

TEST_CASE("a zero right-hand side returns the zero solution immediately") {
  const SpMat A = random_spd(8, 7u);
  const auto [x, report] = cg(A, Vec::Zero(8));
  CHECK(report.converged);
  CHECK(x.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("power method and its safety margin") {
  const SpMat A = sparse_diag({1.0, 2.0, 3.0});
  const double rho = power_method(A);
  CHECK(rho > 2.97);
  CHECK(rho <= 3.0 * (1.0 + 1e-10));
  const double lam = estimate_lambda(A);
  CHECK(lam == doctest::Approx(1.1 * rho).epsilon(1e-13));
}

TEST_CASE("lanczos recovers extremal eigenvalues") {
  std::vector<double> d(10);
  for (int i = 0; i < 10; ++i) d[i] = i + 1.0;
  const SpMat A = sparse_diag(d);
  const auto [lo, hi] = lanczos_extremal([&](const Vec& v) { return Vec(A * v); }, 10);
  CHECK(lo == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(hi == doctest::Approx(10.0).epsilon(1e-8));
}

TEST_CASE("condition numbers: plain and generalized") {
  std::vector<double> d(10);
  for (int i = 0; i < 10; ++i) d[i] = i + 1.0;
  CHECK(condition_number(sparse_diag(d)) == doctest::Approx(10.0).epsilon(1e-9));
  CHECK(condition_number(sparse_diag(std::vector<double>(6, 1.0))) ==
        doctest::Approx(1.0).epsilon(1e-12));

  const Mesh mesh = build_unit_square_crisscross(4);
  const SpMat AL = assemble_low_order(mesh);
  CHECK(generalized_condition_number(AL, AL) == doctest::Approx(1.0).epsilon(1e-10));
  const SpMat AL2 = SpMat(2.0 * AL);
  CHECK(generalized_condition_number(AL2, AL) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("chebyshev bound caps the measured PCG iteration count") {
  const Mesh mesh = build_unit_square_crisscross(8);
  const ReconOperator recon = build_recon(mesh, 2);
  const DGSystem sys = assemble_system(mesh, recon, default_penalties(2),
                                       [](const Eigen::Vector3d&) { return 1.0; },
                                       nullptr, nullptr);
  const double kappa = generalized_condition_number(sys.A, sys.AL);
  const double kappa_plain = condition_number(sys.A);
  Eigen::SimplicialLLT<SpMat> llt(sys.AL);
  const auto [x, report] =
      pcg(sys.A, sys.b, [&](const Vec& r) { return Vec(llt.solve(r)); });
  CHECK(report.converged);
  CHECK(report.iterations <= cg_iteration_bound(kappa, kappa_plain, 1e-9));
  CHECK(cg_iteration_bound(1.0, 1.0, 1e-9) == 1);
  CHECK(cg_iteration_bound(100.0, 100.0, 1e-9) >
        cg_iteration_bound(4.0, 4.0, 1e-9));
}

TEST_CASE("smoothed transfer arithmetic on a one-dimensional model") {
  // A = [2], P = [1], lambda = 2: S = 1 - 2.9 + 2.15 = 0.25, so the
  // transfer is 0.25 and the Galerkin coarse matrix 0.25 * 2 * 0.25 = 0.125.
  SpMat A(1, 1), P(1, 1);
  A.insert(0, 0) = 2.0;
  P.insert(0, 0) = 1.0;
  const MGPreconditioner mg = MGPreconditioner::build_smoothed(A, {P}, 2.0);
  REQUIRE(mg.level_count() == 2);
  CHECK(mg.transfer(0).coeff(0, 0) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(mg.level_matrix(0).coeff(0, 0) == doctest::Approx(0.125).epsilon(1e-14));
  CHECK(mg.level_matrix(1).coeff(0, 0) == 2.0);
  // On a 1x1 system one Gauss-Seidel sweep is exact: apply = A^{-1}.
  Vec r(1);
  r << 3.0;
  CHECK(mg.apply(r)[0] == doctest::Approx(1.5).epsilon(1e-14));
}

TEST_CASE("supplied spectral bounds below the measured radius are rejected") {
  SpMat A(1, 1), P(1, 1);
  A.insert(0, 0) = 2.0;
  P.insert(0, 0) = 1.0;
  CHECK_THROWS_AS(MGPreconditioner::build_smoothed(A, {P}, 1.0), std::exception);
}

TEST_CASE("a single-level preconditioner is the direct solver") {
  const SpMat A = random_spd(10, 8u);
  const MGPreconditioner mg = MGPreconditioner::build_smoothed(A, {});
  CHECK(mg.level_count() == 1);
  const Vec r = random_vec(10, 9u);
  const Vec want = Eigen::SimplicialLLT<SpMat>(A).solve(r);
  CHECK((mg.apply(r) - want).cwiseAbs().maxCoeff() <= 1e-10 * want.cwiseAbs().maxCoeff());
}

TEST_CASE("per-level spectral bounds dominate the level matrices") {
  const LowOrderLadder ladder = low_order_ladder(2, 16);
  const MGPreconditioner mg =
      MGPreconditioner::build_smoothed(ladder.matrices.back(), ladder.prolong);
  REQUIRE(mg.level_count() == int(ladder.matrices.size()));
  for (int j = 0; j < mg.level_count(); ++j) {
    const Eigen::MatrixXd dense = Eigen::MatrixXd(mg.level_matrix(j));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(dense);
    const double rho = eig.eigenvalues().maxCoeff();
    CHECK(mg.level_lambda(j) >= 0.99 * rho);
    // The transfer-smoother polynomial maps the level spectrum into (0, 1].
    for (int i = 0; i < dense.rows(); ++i) {
      const double t = eig.eigenvalues()[i] / mg.level_lambda(j);
      const double g = 1.0 - 2.9 * t + 2.15 * t * t;
      CHECK(g > 0.0);
      CHECK(g <= 1.0 + 1e-12);
    }
  }
}

TEST_CASE("both variants are symmetric operators") {
  const LowOrderLadder ladder = low_order_ladder(2, 16);
  const SpMat& A = ladder.matrices.back();
  const MGPreconditioner mg1 = MGPreconditioner::build_smoothed(A, ladder.prolong);
  const MGPreconditioner mg2 =
      MGPreconditioner::build_rediscretized(ladder.matrices, ladder.prolong);
  for (const auto* mg : {&mg1, &mg2}) {
    for (unsigned seed = 0; seed < 10; ++seed) {
      const Vec u = random_vec(A.rows(), 100u + seed);
      const Vec v = random_vec(A.rows(), 200u + seed);
      const Vec mu = mg->apply(u);
      const Vec mv = mg->apply(v);
      const double lhs = mu.dot(v);
      const double rhs = u.dot(mv);
      CHECK(std::abs(lhs - rhs) <= 1e-9 * (mu.norm() * v.norm() + 1e-30));
    }
  }
}

TEST_CASE("stationary W-cycles contract the error monotonically") {
  const LowOrderLadder ladder = low_order_ladder(2, 16);
  const SpMat& A = ladder.matrices.back();
  const Vec b = random_vec(A.rows(), 10u);
  const Vec exact = Eigen::SimplicialLLT<SpMat>(A).solve(b);

  const MGPreconditioner mg1 = MGPreconditioner::build_smoothed(A, ladder.prolong);
  const MGPreconditioner mg2 =
      MGPreconditioner::build_rediscretized(ladder.matrices, ladder.prolong);
  for (const auto* mg : {&mg1, &mg2}) {
    Vec x = Vec::Zero(A.rows());
    double prev = a_norm(A, exact);
    const double initial = prev;
    for (int it = 0; it < 15; ++it) {
      mg->cycle(x, b);
      const double err = a_norm(A, Vec(exact - x));
      CHECK(err <= prev * (1.0 + 1e-12));
      prev = err;
    }
    CHECK(prev <= 0.01 * initial);
  }
}

TEST_CASE("rediscretized coarse matrices are the per-level assemblies") {
  const LowOrderLadder ladder = low_order_ladder(2, 8);
  const MGPreconditioner mg =
      MGPreconditioner::build_rediscretized(ladder.matrices, ladder.prolong);
  for (int j = 0; j < mg.level_count(); ++j) {
    const Eigen::MatrixXd got = Eigen::MatrixXd(mg.level_matrix(j));
    const Eigen::MatrixXd want = Eigen::MatrixXd(ladder.matrices[j]);
    CHECK((got - want).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("preconditioned CG with the W-cycle converges quickly") {
  const LowOrderLadder ladder = low_order_ladder(2, 32, 8);
  const SpMat& A = ladder.matrices.back();
  const Vec b = random_vec(A.rows(), 11u);
  const Vec want = Eigen::SimplicialLLT<SpMat>(A).solve(b);
  const MGPreconditioner mg = MGPreconditioner::build_smoothed(A, ladder.prolong);
  const auto [x, report] = pcg(A, b, [&](const Vec& r) { return mg.apply(r); });
  CHECK(report.converged);
  CHECK(report.iterations <= 30);
  CHECK((x - want).norm() <= 1e-6 * want.norm());
}

TEST_CASE("preconditioning a zero residual yields zero") {
  const LowOrderLadder ladder = low_order_ladder(2, 8);
  const MGPreconditioner mg =
      MGPreconditioner::build_smoothed(ladder.matrices.back(), ladder.prolong);
  const Vec zero = Vec::Zero(ladder.matrices.back().rows());
  CHECK(mg.apply(zero).cwiseAbs().maxCoeff() == 0.0);
}
