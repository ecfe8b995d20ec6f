#pragma once

#include "biharm/assemble.hpp"
#include "biharm/common.hpp"
#include "biharm/mesh.hpp"
#include "biharm/recon.hpp"
#include "biharm/solver.hpp"

#include <optional>
#include <string>
#include <vector>

namespace biharm {

// Closed-form model problem: u with clamped data g1 = u, g2 = dn u on the
// boundary and f = Lap^2 u.
struct ManufacturedCase {
  std::string name;
  int dim = 2;
  ScalarField u;
  ScalarField f;
  ScalarField lap_u;
  std::function<Eigen::Vector3d(const Eigen::Vector3d&)> grad_u;
  ScalarField g1;
  NormalField g2;
  bool homogeneous = false; // g1 and g2 vanish identically
};

// u = sin^2(pi x) sin^2(pi y) on the unit square; fully homogeneous data.
ManufacturedCase case_example1();
// u = sin(pi x) sin(pi y) sin(pi z) on the unit cube; g1 = 0, g2 = dn u.
ManufacturedCase case_example2();
// No exact solution: f = 1 with homogeneous clamped data.
ManufacturedCase case_unit_load(int dim);

struct ErrorPair {
  double l2 = 0.0;
  double energy = 0.0;
};

// L2 and energy error of the broken solution against the exact field,
// quadrature exact to degree 2m + 4. Boundary faces measure the jump against
// g1/g2; returns NaNs when the case has no exact solution.
ErrorPair measure_errors(const Mesh& mesh, const std::vector<LocalBasis>& bases,
                         const Vec& coeffs, const ManufacturedCase& mc);

enum class SolverChoice { Direct, CG, PCG_LowOrder, PCG_MG1, PCG_MG2 };

struct RunConfig {
  int dim = 2;
  std::string example = "ex1"; // ex1, ex2, custom
  std::string mesh_file;       // used when example == custom
  int m = 2;
  std::vector<int> n_list;
  int min_nodes = 0;      // 0 = default
  bool adaptive_nodes = false;
  double mu1 = -1.0;      // < 0 = default
  double mu2 = -1.0;
  SolverChoice solver = SolverChoice::Direct;
  double tol = 1e-9;
  int max_iters = 3000;
  unsigned seed = 42;
  bool with_condition = false;
};

// Everything needed to solve on one mesh: the nested hierarchy whose finest
// level is the solve mesh, the reconstruction and the assembled system.
struct PreparedRun {
  MeshHierarchy hier;
  ReconOperator recon;
  DGSystem sys;
  ManufacturedCase mc;
  double prepare_seconds = 0.0;
};

PreparedRun prepare_run(const RunConfig& cfg, int n);

struct SolveOutcome {
  Vec interior;   // solution dofs on interior nodes
  Vec coeffs;     // broken coefficients including the boundary lift
  SolveReport report;
  double seconds = 0.0;
};

SolveOutcome solve_run(const PreparedRun& run, SolverChoice solver, double tol,
                       int max_iters);

struct ConvergenceRow {
  int n = 0;
  double h = 0.0;
  Eigen::Index np = 0;
  double l2 = 0.0, energy = 0.0;
  double l2_rate = 0.0, energy_rate = 0.0; // vs previous row, NaN on the first
  double kappa_A = 0.0, kappa_gen = 0.0;   // NaN when not computed
  int iterations = 0;
  bool converged = false;
  double seconds = 0.0; // assemble + solve wall time
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
  double fit_l2_rate = 0.0;     // least-squares slope of log2 err vs log2 (1/h)
  double fit_energy_rate = 0.0;
};

ConvergenceTable run_convergence_study(const RunConfig& cfg);

// Largest positive Hessian-vs-Laplacian defect over the jump terms among
// `trials` random broken coefficient vectors.
double run_dmt_check(const Mesh& mesh, int m, int trials, unsigned seed);

struct LambdaRow {
  int min_nodes = 0;
  double lambda_m = 0.0;
  int max_depth = 0;
};

std::vector<LambdaRow> lambda_study(const Mesh& mesh, int m, int lo, int hi);

} // namespace biharm
