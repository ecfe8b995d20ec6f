#include "biharm/experiments.hpp"

#include "biharm/multigrid.hpp"
#include "biharm/quadrature.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace biharm {

namespace {

constexpr double kPi = 3.14159265358979323846;

double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

} // namespace

ManufacturedCase case_example1() {
  ManufacturedCase mc;
  mc.name = "ex1";
  mc.dim = 2;
  mc.u = [](const Eigen::Vector3d& x) {
    const double sx = std::sin(kPi * x.x()), sy = std::sin(kPi * x.y());
    return sx * sx * sy * sy;
  };
  mc.f = [](const Eigen::Vector3d& x) {
    const double c2x = std::cos(2.0 * kPi * x.x()), c2y = std::cos(2.0 * kPi * x.y());
    return 4.0 * std::pow(kPi, 4) * (4.0 * c2x * c2y - c2x - c2y);
  };
  mc.lap_u = [](const Eigen::Vector3d& x) {
    const double sx = std::sin(kPi * x.x()), sy = std::sin(kPi * x.y());
    const double c2x = std::cos(2.0 * kPi * x.x()), c2y = std::cos(2.0 * kPi * x.y());
    return 2.0 * kPi * kPi * (c2x * sy * sy + sx * sx * c2y);
  };
  mc.grad_u = [](const Eigen::Vector3d& x) {
    const double sx = std::sin(kPi * x.x()), sy = std::sin(kPi * x.y());
    const double s2x = std::sin(2.0 * kPi * x.x()), s2y = std::sin(2.0 * kPi * x.y());
    return Eigen::Vector3d(kPi * s2x * sy * sy, kPi * sx * sx * s2y, 0.0);
  };
  mc.g1 = [](const Eigen::Vector3d&) { return 0.0; };
  mc.g2 = [](const Eigen::Vector3d&, const Eigen::Vector3d&) { return 0.0; };
  mc.homogeneous = true;
  return mc;
}

ManufacturedCase case_example2() {
  ManufacturedCase mc;
  mc.name = "ex2";
  mc.dim = 3;
  mc.u = [](const Eigen::Vector3d& x) {
    return std::sin(kPi * x.x()) * std::sin(kPi * x.y()) * std::sin(kPi * x.z());
  };
  mc.f = [u = mc.u](const Eigen::Vector3d& x) { return 9.0 * std::pow(kPi, 4) * u(x); };
  mc.lap_u = [u = mc.u](const Eigen::Vector3d& x) { return -3.0 * kPi * kPi * u(x); };
  mc.grad_u = [](const Eigen::Vector3d& x) {
    const double sx = std::sin(kPi * x.x()), sy = std::sin(kPi * x.y()), sz = std::sin(kPi * x.z());
    const double cx = std::cos(kPi * x.x()), cy = std::cos(kPi * x.y()), cz = std::cos(kPi * x.z());
    return Eigen::Vector3d(kPi * cx * sy * sz, kPi * sx * cy * sz, kPi * sx * sy * cz);
  };
  // sin(pi t) vanishes on every cube face, so the trace is exactly zero.
  mc.g1 = [](const Eigen::Vector3d&) { return 0.0; };
  mc.g2 = [grad = mc.grad_u](const Eigen::Vector3d& x, const Eigen::Vector3d& n) {
    return grad(x).dot(n);
  };
  mc.homogeneous = false;
  return mc;
}

ManufacturedCase case_unit_load(int dim) {
  ManufacturedCase mc;
  mc.name = "custom";
  mc.dim = dim;
  mc.u = nullptr;
  mc.f = [](const Eigen::Vector3d&) { return 1.0; };
  mc.lap_u = nullptr;
  mc.grad_u = nullptr;
  mc.g1 = [](const Eigen::Vector3d&) { return 0.0; };
  mc.g2 = [](const Eigen::Vector3d&, const Eigen::Vector3d&) { return 0.0; };
  mc.homogeneous = true;
  return mc;
}

ErrorPair measure_errors(const Mesh& mesh, const std::vector<LocalBasis>& bases,
                         const Vec& coeffs, const ManufacturedCase& mc) {
  ErrorPair err;
  if (!mc.u) {
    err.l2 = err.energy = std::numeric_limits<double>::quiet_NaN();
    return err;
  }
  const int m = bases.front().degree;
  const int l = bases.front().size();
  const QuadratureRule vol_rule = simplex_quadrature(mesh.dim, 2 * m + 4);
  const QuadratureRule face_rule = simplex_quadrature(mesh.dim - 1, 2 * m + 4);

  double l2 = 0.0, energy = 0.0;
  for (Index k = 0; k < mesh.element_count(); ++k) {
    std::vector<Eigen::Vector3d> verts(mesh.dim + 1);
    for (int i = 0; i <= mesh.dim; ++i) verts[i] = mesh.vertices[mesh.elements[k][i]];
    const Eigen::MatrixX3d pts = map_points(vol_rule, verts);
    const Eigen::VectorXd w = map_weights(vol_rule, mesh.element_measure(k));
    const Vec ck = coeffs.segment(static_cast<Eigen::Index>(k) * l, l);
    const Vec vals = bases[k].eval(pts) * ck;
    const Vec laps = bases[k].laplacian(pts) * ck;
    for (int p = 0; p < w.size(); ++p) {
      const Eigen::Vector3d x = pts.row(p).transpose();
      const double dv = mc.u(x) - vals[p];
      const double dl = mc.lap_u(x) - laps[p];
      l2 += w[p] * dv * dv;
      energy += w[p] * dl * dl;
    }
  }

  for (const Face& f : mesh.faces) {
    const Eigen::MatrixX3d pts = face_quadrature_points(mesh, f, face_rule);
    const Eigen::VectorXd w = map_weights(face_rule, f.measure);
    const double h = f.diameter;
    const Vec co = coeffs.segment(static_cast<Eigen::Index>(f.owner) * l, l);
    const Vec vo = bases[f.owner].eval(pts) * co;
    const Vec go = bases[f.owner].normal_gradient(pts, f.normal) * co;
    if (f.on_boundary()) {
      for (int p = 0; p < w.size(); ++p) {
        const Eigen::Vector3d x = pts.row(p).transpose();
        const double jv = mc.g1(x) - vo[p];
        const double jg = mc.g2(x, f.normal) - go[p];
        energy += w[p] * (jv * jv / (h * h * h) + jg * jg / h);
      }
    } else {
      const Vec cn = coeffs.segment(static_cast<Eigen::Index>(f.neighbor) * l, l);
      const Vec vn = bases[f.neighbor].eval(pts) * cn;
      const Vec gn = bases[f.neighbor].normal_gradient(pts, f.normal) * cn;
      for (int p = 0; p < w.size(); ++p) {
        const double jv = vo[p] - vn[p];
        const double jg = go[p] - gn[p];
        energy += w[p] * (jv * jv / (h * h * h) + jg * jg / h);
      }
    }
  }
  err.l2 = std::sqrt(l2);
  err.energy = std::sqrt(energy);
  return err;
}

namespace {

ManufacturedCase select_case(const RunConfig& cfg) {
  if (cfg.example == "ex1") return case_example1();
  if (cfg.example == "ex2") return case_example2();
  if (cfg.example == "custom") return case_unit_load(cfg.dim);
  throw std::runtime_error("experiments: unknown example " + cfg.example);
}

} // namespace

PreparedRun prepare_run(const RunConfig& cfg, int n) {
  const double t0 = now_seconds();
  PreparedRun run;
  run.mc = select_case(cfg);
  if (run.mc.dim != cfg.dim)
    throw std::runtime_error("experiments: example dimension does not match --dim");

  if (cfg.example == "custom" && !cfg.mesh_file.empty()) {
    run.hier.levels.push_back(read_mesh_text(cfg.mesh_file));
    if (run.hier.levels.back().dim != cfg.dim)
      throw std::runtime_error("experiments: mesh dimension does not match --dim");
  } else {
    run.hier = build_structured_hierarchy(cfg.dim, n);
  }
  const Mesh& mesh = run.hier.finest();
  if (mesh.interior_count() == 0)
    throw std::runtime_error("experiments: mesh has no interior nodes");

  run.recon = build_recon(mesh, cfg.m, cfg.min_nodes, cfg.adaptive_nodes);
  Penalties pen = default_penalties(cfg.m);
  if (cfg.mu1 >= 0.0) pen.mu1 = cfg.mu1;
  if (cfg.mu2 >= 0.0) pen.mu2 = cfg.mu2;

  if (run.mc.homogeneous) {
    run.sys = assemble_system(mesh, run.recon, pen, run.mc.f, nullptr, nullptr);
  } else {
    run.sys = assemble_system(mesh, run.recon, pen, run.mc.f, &run.mc.g1, &run.mc.g2);
  }
  run.prepare_seconds = now_seconds() - t0;
  return run;
}

SolveOutcome solve_run(const PreparedRun& run, SolverChoice solver, double tol,
                       int max_iters) {
  const double t0 = now_seconds();
  SolveOutcome out;
  const DGSystem& sys = run.sys;

  switch (solver) {
    case SolverChoice::Direct: {
      Eigen::SimplicialLLT<SpMat> llt(sys.A);
      if (llt.info() != Eigen::Success)
        throw std::runtime_error("experiments: direct factorization failed");
      out.interior = llt.solve(sys.b);
      out.report.converged = true;
      out.report.rel_residual =
          sys.b.norm() == 0.0 ? 0.0 : (sys.b - sys.A * out.interior).norm() / sys.b.norm();
      break;
    }
    case SolverChoice::CG: {
      auto [x, rep] = cg(sys.A, sys.b, tol, max_iters);
      out.interior = std::move(x);
      out.report = std::move(rep);
      break;
    }
    case SolverChoice::PCG_LowOrder: {
      Eigen::SimplicialLLT<SpMat> llt(sys.AL);
      if (llt.info() != Eigen::Success)
        throw std::runtime_error("experiments: low-order factorization failed");
      auto [x, rep] = pcg(sys.A, sys.b, [&](const Vec& r) { return Vec(llt.solve(r)); },
                          tol, max_iters);
      out.interior = std::move(x);
      out.report = std::move(rep);
      break;
    }
    case SolverChoice::PCG_MG1:
    case SolverChoice::PCG_MG2: {
      std::vector<SpMat> prolong;
      for (int j = 0; j + 1 < run.hier.level_count(); ++j)
        prolong.push_back(run.hier.interior_prolongation(j));
      MGPreconditioner mg;
      if (solver == SolverChoice::PCG_MG1) {
        mg = MGPreconditioner::build_smoothed(sys.AL, prolong);
      } else {
        std::vector<SpMat> mats;
        for (const Mesh& level : run.hier.levels) mats.push_back(assemble_low_order(level));
        mg = MGPreconditioner::build_rediscretized(mats, prolong);
      }
      auto [x, rep] = pcg(sys.A, sys.b, [&](const Vec& r) { return mg.apply(r); }, tol,
                          max_iters);
      out.interior = std::move(x);
      out.report = std::move(rep);
      break;
    }
  }

  out.coeffs = sys.R * out.interior + sys.lift;
  out.seconds = now_seconds() - t0;
  return out;
}

ConvergenceTable run_convergence_study(const RunConfig& cfg) {
  if (cfg.n_list.empty()) throw std::runtime_error("experiments: no mesh sizes given");
  ConvergenceTable table;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (int n : cfg.n_list) {
    PreparedRun run = prepare_run(cfg, n);
    SolveOutcome sol = solve_run(run, cfg.solver, cfg.tol, cfg.max_iters);
    const Mesh& mesh = run.hier.finest();

    ConvergenceRow row;
    row.n = n;
    row.h = mesh.mesh_size;
    row.np = mesh.interior_count();
    const ErrorPair err = measure_errors(mesh, run.recon.bases, sol.coeffs, run.mc);
    row.l2 = err.l2;
    row.energy = err.energy;
    row.iterations = sol.report.iterations;
    row.converged = sol.report.converged;
    row.seconds = run.prepare_seconds + sol.seconds;
    row.kappa_A = row.kappa_gen = nan;
    if (cfg.with_condition) {
      row.kappa_A = condition_number(run.sys.A);
      row.kappa_gen = generalized_condition_number(run.sys.A, run.sys.AL);
    }
    row.l2_rate = row.energy_rate = nan;
    if (!table.rows.empty()) {
      const ConvergenceRow& prev = table.rows.back();
      row.l2_rate = std::log2(prev.l2 / row.l2) / std::log2(prev.h / row.h);
      row.energy_rate = std::log2(prev.energy / row.energy) / std::log2(prev.h / row.h);
    }
    table.rows.push_back(std::move(row));
  }

  // Least-squares slope of log2(error) against log2(1/h).
  const auto fit = [&](auto err_of) {
    const int n = static_cast<int>(table.rows.size());
    if (n < 2) return nan;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& row : table.rows) {
      const double x = -std::log2(row.h);
      const double y = -std::log2(err_of(row));
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
  };
  table.fit_l2_rate = fit([](const ConvergenceRow& r) { return r.l2; });
  table.fit_energy_rate = fit([](const ConvergenceRow& r) { return r.energy; });
  return table;
}

double run_dmt_check(const Mesh& mesh, int m, int trials, unsigned seed) {
  const std::vector<LocalBasis> bases = build_all_bases(mesh, m);
  const int l = poly_space_dim(mesh.dim, m);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist;
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    Vec c(static_cast<Eigen::Index>(mesh.element_count()) * l);
    for (Eigen::Index i = 0; i < c.size(); ++i) c[i] = dist(rng);
    c /= c.norm();
    const auto [defect, jumps] = hessian_defect_parts(mesh, bases, c);
    if (jumps <= 1e-14) continue;
    worst = std::max(worst, std::max(defect, 0.0) / jumps);
  }
  return worst;
}

std::vector<LambdaRow> lambda_study(const Mesh& mesh, int m, int lo, int hi) {
  if (lo > hi) throw std::runtime_error("experiments: empty sample-size range");
  const std::vector<LocalBasis> bases = build_all_bases(mesh, m);
  std::vector<LambdaRow> rows;
  for (int nm = lo; nm <= hi; ++nm) {
    const auto patches = build_all_patches(mesh, nm);
    int max_depth = 0;
    for (const auto& p : patches) max_depth = std::max(max_depth, p.depth);
    // A degenerate sample set at this size reads as an infinite constant;
    // later rows of the sweep are still meaningful.
    double lambda = std::numeric_limits<double>::infinity();
    try {
      lambda = stability_constants(mesh, bases, patches).lambda_m;
    } catch (const std::exception&) {
    }
    rows.push_back({nm, lambda, max_depth});
  }
  return rows;
}

} // namespace biharm
