#include "biharm/export.hpp"

#include "json.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace biharm {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  return out;
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

} // namespace

void write_matrix_market(const SpMat& A, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << A.rows() << " " << A.cols() << " " << A.nonZeros() << "\n";
  for (int k = 0; k < A.outerSize(); ++k)
    for (SpMat::InnerIterator it(A, k); it; ++it)
      out << it.row() + 1 << " " << it.col() + 1 << " " << fmt(it.value()) << "\n";
}

void write_vector_market(const Vec& v, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "%%MatrixMarket matrix array real general\n";
  out << v.size() << " 1\n";
  for (Eigen::Index i = 0; i < v.size(); ++i) out << fmt(v[i]) << "\n";
}

void write_convergence_csv(const ConvergenceTable& table, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "n,h,ndof,l2_error,energy_error,l2_rate,energy_rate,kappa,kappa_precond,"
         "iterations,converged\n";
  for (const ConvergenceRow& r : table.rows) {
    out << r.n << "," << fmt(r.h) << "," << r.np << "," << fmt(r.l2) << ","
        << fmt(r.energy) << "," << fmt(r.l2_rate) << "," << fmt(r.energy_rate) << ","
        << fmt(r.kappa_A) << "," << fmt(r.kappa_gen) << "," << r.iterations << ","
        << (r.converged ? 1 : 0) << "\n";
  }
  out << "# fit_l2_rate," << fmt(table.fit_l2_rate) << "\n";
  out << "# fit_energy_rate," << fmt(table.fit_energy_rate) << "\n";
}

void write_run_manifest(const RunConfig& cfg, const ConvergenceTable& table,
                        const std::string& path) {
  nlohmann::json j;
  j["config"] = {
      {"dim", cfg.dim},
      {"example", cfg.example},
      {"mesh_file", cfg.mesh_file},
      {"m", cfg.m},
      {"n_list", cfg.n_list},
      {"min_nodes", cfg.min_nodes},
      {"adaptive_nodes", cfg.adaptive_nodes},
      {"mu1", cfg.mu1},
      {"mu2", cfg.mu2},
      {"solver", solver_name(cfg.solver)},
      {"tol", cfg.tol},
      {"max_iters", cfg.max_iters},
      {"seed", cfg.seed},
      {"with_condition", cfg.with_condition},
  };
  j["rows"] = nlohmann::json::array();
  for (const ConvergenceRow& r : table.rows) {
    nlohmann::json row = {
        {"n", r.n},           {"h", r.h},
        {"ndof", r.np},       {"l2_error", r.l2},
        {"energy_error", r.energy}, {"iterations", r.iterations},
        {"converged", r.converged}, {"seconds", r.seconds},
    };
    if (std::isfinite(r.kappa_A)) row["kappa"] = r.kappa_A;
    if (std::isfinite(r.kappa_gen)) row["kappa_precond"] = r.kappa_gen;
    j["rows"].push_back(row);
  }
  j["fit_l2_rate"] = table.fit_l2_rate;
  j["fit_energy_rate"] = table.fit_energy_rate;
  std::ofstream out = open_out(path);
  out << j.dump(2) << "\n";
}

void write_patch_stats(const Mesh& mesh, const ReconOperator& op, const ReconStats& stats,
                       const std::string& path) {
  nlohmann::json j;
  j["element_count"] = static_cast<int>(mesh.elements.size());
  j["degree"] = op.degree;
  j["min_nodes"] = op.min_nodes;
  j["lambda_m"] = stats.lambda_m;
  j["max_depth"] = stats.max_depth;
  nlohmann::json arr = nlohmann::json::array();
  for (std::size_t k = 0; k < op.patches.size(); ++k) {
    const ElementPatch& p = op.patches[k];
    arr.push_back({{"element", p.element},
                   {"elements", static_cast<int>(p.elements.size())},
                   {"nodes", static_cast<int>(p.nodes.size())},
                   {"depth", p.depth},
                   {"diameter", p.diameter},
                   {"lambda", stats.lambda_K[k]}});
  }
  j["patches"] = std::move(arr);
  std::ofstream out = open_out(path);
  out << j.dump(2) << "\n";
}

void write_lambda_csv(const std::vector<LambdaRow>& rows, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "min_nodes,lambda_m,max_depth\n";
  for (const LambdaRow& r : rows)
    out << r.min_nodes << "," << fmt(r.lambda_m) << "," << r.max_depth << "\n";
}

const char* solver_name(SolverChoice s) {
  switch (s) {
    case SolverChoice::Direct: return "direct";
    case SolverChoice::CG: return "cg";
    case SolverChoice::PCG_LowOrder: return "pcg-al";
    case SolverChoice::PCG_MG1: return "pcg-mg1";
    case SolverChoice::PCG_MG2: return "pcg-mg2";
  }
  return "direct";
}

SolverChoice parse_solver(const std::string& name) {
  if (name == "direct") return SolverChoice::Direct;
  if (name == "cg") return SolverChoice::CG;
  if (name == "pcg-al") return SolverChoice::PCG_LowOrder;
  if (name == "pcg-mg1") return SolverChoice::PCG_MG1;
  if (name == "pcg-mg2") return SolverChoice::PCG_MG2;
  throw std::runtime_error("unknown solver: " + name);
}

} // namespace biharm
