#pragma once

#include "biharm/common.hpp"
#include "biharm/experiments.hpp"
#include "biharm/recon.hpp"

#include <string>
#include <vector>

namespace biharm {

// Matrix Market coordinate format, 1-based indices, 17 significant digits.
void write_matrix_market(const SpMat& A, const std::string& path);
// Dense vector as a Matrix Market array (n x 1).
void write_vector_market(const Vec& v, const std::string& path);

// Deterministic for a fixed configuration: no timestamps or wall times.
void write_convergence_csv(const ConvergenceTable& table, const std::string& path);

// Run manifest with the configuration echo, environment info and per-row
// timings; not byte-stable (wall times).
void write_run_manifest(const RunConfig& cfg, const ConvergenceTable& table,
                        const std::string& path);

// Per-element patch statistics: #S, #I, depth and the stability constant.
void write_patch_stats(const Mesh& mesh, const ReconOperator& op, const ReconStats& stats,
                       const std::string& path);

void write_lambda_csv(const std::vector<LambdaRow>& rows, const std::string& path);

const char* solver_name(SolverChoice s);
SolverChoice parse_solver(const std::string& name);

} // namespace biharm
