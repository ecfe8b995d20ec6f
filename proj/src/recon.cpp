#include "biharm/recon.hpp"

#include "biharm/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace biharm {

int default_min_nodes(int dim, int degree) {
  return (3 * poly_space_dim(dim, degree) + 1) / 2;
}

namespace {

// Basis values at the patch nodes, (#I x l).
Eigen::MatrixXd node_values(const Mesh& mesh, const LocalBasis& basis,
                            const std::vector<Index>& nodes) {
  Eigen::MatrixX3d pts(nodes.size(), 3);
  for (std::size_t i = 0; i < nodes.size(); ++i) pts.row(i) = mesh.vertices[nodes[i]];
  return basis.eval(pts);
}

} // namespace

LocalRecon local_reconstruct(const Mesh& mesh, const LocalBasis& basis,
                             const ElementPatch& patch) {
  const Index k = patch.element;
  const int l = basis.size();
  const int nc = mesh.dim + 1; // vertex constraints
  const int ni = static_cast<int>(patch.nodes.size());
  if (l - nc < 0) throw std::runtime_error("recon: degree too low");

  const Eigen::MatrixXd E = node_values(mesh, basis, patch.nodes);

  // Rows of E belonging to the vertices of K.
  std::vector<int> vpos(nc);
  for (int i = 0; i < nc; ++i) {
    const auto it = std::lower_bound(patch.nodes.begin(), patch.nodes.end(),
                                     mesh.elements[k][i]);
    vpos[i] = static_cast<int>(it - patch.nodes.begin());
  }
  Eigen::MatrixXd Ev(nc, l);
  for (int i = 0; i < nc; ++i) Ev.row(i) = E.row(vpos[i]);

  // Null-space method: full QR of Ev^T splits coefficients into a particular
  // interpolant plus the orthogonal complement of the constraints.
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(Ev.transpose());
  const Eigen::MatrixXd Q = qr.householderQ();
  const Eigen::MatrixXd R1 =
      qr.matrixQR().topRows(nc).triangularView<Eigen::Upper>();
  for (int i = 0; i < nc; ++i)
    if (std::abs(R1(i, i)) < 1e-12)
      throw std::runtime_error("recon: degenerate vertex constraints on element " +
                               std::to_string(k));
  const Eigen::MatrixXd Q1 = Q.leftCols(nc);
  const Eigen::MatrixXd Z = Q.rightCols(l - nc);

  // Selector of the constrained values: columns are nodal unit vectors, so
  // the particular solution maps v -> Q1 R1^{-T} v|_vertices.
  Eigen::MatrixXd SelV = Eigen::MatrixXd::Zero(nc, ni);
  for (int i = 0; i < nc; ++i) SelV(i, vpos[i]) = 1.0;
  const Eigen::MatrixXd part =
      Q1 * R1.transpose().triangularView<Eigen::Lower>().solve(SelV);

  LocalRecon out;
  out.element = k;
  if (l == nc) {
    out.nodal_to_coeff = part;
    return out;
  }

  const Eigen::MatrixXd A = E * Z; // #I x (l - nc)
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> ls(A);
  if (ls.rank() < l - nc)
    throw std::runtime_error("recon: sample nodes do not determine a degree-" +
                             std::to_string(basis.degree) + " fit on element " +
                             std::to_string(k));
  const Eigen::MatrixXd rhs =
      Eigen::MatrixXd::Identity(ni, ni) - E * part;
  out.nodal_to_coeff = part + Z * ls.solve(rhs);
  return out;
}

Vec ReconOperator::apply_nodal(const Mesh& mesh, const Vec& nodal) const {
  const Index ne = mesh.element_count();
  Vec out(static_cast<Eigen::Index>(ne) * basis_size);
  parallel_for(static_cast<std::size_t>(ne), [&](std::size_t k) {
    const auto& patch = patches[k];
    Vec local(patch.nodes.size());
    for (std::size_t i = 0; i < patch.nodes.size(); ++i) local[i] = nodal[patch.nodes[i]];
    out.segment(static_cast<Eigen::Index>(k) * basis_size, basis_size).noalias() =
        locals[k].nodal_to_coeff * local;
  });
  return out;
}

namespace {

SpMat recon_matrix(const Mesh& mesh, const ReconOperator& op, bool interior_only) {
  std::vector<Triplet> trip;
  const int l = op.basis_size;
  for (Index k = 0; k < mesh.element_count(); ++k) {
    const auto& patch = op.patches[k];
    const auto& C = op.locals[k].nodal_to_coeff;
    for (std::size_t t = 0; t < patch.nodes.size(); ++t) {
      const Index node = patch.nodes[t];
      const Index col = interior_only ? mesh.interior_id[node] : node;
      if (col < 0) continue;
      for (int i = 0; i < l; ++i) {
        const double v = C(i, static_cast<int>(t));
        if (v != 0.0) trip.emplace_back(k * l + i, col, v);
      }
    }
  }
  SpMat R(static_cast<Eigen::Index>(mesh.element_count()) * l,
          interior_only ? mesh.interior_count() : mesh.vertex_count());
  R.setFromTriplets(trip.begin(), trip.end());
  return R;
}

} // namespace

SpMat ReconOperator::matrix_full(const Mesh& mesh) const {
  return recon_matrix(mesh, *this, false);
}

SpMat ReconOperator::matrix_interior(const Mesh& mesh) const {
  return recon_matrix(mesh, *this, true);
}

ReconOperator build_recon(const Mesh& mesh, int degree, int min_nodes, bool adaptive) {
  if (degree < 1) throw std::runtime_error("recon: degree must be at least 1");
  int nm = min_nodes > 0 ? min_nodes : default_min_nodes(mesh.dim, degree);
  const int l = poly_space_dim(mesh.dim, degree);

  ReconOperator op;
  for (int attempt = 0;; ++attempt) {
    try {
      op.degree = degree;
      op.basis_size = l;
      op.min_nodes = nm;
      op.bases = build_all_bases(mesh, degree);
      op.patches = build_all_patches(mesh, nm);
      op.locals.assign(op.patches.size(), {});
      parallel_for(op.patches.size(), [&](std::size_t k) {
        op.locals[k] = local_reconstruct(mesh, op.bases[k], op.patches[k]);
      });
      if (!adaptive || attempt == 5) return op;
      const ReconStats stats = stability_constants(mesh, op);
      if (stats.lambda_m <= 10.0 * stats.min_stability) return op;
    } catch (const std::exception&) {
      // Degenerate sample sets read as an infinite stability constant; a
      // larger sample set is the same remedy as for a poor finite one.
      if (!adaptive || attempt == 5) throw;
    }
    nm += l;
  }
}

ReconStats stability_constants(const Mesh& mesh, const std::vector<LocalBasis>& bases,
                               const std::vector<ElementPatch>& patches) {
  ReconStats stats;
  stats.lambda_K.assign(patches.size(), 0.0);
  parallel_for(patches.size(), [&](std::size_t k) {
    const Eigen::MatrixXd E = node_values(mesh, bases[k], patches[k].nodes);
    const Eigen::MatrixXd B = E.transpose() * E;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(B);
    const double lmin = es.eigenvalues().minCoeff();
    if (!(lmin > 1e-14))
      throw std::runtime_error("recon: sample nodes nearly lie on a degree-" +
                               std::to_string(bases[k].degree) + " curve near element " +
                               std::to_string(k));
    const double hd = std::pow(mesh.element_diameter[k], mesh.dim);
    stats.lambda_K[k] = 1.0 / std::sqrt(hd * lmin);
  });
  stats.lambda_m = 0.0;
  stats.min_lambda_K = std::numeric_limits<double>::max();
  stats.min_stability = std::numeric_limits<double>::max();
  stats.max_depth = 0;
  for (std::size_t k = 0; k < patches.size(); ++k) {
    const auto& patch = patches[k];
    const double cand =
        1.0 + stats.lambda_K[k] * patch.depth * std::sqrt(double(patch.nodes.size()));
    stats.lambda_m = std::max(stats.lambda_m, cand);
    stats.min_stability = std::min(stats.min_stability, cand);
    stats.min_lambda_K = std::min(stats.min_lambda_K, stats.lambda_K[k]);
    stats.max_depth = std::max(stats.max_depth, patch.depth);
  }
  return stats;
}

ReconStats stability_constants(const Mesh& mesh, const ReconOperator& op) {
  return stability_constants(mesh, op.bases, op.patches);
}

} // namespace biharm
