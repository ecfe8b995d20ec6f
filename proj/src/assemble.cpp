#include "biharm/assemble.hpp"

#include "biharm/parallel.hpp"
#include "biharm/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace biharm {

Penalties default_penalties(int degree) {
  // Degree-scaled and centred empirically: large enough for positive
  // definiteness on shape-regular meshes, small enough not to degrade
  // coarse-mesh accuracy. Indefiniteness from user overrides is caught by
  // the solvers.
  const double m2 = double(degree) * degree;
  return {12.5 * m2 * (degree - 1), 1.25 * m2};
}

Eigen::MatrixX3d face_quadrature_points(const Mesh& mesh, const Face& f,
                                        const QuadratureRule& rule) {
  std::vector<Eigen::Vector3d> verts(mesh.dim);
  for (int i = 0; i < mesh.dim; ++i) verts[i] = mesh.vertices[f.verts[i]];
  return map_points(rule, verts);
}

namespace {

struct FaceSide {
  Eigen::MatrixXd val, nderiv, lap, nderiv_lap; // each (npts x l)
};

FaceSide evaluate_side(const LocalBasis& basis, const Eigen::MatrixX3d& pts,
                       const Eigen::Vector3d& n) {
  FaceSide s;
  s.val = basis.eval(pts);
  s.nderiv = basis.normal_gradient(pts, n);
  s.lap = basis.laplacian(pts);
  s.nderiv_lap = basis.normal_gradient_laplacian(pts, n);
  return s;
}

// Stacked jump/average rows over the face dof block: [owner | neighbor],
// single trace on boundary faces.
struct FaceOperators {
  Eigen::MatrixXd jump_val, jump_nderiv, avg_lap, avg_nderiv_lap;
  int cols = 0;
};

FaceOperators face_operators(const std::vector<LocalBasis>& bases, const Face& f,
                             const Eigen::MatrixX3d& pts) {
  const int l = bases[f.owner].size();
  FaceOperators ops;
  const FaceSide own = evaluate_side(bases[f.owner], pts, f.normal);
  if (f.on_boundary()) {
    ops.cols = l;
    ops.jump_val = own.val;
    ops.jump_nderiv = own.nderiv;
    ops.avg_lap = own.lap;
    ops.avg_nderiv_lap = own.nderiv_lap;
    return ops;
  }
  const FaceSide nb = evaluate_side(bases[f.neighbor], pts, f.normal);
  ops.cols = 2 * l;
  const auto stack = [l](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double sb) {
    Eigen::MatrixXd m(a.rows(), 2 * l);
    m.leftCols(l) = a;
    m.rightCols(l) = sb * b;
    return m;
  };
  ops.jump_val = stack(own.val, nb.val, -1.0);
  ops.jump_nderiv = stack(own.nderiv, nb.nderiv, -1.0);
  ops.avg_lap = 0.5 * stack(own.lap, nb.lap, 1.0);
  ops.avg_nderiv_lap = 0.5 * stack(own.nderiv_lap, nb.nderiv_lap, 1.0);
  return ops;
}

void scatter_face_block(const Face& f, int l, const Eigen::MatrixXd& block,
                        std::vector<Triplet>& trip) {
  const auto dof = [&](int a) {
    const Index k = a < l ? f.owner : f.neighbor;
    return static_cast<Eigen::Index>(k) * l + (a % l);
  };
  for (int i = 0; i < block.rows(); ++i)
    for (int j = 0; j < block.cols(); ++j)
      if (block(i, j) != 0.0) trip.emplace_back(dof(i), dof(j), block(i, j));
}

} // namespace

SpMat assemble_broken_form(const Mesh& mesh, const std::vector<LocalBasis>& bases,
                           const Penalties& pen) {
  const int m = bases.front().degree;
  const int l = bases.front().size();
  const QuadratureRule vol_rule = simplex_quadrature(mesh.dim, 2 * m);
  const QuadratureRule face_rule = simplex_quadrature(mesh.dim - 1, 2 * m);

  const Index ne = mesh.element_count();
  std::vector<Eigen::MatrixXd> vol_blocks(ne);
  parallel_for(static_cast<std::size_t>(ne), [&](std::size_t k) {
    std::vector<Eigen::Vector3d> verts(mesh.dim + 1);
    for (int i = 0; i <= mesh.dim; ++i)
      verts[i] = mesh.vertices[mesh.elements[k][i]];
    const Eigen::MatrixX3d pts = map_points(vol_rule, verts);
    const Eigen::VectorXd w = map_weights(vol_rule, mesh.element_measure(static_cast<Index>(k)));
    const Eigen::MatrixXd lap = bases[k].laplacian(pts);
    vol_blocks[k] = lap.transpose() * w.asDiagonal() * lap;
  });

  const Index nf = mesh.face_count();
  std::vector<Eigen::MatrixXd> face_blocks(nf);
  parallel_for(static_cast<std::size_t>(nf), [&](std::size_t fi) {
    const Face& f = mesh.faces[fi];
    const Eigen::MatrixX3d pts = face_quadrature_points(mesh, f, face_rule);
    const Eigen::VectorXd w = map_weights(face_rule, f.measure);
    const FaceOperators ops = face_operators(bases, f, pts);
    const double h = f.diameter;
    const auto wprod = [&](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
      return Eigen::MatrixXd(a.transpose() * w.asDiagonal() * b);
    };
    Eigen::MatrixXd block = wprod(ops.jump_val, ops.avg_nderiv_lap);
    block += block.transpose().eval();
    Eigen::MatrixXd consistency = wprod(ops.jump_nderiv, ops.avg_lap);
    block -= consistency;
    block -= consistency.transpose().eval();
    block += (pen.mu1 / (h * h * h)) * wprod(ops.jump_val, ops.jump_val);
    block += (pen.mu2 / h) * wprod(ops.jump_nderiv, ops.jump_nderiv);
    face_blocks[fi] = std::move(block);
  });

  std::vector<Triplet> trip;
  for (Index k = 0; k < ne; ++k)
    for (int i = 0; i < l; ++i)
      for (int j = 0; j < l; ++j)
        if (vol_blocks[k](i, j) != 0.0)
          trip.emplace_back(static_cast<Eigen::Index>(k) * l + i,
                            static_cast<Eigen::Index>(k) * l + j, vol_blocks[k](i, j));
  for (Index fi = 0; fi < nf; ++fi)
    scatter_face_block(mesh.faces[fi], l, face_blocks[fi], trip);

  SpMat D(static_cast<Eigen::Index>(ne) * l, static_cast<Eigen::Index>(ne) * l);
  D.setFromTriplets(trip.begin(), trip.end());
  SpMat Dt = D.transpose();
  return 0.5 * (D + Dt);
}

SpMat assemble_low_order(const Mesh& mesh) {
  std::vector<Triplet> trip;
  std::vector<std::pair<Index, double>> entries;
  for (const Face& f : mesh.faces) {
    entries.clear();
    const auto add_side = [&](Index k, double sign) {
      if (k < 0) return;
      const auto grads = mesh.p1_gradients(k);
      for (int i = 0; i <= mesh.dim; ++i) {
        const Index dof = mesh.interior_id[mesh.elements[k][i]];
        if (dof < 0) continue;
        const double c = sign * grads.row(i).dot(f.normal);
        if (c != 0.0) entries.emplace_back(dof, c);
      }
    };
    add_side(f.owner, 1.0);
    add_side(f.neighbor, -1.0);
    const double w = f.measure / f.diameter;
    for (const auto& [i, ci] : entries)
      for (const auto& [j, cj] : entries) trip.emplace_back(i, j, w * ci * cj);
  }
  SpMat A(mesh.interior_count(), mesh.interior_count());
  A.setFromTriplets(trip.begin(), trip.end());
  return A;
}

Vec assemble_broken_load(const Mesh& mesh, const std::vector<LocalBasis>& bases,
                         const ScalarField& f, int quad_degree) {
  const int m = bases.front().degree;
  const int l = bases.front().size();
  const QuadratureRule rule = simplex_quadrature(mesh.dim, quad_degree > 0 ? quad_degree : 2 * m + 4);
  Vec load(static_cast<Eigen::Index>(mesh.element_count()) * l);
  parallel_for(static_cast<std::size_t>(mesh.element_count()), [&](std::size_t k) {
    std::vector<Eigen::Vector3d> verts(mesh.dim + 1);
    for (int i = 0; i <= mesh.dim; ++i)
      verts[i] = mesh.vertices[mesh.elements[k][i]];
    const Eigen::MatrixX3d pts = map_points(rule, verts);
    Eigen::VectorXd w = map_weights(rule, mesh.element_measure(static_cast<Index>(k)));
    for (int p = 0; p < w.size(); ++p) w[p] *= f(pts.row(p).transpose());
    load.segment(static_cast<Eigen::Index>(k) * l, l).noalias() =
        bases[k].eval(pts).transpose() * w;
  });
  return load;
}

Vec assemble_rhs_clamped(const Mesh& mesh, const std::vector<LocalBasis>& bases,
                         const ReconOperator& recon, const SpMat& broken_form,
                         const SpMat& R_interior, const ScalarField& f,
                         const ScalarField& g1, const NormalField& g2,
                         const Penalties& pen, Vec* lift_coeffs) {
  const int m = bases.front().degree;
  const int l = bases.front().size();

  Vec functional = assemble_broken_load(mesh, bases, f);

  // Boundary lift through the reconstruction of the boundary nodal values.
  Vec g_nodal = Vec::Zero(mesh.vertex_count());
  for (Index v : mesh.boundary_nodes) g_nodal[v] = g1(mesh.vertices[v]);
  const Vec lift = recon.apply_nodal(mesh, g_nodal);
  functional.noalias() -= broken_form * lift;

  const QuadratureRule face_rule = simplex_quadrature(mesh.dim - 1, 2 * m + 4);
  for (const Face& face : mesh.faces) {
    if (!face.on_boundary()) continue;
    const Eigen::MatrixX3d pts = face_quadrature_points(mesh, face, face_rule);
    const Eigen::VectorXd w = map_weights(face_rule, face.measure);
    const FaceSide side = evaluate_side(bases[face.owner], pts, face.normal);
    const double h = face.diameter;
    Eigen::VectorXd wg1(w.size()), wg2(w.size());
    for (int p = 0; p < w.size(); ++p) {
      const Eigen::Vector3d x = pts.row(p).transpose();
      wg1[p] = w[p] * g1(x);
      wg2[p] = w[p] * g2(x, face.normal);
    }
    Eigen::VectorXd local = -side.lap.transpose() * wg2;
    local.noalias() += (pen.mu1 / (h * h * h)) * (side.val.transpose() * wg1);
    local.noalias() += (pen.mu2 / h) * (side.nderiv.transpose() * wg2);
    functional.segment(static_cast<Eigen::Index>(face.owner) * l, l) += local;
  }

  if (lift_coeffs) *lift_coeffs = lift;
  return R_interior.transpose() * functional;
}

namespace {

// Second-derivative multi-indices and their multiplicity in |D^2 v|_F^2.
std::vector<std::pair<std::array<int, 3>, double>> hessian_terms(int dim) {
  std::vector<std::pair<std::array<int, 3>, double>> terms = {
      {{2, 0, 0}, 1.0}, {{0, 2, 0}, 1.0}, {{1, 1, 0}, 2.0}};
  if (dim == 3) {
    terms.push_back({{0, 0, 2}, 1.0});
    terms.push_back({{1, 0, 1}, 2.0});
    terms.push_back({{0, 1, 1}, 2.0});
  }
  return terms;
}

} // namespace

double broken_norm(const Mesh& mesh, const std::vector<LocalBasis>& bases,
                   const Vec& coeffs, BrokenNorm which) {
  const int m = bases.front().degree;
  const int l = bases.front().size();
  const QuadratureRule vol_rule = simplex_quadrature(mesh.dim, 2 * m);
  const QuadratureRule face_rule = simplex_quadrature(mesh.dim - 1, 2 * m);

  double acc = 0.0;
  for (Index k = 0; k < mesh.element_count(); ++k) {
    std::vector<Eigen::Vector3d> verts(mesh.dim + 1);
    for (int i = 0; i <= mesh.dim; ++i) verts[i] = mesh.vertices[mesh.elements[k][i]];
    const Eigen::MatrixX3d pts = map_points(vol_rule, verts);
    const Eigen::VectorXd w = map_weights(vol_rule, mesh.element_measure(k));
    const Vec ck = coeffs.segment(static_cast<Eigen::Index>(k) * l, l);
    if (which == BrokenNorm::Hessian) {
      for (const auto& [deriv, mult] : hessian_terms(mesh.dim)) {
        const Vec field = bases[k].eval(pts, deriv) * ck;
        acc += mult * field.cwiseAbs2().dot(w);
      }
    } else {
      const Vec field = bases[k].laplacian(pts) * ck;
      acc += field.cwiseAbs2().dot(w);
    }
  }

  for (const Face& f : mesh.faces) {
    const Eigen::MatrixX3d pts = face_quadrature_points(mesh, f, face_rule);
    const Eigen::VectorXd w = map_weights(face_rule, f.measure);
    const FaceOperators ops = face_operators(bases, f, pts);
    Vec cf(ops.cols);
    cf.head(l) = coeffs.segment(static_cast<Eigen::Index>(f.owner) * l, l);
    if (!f.on_boundary())
      cf.tail(l) = coeffs.segment(static_cast<Eigen::Index>(f.neighbor) * l, l);
    const double h = f.diameter;
    acc += (ops.jump_val * cf).cwiseAbs2().dot(w) / (h * h * h);
    acc += (ops.jump_nderiv * cf).cwiseAbs2().dot(w) / h;
    if (which == BrokenNorm::EnergyTilde) {
      acc += (ops.avg_nderiv_lap * cf).cwiseAbs2().dot(w) * (h * h * h);
      acc += (ops.avg_lap * cf).cwiseAbs2().dot(w) * h;
    }
  }
  return std::sqrt(acc);
}

std::pair<double, double> hessian_defect_parts(const Mesh& mesh,
                                               const std::vector<LocalBasis>& bases,
                                               const Vec& coeffs) {
  const int m = bases.front().degree;
  const int l = bases.front().size();
  const QuadratureRule vol_rule = simplex_quadrature(mesh.dim, 2 * m);
  const QuadratureRule face_rule = simplex_quadrature(mesh.dim - 1, 2 * m);

  double hess = 0.0, lap2 = 0.0;
  for (Index k = 0; k < mesh.element_count(); ++k) {
    std::vector<Eigen::Vector3d> verts(mesh.dim + 1);
    for (int i = 0; i <= mesh.dim; ++i) verts[i] = mesh.vertices[mesh.elements[k][i]];
    const Eigen::MatrixX3d pts = map_points(vol_rule, verts);
    const Eigen::VectorXd w = map_weights(vol_rule, mesh.element_measure(k));
    const Vec ck = coeffs.segment(static_cast<Eigen::Index>(k) * l, l);
    for (const auto& [deriv, mult] : hessian_terms(mesh.dim)) {
      const Vec field = bases[k].eval(pts, deriv) * ck;
      hess += mult * field.cwiseAbs2().dot(w);
    }
    const Vec lap = bases[k].laplacian(pts) * ck;
    lap2 += lap.cwiseAbs2().dot(w);
  }

  double jumps = 0.0;
  for (const Face& f : mesh.faces) {
    const Eigen::MatrixX3d pts = face_quadrature_points(mesh, f, face_rule);
    const Eigen::VectorXd w = map_weights(face_rule, f.measure);
    const FaceOperators ops = face_operators(bases, f, pts);
    Vec cf(ops.cols);
    cf.head(l) = coeffs.segment(static_cast<Eigen::Index>(f.owner) * l, l);
    if (!f.on_boundary())
      cf.tail(l) = coeffs.segment(static_cast<Eigen::Index>(f.neighbor) * l, l);
    const double h = f.diameter;
    if (!f.on_boundary())
      jumps += (ops.jump_val * cf).cwiseAbs2().dot(w) / (h * h * h);
    jumps += (ops.jump_nderiv * cf).cwiseAbs2().dot(w) / h;
  }
  return {hess - lap2, jumps};
}

DGSystem assemble_system(const Mesh& mesh, const ReconOperator& recon,
                         const Penalties& pen, const ScalarField& f,
                         const ScalarField* g1, const NormalField* g2) {
  DGSystem sys;
  sys.degree = recon.degree;
  sys.pen = pen;
  sys.broken = assemble_broken_form(mesh, recon.bases, pen);
  sys.R = recon.matrix_interior(mesh);
  {
    SpMat A = sys.R.transpose() * sys.broken * sys.R;
    SpMat At = A.transpose();
    sys.A = 0.5 * (A + At);
  }
  sys.M = SpMat(sys.R.transpose() * sys.R);
  sys.AL = assemble_low_order(mesh);
  sys.lift = Vec::Zero(sys.broken.rows());
  if (g1 && g2) {
    sys.b = assemble_rhs_clamped(mesh, recon.bases, recon, sys.broken, sys.R, f, *g1,
                                 *g2, pen, &sys.lift);
  } else {
    sys.b = sys.R.transpose() * assemble_broken_load(mesh, recon.bases, f);
  }
  return sys;
}

} // namespace biharm
