#include "biharm/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <stdexcept>

namespace biharm {

namespace {

double distance(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  return (a - b).norm();
}

// Signed measure: area from the 2D cross product, volume from det/6.
double signed_measure(const Mesh& mesh, const std::array<Index, 4>& el) {
  const auto& v = mesh.vertices;
  if (mesh.dim == 2) {
    Eigen::Vector3d e1 = v[el[1]] - v[el[0]];
    Eigen::Vector3d e2 = v[el[2]] - v[el[0]];
    return 0.5 * (e1.x() * e2.y() - e1.y() * e2.x());
  }
  Eigen::Matrix3d J;
  for (int c = 0; c < 3; ++c) J.col(c) = v[el[c + 1]] - v[el[0]];
  return J.determinant() / 6.0;
}

} // namespace

Eigen::Vector3d Mesh::barycenter(Index k) const {
  Eigen::Vector3d c = Eigen::Vector3d::Zero();
  for (int i = 0; i <= dim; ++i) c += vertices[elements[k][i]];
  return c / (dim + 1);
}

double Mesh::element_measure(Index k) const {
  return std::abs(signed_measure(*this, elements[k]));
}

Eigen::Matrix<double, Eigen::Dynamic, 3> Mesh::p1_gradients(Index k) const {
  const auto& el = elements[k];
  Eigen::Matrix<double, Eigen::Dynamic, 3> grads(dim + 1, 3);
  grads.setZero();
  if (dim == 2) {
    // grad(lambda_i) is perpendicular to the opposite edge; solve the 2x2
    // affine map instead of special-casing orientation.
    Eigen::Matrix2d J;
    J.col(0) = (vertices[el[1]] - vertices[el[0]]).head<2>();
    J.col(1) = (vertices[el[2]] - vertices[el[0]]).head<2>();
    Eigen::Matrix2d Jinv = J.inverse();
    for (int i = 0; i < 2; ++i) {
      grads(i + 1, 0) = Jinv(i, 0);
      grads(i + 1, 1) = Jinv(i, 1);
    }
    grads.row(0) = -grads.row(1) - grads.row(2);
  } else {
    Eigen::Matrix3d J;
    for (int c = 0; c < 3; ++c) J.col(c) = vertices[el[c + 1]] - vertices[el[0]];
    Eigen::Matrix3d Jinv = J.inverse();
    for (int i = 0; i < 3; ++i) grads.row(i + 1) = Jinv.row(i);
    grads.row(0) = -grads.row(1) - grads.row(2) - grads.row(3);
  }
  return grads;
}

void Mesh::finalize() {
  if (dim != 2 && dim != 3) throw std::runtime_error("mesh: dim must be 2 or 3");
  const Index nv = vertex_count();
  const Index ne = element_count();
  if (ne == 0) throw std::runtime_error("mesh: no elements");

  // Positive orientation; degenerate elements are an input error.
  for (Index k = 0; k < ne; ++k) {
    double s = signed_measure(*this, elements[k]);
    if (s == 0.0) throw std::runtime_error("mesh: degenerate element " + std::to_string(k));
    if (s < 0.0) std::swap(elements[k][dim - 1], elements[k][dim]);
  }

  for (Index k = 0; k < ne; ++k)
    for (int i = 0; i <= dim; ++i)
      if (elements[k][i] < 0 || elements[k][i] >= nv)
        throw std::runtime_error("mesh: vertex index out of range in element " + std::to_string(k));

  // Faces keyed by their sorted vertex tuple. Ascending element order makes
  // the smaller-index element the owner.
  faces.clear();
  element_faces.assign(ne, {});
  std::map<std::array<Index, 3>, Index> face_of;
  for (Index k = 0; k < ne; ++k) {
    for (int skip = 0; skip <= dim; ++skip) {
      std::array<Index, 3> key{{-1, -1, -1}};
      int p = 0;
      for (int i = 0; i <= dim; ++i)
        if (i != skip) key[p++] = elements[k][i];
      std::sort(key.begin(), key.begin() + dim);
      auto it = face_of.find(key);
      if (it == face_of.end()) {
        Face f;
        f.verts = key;
        f.owner = k;
        face_of.emplace(key, static_cast<Index>(faces.size()));
        element_faces[k].push_back(static_cast<Index>(faces.size()));
        faces.push_back(f);
      } else {
        Face& f = faces[it->second];
        if (f.neighbor >= 0)
          throw std::runtime_error("mesh: face shared by more than two elements");
        f.neighbor = k;
        element_faces[k].push_back(it->second);
      }
    }
  }

  for (Face& f : faces) {
    const Eigen::Vector3d a = vertices[f.verts[0]];
    const Eigen::Vector3d b = vertices[f.verts[1]];
    Eigen::Vector3d center;
    if (dim == 2) {
      f.measure = distance(a, b);
      f.diameter = f.measure;
      f.normal = Eigen::Vector3d(b.y() - a.y(), a.x() - b.x(), 0.0).normalized();
      center = 0.5 * (a + b);
    } else {
      const Eigen::Vector3d c = vertices[f.verts[2]];
      Eigen::Vector3d cr = (b - a).cross(c - a);
      f.measure = 0.5 * cr.norm();
      f.diameter = std::max({distance(a, b), distance(a, c), distance(b, c)});
      f.normal = cr.normalized();
      center = (a + b + c) / 3.0;
    }
    if (f.normal.dot(center - barycenter(f.owner)) < 0.0) f.normal = -f.normal;
  }

  boundary_node.assign(nv, 0);
  for (const Face& f : faces)
    if (f.on_boundary())
      for (int i = 0; i < dim; ++i) boundary_node[f.verts[i]] = 1;

  interior_nodes.clear();
  boundary_nodes.clear();
  interior_id.assign(nv, -1);
  for (Index v = 0; v < nv; ++v) {
    if (boundary_node[v]) {
      boundary_nodes.push_back(v);
    } else {
      interior_id[v] = static_cast<Index>(interior_nodes.size());
      interior_nodes.push_back(v);
    }
  }

  node_elements.assign(nv, {});
  for (Index k = 0; k < ne; ++k)
    for (int i = 0; i <= dim; ++i) node_elements[elements[k][i]].push_back(k);

  element_neighbors.assign(ne, {});
  for (Index k = 0; k < ne; ++k) {
    std::vector<Index>& nb = element_neighbors[k];
    for (int i = 0; i <= dim; ++i) {
      const auto& incident = node_elements[elements[k][i]];
      nb.insert(nb.end(), incident.begin(), incident.end());
    }
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
  }

  element_diameter.assign(ne, 0.0);
  mesh_size = 0.0;
  double min_inradius = std::numeric_limits<double>::max();
  for (Index k = 0; k < ne; ++k) {
    double h = 0.0;
    for (int i = 0; i <= dim; ++i)
      for (int j = i + 1; j <= dim; ++j)
        h = std::max(h, distance(vertices[elements[k][i]], vertices[elements[k][j]]));
    element_diameter[k] = h;
    mesh_size = std::max(mesh_size, h);
    double boundary_measure = 0.0;
    for (Index fi : element_faces[k]) boundary_measure += faces[fi].measure;
    const double rho = dim * element_measure(k) / boundary_measure;
    min_inradius = std::min(min_inradius, rho);
  }
  shape_ratio = mesh_size / min_inradius;
}

Mesh build_unit_square_mesh(int n) {
  if (n < 1) throw std::runtime_error("mesh: subdivision count must be positive");
  Mesh mesh;
  mesh.dim = 2;
  const auto vid = [n](int i, int j) { return static_cast<Index>(i + (n + 1) * j); };
  mesh.vertices.reserve(static_cast<std::size_t>((n + 1) * (n + 1)));
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i)
      mesh.vertices.emplace_back(double(i) / n, double(j) / n, 0.0);
  // Fixed diagonal from (i, j) to (i+1, j+1) in every cell.
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      mesh.elements.push_back({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), -1});
      mesh.elements.push_back({vid(i, j), vid(i + 1, j + 1), vid(i, j + 1), -1});
    }
  mesh.finalize();
  return mesh;
}

Mesh build_unit_square_crisscross(int n) {
  if (n < 1) throw std::runtime_error("mesh: subdivision count must be positive");
  Mesh mesh;
  mesh.dim = 2;
  const auto vid = [n](int i, int j) { return static_cast<Index>(i + (n + 1) * j); };
  mesh.vertices.reserve(static_cast<std::size_t>((n + 1) * (n + 1) + n * n));
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i)
      mesh.vertices.emplace_back(double(i) / n, double(j) / n, 0.0);
  // Both diagonals per cell: four triangles around the cell centre. The
  // pattern is symmetric under the reflections of the square, which improves
  // coarse-mesh error constants noticeably compared to a fixed diagonal.
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const Index c = static_cast<Index>(mesh.vertices.size());
      mesh.vertices.emplace_back((i + 0.5) / n, (j + 0.5) / n, 0.0);
      mesh.elements.push_back({vid(i, j), vid(i + 1, j), c, -1});
      mesh.elements.push_back({vid(i + 1, j), vid(i + 1, j + 1), c, -1});
      mesh.elements.push_back({vid(i + 1, j + 1), vid(i, j + 1), c, -1});
      mesh.elements.push_back({vid(i, j + 1), vid(i, j), c, -1});
    }
  mesh.finalize();
  return mesh;
}

Mesh build_unit_square_alternating(int n) {
  if (n < 1) throw std::runtime_error("mesh: subdivision count must be positive");
  Mesh mesh;
  mesh.dim = 2;
  const auto vid = [n](int i, int j) { return static_cast<Index>(i + (n + 1) * j); };
  mesh.vertices.reserve(static_cast<std::size_t>((n + 1) * (n + 1)));
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i)
      mesh.vertices.emplace_back(double(i) / n, double(j) / n, 0.0);
  // Diagonal direction flips checkerboard-fashion, so diagonals meet in an X
  // at every second grid vertex. Sample-set recursion depths stay level
  // across wide sample-size ranges on this pattern, which keeps stability
  // sweeps free of patch-depth steps.
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      if ((i + j) % 2 == 0) {
        mesh.elements.push_back({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), -1});
        mesh.elements.push_back({vid(i, j), vid(i + 1, j + 1), vid(i, j + 1), -1});
      } else {
        mesh.elements.push_back({vid(i, j), vid(i + 1, j), vid(i, j + 1), -1});
        mesh.elements.push_back({vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1), -1});
      }
    }
  mesh.finalize();
  return mesh;
}

Mesh build_unit_cube_mesh(int n) {
  if (n < 1) throw std::runtime_error("mesh: subdivision count must be positive");
  Mesh mesh;
  mesh.dim = 3;
  const auto vid = [n](int i, int j, int k) {
    return static_cast<Index>(i + (n + 1) * (j + (n + 1) * k));
  };
  for (int k = 0; k <= n; ++k)
    for (int j = 0; j <= n; ++j)
      for (int i = 0; i <= n; ++i)
        mesh.vertices.emplace_back(double(i) / n, double(j) / n, double(k) / n);
  // Kuhn split: six tetrahedra per cell, one per permutation of the axes,
  // each walking from the low corner to the high corner. Conforming across
  // cells and invariant under red refinement.
  static const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                                  {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        for (const auto& perm : perms) {
          std::array<int, 3> at{{i, j, k}};
          std::array<Index, 4> tet{};
          tet[0] = vid(at[0], at[1], at[2]);
          for (int s = 0; s < 3; ++s) {
            at[perm[s]] += 1;
            tet[s + 1] = vid(at[0], at[1], at[2]);
          }
          mesh.elements.push_back(tet);
        }
  mesh.finalize();
  return mesh;
}

RefinedMesh uniform_refine(const Mesh& coarse) {
  RefinedMesh out;
  Mesh& fine = out.mesh;
  fine.dim = coarse.dim;
  fine.vertices = coarse.vertices;
  const Index ncv = coarse.vertex_count();

  std::map<std::pair<Index, Index>, Index> midpoint;
  const auto mid = [&](Index a, Index b) {
    if (a > b) std::swap(a, b);
    auto it = midpoint.find({a, b});
    if (it != midpoint.end()) return it->second;
    const Index id = static_cast<Index>(fine.vertices.size());
    fine.vertices.push_back(0.5 * (coarse.vertices[a] + coarse.vertices[b]));
    midpoint.emplace(std::make_pair(a, b), id);
    return id;
  };

  for (Index k = 0; k < coarse.element_count(); ++k) {
    const auto& el = coarse.elements[k];
    if (coarse.dim == 2) {
      const Index v0 = el[0], v1 = el[1], v2 = el[2];
      const Index m01 = mid(v0, v1), m12 = mid(v1, v2), m02 = mid(v0, v2);
      fine.elements.push_back({v0, m01, m02, -1});
      fine.elements.push_back({m01, v1, m12, -1});
      fine.elements.push_back({m02, m12, v2, -1});
      fine.elements.push_back({m01, m12, m02, -1});
    } else {
      const Index v0 = el[0], v1 = el[1], v2 = el[2], v3 = el[3];
      const Index m01 = mid(v0, v1), m02 = mid(v0, v2), m03 = mid(v0, v3);
      const Index m12 = mid(v1, v2), m13 = mid(v1, v3), m23 = mid(v2, v3);
      // Bey's red rule: four corner children plus the octahedron cut along
      // the m02-m13 diagonal. Keeps Kuhn meshes self-similar.
      fine.elements.push_back({v0, m01, m02, m03});
      fine.elements.push_back({m01, v1, m12, m13});
      fine.elements.push_back({m02, m12, v2, m23});
      fine.elements.push_back({m03, m13, m23, v3});
      fine.elements.push_back({m01, m02, m03, m13});
      fine.elements.push_back({m01, m02, m12, m13});
      fine.elements.push_back({m02, m03, m13, m23});
      fine.elements.push_back({m02, m12, m13, m23});
    }
  }
  fine.finalize();

  std::vector<Triplet> trip;
  trip.reserve(static_cast<std::size_t>(fine.vertex_count()) * 2);
  for (Index v = 0; v < ncv; ++v) trip.emplace_back(v, v, 1.0);
  for (const auto& [edge, v] : midpoint) {
    trip.emplace_back(v, edge.first, 0.5);
    trip.emplace_back(v, edge.second, 0.5);
  }
  out.prolongation.resize(fine.vertex_count(), ncv);
  out.prolongation.setFromTriplets(trip.begin(), trip.end());
  return out;
}

SpMat MeshHierarchy::interior_prolongation(int j) const {
  const Mesh& coarse = levels[j];
  const Mesh& fine = levels[j + 1];
  const SpMat& P = prolongation[j];
  std::vector<Triplet> trip;
  trip.reserve(static_cast<std::size_t>(P.nonZeros()));
  for (int col = 0; col < P.outerSize(); ++col) {
    const Index cc = coarse.interior_id[col];
    if (cc < 0) continue;
    for (SpMat::InnerIterator it(P, col); it; ++it) {
      const Index fr = fine.interior_id[it.row()];
      if (fr < 0) continue;
      trip.emplace_back(fr, cc, it.value());
    }
  }
  SpMat out(fine.interior_count(), coarse.interior_count());
  out.setFromTriplets(trip.begin(), trip.end());
  return out;
}

MeshHierarchy build_structured_hierarchy(int dim, int n, int min_base) {
  if (dim != 2 && dim != 3) throw std::runtime_error("mesh: dim must be 2 or 3");
  if (n < 1) throw std::runtime_error("mesh: subdivision count must be positive");
  if (min_base < 1) min_base = 4;
  // Fixed coarse base so every solve mesh of a study belongs to one family:
  // refining the base k times reaches n whenever n = base * 2^k.
  int base = n;
  int refine_count = 0;
  while (base % 2 == 0 && base / 2 >= min_base) {
    base /= 2;
    ++refine_count;
  }
  MeshHierarchy hier;
  hier.levels.push_back(dim == 2 ? build_unit_square_crisscross(base)
                                 : build_unit_cube_mesh(base));
  for (int j = 0; j < refine_count; ++j) {
    RefinedMesh r = uniform_refine(hier.levels.back());
    hier.levels.push_back(std::move(r.mesh));
    hier.prolongation.push_back(std::move(r.prolongation));
  }
  return hier;
}

void write_mesh_text(const Mesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("mesh: cannot open " + path + " for writing");
  out << mesh.dim << ' ' << mesh.vertex_count() << ' ' << mesh.element_count() << '\n';
  char buf[64];
  for (const auto& v : mesh.vertices) {
    for (int c = 0; c < mesh.dim; ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", v[c]);
      out << (c ? " " : "") << buf;
    }
    out << '\n';
  }
  for (Index k = 0; k < mesh.element_count(); ++k) {
    for (int i = 0; i <= mesh.dim; ++i) out << (i ? " " : "") << mesh.elements[k][i];
    out << '\n';
  }
  if (!out) throw std::runtime_error("mesh: write failed for " + path);
}

Mesh read_mesh_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("mesh: cannot open " + path);
  Mesh mesh;
  Index nv = 0, ne = 0;
  if (!(in >> mesh.dim >> nv >> ne)) throw std::runtime_error("mesh: bad header in " + path);
  if (mesh.dim != 2 && mesh.dim != 3) throw std::runtime_error("mesh: bad dimension in " + path);
  if (nv <= 0 || ne <= 0) throw std::runtime_error("mesh: bad counts in " + path);
  mesh.vertices.assign(nv, Eigen::Vector3d::Zero());
  for (Index v = 0; v < nv; ++v)
    for (int c = 0; c < mesh.dim; ++c)
      if (!(in >> mesh.vertices[v][c])) throw std::runtime_error("mesh: bad vertex data in " + path);
  mesh.elements.assign(ne, {-1, -1, -1, -1});
  for (Index k = 0; k < ne; ++k)
    for (int i = 0; i <= mesh.dim; ++i)
      if (!(in >> mesh.elements[k][i])) throw std::runtime_error("mesh: bad element data in " + path);
  mesh.finalize();
  return mesh;
}

} // namespace biharm
