#pragma once

#include "biharm/common.hpp"

#include <array>
#include <string>
#include <vector>

namespace biharm {

// Codimension-1 face of a simplicial mesh: an edge in 2D, a triangle in 3D.
// owner is the adjacent element with the smaller index; the unit normal
// points from owner towards neighbor (outward from the domain on boundary
// faces).
struct Face {
  std::array<Index, 3> verts{{-1, -1, -1}};
  Index owner = -1;
  Index neighbor = -1;
  double diameter = 0.0;
  double measure = 0.0;
  Eigen::Vector3d normal = Eigen::Vector3d::Zero();

  bool on_boundary() const { return neighbor < 0; }
};

// Conforming simplicial mesh of a polygonal/polyhedral domain. 2D meshes
// store vertices with z = 0. finalize() derives faces, adjacency and node
// classification from vertices/elements and must be called after those are
// filled.
class Mesh {
public:
  int dim = 2;
  std::vector<Eigen::Vector3d> vertices;
  std::vector<std::array<Index, 4>> elements; // first dim+1 entries used

  std::vector<Face> faces;
  std::vector<std::vector<Index>> element_faces;
  std::vector<std::vector<Index>> node_elements;     // vertex -> incident elements
  std::vector<std::vector<Index>> element_neighbors; // w(K), vertex-touching, includes K
  std::vector<double> element_diameter;
  std::vector<char> boundary_node;
  std::vector<Index> interior_nodes; // ascending vertex ids
  std::vector<Index> boundary_nodes;
  std::vector<Index> interior_id; // vertex -> position in interior_nodes, -1 if boundary
  double mesh_size = 0.0;   // max element diameter
  double shape_ratio = 0.0; // max h_K / min inradius

  Index vertex_count() const { return static_cast<Index>(vertices.size()); }
  Index element_count() const { return static_cast<Index>(elements.size()); }
  Index face_count() const { return static_cast<Index>(faces.size()); }
  Index interior_count() const { return static_cast<Index>(interior_nodes.size()); }
  int verts_per_element() const { return dim + 1; }

  Eigen::Vector3d barycenter(Index k) const;
  double element_measure(Index k) const;
  // Gradients of the barycentric coordinates of element k, one row per
  // local vertex. Constant on the element.
  Eigen::Matrix<double, Eigen::Dynamic, 3> p1_gradients(Index k) const;

  void finalize();
};

// n x n grid cells, each split along the fixed diagonal from (i, j) to
// (i+1, j+1): (n+1)^2 vertices, 2 n^2 triangles.
Mesh build_unit_square_mesh(int n);
// n x n grid cells, each split by both diagonals into four triangles around
// the cell centre: (n+1)^2 + n^2 vertices, 4 n^2 triangles. Symmetric under
// the reflections of the square; the built-in experiments run on this family.
Mesh build_unit_square_crisscross(int n);
// n x n grid cells with the diagonal direction alternating checkerboard
// fashion: (n+1)^2 vertices, 2 n^2 triangles. Sample-set stability sweeps
// run on this family (level recursion depths over wide sample-size ranges).
Mesh build_unit_square_alternating(int n);
// Kuhn split, six tetrahedra per grid cell.
Mesh build_unit_cube_mesh(int n);

// Red refinement: every element is split into 2^dim children through edge
// midpoints (Bey's rule in 3D). prolongation is the nodal embedding
// (fine vertex count) x (coarse vertex count): identity at coarse vertices,
// 1/2-1/2 at edge midpoints.
struct RefinedMesh {
  Mesh mesh;
  SpMat prolongation;
};
RefinedMesh uniform_refine(const Mesh& coarse);

// Nested mesh chain, coarse to fine. prolongation[j] maps nodal vectors on
// levels[j] to levels[j+1].
struct MeshHierarchy {
  std::vector<Mesh> levels;
  std::vector<SpMat> prolongation;

  const Mesh& finest() const { return levels.back(); }
  int level_count() const { return static_cast<int>(levels.size()); }
  // prolongation[j] with boundary rows/columns removed: maps values on
  // interior nodes of levels[j] to interior nodes of levels[j+1]. Exact for
  // functions vanishing on the whole boundary.
  SpMat interior_prolongation(int j) const;
};

// Structured hierarchy on the unit square/cube whose finest level has n
// subdivisions per side: n is halved while even and at least 2 * min_base,
// the coarsest mesh is built directly (crisscross in 2D, Kuhn in 3D) and
// refined back up. min_base <= 0 selects the default of 4. A single level is
// returned when n is odd or below 2 * min_base.
MeshHierarchy build_structured_hierarchy(int dim, int n, int min_base = 0);

Mesh read_mesh_text(const std::string& path);
void write_mesh_text(const Mesh& mesh, const std::string& path);

} // namespace biharm
