#pragma once

#include "biharm/common.hpp"
#include "biharm/mesh.hpp"

#include <vector>

namespace biharm {

// Collection of elements around a seed element whose vertices supply the
// least-squares sample set. elements lists the full rings in ascending index
// order followed by the trailing partial ring in distance-then-index order;
// nodes is the ascending union of their vertices.
struct ElementPatch {
  Index element = -1;
  std::vector<Index> elements;
  std::vector<Index> nodes;
  int depth = 0;          // rings walked
  double diameter = 0.0;  // max node-pair distance, h_D(K)
};

// Grows vertex-neighbor rings until the node count reaches min_nodes, then
// tops up from the next ring by barycenter distance (ties by element index).
// Throws when the whole mesh cannot supply min_nodes nodes.
ElementPatch build_patch(const Mesh& mesh, Index k, int min_nodes);

std::vector<ElementPatch> build_all_patches(const Mesh& mesh, int min_nodes);

} // namespace biharm
