#include "biharm/patch.hpp"

#include "biharm/parallel.hpp"

#include <algorithm>
#include <stdexcept>

namespace biharm {

namespace {

void collect_nodes(const Mesh& mesh, const std::vector<Index>& elements,
                   std::vector<Index>& nodes) {
  nodes.clear();
  for (Index k : elements)
    for (int i = 0; i <= mesh.dim; ++i) nodes.push_back(mesh.elements[k][i]);
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
}

double patch_diameter(const Mesh& mesh, const std::vector<Index>& nodes) {
  double d = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i)
    for (std::size_t j = i + 1; j < nodes.size(); ++j)
      d = std::max(d, (mesh.vertices[nodes[i]] - mesh.vertices[nodes[j]]).norm());
  return d;
}

} // namespace

ElementPatch build_patch(const Mesh& mesh, Index k, int min_nodes) {
  if (min_nodes < 1) throw std::runtime_error("patch: min_nodes must be positive");
  ElementPatch patch;
  patch.element = k;
  patch.elements = {k};
  collect_nodes(mesh, patch.elements, patch.nodes);

  if (static_cast<int>(patch.nodes.size()) >= min_nodes) {
    patch.depth = 0;
    patch.diameter = patch_diameter(mesh, patch.nodes);
    return patch;
  }

  // ring = S_t, ascending; grown until the vertex count of the next ring
  // reaches min_nodes.
  std::vector<Index> ring = patch.elements;
  std::vector<Index> next, next_nodes;
  for (int t = 0;; ++t) {
    next.clear();
    for (Index kk : ring) {
      const auto& nb = mesh.element_neighbors[kk];
      next.insert(next.end(), nb.begin(), nb.end());
    }
    std::sort(next.begin(), next.end());
    next.erase(std::unique(next.begin(), next.end()), next.end());
    collect_nodes(mesh, next, next_nodes);

    if (static_cast<int>(next_nodes.size()) >= min_nodes) {
      patch.elements = ring;
      patch.depth = t + 1;
      break;
    }
    if (next.size() == ring.size())
      throw std::runtime_error("patch: mesh exhausted before reaching " +
                               std::to_string(min_nodes) + " nodes around element " +
                               std::to_string(k));
    ring = next;
  }

  // Partial last ring: nearest barycenters first, element index breaks ties.
  std::vector<Index> extra;
  for (Index kk : next)
    if (!std::binary_search(patch.elements.begin(), patch.elements.end(), kk))
      extra.push_back(kk);
  const Eigen::Vector3d center = mesh.barycenter(k);
  std::vector<std::pair<double, Index>> order;
  order.reserve(extra.size());
  for (Index kk : extra) order.emplace_back((mesh.barycenter(kk) - center).norm(), kk);
  std::sort(order.begin(), order.end());

  std::vector<char> have(mesh.vertex_count(), 0);
  collect_nodes(mesh, patch.elements, patch.nodes);
  for (Index v : patch.nodes) have[v] = 1;
  std::size_t count = patch.nodes.size();
  for (const auto& [dist, kk] : order) {
    patch.elements.push_back(kk);
    for (int i = 0; i <= mesh.dim; ++i) {
      const Index v = mesh.elements[kk][i];
      if (!have[v]) {
        have[v] = 1;
        ++count;
      }
    }
    if (static_cast<int>(count) >= min_nodes) break;
  }
  collect_nodes(mesh, patch.elements, patch.nodes);
  patch.diameter = patch_diameter(mesh, patch.nodes);
  return patch;
}

std::vector<ElementPatch> build_all_patches(const Mesh& mesh, int min_nodes) {
  std::vector<ElementPatch> patches(mesh.element_count());
  parallel_for(patches.size(), [&](std::size_t k) {
    patches[k] = build_patch(mesh, static_cast<Index>(k), min_nodes);
  });
  return patches;
}

} // namespace biharm
