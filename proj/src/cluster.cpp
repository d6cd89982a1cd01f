#include "slab/cluster.hpp"

#include "slab/errors.hpp"

namespace slab {

std::vector<NodeState> make_cluster(int num_nodes, double capacity) {
  std::vector<NodeState> nodes(static_cast<std::size_t>(num_nodes));
  for (int i = 0; i < num_nodes; ++i) {
    nodes[static_cast<std::size_t>(i)].node_id = i;
    nodes[static_cast<std::size_t>(i)].capacity = capacity;
  }
  return nodes;
}

std::optional<std::vector<int>> place_tasks(std::span<const NodeState> nodes, int n, double r_cap) {
  if (n < 1) throw DomainError("place_tasks: n must be >= 1");
  std::vector<double> occupied;
  occupied.reserve(nodes.size());
  for (const auto& node : nodes) occupied.push_back(node.occupied);

  std::vector<int> assignment;
  assignment.reserve(static_cast<std::size_t>(n));
  for (int t = 0; t < n; ++t) {
    std::size_t best = nodes.size();
    double best_load = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (nodes[i].capacity - occupied[i] < r_cap) continue;
      const double load = occupied[i] / nodes[i].capacity;
      if (best == nodes.size() || load < best_load) {
        best = i;
        best_load = load;
      }
    }
    if (best == nodes.size()) return std::nullopt;
    occupied[best] += r_cap;
    assignment.push_back(nodes[best].node_id);
  }
  return assignment;
}

}  // namespace slab
