#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace slab {

struct NodeState {
  int node_id = 0;
  double capacity = 0.0;
  double occupied = 0.0;
  std::vector<std::int64_t> running;  ///< ids of tasks holding a reservation here

  double free() const { return capacity - occupied; }
  double load() const { return occupied / capacity; }
};

std::vector<NodeState> make_cluster(int num_nodes, double capacity);

/// Read-only snapshot handed to scheduling decisions.
struct ClusterView {
  std::span<const NodeState> nodes;
  double slowdown_tail_index = 3.0;
  std::size_t queue_length = 0;
};

/// Greedy least-loaded placement. Each task goes to the node with the smallest
/// occupied/capacity ratio among those with at least r_cap free, lowest id on
/// ties; occupancy is updated between assignments. Returns the node id of
/// every task, or nullopt when some task does not fit. Never mutates `nodes`.
std::optional<std::vector<int>> place_tasks(std::span<const NodeState> nodes, int n, double r_cap);

}  // namespace slab
