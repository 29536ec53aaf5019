#pragma once

#include <utility>
#include <vector>

#include "hypokg/kg/graph.hpp"

namespace hypokg::kg {

class MergeError : public Error {
 public:
  using Error::Error;
};

struct GraphStats {
  std::size_t node_count = 0;
  std::size_t edge_count = 0;  // undirected simple view
  double average_degree = 0.0;
  std::size_t feature_dim = 0;
  bool has_isolated_nodes = false;
  bool has_self_loops = false;
};

inline constexpr int kDefaultHops = 2;

/// Union of nodes and edges (deduplicated); provenance kept per edge.
/// Features and descriptions from `base` win when both graphs define one.
/// Throws MergeError when both graphs carry features of different dimension.
KnowledgeGraph merge_graphs(const KnowledgeGraph& base, const KnowledgeGraph& overlay);

/// Nodes within undirected distance <= k of any seed, plus every edge whose
/// endpoints both survive. Throws UnknownNodeError naming all unknown seeds.
KnowledgeGraph k_hop_filter(const KnowledgeGraph& graph, const std::vector<NodeId>& seeds,
                            int k = kDefaultHops);

/// Undirected BFS distances from `sources`; -1 for unreachable, capped at `max_depth`.
std::vector<int> bfs_distances(const KnowledgeGraph& graph, const std::vector<NodeIndex>& sources,
                               int max_depth);

/// Subgraph induced by the nodes with keep[i] == true.
KnowledgeGraph induced_subgraph(const KnowledgeGraph& graph, const std::vector<bool>& keep);

/// Throws InvalidArgument on an empty graph.
GraphStats graph_summary(const KnowledgeGraph& graph);

/// Incident edges in the undirected multigraph view. Throws UnknownNodeError.
std::size_t degree(const KnowledgeGraph& graph, const NodeId& node);

/// Distinct unordered node pairs (u < v) joined by at least one edge, sorted.
std::vector<std::pair<NodeIndex, NodeIndex>> undirected_pairs(const KnowledgeGraph& graph);

}  // namespace hypokg::kg
