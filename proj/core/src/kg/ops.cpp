#include "hypokg/kg/ops.hpp"

#include <algorithm>
#include <deque>

namespace hypokg::kg {

KnowledgeGraph merge_graphs(const KnowledgeGraph& base, const KnowledgeGraph& overlay) {
  if (base.feature_dim() != 0 && overlay.feature_dim() != 0 &&
      base.feature_dim() != overlay.feature_dim()) {
    throw MergeError("cannot merge graphs with feature dimensions " +
                     std::to_string(base.feature_dim()) + " and " +
                     std::to_string(overlay.feature_dim()));
  }
  GraphBuilder builder(base);
  for (NodeIndex i = 0; i < overlay.node_count(); ++i) {
    const NodeId& id = overlay.node(i);
    builder.add_node(id);
    if (overlay.has_features(i) && !builder.has_features(id)) {
      auto row = overlay.features(i);
      builder.set_features(id, std::vector<double>(row.begin(), row.end()));
    }
    if (!overlay.node_text(i).empty() && !builder.has_text(id)) {
      builder.set_text(id, overlay.node_text(i));
    }
  }
  for (const auto& e : overlay.edges()) builder.add_edge(e);
  return builder.build();
}

std::vector<int> bfs_distances(const KnowledgeGraph& graph, const std::vector<NodeIndex>& sources,
                               int max_depth) {
  std::vector<int> dist(graph.node_count(), -1);
  std::deque<NodeIndex> queue;
  for (NodeIndex s : sources) {
    if (dist[s] == 0) continue;
    dist[s] = 0;
    queue.push_back(s);
  }
  while (!queue.empty()) {
    const NodeIndex u = queue.front();
    queue.pop_front();
    if (dist[u] >= max_depth) continue;
    for (EdgeIndex e : graph.incident(u)) {
      const NodeIndex v = graph.edge_head(e) == u ? graph.edge_tail(e) : graph.edge_head(e);
      if (dist[v] != -1) continue;
      dist[v] = dist[u] + 1;
      queue.push_back(v);
    }
  }
  return dist;
}

KnowledgeGraph induced_subgraph(const KnowledgeGraph& graph, const std::vector<bool>& keep) {
  GraphBuilder builder;
  for (NodeIndex i = 0; i < graph.node_count(); ++i) {
    if (!keep[i]) continue;
    const NodeId& id = graph.node(i);
    builder.add_node(id);
    if (graph.has_features(i)) {
      auto row = graph.features(i);
      builder.set_features(id, std::vector<double>(row.begin(), row.end()));
    }
    if (!graph.node_text(i).empty()) builder.set_text(id, graph.node_text(i));
  }
  for (EdgeIndex e = 0; e < graph.edge_count(); ++e) {
    if (keep[graph.edge_head(e)] && keep[graph.edge_tail(e)]) builder.add_edge(graph.edge(e));
  }
  return builder.build();
}

KnowledgeGraph k_hop_filter(const KnowledgeGraph& graph, const std::vector<NodeId>& seeds, int k) {
  if (k < 0) throw InvalidArgument("k must be non-negative");
  std::vector<NodeId> missing;
  std::vector<NodeIndex> sources;
  for (const auto& s : seeds) {
    if (auto idx = graph.find(s)) {
      sources.push_back(*idx);
    } else {
      missing.push_back(s);
    }
  }
  if (!missing.empty()) throw UnknownNodeError(std::move(missing));
  const auto dist = bfs_distances(graph, sources, k);
  std::vector<bool> keep(graph.node_count());
  for (std::size_t i = 0; i < keep.size(); ++i) keep[i] = dist[i] != -1;
  return induced_subgraph(graph, keep);
}

std::vector<std::pair<NodeIndex, NodeIndex>> undirected_pairs(const KnowledgeGraph& graph) {
  std::vector<std::pair<NodeIndex, NodeIndex>> pairs;
  pairs.reserve(graph.edge_count());
  for (EdgeIndex e = 0; e < graph.edge_count(); ++e) {
    NodeIndex u = graph.edge_head(e);
    NodeIndex v = graph.edge_tail(e);
    if (u == v) continue;
    if (u > v) std::swap(u, v);
    pairs.emplace_back(u, v);
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  return pairs;
}

GraphStats graph_summary(const KnowledgeGraph& graph) {
  if (graph.empty()) throw InvalidArgument("cannot summarize an empty graph");
  GraphStats stats;
  stats.node_count = graph.node_count();
  stats.edge_count = undirected_pairs(graph).size();
  stats.average_degree =
      2.0 * static_cast<double>(stats.edge_count) / static_cast<double>(stats.node_count);
  stats.feature_dim = graph.feature_dim();
  for (NodeIndex i = 0; i < graph.node_count(); ++i) {
    if (graph.incident(i).empty()) {
      stats.has_isolated_nodes = true;
      break;
    }
  }
  for (EdgeIndex e = 0; e < graph.edge_count(); ++e) {
    if (graph.edge_head(e) == graph.edge_tail(e)) {
      stats.has_self_loops = true;
      break;
    }
  }
  return stats;
}

std::size_t degree(const KnowledgeGraph& graph, const NodeId& node) {
  return graph.incident(graph.index_of(node)).size();
}

}  // namespace hypokg::kg
