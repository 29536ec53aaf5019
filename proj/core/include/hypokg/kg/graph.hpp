#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "hypokg/common/error.hpp"
#include "hypokg/kg/node_id.hpp"

namespace hypokg::kg {

enum class Provenance : std::uint8_t { knowledge_base = 0, text_mining = 1, predicted = 2 };

std::string_view to_string(Provenance p);
Provenance provenance_from_string(std::string_view s);

struct Edge {
  NodeId head;
  std::string relation;
  NodeId tail;
  Provenance provenance = Provenance::knowledge_base;
  std::optional<double> weight;

  /// Dedup key ordering: (head, relation, tail, provenance). Weight is payload.
  friend bool key_less(const Edge& a, const Edge& b);
  friend bool same_key(const Edge& a, const Edge& b);
  friend bool operator==(const Edge&, const Edge&) = default;
};

using NodeIndex = std::uint32_t;
using EdgeIndex = std::uint32_t;

/// Referenced node ids that are not part of a graph.
class UnknownNodeError : public NotFound {
 public:
  explicit UnknownNodeError(std::vector<NodeId> missing);
  const std::vector<NodeId>& missing() const { return missing_; }

 private:
  std::vector<NodeId> missing_;
};

class GraphBuilder;

/// Immutable labeled multigraph.
///
/// Nodes are kept sorted by id and edges by their dedup key, so two graphs
/// built from the same facts in any order compare equal and iterate
/// identically. Edges are stored directed; incidence lists give the
/// undirected view used by filtering, degree, and statistics.
class KnowledgeGraph {
 public:
  KnowledgeGraph() = default;

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  bool empty() const { return nodes_.empty(); }

  const std::vector<NodeId>& nodes() const { return nodes_; }
  const NodeId& node(NodeIndex i) const { return nodes_[i]; }
  const std::vector<Edge>& edges() const { return edges_; }
  const Edge& edge(EdgeIndex e) const { return edges_[e]; }
  NodeIndex edge_head(EdgeIndex e) const { return edge_head_[e]; }
  NodeIndex edge_tail(EdgeIndex e) const { return edge_tail_[e]; }

  std::optional<NodeIndex> find(const NodeId& id) const;
  std::optional<NodeIndex> find(std::string_view canonical) const;
  bool contains(const NodeId& id) const { return find(id).has_value(); }

  /// Throws UnknownNodeError.
  NodeIndex index_of(const NodeId& id) const;

  /// Edges touching `n`, either direction, in edge order.
  std::span<const EdgeIndex> incident(NodeIndex n) const;

  /// Nodes whose namespace equals `ns` (the label index), sorted.
  std::span<const NodeIndex> nodes_in_namespace(std::string_view ns) const;
  std::vector<std::string> namespaces() const;

  /// Edges whose relation equals `relation`, in edge order.
  std::span<const EdgeIndex> edges_with_relation(std::string_view relation) const;
  std::vector<std::string> relations() const;

  /// 0 when the graph carries no node features.
  std::size_t feature_dim() const { return feature_dim_; }
  /// Row of length feature_dim(); zeros for nodes without a record.
  std::span<const double> features(NodeIndex n) const;
  bool has_features(NodeIndex n) const;

  /// Empty string when no description was loaded.
  const std::string& node_text(NodeIndex n) const { return node_text_[n]; }

  /// Order-independent content fingerprint.
  std::uint64_t content_hash() const;

  friend bool operator==(const KnowledgeGraph& a, const KnowledgeGraph& b);

 private:
  friend class GraphBuilder;
  void index();

  std::vector<NodeId> nodes_;
  std::map<std::string, NodeIndex, std::less<>> lookup_;
  std::vector<Edge> edges_;
  std::vector<NodeIndex> edge_head_;
  std::vector<NodeIndex> edge_tail_;
  std::vector<std::size_t> incidence_offsets_;
  std::vector<EdgeIndex> incidence_;
  std::map<std::string, std::vector<NodeIndex>, std::less<>> by_namespace_;
  std::map<std::string, std::vector<EdgeIndex>, std::less<>> by_relation_;
  std::size_t feature_dim_ = 0;
  std::vector<double> features_;
  std::vector<bool> has_features_;
  std::vector<std::string> node_text_;
};

/// Counters accumulated while adding edges.
struct BuildCounters {
  std::size_t duplicates = 0;
  std::size_t self_loops_dropped = 0;
  std::size_t weight_conflicts = 0;
};

enum class AddEdgeResult { added, duplicate, self_loop };

/// Exclusive writer that produces a KnowledgeGraph.
class GraphBuilder {
 public:
  GraphBuilder() = default;
  /// Reopens an existing graph for extension.
  explicit GraphBuilder(const KnowledgeGraph& graph);

  void add_node(const NodeId& id);

  /// Materializes both endpoints. Self-loops are dropped and counted;
  /// a repeated (head, relation, tail, provenance) keeps the first weight.
  AddEdgeResult add_edge(Edge edge);

  /// Throws InvalidArgument when the dimension disagrees with earlier rows.
  void set_features(const NodeId& id, std::vector<double> values);
  bool has_features(const NodeId& id) const;
  void set_text(const NodeId& id, std::string text);
  bool has_text(const NodeId& id) const;
  bool contains(const NodeId& id) const;

  std::size_t feature_dim() const { return feature_dim_; }
  const BuildCounters& counters() const { return counters_; }

  KnowledgeGraph build() const;

 private:
  static std::string edge_key(const Edge& e);

  std::unordered_map<std::string, NodeId> nodes_;
  std::vector<Edge> edges_;
  std::unordered_map<std::string, std::size_t> edge_lookup_;
  std::unordered_map<std::string, std::vector<double>> features_;
  std::unordered_map<std::string, std::string> text_;
  std::size_t feature_dim_ = 0;
  BuildCounters counters_;
};

}  // namespace hypokg::kg
