#pragma once

#include <map>
#include <string>
#include <vector>

#include "hypokg/kg/graph.hpp"

namespace hypokg::kg {

struct LoadReport {
  std::size_t lines = 0;           // non-blank, non-comment lines seen
  std::size_t malformed = 0;
  std::size_t header_skipped = 0;  // 0 or 1
  std::size_t duplicates = 0;
  std::size_t self_loops_dropped = 0;
  std::size_t weight_conflicts = 0;
  std::vector<std::size_t> malformed_lines;  // 1-based line numbers
};

struct EdgeListLoad {
  KnowledgeGraph graph;
  LoadReport report;
};

/// Reads "head<d>relation<d>tail[<d>weight]" lines. '#' lines and blank lines
/// are ignored, CRLF is accepted. A first line whose third field is not a
/// node id is treated as a header. Malformed lines are skipped and counted;
/// FormatError only when every content line is malformed.
EdgeListLoad load_edge_list(const std::string& path, Provenance provenance,
                            char delimiter = '\t');

/// Same as load_edge_list but appends into an existing builder.
LoadReport load_edge_list_into(GraphBuilder& builder, const std::string& path,
                               Provenance provenance, char delimiter = '\t');

/// "NodeId<TAB>v1,v2,...,vF" per line.
std::map<NodeId, std::vector<double>> load_node_features(const std::string& path);

/// "NodeId<TAB>text" per line.
std::map<NodeId, std::string> load_node_text(const std::string& path);

/// Attaches records for nodes present in the builder; returns how many were
/// ignored because the node is unknown.
std::size_t attach_node_features(GraphBuilder& builder,
                                 const std::map<NodeId, std::vector<double>>& features);
std::size_t attach_node_text(GraphBuilder& builder, const std::map<NodeId, std::string>& text);

/// Writes edges in graph order; the weight column appears only when set.
void save_edge_list(const KnowledgeGraph& graph, const std::string& path, char delimiter = '\t');

}  // namespace hypokg::kg
