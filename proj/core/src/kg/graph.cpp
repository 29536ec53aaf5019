#include "hypokg/kg/graph.hpp"

#include <algorithm>
#include <numeric>
#include <tuple>

#include "hypokg/common/text.hpp"

namespace hypokg::kg {

NodeId NodeId::parse(std::string_view text) {
  auto id = try_parse(text);
  if (!id) throw FormatError("not a namespaced node id: '" + std::string(text) + "'");
  return *std::move(id);
}

std::optional<NodeId> NodeId::try_parse(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos || colon == 0 || colon + 1 == text.size()) return std::nullopt;
  return NodeId{std::string(text.substr(0, colon)), std::string(text.substr(colon + 1))};
}

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::knowledge_base: return "knowledge_base";
    case Provenance::text_mining: return "text_mining";
    case Provenance::predicted: return "predicted";
  }
  return "knowledge_base";
}

Provenance provenance_from_string(std::string_view s) {
  if (s == "knowledge_base") return Provenance::knowledge_base;
  if (s == "text_mining") return Provenance::text_mining;
  if (s == "predicted") return Provenance::predicted;
  throw InvalidArgument("unknown provenance '" + std::string(s) + "'");
}

bool key_less(const Edge& a, const Edge& b) {
  return std::tie(a.head, a.relation, a.tail, a.provenance) <
         std::tie(b.head, b.relation, b.tail, b.provenance);
}

bool same_key(const Edge& a, const Edge& b) {
  return a.head == b.head && a.relation == b.relation && a.tail == b.tail &&
         a.provenance == b.provenance;
}

namespace {

std::string describe(const std::vector<NodeId>& ids) {
  std::vector<std::string> names;
  names.reserve(ids.size());
  for (const auto& id : ids) names.push_back(id.str());
  return join(names, ", ");
}

}  // namespace

UnknownNodeError::UnknownNodeError(std::vector<NodeId> missing)
    : NotFound("unknown node(s): " + describe(missing)), missing_(std::move(missing)) {}

std::optional<NodeIndex> KnowledgeGraph::find(const NodeId& id) const { return find(id.str()); }

std::optional<NodeIndex> KnowledgeGraph::find(std::string_view canonical) const {
  auto it = lookup_.find(canonical);
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

NodeIndex KnowledgeGraph::index_of(const NodeId& id) const {
  auto idx = find(id);
  if (!idx) throw UnknownNodeError({id});
  return *idx;
}

std::span<const EdgeIndex> KnowledgeGraph::incident(NodeIndex n) const {
  const std::size_t begin = incidence_offsets_[n];
  const std::size_t end = incidence_offsets_[n + 1];
  return {incidence_.data() + begin, end - begin};
}

std::span<const NodeIndex> KnowledgeGraph::nodes_in_namespace(std::string_view ns) const {
  auto it = by_namespace_.find(ns);
  if (it == by_namespace_.end()) return {};
  return it->second;
}

std::vector<std::string> KnowledgeGraph::namespaces() const {
  std::vector<std::string> out;
  for (const auto& [ns, _] : by_namespace_) out.push_back(ns);
  return out;
}

std::span<const EdgeIndex> KnowledgeGraph::edges_with_relation(std::string_view relation) const {
  auto it = by_relation_.find(relation);
  if (it == by_relation_.end()) return {};
  return it->second;
}

std::vector<std::string> KnowledgeGraph::relations() const {
  std::vector<std::string> out;
  for (const auto& [rel, _] : by_relation_) out.push_back(rel);
  return out;
}

std::span<const double> KnowledgeGraph::features(NodeIndex n) const {
  if (feature_dim_ == 0) return {};
  return {features_.data() + static_cast<std::size_t>(n) * feature_dim_, feature_dim_};
}

bool KnowledgeGraph::has_features(NodeIndex n) const {
  return feature_dim_ > 0 && has_features_[n];
}

std::uint64_t KnowledgeGraph::content_hash() const {
  std::string buf;
  for (NodeIndex i = 0; i < nodes_.size(); ++i) {
    buf += nodes_[i].str();
    buf += '\x1e';
    buf += node_text_[i];
    buf += '\x1e';
    for (double v : features(i)) buf += format_real(v) + ",";
    buf += '\n';
  }
  for (const auto& e : edges_) {
    buf += e.head.str() + '\x1f' + e.relation + '\x1f' + e.tail.str() + '\x1f';
    buf += std::string(to_string(e.provenance));
    if (e.weight) buf += '\x1f' + format_real(*e.weight);
    buf += '\n';
  }
  return fnv1a64(buf);
}

bool operator==(const KnowledgeGraph& a, const KnowledgeGraph& b) {
  return a.nodes_ == b.nodes_ && a.edges_ == b.edges_ && a.feature_dim_ == b.feature_dim_ &&
         a.features_ == b.features_ && a.has_features_ == b.has_features_ &&
         a.node_text_ == b.node_text_;
}

void KnowledgeGraph::index() {
  lookup_.clear();
  by_namespace_.clear();
  by_relation_.clear();
  for (NodeIndex i = 0; i < nodes_.size(); ++i) {
    lookup_.emplace(nodes_[i].str(), i);
    by_namespace_[nodes_[i].ns].push_back(i);
  }
  edge_head_.resize(edges_.size());
  edge_tail_.resize(edges_.size());
  std::vector<std::size_t> degree(nodes_.size(), 0);
  for (EdgeIndex e = 0; e < edges_.size(); ++e) {
    edge_head_[e] = lookup_.at(edges_[e].head.str());
    edge_tail_[e] = lookup_.at(edges_[e].tail.str());
    ++degree[edge_head_[e]];
    ++degree[edge_tail_[e]];
    by_relation_[edges_[e].relation].push_back(e);
  }
  incidence_offsets_.assign(nodes_.size() + 1, 0);
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    incidence_offsets_[i + 1] = incidence_offsets_[i] + degree[i];
  }
  incidence_.assign(incidence_offsets_.back(), 0);
  std::vector<std::size_t> cursor(incidence_offsets_.begin(), incidence_offsets_.end() - 1);
  for (EdgeIndex e = 0; e < edges_.size(); ++e) {
    incidence_[cursor[edge_head_[e]]++] = e;
    incidence_[cursor[edge_tail_[e]]++] = e;
  }
}

GraphBuilder::GraphBuilder(const KnowledgeGraph& graph) {
  for (NodeIndex i = 0; i < graph.node_count(); ++i) {
    const NodeId& id = graph.node(i);
    add_node(id);
    if (graph.has_features(i)) {
      auto row = graph.features(i);
      set_features(id, std::vector<double>(row.begin(), row.end()));
    }
    if (!graph.node_text(i).empty()) set_text(id, graph.node_text(i));
  }
  for (const auto& e : graph.edges()) add_edge(e);
}

void GraphBuilder::add_node(const NodeId& id) { nodes_.try_emplace(id.str(), id); }

bool GraphBuilder::contains(const NodeId& id) const { return nodes_.count(id.str()) > 0; }

std::string GraphBuilder::edge_key(const Edge& e) {
  std::string key = e.head.str();
  key += '\x1f';
  key += e.relation;
  key += '\x1f';
  key += e.tail.str();
  key += '\x1f';
  key += static_cast<char>('0' + static_cast<int>(e.provenance));
  return key;
}

AddEdgeResult GraphBuilder::add_edge(Edge edge) {
  if (edge.relation.empty()) throw InvalidArgument("edge relation must be non-empty");
  add_node(edge.head);
  add_node(edge.tail);
  if (edge.head == edge.tail) {
    ++counters_.self_loops_dropped;
    return AddEdgeResult::self_loop;
  }
  auto key = edge_key(edge);
  auto it = edge_lookup_.find(key);
  if (it != edge_lookup_.end()) {
    ++counters_.duplicates;
    const auto& kept = edges_[it->second];
    if (edge.weight && kept.weight != edge.weight) ++counters_.weight_conflicts;
    return AddEdgeResult::duplicate;
  }
  edge_lookup_.emplace(std::move(key), edges_.size());
  edges_.push_back(std::move(edge));
  return AddEdgeResult::added;
}

void GraphBuilder::set_features(const NodeId& id, std::vector<double> values) {
  if (values.empty()) throw InvalidArgument("feature vector for " + id.str() + " is empty");
  if (feature_dim_ != 0 && values.size() != feature_dim_) {
    throw InvalidArgument("feature dimension " + std::to_string(values.size()) + " for " +
                          id.str() + " differs from " + std::to_string(feature_dim_));
  }
  feature_dim_ = values.size();
  add_node(id);
  features_[id.str()] = std::move(values);
}

bool GraphBuilder::has_features(const NodeId& id) const { return features_.count(id.str()) > 0; }

void GraphBuilder::set_text(const NodeId& id, std::string text) {
  add_node(id);
  text_[id.str()] = std::move(text);
}

bool GraphBuilder::has_text(const NodeId& id) const { return text_.count(id.str()) > 0; }

KnowledgeGraph GraphBuilder::build() const {
  KnowledgeGraph g;
  g.nodes_.reserve(nodes_.size());
  for (const auto& [_, id] : nodes_) g.nodes_.push_back(id);
  std::sort(g.nodes_.begin(), g.nodes_.end());
  g.edges_ = edges_;
  std::sort(g.edges_.begin(), g.edges_.end(), key_less);
  g.feature_dim_ = feature_dim_;
  g.features_.assign(g.nodes_.size() * feature_dim_, 0.0);
  g.has_features_.assign(g.nodes_.size(), false);
  g.node_text_.assign(g.nodes_.size(), std::string());
  for (std::size_t i = 0; i < g.nodes_.size(); ++i) {
    const std::string key = g.nodes_[i].str();
    if (auto it = features_.find(key); it != features_.end()) {
      std::copy(it->second.begin(), it->second.end(), g.features_.begin() + i * feature_dim_);
      g.has_features_[i] = true;
    }
    if (auto it = text_.find(key); it != text_.end()) g.node_text_[i] = it->second;
  }
  g.index();
  return g;
}

}  // namespace hypokg::kg
