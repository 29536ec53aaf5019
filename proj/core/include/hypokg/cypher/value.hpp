#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "hypokg/kg/graph.hpp"

namespace hypokg::cypher {

struct NodeRef {
  kg::NodeIndex index;
  friend auto operator<=>(const NodeRef&, const NodeRef&) = default;
};

struct EdgeRef {
  kg::EdgeIndex index;
  friend auto operator<=>(const EdgeRef&, const EdgeRef&) = default;
};

enum class ValueKind { null, boolean, integer, real, string, list, node, edge };

/// Runtime value. Node and edge references only exist during evaluation;
/// ResultTable cells hold the first six kinds.
class Value {
 public:
  using List = std::vector<Value>;

  Value() = default;
  Value(bool b) : data_(b) {}
  Value(std::int64_t i) : data_(i) {}
  Value(int i) : data_(static_cast<std::int64_t>(i)) {}
  Value(double d) : data_(d) {}
  Value(std::string s) : data_(std::move(s)) {}
  Value(const char* s) : data_(std::string(s)) {}
  Value(List l) : data_(std::move(l)) {}
  Value(NodeRef n) : data_(n) {}
  Value(EdgeRef e) : data_(e) {}

  ValueKind kind() const { return static_cast<ValueKind>(data_.index()); }
  bool is_null() const { return kind() == ValueKind::null; }
  bool is_number() const { return kind() == ValueKind::integer || kind() == ValueKind::real; }

  bool as_bool() const { return std::get<bool>(data_); }
  std::int64_t as_int() const { return std::get<std::int64_t>(data_); }
  double as_real() const { return std::get<double>(data_); }
  double as_number() const { return kind() == ValueKind::integer ? static_cast<double>(as_int()) : as_real(); }
  const std::string& as_string() const { return std::get<std::string>(data_); }
  const List& as_list() const { return std::get<List>(data_); }
  NodeRef as_node() const { return std::get<NodeRef>(data_); }
  EdgeRef as_edge() const { return std::get<EdgeRef>(data_); }

  /// Structural identity (1 and 1.0 differ). Used for DISTINCT and grouping.
  friend bool operator==(const Value& a, const Value& b) { return a.data_ == b.data_; }

  /// Deterministic total order: by kind rank (numbers share a rank and
  /// compare numerically), then by value; null sorts last.
  friend std::weak_ordering total_order(const Value& a, const Value& b);

 private:
  std::variant<std::monostate, bool, std::int64_t, double, std::string, List, NodeRef, EdgeRef> data_;
};

bool total_less(const Value& a, const Value& b);

}  // namespace hypokg::cypher
