#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "hypokg/cypher/value.hpp"

namespace hypokg::cypher {

enum class ExprKind {
  literal,    // literal
  list,       // [args...]
  variable,   // name
  property,   // args[0].name
  negation,   // NOT args[0]
  conjunction,  // args[0] AND args[1]
  disjunction,  // args[0] OR args[1]
  comparison,   // args[0] <name> args[1]; name in {=, <>, <, >, <=, >=}
  membership,   // args[0] IN args[1]
  contains,     // args[0] CONTAINS args[1]
  aggregate,    // name in {collect, count}; star for count(*)
  any,          // any(name IN args[0] WHERE args[1])
};

/// Expression tree. Source offsets are informational and ignored by ==.
struct Expr {
  ExprKind kind = ExprKind::literal;
  Value literal;
  std::string name;
  bool distinct = false;
  bool star = false;
  std::vector<Expr> args;
  std::size_t offset = 0;

  friend bool operator==(const Expr& a, const Expr& b) {
    return a.kind == b.kind && a.literal == b.literal && a.name == b.name &&
           a.distinct == b.distinct && a.star == b.star && a.args == b.args;
  }
};

struct NodePattern {
  std::string variable;  // empty when anonymous
  std::optional<std::string> label;
  std::size_t offset = 0;

  friend bool operator==(const NodePattern& a, const NodePattern& b) {
    return a.variable == b.variable && a.label == b.label;
  }
};

enum class Direction { outgoing, incoming, either };

struct RelPattern {
  std::string variable;
  std::vector<std::string> types;  // alternation; empty matches any relation
  Direction direction = Direction::either;
  std::size_t offset = 0;

  friend bool operator==(const RelPattern& a, const RelPattern& b) {
    return a.variable == b.variable && a.types == b.types && a.direction == b.direction;
  }
};

/// n0 -r0- n1 -r1- ... ; nodes.size() == rels.size() + 1.
struct PathPattern {
  std::vector<NodePattern> nodes;
  std::vector<RelPattern> rels;
  friend bool operator==(const PathPattern&, const PathPattern&) = default;
};

struct MatchClause {
  bool optional = false;
  std::vector<PathPattern> patterns;
  std::optional<Expr> where;
  std::size_t offset = 0;

  friend bool operator==(const MatchClause& a, const MatchClause& b) {
    return a.optional == b.optional && a.patterns == b.patterns && a.where == b.where;
  }
};

struct ProjectionItem {
  Expr expr;
  std::optional<std::string> alias;
  friend bool operator==(const ProjectionItem&, const ProjectionItem&) = default;
};

struct SortItem {
  Expr expr;
  bool descending = false;
  friend bool operator==(const SortItem&, const SortItem&) = default;
};

struct WithClause {
  bool distinct = false;
  std::vector<ProjectionItem> items;
  std::optional<Expr> where;
  std::size_t offset = 0;

  friend bool operator==(const WithClause& a, const WithClause& b) {
    return a.distinct == b.distinct && a.items == b.items && a.where == b.where;
  }
};

struct ReturnClause {
  bool distinct = false;
  std::vector<ProjectionItem> items;
  std::vector<SortItem> order_by;
  std::optional<std::int64_t> limit;
  std::size_t offset = 0;

  friend bool operator==(const ReturnClause& a, const ReturnClause& b) {
    return a.distinct == b.distinct && a.items == b.items && a.order_by == b.order_by &&
           a.limit == b.limit;
  }
};

using Clause = std::variant<MatchClause, WithClause, ReturnClause>;

/// One UNION branch; always ends in a ReturnClause.
struct SingleQuery {
  std::vector<Clause> clauses;
  friend bool operator==(const SingleQuery&, const SingleQuery&) = default;
};

/// Branches joined by UNION ALL.
struct QueryAst {
  std::vector<SingleQuery> branches;
  friend bool operator==(const QueryAst&, const QueryAst&) = default;
};

/// Canonical Cypher text; parse(print(ast)) == ast.
std::string print(const QueryAst& ast);
std::string print(const Expr& expr);

/// Column name of an unaliased projection item (its printed expression).
std::string column_name(const ProjectionItem& item);

bool contains_aggregate(const Expr& expr);

}  // namespace hypokg::cypher
