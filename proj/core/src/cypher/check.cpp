#include <map>
#include <set>

#include "hypokg/cypher/engine.hpp"
#include "keywords.hpp"

namespace hypokg::cypher {

namespace {

enum class VarKind { node, edge, value };

using Scope = std::map<std::string, VarKind>;

struct CheckFailure {
  Diagnostics diagnostics;
};

class Checker {
 public:
  explicit Checker(std::string_view text) : text_(text) {}

  void query(const QueryAst& ast) {
    std::vector<std::string> first_columns;
    for (std::size_t b = 0; b < ast.branches.size(); ++b) {
      const auto columns = branch(ast.branches[b]);
      if (b == 0) {
        first_columns = columns;
      } else if (columns != first_columns) {
        const auto& ret = std::get<ReturnClause>(ast.branches[b].clauses.back());
        fail(DiagnosticKind::bind, ret.offset,
             "all UNION ALL branches must return the same column names");
      }
    }
  }

 private:
  [[noreturn]] void fail(DiagnosticKind kind, std::size_t offset, std::string message,
                         std::optional<std::string> suggestion = {}) const {
    throw CheckFailure{make_diagnostic(kind, text_, offset, std::move(message), std::move(suggestion))};
  }

  std::vector<std::string> branch(const SingleQuery& q) {
    Scope scope;
    for (std::size_t i = 0; i < q.clauses.size(); ++i) {
      const auto& clause = q.clauses[i];
      if (const auto* m = std::get_if<MatchClause>(&clause)) {
        match(*m, scope);
      } else if (const auto* w = std::get_if<WithClause>(&clause)) {
        scope = with(*w, scope);
      } else {
        if (i + 1 != q.clauses.size()) {
          fail(DiagnosticKind::parse, std::get<ReturnClause>(clause).offset, "RETURN must be the last clause");
        }
        return ret(std::get<ReturnClause>(clause), scope);
      }
    }
    fail(DiagnosticKind::parse, text_.size(), "query must end with RETURN");
  }

  void bind_node(const NodePattern& n, Scope& scope) {
    if (n.variable.empty()) return;
    auto it = scope.find(n.variable);
    if (it == scope.end()) {
      scope.emplace(n.variable, VarKind::node);
    } else if (it->second != VarKind::node) {
      fail(DiagnosticKind::type, n.offset, "variable '" + n.variable + "' is not a node");
    }
  }

  void match(const MatchClause& m, Scope& scope) {
    for (const auto& path : m.patterns) {
      for (const auto& n : path.nodes) bind_node(n, scope);
      for (const auto& r : path.rels) {
        if (r.variable.empty()) continue;
        if (scope.count(r.variable)) {
          fail(DiagnosticKind::bind, r.offset,
               "relationship variable '" + r.variable + "' is already bound");
        }
        scope.emplace(r.variable, VarKind::edge);
      }
    }
    if (m.where) expr(*m.where, scope, {}, false);
  }

  std::vector<std::string> items(const std::vector<ProjectionItem>& list, const Scope& scope,
                                 bool require_alias) {
    std::vector<std::string> names;
    for (const auto& item : list) {
      if (item.expr.kind == ExprKind::aggregate) {
        for (const auto& a : item.expr.args) expr(a, scope, {}, true);
      } else {
        expr(item.expr, scope, {}, false);
      }
      if (require_alias && !item.alias && item.expr.kind != ExprKind::variable) {
        fail(DiagnosticKind::bind, item.expr.offset,
             "expression '" + print(item.expr) + "' in WITH must be aliased with AS");
      }
      std::string name = column_name(item);
      for (const auto& existing : names) {
        if (existing == name) {
          fail(DiagnosticKind::bind, item.expr.offset, "duplicate column name '" + name + "'");
        }
      }
      names.push_back(std::move(name));
    }
    return names;
  }

  Scope projected_scope(const std::vector<ProjectionItem>& list, const Scope& scope) {
    Scope out;
    for (const auto& item : list) {
      VarKind kind = VarKind::value;
      if (item.expr.kind == ExprKind::variable) kind = scope.at(item.expr.name);
      out.emplace(column_name(item), kind);
    }
    return out;
  }

  Scope with(const WithClause& w, const Scope& scope) {
    items(w.items, scope, true);
    Scope out = projected_scope(w.items, scope);
    if (w.where) expr(*w.where, out, {}, false);
    return out;
  }

  std::vector<std::string> ret(const ReturnClause& r, const Scope& scope) {
    auto names = items(r.items, scope, false);
    bool aggregating = r.distinct;
    for (const auto& item : r.items) aggregating = aggregating || contains_aggregate(item.expr);
    Scope sort_scope = projected_scope(r.items, scope);
    if (!aggregating) {
      for (const auto& [name, kind] : scope) sort_scope.emplace(name, kind);
    }
    for (const auto& s : r.order_by) {
      bool matches_item = false;
      if (aggregating) {
        const std::string printed = print(s.expr);
        for (const auto& item : r.items) matches_item = matches_item || print(item.expr) == printed;
      }
      if (!matches_item) expr(s.expr, sort_scope, {}, false);
    }
    return names;
  }

  std::optional<std::string> suggest(const std::string& name, const Scope& scope,
                                     const std::vector<std::string>& locals) const {
    std::optional<std::string> best;
    std::size_t best_d = std::max<std::size_t>(2, name.size() / 3) + 1;
    auto consider = [&](const std::string& candidate) {
      const std::size_t d = edit_distance(name, candidate);
      if (d < best_d) {
        best_d = d;
        best = candidate;
      }
    };
    for (const auto& [candidate, kind] : scope) consider(candidate);
    for (const auto& candidate : locals) consider(candidate);
    return best;
  }

  void expr(const Expr& e, const Scope& scope, std::vector<std::string> locals, bool inside_aggregate) {
    switch (e.kind) {
      case ExprKind::variable: {
        for (const auto& l : locals) {
          if (l == e.name) return;
        }
        if (!scope.count(e.name)) {
          fail(DiagnosticKind::bind, e.offset, "variable '" + e.name + "' is not defined",
               suggest(e.name, scope, locals));
        }
        return;
      }
      case ExprKind::aggregate:
        fail(DiagnosticKind::type, e.offset,
             inside_aggregate ? "aggregate functions cannot be nested"
                              : "aggregate functions are only allowed as top-level RETURN or WITH items");
      case ExprKind::any:
        expr(e.args[0], scope, locals, inside_aggregate);
        locals.push_back(e.name);
        expr(e.args[1], scope, locals, inside_aggregate);
        return;
      default:
        for (const auto& a : e.args) expr(a, scope, locals, inside_aggregate);
    }
  }

  std::string_view text_;
};

}  // namespace

std::optional<Diagnostics> check(const QueryAst& ast, std::string_view query_text) {
  try {
    Checker(query_text).query(ast);
  } catch (const CheckFailure& f) {
    return f.diagnostics;
  }
  return std::nullopt;
}

Validation validate(std::string_view query_text) {
  try {
    return {check(parse(query_text), query_text)};
  } catch (const CypherError& e) {
    return {e.diagnostics()};
  }
}

}  // namespace hypokg::cypher
