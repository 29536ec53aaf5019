#include <cctype>
#include <sstream>

#include "hypokg/common/text.hpp"
#include "hypokg/cypher/ast.hpp"
#include "keywords.hpp"

namespace hypokg::cypher {

namespace {

// Binding strength; higher binds tighter.
int precedence(const Expr& e) {
  switch (e.kind) {
    case ExprKind::disjunction: return 1;
    case ExprKind::conjunction: return 2;
    case ExprKind::negation: return 3;
    case ExprKind::comparison:
    case ExprKind::membership:
    case ExprKind::contains: return 4;
    default: return 6;
  }
}

std::string quote_string(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    switch (c) {
      case '\'': out += "\\'"; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default: out += c;
    }
  }
  return out + "'";
}

std::string print_literal(const Value& v) {
  switch (v.kind()) {
    case ValueKind::null: return "null";
    case ValueKind::boolean: return v.as_bool() ? "true" : "false";
    case ValueKind::integer: return std::to_string(v.as_int());
    case ValueKind::real: {
      std::string s = format_real(v.as_real());
      if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
      return s;
    }
    case ValueKind::string: return quote_string(v.as_string());
    default: return "null";
  }
}

void print_expr(std::ostringstream& out, const Expr& e);

void print_operand(std::ostringstream& out, const Expr& child, int parent_prec, bool right) {
  const int p = precedence(child);
  if (p < parent_prec || (right && p == parent_prec)) {
    out << '(';
    print_expr(out, child);
    out << ')';
  } else {
    print_expr(out, child);
  }
}

void print_expr(std::ostringstream& out, const Expr& e) {
  switch (e.kind) {
    case ExprKind::literal:
      out << print_literal(e.literal);
      break;
    case ExprKind::list:
      out << '[';
      for (std::size_t i = 0; i < e.args.size(); ++i) {
        if (i) out << ", ";
        print_expr(out, e.args[i]);
      }
      out << ']';
      break;
    case ExprKind::variable:
      out << quote_identifier(e.name);
      break;
    case ExprKind::property:
      print_operand(out, e.args[0], 6, false);
      out << '.' << quote_identifier(e.name);
      break;
    case ExprKind::negation:
      out << "NOT ";
      print_operand(out, e.args[0], 3, false);
      break;
    case ExprKind::conjunction:
    case ExprKind::disjunction: {
      const int p = precedence(e);
      print_operand(out, e.args[0], p, false);
      out << (e.kind == ExprKind::conjunction ? " AND " : " OR ");
      print_operand(out, e.args[1], p, true);
      break;
    }
    case ExprKind::comparison:
    case ExprKind::membership:
    case ExprKind::contains: {
      // Comparisons do not chain; both sides need tighter operands.
      print_operand(out, e.args[0], 5, false);
      if (e.kind == ExprKind::comparison) out << ' ' << e.name << ' ';
      if (e.kind == ExprKind::membership) out << " IN ";
      if (e.kind == ExprKind::contains) out << " CONTAINS ";
      print_operand(out, e.args[1], 5, false);
      break;
    }
    case ExprKind::aggregate:
      out << (e.name == "collect" ? "COLLECT" : "COUNT") << '(';
      if (e.star) {
        out << '*';
      } else {
        if (e.distinct) out << "DISTINCT ";
        print_expr(out, e.args[0]);
      }
      out << ')';
      break;
    case ExprKind::any:
      out << "any(" << quote_identifier(e.name) << " IN ";
      print_expr(out, e.args[0]);
      out << " WHERE ";
      print_expr(out, e.args[1]);
      out << ')';
      break;
  }
}

void print_node(std::ostringstream& out, const NodePattern& n) {
  out << '(';
  if (!n.variable.empty()) out << quote_identifier(n.variable);
  if (n.label) out << ':' << quote_identifier(*n.label);
  out << ')';
}

void print_rel(std::ostringstream& out, const RelPattern& r) {
  out << (r.direction == Direction::incoming ? "<-[" : "-[");
  if (!r.variable.empty()) out << quote_identifier(r.variable);
  for (std::size_t i = 0; i < r.types.size(); ++i) {
    out << (i == 0 ? ":" : "|") << quote_identifier(r.types[i]);
  }
  out << (r.direction == Direction::outgoing ? "]->" : "]-");
}

void print_items(std::ostringstream& out, const std::vector<ProjectionItem>& items) {
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out << ", ";
    print_expr(out, items[i].expr);
    if (items[i].alias) out << " AS " << quote_identifier(*items[i].alias);
  }
}

void print_clause(std::ostringstream& out, const Clause& clause) {
  if (const auto* m = std::get_if<MatchClause>(&clause)) {
    out << (m->optional ? "OPTIONAL MATCH " : "MATCH ");
    for (std::size_t p = 0; p < m->patterns.size(); ++p) {
      if (p) out << ", ";
      const auto& path = m->patterns[p];
      print_node(out, path.nodes[0]);
      for (std::size_t i = 0; i < path.rels.size(); ++i) {
        print_rel(out, path.rels[i]);
        print_node(out, path.nodes[i + 1]);
      }
    }
    if (m->where) {
      out << "\nWHERE ";
      print_expr(out, *m->where);
    }
  } else if (const auto* w = std::get_if<WithClause>(&clause)) {
    out << (w->distinct ? "WITH DISTINCT " : "WITH ");
    print_items(out, w->items);
    if (w->where) {
      out << "\nWHERE ";
      print_expr(out, *w->where);
    }
  } else {
    const auto& r = std::get<ReturnClause>(clause);
    out << (r.distinct ? "RETURN DISTINCT " : "RETURN ");
    print_items(out, r.items);
    if (!r.order_by.empty()) {
      out << "\nORDER BY ";
      for (std::size_t i = 0; i < r.order_by.size(); ++i) {
        if (i) out << ", ";
        print_expr(out, r.order_by[i].expr);
        if (r.order_by[i].descending) out << " DESC";
      }
    }
    if (r.limit) out << "\nLIMIT " << *r.limit;
  }
}

}  // namespace

std::string print(const Expr& expr) {
  std::ostringstream out;
  print_expr(out, expr);
  return out.str();
}

std::string print(const QueryAst& ast) {
  std::ostringstream out;
  for (std::size_t b = 0; b < ast.branches.size(); ++b) {
    if (b) out << "\nUNION ALL\n";
    const auto& clauses = ast.branches[b].clauses;
    for (std::size_t c = 0; c < clauses.size(); ++c) {
      if (c) out << '\n';
      print_clause(out, clauses[c]);
    }
  }
  return out.str();
}

std::string column_name(const ProjectionItem& item) {
  return item.alias ? *item.alias : print(item.expr);
}

bool contains_aggregate(const Expr& expr) {
  if (expr.kind == ExprKind::aggregate) return true;
  for (const auto& a : expr.args) {
    if (contains_aggregate(a)) return true;
  }
  return false;
}

}  // namespace hypokg::cypher
