#include <algorithm>
#include <map>
#include <numeric>
#include <set>

#include "hypokg/common/text.hpp"
#include "hypokg/cypher/engine.hpp"

namespace hypokg::cypher {

namespace {

using Row = std::vector<Value>;

// Raised by ill-typed operations; the current row is dropped and counted.
struct TypeMismatch {};

struct Frame {
  std::vector<std::string> names;
  std::vector<Row> rows;
};

struct Env {
  const std::vector<std::string>* names = nullptr;
  const Row* row = nullptr;
  const Env* outer = nullptr;
  const std::string* local_name = nullptr;
  const Value* local_value = nullptr;

  const Value& lookup(const std::string& name) const {
    for (const Env* e = this; e; e = e->outer) {
      if (e->local_name && *e->local_name == name) return *e->local_value;
      if (e->names) {
        for (std::size_t i = 0; i < e->names->size(); ++i) {
          if ((*e->names)[i] == name) return (*e->row)[i];
        }
      }
    }
    throw Error("cypher: unbound variable '" + name + "' at runtime");
  }
};

bool comparable(const Value& a, const Value& b) {
  return (a.is_number() && b.is_number()) || a.kind() == b.kind();
}

bool equal(const Value& a, const Value& b) {
  if (!comparable(a, b)) throw TypeMismatch{};
  switch (a.kind()) {
    case ValueKind::integer:
    case ValueKind::real:
      if (a.kind() == ValueKind::integer && b.kind() == ValueKind::integer) return a.as_int() == b.as_int();
      return a.as_number() == b.as_number();
    case ValueKind::list: {
      const auto& x = a.as_list();
      const auto& y = b.as_list();
      if (x.size() != y.size()) return false;
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i].is_null() || y[i].is_null() || !equal(x[i], y[i])) return false;
      }
      return true;
    }
    default: return a == b;
  }
}

int order(const Value& a, const Value& b) {
  if (a.is_number() && b.is_number()) {
    const double x = a.as_number();
    const double y = b.as_number();
    if (a.kind() == ValueKind::integer && b.kind() == ValueKind::integer) {
      return a.as_int() < b.as_int() ? -1 : (a.as_int() > b.as_int() ? 1 : 0);
    }
    return x < y ? -1 : (x > y ? 1 : 0);
  }
  if (a.kind() != b.kind()) throw TypeMismatch{};
  if (a.kind() == ValueKind::string) {
    const int c = a.as_string().compare(b.as_string());
    return c < 0 ? -1 : (c > 0 ? 1 : 0);
  }
  if (a.kind() == ValueKind::boolean) return static_cast<int>(a.as_bool()) - static_cast<int>(b.as_bool());
  throw TypeMismatch{};
}

bool truth(const Value& v) {
  if (v.is_null()) return false;
  if (v.kind() != ValueKind::boolean) throw TypeMismatch{};
  return v.as_bool();
}

class Executor {
 public:
  explicit Executor(const kg::KnowledgeGraph& graph) : g_(graph) {}

  ResultTable run(const QueryAst& ast) {
    ResultTable table;
    for (const auto& branch : ast.branches) {
      Frame frame{{}, {Row{}}};
      for (const auto& clause : branch.clauses) {
        if (const auto* m = std::get_if<MatchClause>(&clause)) {
          frame = match(*m, frame);
        } else if (const auto* w = std::get_if<WithClause>(&clause)) {
          frame = project(w->items, w->distinct, frame, nullptr);
          if (w->where) frame = filter(frame, *w->where);
        } else {
          const auto& r = std::get<ReturnClause>(clause);
          frame = project(r.items, r.distinct, frame, &r);
        }
      }
      if (table.columns.empty()) table.columns = frame.names;
      for (auto& row : frame.rows) {
        for (auto& cell : row) cell = output(cell);
        table.rows.push_back(std::move(row));
      }
    }
    table.type_mismatches = mismatches_;
    return table;
  }

 private:
  Value eval(const Expr& e, const Env& env) const {
    switch (e.kind) {
      case ExprKind::literal: return e.literal;
      case ExprKind::list: {
        Value::List items;
        for (const auto& a : e.args) items.push_back(eval(a, env));
        return Value(std::move(items));
      }
      case ExprKind::variable: return env.lookup(e.name);
      case ExprKind::property: return property(eval(e.args[0], env), e.name);
      case ExprKind::negation: return Value(!truth(eval(e.args[0], env)));
      case ExprKind::conjunction:
        // Both sides are evaluated so a type error surfaces regardless of order.
        {
          const bool l = truth(eval(e.args[0], env));
          const bool r = truth(eval(e.args[1], env));
          return Value(l && r);
        }
      case ExprKind::disjunction: {
        const bool l = truth(eval(e.args[0], env));
        const bool r = truth(eval(e.args[1], env));
        return Value(l || r);
      }
      case ExprKind::comparison: {
        const Value a = eval(e.args[0], env);
        const Value b = eval(e.args[1], env);
        if (a.is_null() || b.is_null()) return Value(false);
        if (e.name == "=") return Value(equal(a, b));
        if (e.name == "<>") return Value(!equal(a, b));
        const int c = order(a, b);
        if (e.name == "<") return Value(c < 0);
        if (e.name == ">") return Value(c > 0);
        if (e.name == "<=") return Value(c <= 0);
        return Value(c >= 0);
      }
      case ExprKind::membership: {
        const Value a = eval(e.args[0], env);
        const Value list = eval(e.args[1], env);
        if (list.is_null()) return Value(false);
        if (list.kind() != ValueKind::list) throw TypeMismatch{};
        if (a.is_null()) return Value(false);
        for (const auto& item : list.as_list()) {
          if (item.is_null() || !comparable(a, item)) continue;
          if (equal(a, item)) return Value(true);
        }
        return Value(false);
      }
      case ExprKind::contains: {
        const Value a = eval(e.args[0], env);
        const Value b = eval(e.args[1], env);
        if (a.is_null() || b.is_null()) return Value(false);
        if (a.kind() != ValueKind::string || b.kind() != ValueKind::string) throw TypeMismatch{};
        return Value(a.as_string().find(b.as_string()) != std::string::npos);
      }
      case ExprKind::any: {
        const Value list = eval(e.args[0], env);
        if (list.is_null()) return Value(false);
        if (list.kind() != ValueKind::list) throw TypeMismatch{};
        for (const auto& item : list.as_list()) {
          Env local{nullptr, nullptr, &env, &e.name, &item};
          if (truth(eval(e.args[1], local))) return Value(true);
        }
        return Value(false);
      }
      case ExprKind::aggregate: break;
    }
    throw Error("cypher: aggregate evaluated outside a projection");
  }

  Value property(const Value& base, const std::string& key) const {
    if (base.is_null()) return {};
    if (base.kind() == ValueKind::node) {
      const auto n = base.as_node().index;
      const auto& id = g_.node(n);
      if (key == "name") return Value(id.str());
      if (key == "namespace") return Value(id.ns);
      if (key == "id") return Value(id.local);
      if (key == "description") {
        const auto& text = g_.node_text(n);
        return text.empty() ? Value() : Value(text);
      }
      return {};
    }
    if (base.kind() == ValueKind::edge) {
      const auto& edge = g_.edge(base.as_edge().index);
      if (key == "type" || key == "relation") return Value(edge.relation);
      if (key == "weight") return edge.weight ? Value(*edge.weight) : Value();
      if (key == "provenance") return Value(std::string(kg::to_string(edge.provenance)));
      return {};
    }
    throw TypeMismatch{};
  }

  Value output(const Value& v) const {
    switch (v.kind()) {
      case ValueKind::node: return Value(g_.node(v.as_node().index).str());
      case ValueKind::edge: {
        const auto e = v.as_edge().index;
        const auto& edge = g_.edge(e);
        return Value("(" + edge.head.str() + ")-[:" + edge.relation + "]->(" + edge.tail.str() + ")");
      }
      case ValueKind::list: {
        Value::List items;
        for (const auto& item : v.as_list()) items.push_back(output(item));
        return Value(std::move(items));
      }
      default: return v;
    }
  }

  // Returns true when the predicate holds; counts and rejects ill-typed rows.
  bool accept(const Expr& predicate, const Env& env) {
    try {
      return truth(eval(predicate, env));
    } catch (const TypeMismatch&) {
      ++mismatches_;
      return false;
    }
  }

  Frame filter(const Frame& in, const Expr& predicate) {
    Frame out{in.names, {}};
    for (const auto& row : in.rows) {
      Env env{&out.names, &row};
      if (accept(predicate, env)) out.rows.push_back(row);
    }
    return out;
  }

  // ---- pattern matching ----

  struct MatchState {
    const MatchClause* clause = nullptr;
    std::vector<PathPattern> paths;  // oriented for evaluation
    std::vector<std::string> names;
    Row row;
    std::vector<bool> assigned;
    std::vector<kg::EdgeIndex> used;
    std::size_t emitted = 0;
    std::vector<Row>* sink = nullptr;
  };

  static std::size_t slot(const std::vector<std::string>& names, const std::string& var) {
    return static_cast<std::size_t>(std::find(names.begin(), names.end(), var) - names.begin());
  }

  Frame match(const MatchClause& m, const Frame& in) {
    MatchState st;
    st.clause = &m;
    st.names = in.names;
    std::set<std::string> bound(in.names.begin(), in.names.end());
    for (const auto& p : m.patterns) {
      PathPattern path = p;
      const auto& first = path.nodes.front();
      const auto& last = path.nodes.back();
      const bool first_bound = !first.variable.empty() && bound.count(first.variable);
      const bool last_bound = !last.variable.empty() && bound.count(last.variable);
      if (!first_bound && (last_bound || (!first.label && last.label))) {
        std::reverse(path.nodes.begin(), path.nodes.end());
        std::reverse(path.rels.begin(), path.rels.end());
        for (auto& r : path.rels) {
          if (r.direction == Direction::outgoing) {
            r.direction = Direction::incoming;
          } else if (r.direction == Direction::incoming) {
            r.direction = Direction::outgoing;
          }
        }
      }
      for (const auto& n : p.nodes) {
        if (!n.variable.empty() && bound.insert(n.variable).second) st.names.push_back(n.variable);
      }
      for (const auto& r : p.rels) {
        if (!r.variable.empty() && bound.insert(r.variable).second) st.names.push_back(r.variable);
      }
      st.paths.push_back(std::move(path));
    }

    Frame out{st.names, {}};
    st.sink = &out.rows;
    for (const auto& row : in.rows) {
      st.row = row;
      st.row.resize(st.names.size());
      st.assigned.assign(st.names.size(), false);
      std::fill(st.assigned.begin(), st.assigned.begin() + static_cast<std::ptrdiff_t>(row.size()), true);
      st.used.clear();
      st.emitted = 0;
      match_path(st, 0);
      if (st.emitted == 0 && m.optional) {
        Row padded = row;
        padded.resize(st.names.size());
        out.rows.push_back(std::move(padded));
      }
    }
    return out;
  }

  void match_path(MatchState& st, std::size_t p) {
    if (p == st.paths.size()) {
      if (st.clause->where) {
        Env env{&st.names, &st.row};
        if (!accept(*st.clause->where, env)) return;
      }
      st.sink->push_back(st.row);
      ++st.emitted;
      return;
    }
    const auto& first = st.paths[p].nodes.front();
    if (!first.variable.empty()) {
      const std::size_t s = slot(st.names, first.variable);
      if (st.assigned[s]) {
        const Value& v = st.row[s];
        if (v.kind() == ValueKind::node) try_node(st, p, 0, v.as_node().index);
        return;
      }
    }
    if (first.label) {
      for (auto n : g_.nodes_in_namespace(*first.label)) try_node(st, p, 0, n);
    } else {
      for (kg::NodeIndex n = 0; n < g_.node_count(); ++n) try_node(st, p, 0, n);
    }
  }

  // Binds node `i` of path `p` to graph node `n` and continues.
  void try_node(MatchState& st, std::size_t p, std::size_t i, kg::NodeIndex n) {
    const auto& pat = st.paths[p].nodes[i];
    if (pat.label && g_.node(n).ns != *pat.label) return;
    std::size_t s = st.names.size();
    bool newly = false;
    if (!pat.variable.empty()) {
      s = slot(st.names, pat.variable);
      if (st.assigned[s]) {
        const Value& v = st.row[s];
        if (v.kind() != ValueKind::node || v.as_node().index != n) return;
      } else {
        st.row[s] = Value(NodeRef{n});
        st.assigned[s] = true;
        newly = true;
      }
    }
    if (i + 1 == st.paths[p].nodes.size()) {
      match_path(st, p + 1);
    } else {
      step(st, p, i, n);
    }
    if (newly) {
      st.assigned[s] = false;
      st.row[s] = Value();
    }
  }

  void step(MatchState& st, std::size_t p, std::size_t i, kg::NodeIndex from) {
    const auto& rel = st.paths[p].rels[i];
    for (auto e : g_.incident(from)) {
      if (std::find(st.used.begin(), st.used.end(), e) != st.used.end()) continue;
      const auto& edge = g_.edge(e);
      if (!rel.types.empty() &&
          std::find(rel.types.begin(), rel.types.end(), edge.relation) == rel.types.end()) {
        continue;
      }
      const auto head = g_.edge_head(e);
      const auto tail = g_.edge_tail(e);
      kg::NodeIndex to;
      if (rel.direction == Direction::outgoing) {
        if (head != from) continue;
        to = tail;
      } else if (rel.direction == Direction::incoming) {
        if (tail != from) continue;
        to = head;
      } else {
        to = head == from ? tail : head;
      }
      std::size_t s = st.names.size();
      if (!rel.variable.empty()) {
        s = slot(st.names, rel.variable);
        st.row[s] = Value(EdgeRef{e});
        st.assigned[s] = true;
      }
      st.used.push_back(e);
      try_node(st, p, i + 1, to);
      st.used.pop_back();
      if (s < st.names.size()) {
        st.assigned[s] = false;
        st.row[s] = Value();
      }
    }
  }

  // ---- projection ----

  struct ValueLess {
    bool operator()(const Value& a, const Value& b) const { return total_less(a, b); }
  };

  struct Accumulator {
    std::int64_t count = 0;
    Value::List items;
    std::set<Value, ValueLess> seen;
  };

  static void accumulate(Accumulator& acc, const Expr& agg, const Value& v) {
    if (agg.star) {
      ++acc.count;
      return;
    }
    if (v.is_null()) return;
    if (agg.distinct) {
      if (!acc.seen.insert(v).second) return;
    }
    ++acc.count;
    if (agg.name == "collect" && !agg.distinct) acc.items.push_back(v);
  }

  static Value finish(const Accumulator& acc, const Expr& agg) {
    if (agg.name == "count") return Value(acc.count);
    if (agg.distinct) return Value(Value::List(acc.seen.begin(), acc.seen.end()));
    return Value(acc.items);
  }

  struct Projected {
    Row row;
    std::size_t source = 0;  // index of the (first) input row
  };

  Frame project(const std::vector<ProjectionItem>& items, bool distinct, const Frame& in,
                const ReturnClause* ret) {
    Frame out;
    for (const auto& item : items) out.names.push_back(column_name(item));
    bool aggregating = false;
    for (const auto& item : items) aggregating = aggregating || item.expr.kind == ExprKind::aggregate;

    std::vector<Projected> projected;
    if (!aggregating) {
      for (std::size_t r = 0; r < in.rows.size(); ++r) {
        Env env{&in.names, &in.rows[r]};
        try {
          Row row;
          for (const auto& item : items) row.push_back(eval(item.expr, env));
          projected.push_back({std::move(row), r});
        } catch (const TypeMismatch&) {
          ++mismatches_;
        }
      }
    } else {
      aggregate(items, in, projected);
    }

    if (distinct) {
      std::vector<Projected> unique;
      std::set<Row, RowLess> seen;
      for (auto& p : projected) {
        if (seen.insert(p.row).second) unique.push_back(std::move(p));
      }
      projected = std::move(unique);
    }

    if (ret) {
      if (!ret->order_by.empty()) sort(*ret, items, aggregating || distinct, in, out.names, projected);
      if (ret->limit && projected.size() > static_cast<std::size_t>(*ret->limit)) {
        projected.resize(static_cast<std::size_t>(*ret->limit));
      }
    }
    for (auto& p : projected) out.rows.push_back(std::move(p.row));
    return out;
  }

  struct RowLess {
    bool operator()(const Row& a, const Row& b) const {
      return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(), total_less);
    }
  };

  void aggregate(const std::vector<ProjectionItem>& items, const Frame& in, std::vector<Projected>& out) {
    std::map<Row, std::size_t, RowLess> index;
    struct Group {
      Row keys;
      std::vector<Accumulator> accs;
      std::size_t source;
    };
    std::vector<Group> groups;
    std::size_t agg_count = 0;
    for (const auto& item : items) agg_count += item.expr.kind == ExprKind::aggregate ? 1 : 0;

    for (std::size_t r = 0; r < in.rows.size(); ++r) {
      Env env{&in.names, &in.rows[r]};
      Row keys;
      Row args;
      try {
        for (const auto& item : items) {
          if (item.expr.kind != ExprKind::aggregate) {
            keys.push_back(eval(item.expr, env));
          } else {
            args.push_back(item.expr.star ? Value() : eval(item.expr.args[0], env));
          }
        }
      } catch (const TypeMismatch&) {
        ++mismatches_;
        continue;
      }
      auto [it, fresh] = index.emplace(keys, groups.size());
      if (fresh) groups.push_back({keys, std::vector<Accumulator>(agg_count), r});
      Group& g = groups[it->second];
      std::size_t a = 0;
      for (const auto& item : items) {
        if (item.expr.kind == ExprKind::aggregate) {
          accumulate(g.accs[a], item.expr, args[a]);
          ++a;
        }
      }
    }
    if (groups.empty() && agg_count == items.size()) {
      groups.push_back({{}, std::vector<Accumulator>(agg_count), 0});
    }
    for (const auto& g : groups) {
      Row row;
      std::size_t k = 0;
      std::size_t a = 0;
      for (const auto& item : items) {
        if (item.expr.kind == ExprKind::aggregate) {
          row.push_back(finish(g.accs[a++], item.expr));
        } else {
          row.push_back(g.keys[k++]);
        }
      }
      out.push_back({std::move(row), g.source});
    }
  }

  void sort(const ReturnClause& ret, const std::vector<ProjectionItem>& items, bool projected_only,
            const Frame& in, const std::vector<std::string>& names, std::vector<Projected>& rows) {
    std::vector<std::string> printed_items;
    for (const auto& item : items) printed_items.push_back(print(item.expr));

    struct Keyed {
      Row keys;
      Projected row;
    };
    std::vector<Keyed> keyed;
    for (auto& p : rows) {
      Env prior{&in.names, in.rows.empty() ? nullptr : &in.rows[p.source]};
      Env env{&names, &p.row, projected_only || in.rows.empty() ? nullptr : &prior};
      try {
        Row keys;
        for (const auto& s : ret.order_by) {
          std::optional<Value> v;
          if (projected_only) {
            const std::string printed = print(s.expr);
            for (std::size_t i = 0; i < items.size() && !v; ++i) {
              if (printed_items[i] == printed) v = p.row[i];
            }
          }
          keys.push_back(v ? *v : eval(s.expr, env));
        }
        keyed.push_back({std::move(keys), std::move(p)});
      } catch (const TypeMismatch&) {
        ++mismatches_;
      }
    }
    std::stable_sort(keyed.begin(), keyed.end(), [&](const Keyed& a, const Keyed& b) {
      for (std::size_t i = 0; i < a.keys.size(); ++i) {
        auto c = total_order(a.keys[i], b.keys[i]);
        if (c != 0) return ret.order_by[i].descending ? c > 0 : c < 0;
      }
      return RowLess{}(a.row.row, b.row.row);
    });
    rows.clear();
    for (auto& k : keyed) rows.push_back(std::move(k.row));
  }

  const kg::KnowledgeGraph& g_;
  std::size_t mismatches_ = 0;
};

std::string escape_tsv(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\\': out += "\\\\"; break;
      default: out += c;
    }
  }
  return out;
}

std::string render_in_list(const Value& v) {
  if (v.kind() != ValueKind::string) return render_cell(v);
  std::string out = "'";
  for (char c : v.as_string()) {
    if (c == '\'' || c == '\\') out += '\\';
    out += c;
  }
  return out + "'";
}

}  // namespace

std::string render_cell(const Value& v) {
  switch (v.kind()) {
    case ValueKind::null: return "null";
    case ValueKind::boolean: return v.as_bool() ? "true" : "false";
    case ValueKind::integer: return std::to_string(v.as_int());
    case ValueKind::real: return format_real(v.as_real());
    case ValueKind::string: return v.as_string();
    case ValueKind::list: {
      std::string out = "[";
      for (std::size_t i = 0; i < v.as_list().size(); ++i) {
        if (i) out += ", ";
        out += render_in_list(v.as_list()[i]);
      }
      return out + "]";
    }
    case ValueKind::node: return "node#" + std::to_string(v.as_node().index);
    case ValueKind::edge: return "edge#" + std::to_string(v.as_edge().index);
  }
  return "null";
}

std::string ResultTable::to_tsv() const {
  std::string out;
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (i) out += '\t';
    out += escape_tsv(columns[i]);
  }
  out += '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += '\t';
      out += escape_tsv(render_cell(row[i]));
    }
    out += '\n';
  }
  return out;
}

ResultTable execute(const QueryAst& ast, const kg::KnowledgeGraph& graph) {
  if (auto d = check(ast)) throw CypherError(*d);
  return Executor(graph).run(ast);
}

ResultTable run(std::string_view query_text, const kg::KnowledgeGraph& graph) {
  QueryAst ast = parse(query_text);
  if (auto d = check(ast, query_text)) throw CypherError(*d);
  return Executor(graph).run(ast);
}

}  // namespace hypokg::cypher
