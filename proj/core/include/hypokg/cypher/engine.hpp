#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hypokg/cypher/ast.hpp"
#include "hypokg/cypher/diagnostics.hpp"
#include "hypokg/kg/graph.hpp"

namespace hypokg::cypher {

/// Parses the supported Cypher subset. Throws CypherError carrying the
/// first lex or parse diagnostic.
QueryAst parse(std::string_view query_text);

/// Checks variable binding, aggregation placement, and UNION column
/// agreement. Returns the first problem; nullopt when the query is valid.
std::optional<Diagnostics> check(const QueryAst& ast, std::string_view query_text = {});

struct Validation {
  std::optional<Diagnostics> diagnostics;
  bool ok() const { return !diagnostics.has_value(); }
};

/// Parse + check; never executes and never throws on bad input.
Validation validate(std::string_view query_text);

/// Tabular query result. Cells are null, boolean, integer, real, string, or list.
struct ResultTable {
  std::vector<std::string> columns;
  std::vector<std::vector<Value>> rows;
  std::size_t type_mismatches = 0;  // rows dropped by ill-typed comparisons

  /// Header row plus one line per row, tab separated.
  std::string to_tsv() const;
  friend bool operator==(const ResultTable& a, const ResultTable& b) {
    return a.columns == b.columns && a.rows == b.rows;
  }
};

/// Renders a cell: strings raw, lists as ['a', 'b'], null as "null".
std::string render_cell(const Value& v);

/// Evaluates a checked query. Throws CypherError if `ast` fails check().
ResultTable execute(const QueryAst& ast, const kg::KnowledgeGraph& graph);

/// parse + execute.
ResultTable run(std::string_view query_text, const kg::KnowledgeGraph& graph);

}  // namespace hypokg::cypher
