#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "hypokg/common/error.hpp"

namespace hypokg::cypher {

enum class DiagnosticKind { lex, parse, bind, type };

std::string_view to_string(DiagnosticKind kind);

struct Diagnostics {
  DiagnosticKind kind = DiagnosticKind::parse;
  std::size_t offset = 0;  // byte offset, <= query length
  std::size_t line = 1;
  std::size_t column = 1;
  std::string message;
  std::optional<std::string> suggestion;

  /// "parse error at 1:10: expected ')' ... (did you mean ...?)"
  std::string to_string() const;
};

/// Builds a diagnostic, deriving line/column from `offset` within `text`.
Diagnostics make_diagnostic(DiagnosticKind kind, std::string_view text, std::size_t offset,
                            std::string message, std::optional<std::string> suggestion = {});

class CypherError : public Error {
 public:
  explicit CypherError(Diagnostics d) : Error(d.to_string()), diagnostics_(std::move(d)) {}
  const Diagnostics& diagnostics() const { return diagnostics_; }

 private:
  Diagnostics diagnostics_;
};

}  // namespace hypokg::cypher
