#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>

#include "hypokg/common/text.hpp"
#include "hypokg/cypher/engine.hpp"
#include "keywords.hpp"

namespace hypokg::cypher {

std::string_view to_string(DiagnosticKind kind) {
  switch (kind) {
    case DiagnosticKind::lex: return "lex";
    case DiagnosticKind::parse: return "parse";
    case DiagnosticKind::bind: return "bind";
    case DiagnosticKind::type: return "type";
  }
  return "parse";
}

std::string Diagnostics::to_string() const {
  std::string out = std::string(cypher::to_string(kind)) + " error at " + std::to_string(line) +
                    ":" + std::to_string(column) + ": " + message;
  if (suggestion) out += " (did you mean '" + *suggestion + "'?)";
  return out;
}

Diagnostics make_diagnostic(DiagnosticKind kind, std::string_view text, std::size_t offset,
                            std::string message, std::optional<std::string> suggestion) {
  Diagnostics d;
  d.kind = kind;
  d.offset = std::min(offset, text.size());
  for (std::size_t i = 0; i < d.offset; ++i) {
    if (text[i] == '\n') {
      ++d.line;
      d.column = 1;
    } else {
      ++d.column;
    }
  }
  d.message = std::move(message);
  d.suggestion = std::move(suggestion);
  return d;
}

namespace {

Expr make_expr(ExprKind kind) {
  Expr e;
  e.kind = kind;
  return e;
}

enum class Tok { ident, quoted_ident, string, integer, real, symbol, end };

struct Token {
  Tok kind = Tok::end;
  std::string text;  // identifier name, unescaped string, number text, or symbol
  std::size_t offset = 0;
};

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skip_space();
      if (pos_ >= text_.size()) {
        out.push_back({Tok::end, "", text_.size()});
        return out;
      }
      out.push_back(next());
    }
  }

 private:
  [[noreturn]] void fail(std::size_t offset, std::string message) const {
    throw CypherError(make_diagnostic(DiagnosticKind::lex, text_, offset, std::move(message)));
  }

  void skip_space() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else if (c == '/' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '/') {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else {
        return;
      }
    }
  }

  Token next() {
    const std::size_t start = pos_;
    const char c = text_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
        ++pos_;
      }
      return {Tok::ident, std::string(text_.substr(start, pos_ - start)), start};
    }
    if (std::isdigit(static_cast<unsigned char>(c))) return number(start);
    if (c == '`') return backticked(start);
    if (c == '\'' || c == '"') return string(start, c);
    for (std::string_view two : {"<>", "<=", ">="}) {
      if (text_.substr(pos_, 2) == two) {
        pos_ += 2;
        return {Tok::symbol, std::string(two), start};
      }
    }
    if (std::string_view("()[]{},.:|;*=<>-+").find(c) != std::string_view::npos) {
      ++pos_;
      return {Tok::symbol, std::string(1, c), start};
    }
    fail(start, "unexpected character '" + std::string(1, c) + "'");
  }

  Token number(std::size_t start) {
    bool real = false;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (pos_ + 1 < text_.size() && text_[pos_] == '.' &&
        std::isdigit(static_cast<unsigned char>(text_[pos_ + 1]))) {
      real = true;
      ++pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      if (p < text_.size() && (text_[p] == '+' || text_[p] == '-')) ++p;
      if (p < text_.size() && std::isdigit(static_cast<unsigned char>(text_[p]))) {
        real = true;
        pos_ = p;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      }
    }
    if (pos_ < text_.size() &&
        (std::isalpha(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      fail(start, "malformed number");
    }
    std::string t(text_.substr(start, pos_ - start));
    if (real) {
      double v = 0;
      if (!parse_real(t, v) || !std::isfinite(v)) fail(start, "number out of range");
    }
    return {real ? Tok::real : Tok::integer, std::move(t), start};
  }

  Token backticked(std::size_t start) {
    std::string name;
    ++pos_;
    while (true) {
      if (pos_ >= text_.size()) fail(start, "unterminated quoted identifier");
      if (text_[pos_] == '`') {
        if (pos_ + 1 < text_.size() && text_[pos_ + 1] == '`') {
          name += '`';
          pos_ += 2;
          continue;
        }
        ++pos_;
        break;
      }
      name += text_[pos_++];
    }
    if (name.empty()) fail(start, "empty quoted identifier");
    return {Tok::quoted_ident, std::move(name), start};
  }

  Token string(std::size_t start, char quote) {
    std::string value;
    ++pos_;
    while (true) {
      if (pos_ >= text_.size()) fail(start, "unterminated string literal");
      const char c = text_[pos_++];
      if (c == quote) break;
      if (c != '\\') {
        value += c;
        continue;
      }
      if (pos_ >= text_.size()) fail(start, "unterminated string literal");
      const char e = text_[pos_++];
      switch (e) {
        case '\'': value += '\''; break;
        case '"': value += '"'; break;
        case '\\': value += '\\'; break;
        case 'n': value += '\n'; break;
        case 't': value += '\t'; break;
        case 'r': value += '\r'; break;
        default: fail(pos_ - 2, "unknown escape sequence '\\" + std::string(1, e) + "'");
      }
    }
    return {Tok::string, std::move(value), start};
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

class Parser {
 public:
  Parser(std::string_view text, std::vector<Token> tokens)
      : text_(text), tokens_(std::move(tokens)) {}

  QueryAst query() {
    if (peek().kind == Tok::end) fail(0, "empty query");
    QueryAst ast;
    ast.branches.push_back(single());
    while (keyword("union")) {
      advance();
      if (!keyword("all")) fail(peek().offset, "only UNION ALL is supported");
      advance();
      ast.branches.push_back(single());
    }
    if (symbol(";")) advance();
    if (peek().kind != Tok::end) fail(peek().offset, "unexpected " + describe(peek()) + " after RETURN");
    return ast;
  }

 private:
  [[noreturn]] void fail(std::size_t offset, std::string message) const {
    throw CypherError(make_diagnostic(DiagnosticKind::parse, text_, offset, std::move(message)));
  }

  const Token& peek(std::size_t ahead = 0) const {
    return tokens_[std::min(pos_ + ahead, tokens_.size() - 1)];
  }
  const Token& advance() {
    const Token& t = tokens_[pos_];
    if (pos_ + 1 < tokens_.size()) ++pos_;
    return t;
  }

  bool keyword(std::string_view kw, std::size_t ahead = 0) const {
    const Token& t = peek(ahead);
    return t.kind == Tok::ident && to_lower_ascii(t.text) == kw;
  }
  bool symbol(std::string_view s, std::size_t ahead = 0) const {
    const Token& t = peek(ahead);
    return t.kind == Tok::symbol && t.text == s;
  }

  static std::string describe(const Token& t) {
    switch (t.kind) {
      case Tok::end: return "end of input";
      case Tok::string: return "string literal";
      case Tok::integer:
      case Tok::real: return "number '" + t.text + "'";
      case Tok::quoted_ident: return "'`" + t.text + "`'";
      default: return "'" + t.text + "'";
    }
  }

  void expect_symbol(std::string_view s) {
    if (!symbol(s)) fail(peek().offset, "expected '" + std::string(s) + "' but found " + describe(peek()));
    advance();
  }
  void expect_keyword(std::string_view kw) {
    if (!keyword(kw)) {
      fail(peek().offset, "expected " + to_lower_ascii(kw) + " but found " + describe(peek()));
    }
    advance();
  }

  bool at_identifier() const {
    const Token& t = peek();
    return t.kind == Tok::quoted_ident || (t.kind == Tok::ident && !is_keyword(t.text));
  }
  std::string identifier(std::string_view what) {
    if (!at_identifier()) fail(peek().offset, "expected " + std::string(what) + " but found " + describe(peek()));
    return advance().text;
  }

  SingleQuery single() {
    SingleQuery q;
    while (true) {
      const Token& t = peek();
      if (keyword("match") || (keyword("optional") && keyword("match", 1))) {
        q.clauses.emplace_back(match());
      } else if (keyword("optional")) {
        advance();
        fail(peek().offset, "expected MATCH after OPTIONAL but found " + describe(peek()));
      } else if (keyword("with")) {
        q.clauses.emplace_back(with());
      } else if (keyword("return")) {
        q.clauses.emplace_back(ret());
        return q;
      } else if (t.kind == Tok::end) {
        fail(t.offset, q.clauses.empty() ? "empty query" : "query must end with RETURN");
      } else if (t.kind == Tok::ident && is_keyword(t.text)) {
        fail(t.offset, "unsupported clause '" + t.text + "'");
      } else {
        fail(t.offset, "expected a clause but found " + describe(t));
      }
    }
  }

  MatchClause match() {
    MatchClause m;
    m.offset = peek().offset;
    if (keyword("optional")) {
      m.optional = true;
      advance();
    }
    expect_keyword("match");
    m.patterns.push_back(path());
    while (symbol(",")) {
      advance();
      m.patterns.push_back(path());
    }
    if (keyword("where")) {
      advance();
      m.where = expression();
    }
    return m;
  }

  PathPattern path() {
    PathPattern p;
    p.nodes.push_back(node());
    while (symbol("-") || symbol("<")) {
      p.rels.push_back(rel());
      p.nodes.push_back(node());
    }
    return p;
  }

  NodePattern node() {
    NodePattern n;
    n.offset = peek().offset;
    expect_symbol("(");
    if (at_identifier()) n.variable = advance().text;
    if (symbol(":")) {
      advance();
      n.label = identifier("a label");
    }
    expect_symbol(")");
    return n;
  }

  RelPattern rel() {
    RelPattern r;
    r.offset = peek().offset;
    bool incoming = false;
    if (symbol("<")) {
      incoming = true;
      advance();
    }
    expect_symbol("-");
    if (symbol("[")) {
      advance();
      if (at_identifier()) r.variable = advance().text;
      if (symbol(":")) {
        advance();
        r.types.push_back(identifier("a relationship type"));
        while (symbol("|")) {
          advance();
          if (symbol(":")) advance();
          r.types.push_back(identifier("a relationship type"));
        }
      }
      expect_symbol("]");
    }
    expect_symbol("-");
    bool outgoing = false;
    if (symbol(">")) {
      outgoing = true;
      if (incoming) fail(peek().offset, "a relationship cannot point both ways");
      advance();
    }
    r.direction = incoming ? Direction::incoming : (outgoing ? Direction::outgoing : Direction::either);
    return r;
  }

  std::vector<ProjectionItem> items() {
    std::vector<ProjectionItem> out;
    do {
      if (!out.empty()) advance();
      if (symbol("*")) fail(peek().offset, "'*' projection is not supported");
      ProjectionItem item;
      item.expr = expression();
      if (keyword("as")) {
        advance();
        item.alias = identifier("an alias");
      }
      out.push_back(std::move(item));
    } while (symbol(","));
    return out;
  }

  WithClause with() {
    WithClause w;
    w.offset = peek().offset;
    expect_keyword("with");
    if (keyword("distinct")) {
      w.distinct = true;
      advance();
    }
    w.items = items();
    if (keyword("where")) {
      advance();
      w.where = expression();
    }
    if (keyword("order") || keyword("skip") || keyword("limit")) {
      fail(peek().offset, "'" + peek().text + "' after WITH is not supported");
    }
    return w;
  }

  ReturnClause ret() {
    ReturnClause r;
    r.offset = peek().offset;
    expect_keyword("return");
    if (keyword("distinct")) {
      r.distinct = true;
      advance();
    }
    r.items = items();
    if (keyword("order")) {
      advance();
      expect_keyword("by");
      do {
        if (!r.order_by.empty()) advance();
        SortItem s;
        s.expr = expression();
        if (keyword("desc") || keyword("descending")) {
          s.descending = true;
          advance();
        } else if (keyword("asc") || keyword("ascending")) {
          advance();
        }
        r.order_by.push_back(std::move(s));
      } while (symbol(","));
    }
    if (keyword("skip")) fail(peek().offset, "SKIP is not supported");
    if (keyword("limit")) {
      advance();
      const Token& t = peek();
      std::int64_t v = 0;
      if (t.kind != Tok::integer ||
          std::from_chars(t.text.data(), t.text.data() + t.text.size(), v).ec != std::errc()) {
        fail(t.offset, "LIMIT expects a non-negative integer");
      }
      advance();
      r.limit = v;
    }
    return r;
  }

  // Precedence climbing: OR < AND < NOT < comparison < postfix.
  Expr expression() {
    Expr lhs = conjunction();
    while (keyword("or")) {
      const std::size_t at = advance().offset;
      Expr e = make_expr(ExprKind::disjunction);
      e.offset = at;
      e.args.push_back(std::move(lhs));
      e.args.push_back(conjunction());
      lhs = std::move(e);
    }
    return lhs;
  }

  Expr conjunction() {
    Expr lhs = negation();
    while (keyword("and")) {
      const std::size_t at = advance().offset;
      Expr e = make_expr(ExprKind::conjunction);
      e.offset = at;
      e.args.push_back(std::move(lhs));
      e.args.push_back(negation());
      lhs = std::move(e);
    }
    return lhs;
  }

  Expr negation() {
    if (keyword("not")) {
      Expr e = make_expr(ExprKind::negation);
      e.offset = advance().offset;
      e.args.push_back(negation());
      return e;
    }
    return comparison();
  }

  bool at_comparison_operator() const {
    for (std::string_view op : {"=", "<>", "<", ">", "<=", ">="}) {
      if (symbol(op)) return true;
    }
    return keyword("in") || keyword("contains");
  }

  Expr comparison() {
    Expr lhs = postfix();
    if (!at_comparison_operator()) return lhs;
    const Token& op = advance();
    Expr e;
    e.offset = op.offset;
    if (op.kind == Tok::symbol) {
      e.kind = ExprKind::comparison;
      e.name = op.text;
    } else {
      e.kind = to_lower_ascii(op.text) == "in" ? ExprKind::membership : ExprKind::contains;
    }
    e.args.push_back(std::move(lhs));
    e.args.push_back(postfix());
    if (at_comparison_operator()) fail(peek().offset, "comparisons cannot be chained; use AND");
    return e;
  }

  Expr postfix() {
    Expr base = primary();
    while (symbol(".")) {
      advance();
      Expr e = make_expr(ExprKind::property);
      e.offset = peek().offset;
      e.name = identifier("a property name");
      e.args.push_back(std::move(base));
      base = std::move(e);
    }
    return base;
  }

  Expr literal(Value v, std::size_t offset) {
    Expr e = make_expr(ExprKind::literal);
    e.literal = std::move(v);
    e.offset = offset;
    return e;
  }

  Expr number(bool negative, std::size_t offset) {
    const Token& t = advance();
    const std::string text = (negative ? "-" : "") + t.text;
    if (t.kind == Tok::integer) {
      std::int64_t v = 0;
      auto res = std::from_chars(text.data(), text.data() + text.size(), v);
      if (res.ec != std::errc()) fail(t.offset, "integer literal out of range");
      return literal(Value(v), offset);
    }
    double d = 0;
    parse_real(text, d);
    return literal(Value(d), offset);
  }

  Expr primary() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::string: advance(); return literal(Value(t.text), t.offset);
      case Tok::integer:
      case Tok::real: return number(false, t.offset);
      case Tok::quoted_ident: {
        Expr e = make_expr(ExprKind::variable);
        e.offset = t.offset;
        e.name = advance().text;
        return e;
      }
      case Tok::end: fail(t.offset, "expected an expression but found end of input");
      default: break;
    }
    if (symbol("-")) {
      const std::size_t at = advance().offset;
      if (peek().kind != Tok::integer && peek().kind != Tok::real) {
        fail(peek().offset, "unary minus applies only to numeric literals");
      }
      return number(true, at);
    }
    if (symbol("(")) {
      advance();
      Expr e = expression();
      expect_symbol(")");
      return e;
    }
    if (symbol("[")) {
      Expr e = make_expr(ExprKind::list);
      e.offset = advance().offset;
      if (!symbol("]")) {
        e.args.push_back(expression());
        while (symbol(",")) {
          advance();
          e.args.push_back(expression());
        }
      }
      expect_symbol("]");
      return e;
    }
    if (t.kind == Tok::ident) {
      const std::string lower = to_lower_ascii(t.text);
      if (lower == "true" || lower == "false") {
        advance();
        return literal(Value(lower == "true"), t.offset);
      }
      if (lower == "null") {
        advance();
        return literal(Value(), t.offset);
      }
      if (symbol("(", 1)) return call();
      if (!is_keyword(t.text)) {
        Expr e = make_expr(ExprKind::variable);
        e.offset = t.offset;
        e.name = advance().text;
        return e;
      }
    }
    fail(t.offset, "expected an expression but found " + describe(t));
  }

  Expr call() {
    const Token& fn = advance();
    const std::string lower = to_lower_ascii(fn.text);
    advance();  // (
    if (lower == "collect" || lower == "count") {
      Expr e = make_expr(ExprKind::aggregate);
      e.offset = fn.offset;
      e.name = lower;
      if (lower == "count" && symbol("*")) {
        advance();
        e.star = true;
      } else {
        if (keyword("distinct")) {
          advance();
          e.distinct = true;
        }
        e.args.push_back(expression());
      }
      expect_symbol(")");
      return e;
    }
    if (lower == "any") {
      Expr e = make_expr(ExprKind::any);
      e.offset = fn.offset;
      e.name = identifier("a variable");
      expect_keyword("in");
      e.args.push_back(expression());
      expect_keyword("where");
      e.args.push_back(expression());
      expect_symbol(")");
      return e;
    }
    std::optional<std::string> best;
    std::size_t best_d = 3;
    for (std::string_view known : {"collect", "count", "any"}) {
      const std::size_t d = edit_distance(lower, known);
      if (d < best_d) {
        best_d = d;
        best = std::string(known);
      }
    }
    throw CypherError(make_diagnostic(DiagnosticKind::parse, text_, fn.offset,
                                      "unknown function '" + fn.text + "'", best));
  }

  std::string_view text_;
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

}  // namespace

QueryAst parse(std::string_view query_text) {
  Parser parser(query_text, Lexer(query_text).run());
  return parser.query();
}

}  // namespace hypokg::cypher
