#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace macroplan {

/// Error raised for malformed input, carrying the 1-based source position.
class SyntaxError : public std::runtime_error {
public:
  SyntaxError(const std::string &what, int line, int column);
  int line() const { return line_; }
  int column() const { return column_; }

private:
  int line_;
  int column_;
};

/// A parsed s-expression node: either an atom (symbol) or a list.
/// Symbols are lower-cased on read.
struct SExpr {
  bool is_list = false;
  std::string symbol;
  std::vector<SExpr> items;
  int line = 0;
  int column = 0;

  bool is_symbol() const { return !is_list; }
  bool is_symbol(std::string_view s) const { return !is_list && symbol == s; }
  /// True for a list whose first item is the symbol `head`.
  bool has_head(std::string_view head) const;
  const SExpr &at(std::size_t i) const;
  std::size_t size() const { return items.size(); }
};

/// Reads every top-level expression in `text`. `;` starts a line comment.
std::vector<SExpr> read_sexprs(std::string_view text);

/// Reads exactly one top-level expression.
SExpr read_sexpr(std::string_view text);

} // namespace macroplan
