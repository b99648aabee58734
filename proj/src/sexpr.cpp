#include "macroplan/sexpr.hpp"

#include <cctype>

namespace macroplan {

SyntaxError::SyntaxError(const std::string &what, int line, int column)
    : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) +
                         ": " + what),
      line_(line), column_(column) {}

bool SExpr::has_head(std::string_view head) const {
  return is_list && !items.empty() && items.front().is_symbol(head);
}

const SExpr &SExpr::at(std::size_t i) const {
  if (!is_list || i >= items.size())
    throw SyntaxError("expected more elements in expression", line, column);
  return items[i];
}

namespace {

class Reader {
public:
  explicit Reader(std::string_view text) : text_(text) {}

  bool at_end() {
    skip_space();
    return pos_ >= text_.size();
  }

  SExpr read() {
    skip_space();
    if (pos_ >= text_.size())
      throw SyntaxError("unexpected end of input", line_, col_);
    SExpr node;
    node.line = line_;
    node.column = col_;
    char c = text_[pos_];
    if (c == '(') {
      advance();
      node.is_list = true;
      for (;;) {
        skip_space();
        if (pos_ >= text_.size())
          throw SyntaxError("unbalanced '('", node.line, node.column);
        if (text_[pos_] == ')') {
          advance();
          break;
        }
        node.items.push_back(read());
      }
      return node;
    }
    if (c == ')')
      throw SyntaxError("unexpected ')'", line_, col_);
    while (pos_ < text_.size()) {
      char ch = text_[pos_];
      if (std::isspace(static_cast<unsigned char>(ch)) || ch == '(' ||
          ch == ')' || ch == ';')
        break;
      node.symbol.push_back(
          static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
      advance();
    }
    return node;
  }

private:
  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_space() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == ';') {
        while (pos_ < text_.size() && text_[pos_] != '\n')
          advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

} // namespace

std::vector<SExpr> read_sexprs(std::string_view text) {
  Reader reader(text);
  std::vector<SExpr> out;
  while (!reader.at_end())
    out.push_back(reader.read());
  return out;
}

SExpr read_sexpr(std::string_view text) {
  Reader reader(text);
  SExpr e = reader.read();
  if (!reader.at_end())
    throw SyntaxError("trailing input after expression", 0, 0);
  return e;
}

} // namespace macroplan
