#include "minismt/sexpr.hpp"

#include <cctype>
#include <istream>
#include <stdexcept>

namespace minismt {

std::string Sexpr::to_string() const {
  if (is_atom()) return atom;
  std::string out = "(";
  for (size_t i = 0; i < items.size(); ++i) {
    if (i > 0) out += ' ';
    out += items[i].to_string();
  }
  out += ')';
  return out;
}

int SexprReader::get() { return in_.get(); }

int SexprReader::peek() { return in_.peek(); }

void SexprReader::skip_space_and_comments() {
  for (;;) {
    int c = peek();
    if (c == EOF) return;
    if (std::isspace(c)) {
      get();
    } else if (c == ';') {
      while (c != EOF && c != '\n') c = get();
    } else {
      return;
    }
  }
}

Sexpr SexprReader::read_form() {
  skip_space_and_comments();
  int c = peek();
  if (c == EOF) throw std::runtime_error("unexpected end of input");
  if (c == '(') {
    get();
    Sexpr list;
    for (;;) {
      skip_space_and_comments();
      c = peek();
      if (c == EOF) throw std::runtime_error("unbalanced '('");
      if (c == ')') {
        get();
        return list;
      }
      list.items.push_back(read_form());
    }
  }
  if (c == ')') throw std::runtime_error("unbalanced ')'");
  Sexpr atom;
  if (c == '|' || c == '"') {
    int quote = get();
    atom.atom.push_back(static_cast<char>(quote));
    for (;;) {
      c = get();
      if (c == EOF) throw std::runtime_error("unterminated quoted token");
      atom.atom.push_back(static_cast<char>(c));
      if (c == quote) break;
    }
    return atom;
  }
  for (;;) {
    c = peek();
    if (c == EOF || std::isspace(c) || c == '(' || c == ')' || c == ';') break;
    atom.atom.push_back(static_cast<char>(get()));
  }
  return atom;
}

std::optional<Sexpr> SexprReader::next() {
  skip_space_and_comments();
  if (peek() == EOF) return std::nullopt;
  return read_form();
}

}  // namespace minismt
