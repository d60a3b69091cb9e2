#ifndef MINISMT_SEXPR_HPP
#define MINISMT_SEXPR_HPP

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace minismt {

struct Sexpr {
  std::string atom;          // nonempty for atoms
  std::vector<Sexpr> items;  // children for lists
  bool is_atom() const { return items.empty() && !atom.empty(); }
  bool is_list() const { return atom.empty(); }
  std::string to_string() const;
};

// Incremental reader: feeds characters from a stream and yields one
// complete toplevel form at a time, so commands can be answered before
// the input stream closes.
class SexprReader {
 public:
  explicit SexprReader(std::istream& in) : in_(in) {}

  // Next toplevel form, or nullopt at end of input. Throws
  // std::runtime_error on unbalanced input.
  std::optional<Sexpr> next();

 private:
  int get();
  int peek();
  void skip_space_and_comments();
  Sexpr read_form();

  std::istream& in_;
};

}  // namespace minismt

#endif
