#ifndef MINISMT_TERM_HPP
#define MINISMT_TERM_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace minismt {

// Raised for malformed or unsupported input; reported to the client as
// an (error ...) response.
class SmtError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class SortKind : uint8_t { Bool, Bv, Array };

struct Sort {
  SortKind kind = SortKind::Bool;
  int width = 0;        // Bv
  int index_width = 0;  // Array
  int elem_width = 0;   // Array

  bool operator==(const Sort&) const = default;
  static Sort boolean() { return {SortKind::Bool, 0, 0, 0}; }
  static Sort bv(int w) { return {SortKind::Bv, w, 0, 0}; }
  static Sort array(int iw, int ew) { return {SortKind::Array, 0, iw, ew}; }
  std::string to_string() const;
};

enum class TermOp : uint8_t {
  Var, Const, TrueConst, FalseConst,
  Eq, Not, And, Or, Ite,
  BvAdd, BvSub, BvNeg, BvMul, BvUdiv, BvUrem, BvSdiv, BvSrem,
  BvUlt, BvSlt, Extract, ZeroExtend, SignExtend, Concat,
  Select, Store,
};

using TermId = int32_t;

struct Term {
  TermOp op;
  Sort sort;
  uint64_t value = 0;       // Const payload (width <= 64)
  int aux0 = 0, aux1 = 0;   // Extract hi/lo; extend amount
  std::string name;         // Var
  std::vector<TermId> args;
};

// Hash-consed term DAG. Bitvector widths are limited to 64.
class TermStore {
 public:
  TermId mk_var(const std::string& name, Sort sort);
  TermId mk_const(uint64_t value, int width);
  TermId mk_bool(bool value);
  TermId mk(TermOp op, std::vector<TermId> args, int aux0 = 0, int aux1 = 0);

  const Term& at(TermId id) const { return terms_[static_cast<size_t>(id)]; }
  Sort sort_of(TermId id) const { return at(id).sort; }

 private:
  TermId intern(Term t);
  Sort infer_sort(const Term& t) const;

  std::vector<Term> terms_;
  std::unordered_map<std::string, TermId> index_;
};

}  // namespace minismt

#endif
