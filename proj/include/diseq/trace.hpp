#ifndef DISEQ_TRACE_HPP
#define DISEQ_TRACE_HPP

#include <compare>
#include <string>
#include <vector>

#include "diseq/word.hpp"

namespace diseq {

// A symbolic variable. ids 0-31 are registers; hi/lo are the multiply
// and divide result registers; tmp64 is the 64-bit wide multiply
// temporary; mem names the memory array. version 0 means unversioned
// (pre-SSA); ssa_convert assigns versions starting at 1, with version 1
// of a variable denoting its initial (input) value when the first
// occurrence is a read.
struct Var {
  static constexpr int kHi = 32;
  static constexpr int kLo = 33;
  static constexpr int kTmp64 = 34;
  static constexpr int kMem = 35;

  int id = 0;
  int version = 0;

  auto operator<=>(const Var&) const = default;
  bool is_wide() const { return id == kTmp64; }
  bool is_mem() const { return id == kMem; }
  std::string name() const;  // "r3", "hi", "tmp64", "mem"; "r3_1" when versioned
};

inline Var reg_var(int r) { return Var{r, 0}; }
inline constexpr Var kHiVar{Var::kHi, 0};
inline constexpr Var kLoVar{Var::kLo, 0};
inline constexpr Var kTmp64Var{Var::kTmp64, 0};
inline constexpr Var kMemVar{Var::kMem, 0};

enum class Rel { Eq, Ne };
inline Rel flipped(Rel r) { return r == Rel::Eq ? Rel::Ne : Rel::Eq; }

// Trace instruction forms. Raw forms are recorded by the emulator;
// Mult64/Low32/High32/Quot/Rem only appear after desugaring, which also
// removes Mult/Multu/Div/Divu/Mfhi/Mflo/Jalr.
enum class SymOp {
  Add, Sub, Mult, Multu, Div, Divu, Mfhi, Mflo, Slt, Sltu,
  Const, Lw, Sw, Jalr, PathCond,
  Mult64, Low32, High32, Quot, Rem,
};

struct SymInstr {
  SymOp op = SymOp::Add;
  Var dst;              // defined register/hi/lo/tmp64 variable
  Var a, b;             // register operands (a = stored value for Sw)
  Var mem_in, mem_out;  // memory versions for Lw/Sw
  Word value = 0;       // Const payload; Jalr concrete return pc
  int32_t offset = 0;   // Lw/Sw immediate
  bool is_signed = false;  // Mult64/Quot/Rem signedness
  Rel rel = Rel::Eq;    // PathCond relation

  bool operator==(const SymInstr&) const = default;

  static SymInstr reg_op(SymOp op, Var d, Var s, Var t) {
    SymInstr i;
    i.op = op;
    i.dst = d;
    i.a = s;
    i.b = t;
    return i;
  }
  static SymInstr add(Var d, Var s, Var t) { return reg_op(SymOp::Add, d, s, t); }
  static SymInstr sub(Var d, Var s, Var t) { return reg_op(SymOp::Sub, d, s, t); }
  static SymInstr slt(Var d, Var s, Var t) { return reg_op(SymOp::Slt, d, s, t); }
  static SymInstr sltu(Var d, Var s, Var t) { return reg_op(SymOp::Sltu, d, s, t); }
  static SymInstr mult(Var s, Var t) { return reg_op(SymOp::Mult, {}, s, t); }
  static SymInstr multu(Var s, Var t) { return reg_op(SymOp::Multu, {}, s, t); }
  static SymInstr div(Var s, Var t) { return reg_op(SymOp::Div, {}, s, t); }
  static SymInstr divu(Var s, Var t) { return reg_op(SymOp::Divu, {}, s, t); }
  static SymInstr mfhi(Var d) { return reg_op(SymOp::Mfhi, d, {}, {}); }
  static SymInstr mflo(Var d) { return reg_op(SymOp::Mflo, d, {}, {}); }
  static SymInstr constant(Var d, Word v) {
    SymInstr i = reg_op(SymOp::Const, d, {}, {});
    i.value = v;
    return i;
  }
  static SymInstr lw(Var t, int32_t imm, Var s) {
    SymInstr i = reg_op(SymOp::Lw, t, s, {});
    i.offset = imm;
    i.mem_in = kMemVar;
    return i;
  }
  static SymInstr sw(Var t, int32_t imm, Var s) {
    SymInstr i = reg_op(SymOp::Sw, {}, t, s);
    i.offset = imm;
    i.mem_in = kMemVar;
    i.mem_out = kMemVar;
    return i;
  }
  static SymInstr jalr(Word return_pc) {
    SymInstr i = reg_op(SymOp::Jalr, {}, {}, {});
    i.value = return_pc;
    return i;
  }
  static SymInstr path_cond(Rel rel, Var a, Var b) {
    SymInstr i = reg_op(SymOp::PathCond, {}, a, b);
    i.rel = rel;
    return i;
  }
  static SymInstr mult64(Var d, Var s, Var t, bool is_signed) {
    SymInstr i = reg_op(SymOp::Mult64, d, s, t);
    i.is_signed = is_signed;
    return i;
  }
  static SymInstr low32(Var d, Var tmp) { return reg_op(SymOp::Low32, d, tmp, {}); }
  static SymInstr high32(Var d, Var tmp) { return reg_op(SymOp::High32, d, tmp, {}); }
  static SymInstr quot(Var d, Var s, Var t, bool is_signed) {
    SymInstr i = reg_op(SymOp::Quot, d, s, t);
    i.is_signed = is_signed;
    return i;
  }
  static SymInstr rem(Var d, Var s, Var t, bool is_signed) {
    SymInstr i = reg_op(SymOp::Rem, d, s, t);
    i.is_signed = is_signed;
    return i;
  }
};

struct Trace {
  std::vector<SymInstr> instrs;
  bool ssa = false;

  bool operator==(const Trace&) const = default;
  int path_cond_count() const;
};

// Rewrites multi-effect and concretized instructions into single-effect
// forms: Mult -> Mult64/Low32/High32, Div -> Quot/Rem, Mfhi/Mflo -> Add
// with hi/lo, Jalr -> Const on $31.
Trace desugar(const Trace& t);

// Removes path conditions whose truth is syntactically forced (both
// operands the same variable under Eq). Assignments are untouched.
Trace simplify(const Trace& t);

// Bounds the trace to at most `depth` path conditions. When the trace
// is cut, the result ends at the depth-th path condition; with fewer
// conditions than depth the trace is returned unchanged.
Trace trim(const Trace& t, int depth);

// Single linear pass to static single assignment form. Requires a
// desugared trace; returns an already-SSA trace unchanged. Memory is
// versioned like a register: Sw defines the next mem version, Lw reads
// the latest.
Trace ssa_convert(const Trace& t);

// desugar -> simplify -> trim(depth) -> ssa_convert.
Trace transform(const Trace& t, int depth);

// Verifies the single-assignment discipline: every versioned variable
// defined at most once and every use naming the version in scope.
bool check_ssa(const Trace& t, std::string* why = nullptr);

std::string to_string(const SymInstr& i);
std::string to_string(const Trace& t);

}  // namespace diseq

#endif
