#ifndef DISEQ_TESTS_TRACE_EVAL_HPP
#define DISEQ_TESTS_TRACE_EVAL_HPP

#include <cstdint>
#include <map>
#include <optional>

#include "diseq/smt.hpp"
#include "diseq/trace.hpp"

namespace diseq::testsupport {

// Replays a raw trace's assignments concretely. Registers and hi/lo
// start at zero except the given inputs; memory starts zeroed, matching
// the emulator. Independent of the transform/SMT pipeline.
struct RawTraceInterp {
  std::map<int, uint64_t> env;  // var id -> value (tmp64 is 64-bit)
  std::map<Word, Word> mem;

  RawTraceInterp(Word r1, Word r2, uint32_t mem_size = kDefaultMemSizeBytes) {
    env[1] = r1;
    env[2] = r2;
    env[30] = mem_size;
    env[31] = 0x8123456Cu;
    mem_size_ = mem_size;
  }

  uint64_t get(const Var& v) const {
    if (v.id == 0) return 0;
    auto it = env.find(v.id);
    return it == env.end() ? 0 : it->second;
  }
  void set(const Var& v, uint64_t value) {
    if (v.id != 0) env[v.id] = v.is_wide() ? value : static_cast<Word>(value);
  }

  // Applies one instruction; returns false if a path condition does not
  // hold under the current environment.
  bool apply(const SymInstr& i);

  // Whole trace; true iff all path conditions held.
  bool run(const Trace& t) {
    for (const auto& i : t.instrs)
      if (!apply(i)) return false;
    return true;
  }

  static constexpr uint32_t kDefaultMemSizeBytes = 1u << 20;

 private:
  uint32_t mem_size_;
};

// Evaluates an SSA trace under model bindings for the version-1 input
// registers, checking every definition and path condition the way the
// emitted assertions would be checked. Reads of never-written initial
// memory are unknowable from a register model and poison dependent
// values; conditions over poisoned values are skipped.
struct SsaTraceEval {
  std::map<std::pair<int, int>, uint64_t> values;  // (id, version) -> value
  std::map<std::pair<int, int>, bool> known;

  explicit SsaTraceEval(const Soln& soln) {
    bind(Var{0, 1}, 0);
    bind(Var{1, 1}, soln.r1_or_zero());
    bind(Var{2, 1}, soln.r2_or_zero());
  }

  void bind(const Var& v, uint64_t value) {
    values[{v.id, v.version}] = value;
    known[{v.id, v.version}] = true;
  }

  // true = all conditions hold (unknowable ones skipped); false = some
  // condition evaluated false under the bindings.
  bool check(const Trace& ssa);

  int checked_conds = 0;
  int skipped_conds = 0;
};

}  // namespace diseq::testsupport

#endif
