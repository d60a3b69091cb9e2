#ifndef DISEQ_CPU_HPP
#define DISEQ_CPU_HPP

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "diseq/trace.hpp"
#include "diseq/word.hpp"

namespace diseq {

// Execution stops when pc reaches this sentinel (the initial value of
// register 31).
inline constexpr Word kTerminationPc = 0x8123456Cu;

inline constexpr uint32_t kDefaultMemSize = 1u << 20;  // 1 MiB

enum class ErrorKind {
  DivideByZero,
  UnalignedAccess,
  OutOfBoundsAccess,
  InvalidInstruction,
};

std::string to_string(ErrorKind k);

struct MachineState {
  std::array<Word, 32> regs{};
  Word hi = 0;
  Word lo = 0;
  Word pc = 0;
  std::vector<Word> mem;   // word cells, indexed by byte address / 4
  uint32_t mem_size = 0;   // bytes

  Word reg(int r) const { return r == 0 ? 0 : regs[static_cast<size_t>(r)]; }
  void set_reg(int r, Word v) {
    if (r != 0) regs[static_cast<size_t>(r)] = v;  // writes to $0 are discarded
  }
  Word load_word(Word addr) const { return mem[addr / 4]; }
  void store_word(Word addr, Word v) { mem[addr / 4] = v; }
};

// Initial state for running prog: program loaded at address 0, inputs in
// $1/$2, $31 = termination sentinel, $30 = memory size, everything else
// zero. Throws std::invalid_argument when the program does not fit.
MachineState initial_state(std::span<const Word> prog, Word r1, Word r2,
                           uint32_t mem_size = kDefaultMemSize);

// One fetch-decode-execute step. Returns the symbolic form of the
// executed instruction (if any) or the error that stopped it; never
// both. The machine state is updated in place.
struct StepRes {
  std::optional<SymInstr> sym;
  std::optional<ErrorKind> error;
};
StepRes step(MachineState& state);

struct RunRes {
  enum class Status { Done, NotDone, Error };
  Status status = Status::NotDone;
  MachineState state;            // final state; registers/memory valid for Done
  Trace trace;                   // symbolic record up to the stopping point
  ErrorKind error = ErrorKind::InvalidInstruction;  // valid for Error

  bool done() const { return status == Status::Done; }
};

// Executes at most fuel instructions. All failure modes are boxed in the
// result; nothing is thrown for program behavior. Deterministic in its
// arguments.
RunRes run(std::span<const Word> prog, Word r1, Word r2, uint64_t fuel,
           uint32_t mem_size = kDefaultMemSize);

}  // namespace diseq

#endif
