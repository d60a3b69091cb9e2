#include "diseq/cpu.hpp"

#include <stdexcept>

#include "diseq/asm.hpp"

namespace diseq {

std::string to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::DivideByZero: return "divide-by-zero";
    case ErrorKind::UnalignedAccess: return "unaligned-access";
    case ErrorKind::OutOfBoundsAccess: return "out-of-bounds-access";
    case ErrorKind::InvalidInstruction: return "invalid-instruction";
  }
  return "unknown";
}

MachineState initial_state(std::span<const Word> prog, Word r1, Word r2,
                           uint32_t mem_size) {
  if (mem_size % 4 != 0) throw std::invalid_argument("memory size must be word-aligned");
  if (prog.size() * 4 > mem_size) throw std::invalid_argument("program does not fit in memory");
  MachineState s;
  s.mem_size = mem_size;
  s.mem.assign(mem_size / 4, 0);
  std::copy(prog.begin(), prog.end(), s.mem.begin());
  s.set_reg(1, r1);
  s.set_reg(2, r2);
  s.set_reg(30, mem_size);
  s.set_reg(31, kTerminationPc);
  return s;
}

namespace {

StepRes fault(ErrorKind k) {
  StepRes r;
  r.error = k;
  return r;
}

StepRes emit(std::optional<SymInstr> sym) {
  StepRes r;
  r.sym = std::move(sym);
  return r;
}

// Assignments to $0 have no architectural effect and are not recorded.
std::optional<SymInstr> unless_r0(int dst, SymInstr sym) {
  if (dst == 0) return std::nullopt;
  return sym;
}

}  // namespace

StepRes step(MachineState& s) {
  if (s.pc % 4 != 0 || s.pc >= s.mem_size) return fault(ErrorKind::InvalidInstruction);
  Instruction instr = decode(s.load_word(s.pc));
  s.pc += 4;

  switch (instr.kind) {
    case InstrKind::Add:
      s.set_reg(instr.d, s.reg(instr.s) + s.reg(instr.t));
      return emit(unless_r0(instr.d,
          SymInstr::add(reg_var(instr.d), reg_var(instr.s), reg_var(instr.t))));
    case InstrKind::Sub:
      s.set_reg(instr.d, s.reg(instr.s) - s.reg(instr.t));
      return emit(unless_r0(instr.d,
          SymInstr::sub(reg_var(instr.d), reg_var(instr.s), reg_var(instr.t))));
    case InstrKind::Slt:
      s.set_reg(instr.d, as_signed(s.reg(instr.s)) < as_signed(s.reg(instr.t)) ? 1 : 0);
      return emit(unless_r0(instr.d,
          SymInstr::slt(reg_var(instr.d), reg_var(instr.s), reg_var(instr.t))));
    case InstrKind::Sltu:
      s.set_reg(instr.d, s.reg(instr.s) < s.reg(instr.t) ? 1 : 0);
      return emit(unless_r0(instr.d,
          SymInstr::sltu(reg_var(instr.d), reg_var(instr.s), reg_var(instr.t))));
    case InstrKind::Mult: {
      int64_t prod = static_cast<int64_t>(as_signed(s.reg(instr.s))) *
                     static_cast<int64_t>(as_signed(s.reg(instr.t)));
      s.lo = static_cast<Word>(prod);
      s.hi = static_cast<Word>(static_cast<uint64_t>(prod) >> 32);
      return emit(SymInstr::mult(reg_var(instr.s), reg_var(instr.t)));
    }
    case InstrKind::Multu: {
      uint64_t prod = static_cast<uint64_t>(s.reg(instr.s)) * s.reg(instr.t);
      s.lo = static_cast<Word>(prod);
      s.hi = static_cast<Word>(prod >> 32);
      return emit(SymInstr::multu(reg_var(instr.s), reg_var(instr.t)));
    }
    case InstrKind::Div: {
      int32_t n = as_signed(s.reg(instr.s));
      int32_t d = as_signed(s.reg(instr.t));
      if (d == 0) return fault(ErrorKind::DivideByZero);
      if (n == INT32_MIN && d == -1) {  // overflow wraps, remainder 0
        s.lo = static_cast<Word>(INT32_MIN);
        s.hi = 0;
      } else {
        s.lo = as_word(n / d);
        s.hi = as_word(n % d);
      }
      return emit(SymInstr::div(reg_var(instr.s), reg_var(instr.t)));
    }
    case InstrKind::Divu: {
      Word n = s.reg(instr.s), d = s.reg(instr.t);
      if (d == 0) return fault(ErrorKind::DivideByZero);
      s.lo = n / d;
      s.hi = n % d;
      return emit(SymInstr::divu(reg_var(instr.s), reg_var(instr.t)));
    }
    case InstrKind::Mfhi:
      s.set_reg(instr.d, s.hi);
      return emit(unless_r0(instr.d, SymInstr::mfhi(reg_var(instr.d))));
    case InstrKind::Mflo:
      s.set_reg(instr.d, s.lo);
      return emit(unless_r0(instr.d, SymInstr::mflo(reg_var(instr.d))));
    case InstrKind::Lis: {
      // d <- Mem[pc]; pc <- pc + 4, with the loaded word concretized.
      if (s.pc >= s.mem_size) return fault(ErrorKind::OutOfBoundsAccess);
      Word v = s.load_word(s.pc);
      s.pc += 4;
      s.set_reg(instr.d, v);
      return emit(unless_r0(instr.d, SymInstr::constant(reg_var(instr.d), v)));
    }
    case InstrKind::Jr:
      s.pc = s.reg(instr.s);
      return emit(std::nullopt);
    case InstrKind::Jalr: {
      Word target = s.reg(instr.s);
      Word return_pc = s.pc;
      s.set_reg(31, return_pc);
      s.pc = target;
      return emit(SymInstr::jalr(return_pc));
    }
    case InstrKind::Beq:
    case InstrKind::Bne: {
      bool equal = s.reg(instr.s) == s.reg(instr.t);
      bool take = instr.kind == InstrKind::Beq ? equal : !equal;
      if (take) s.pc += static_cast<Word>(instr.imm) * 4;
      return emit(SymInstr::path_cond(equal ? Rel::Eq : Rel::Ne,
                                      reg_var(instr.s), reg_var(instr.t)));
    }
    case InstrKind::Lw: {
      Word addr = s.reg(instr.s) + static_cast<Word>(instr.imm);
      if (addr % 4 != 0) return fault(ErrorKind::UnalignedAccess);
      if (addr >= s.mem_size) return fault(ErrorKind::OutOfBoundsAccess);
      s.set_reg(instr.t, s.load_word(addr));
      return emit(unless_r0(instr.t,
          SymInstr::lw(reg_var(instr.t), instr.imm, reg_var(instr.s))));
    }
    case InstrKind::Sw: {
      Word addr = s.reg(instr.s) + static_cast<Word>(instr.imm);
      if (addr % 4 != 0) return fault(ErrorKind::UnalignedAccess);
      if (addr >= s.mem_size) return fault(ErrorKind::OutOfBoundsAccess);
      s.store_word(addr, s.reg(instr.t));
      return emit(SymInstr::sw(reg_var(instr.t), instr.imm, reg_var(instr.s)));
    }
    case InstrKind::RawWord:
      return fault(ErrorKind::InvalidInstruction);
  }
  return fault(ErrorKind::InvalidInstruction);
}

RunRes run(std::span<const Word> prog, Word r1, Word r2, uint64_t fuel,
           uint32_t mem_size) {
  RunRes res;
  MachineState s = initial_state(prog, r1, r2, mem_size);
  for (uint64_t steps = 0;; ++steps) {
    if (s.pc == kTerminationPc) {
      res.status = RunRes::Status::Done;
      res.state = std::move(s);
      return res;
    }
    if (steps == fuel) {
      res.status = RunRes::Status::NotDone;
      return res;
    }
    StepRes r = step(s);
    if (r.sym) res.trace.instrs.push_back(*r.sym);
    if (r.error) {
      res.status = RunRes::Status::Error;
      res.error = *r.error;
      return res;
    }
  }
}

}  // namespace diseq
