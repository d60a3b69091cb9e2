#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "diseq/asm.hpp"
#include "diseq/cpu.hpp"
#include "support/random_gen.hpp"
#include "support/trace_eval.hpp"

using namespace diseq;

namespace {

std::vector<Word> prog(const std::string& text) { return assemble_text(text); }

const std::string kAddPair = "add $3, $1, $2\njr $31\n";

const std::string kBoundedLoop =
    "lis $4\n.word 1\n"
    "lis $5\n.word 42\n"
    "lis $7\n.word 1\n"
    "loop:\n"
    "slt $6, $4, $5\n"
    "beq $6, $0, end\n"
    "add $4, $4, $7\n"
    "beq $0, $0, loop\n"
    "end:\n"
    "add $3, $1, $1\n"
    "jr $31\n";

const std::string kComputedJump =
    "add $4, $1, $2\n"
    "jr $4\n"
    "good:\n"
    "add $3, $1, $2\n"
    "jr $31\n"
    "bad:\n"
    "add $3, $1, $1\n"
    "jr $31\n";

}  // namespace

TEST_CASE("1 + 1 = 2") {
  RunRes res = run(prog(kAddPair), 1, 1, 100);
  REQUIRE(res.status == RunRes::Status::Done);
  CHECK(res.state.reg(3) == 2);
  REQUIRE(res.trace.instrs.size() == 1);
  CHECK(res.trace.instrs[0] == SymInstr::add(reg_var(3), reg_var(1), reg_var(2)));
}

TEST_CASE("a 42-iteration loop does not finish in 10 steps") {
  RunRes res = run(prog(kBoundedLoop), 1, 1, 10);
  CHECK(res.status == RunRes::Status::NotDone);
  CHECK_FALSE(res.trace.instrs.empty());  // partial trace survives
  RunRes full = run(prog(kBoundedLoop), 1, 1, 10000);
  REQUIRE(full.status == RunRes::Status::Done);
  CHECK(full.state.reg(3) == 2);
}

TEST_CASE("divide by zero is boxed") {
  RunRes res = run(prog("div $1, $2\nmflo $3\njr $31\n"), 7, 0, 10);
  REQUIRE(res.status == RunRes::Status::Error);
  CHECK(res.error == ErrorKind::DivideByZero);
  CHECK(res.trace.instrs.empty());  // the faulting divide records nothing
}

TEST_CASE("computed jump into the middle of an instruction is invalid") {
  RunRes res = run(prog(kComputedJump), 1, 1, 100);
  REQUIRE(res.status == RunRes::Status::Error);
  CHECK(res.error == ErrorKind::InvalidInstruction);
  // with $1 + $2 = 8 the jump lands on the good label and terminates
  RunRes good = run(prog(kComputedJump), 4, 4, 100);
  REQUIRE(good.status == RunRes::Status::Done);
  CHECK(good.state.reg(3) == 8);
}

TEST_CASE("executing a data word is an invalid instruction") {
  RunRes res = run(prog(".word 0\n"), 1, 1, 10);
  REQUIRE(res.status == RunRes::Status::Error);
  CHECK(res.error == ErrorKind::InvalidInstruction);
}

TEST_CASE("running off the end of memory is boxed") {
  // jr to the last word, then pc walks past the end
  RunRes res = run(prog("lis $4\n.word 0x100000\njr $4\n"), 0, 0, 10);
  REQUIRE(res.status == RunRes::Status::Error);
  CHECK(res.error == ErrorKind::InvalidInstruction);
}

TEST_CASE("lis loads the next word, costs one step, and advances pc by 8") {
  MachineState s = initial_state(prog("lis $5\n.word 42\njr $31\n"), 0, 0);
  StepRes r = step(s);
  REQUIRE(r.sym.has_value());
  CHECK(*r.sym == SymInstr::constant(reg_var(5), 42));
  CHECK(s.reg(5) == 42);
  CHECK(s.pc == 8);

  RunRes res = run(prog("lis $5\n.word 42\njr $31\n"), 0, 0, 2);
  CHECK(res.status == RunRes::Status::Done);  // lis + jr = exactly two steps
  RunRes starved = run(prog("lis $5\n.word 42\njr $31\n"), 0, 0, 1);
  CHECK(starved.status == RunRes::Status::NotDone);
}

TEST_CASE("branches record the observed relation") {
  // not taken: $4 != $5
  MachineState s = initial_state(prog("beq $4, $5, 1\njr $31\n"), 0, 0);
  s.set_reg(4, 1);
  s.set_reg(5, 2);
  StepRes r = step(s);
  REQUIRE(r.sym.has_value());
  CHECK(*r.sym == SymInstr::path_cond(Rel::Ne, reg_var(4), reg_var(5)));
  CHECK(s.pc == 4);

  // taken: $4 == $5, pc skips one instruction
  MachineState s2 = initial_state(prog("beq $4, $5, 1\njr $31\njr $31\n"), 0, 0);
  StepRes r2 = step(s2);
  CHECK(*r2.sym == SymInstr::path_cond(Rel::Eq, reg_var(4), reg_var(5)));
  CHECK(s2.pc == 8);

  // bne taken records Ne
  MachineState s3 = initial_state(prog("bne $1, $2, 1\njr $31\njr $31\n"), 1, 2);
  StepRes r3 = step(s3);
  CHECK(*r3.sym == SymInstr::path_cond(Rel::Ne, reg_var(1), reg_var(2)));
  CHECK(s3.pc == 8);
}

TEST_CASE("unconditional jumps record nothing; jalr records its return pc") {
  MachineState s = initial_state(prog("jr $31\n"), 0, 0);
  StepRes r = step(s);
  CHECK_FALSE(r.sym.has_value());
  CHECK(s.pc == kTerminationPc);

  MachineState s2 = initial_state(prog("jalr $4\njr $31\njr $31\n"), 0, 0);
  s2.set_reg(4, 8);
  StepRes r2 = step(s2);
  REQUIRE(r2.sym.has_value());
  CHECK(*r2.sym == SymInstr::jalr(4));
  CHECK(s2.reg(31) == 4);
  CHECK(s2.pc == 8);
}

TEST_CASE("jalr through $31 still jumps to the old return address") {
  MachineState s = initial_state(prog("jalr $31\n"), 0, 0);
  step(s);
  CHECK(s.pc == kTerminationPc);  // target read before $31 is overwritten
  CHECK(s.reg(31) == 4);
}

TEST_CASE("writes to $0 are discarded and not recorded") {
  RunRes res = run(prog("add $0, $1, $2\nlis $0\n.word 9\nlw $0, 0($30)\njr $31\n"),
                   5, 6, 100);
  REQUIRE(res.status == RunRes::Status::Error);  // lw at $30 = memSize is out of bounds
  CHECK(res.error == ErrorKind::OutOfBoundsAccess);
  CHECK(res.trace.instrs.empty());

  RunRes ok = run(prog("add $0, $1, $2\njr $31\n"), 5, 6, 100);
  REQUIRE(ok.status == RunRes::Status::Done);
  CHECK(ok.state.reg(0) == 0);
  CHECK(ok.trace.instrs.empty());
}

TEST_CASE("memory access checking") {
  CHECK(run(prog("lw $4, 2($0)\njr $31\n"), 0, 0, 10).error == ErrorKind::UnalignedAccess);
  CHECK(run(prog("sw $4, 2($0)\njr $31\n"), 0, 0, 10).error == ErrorKind::UnalignedAccess);
  CHECK(run(prog("lw $4, 0($30)\njr $31\n"), 0, 0, 10).error == ErrorKind::OutOfBoundsAccess);
  RunRes ok = run(prog("sw $1, -4($30)\nlw $3, -4($30)\njr $31\n"), 77, 0, 10);
  REQUIRE(ok.status == RunRes::Status::Done);
  CHECK(ok.state.reg(3) == 77);
}

TEST_CASE("initial state follows the register conventions") {
  MachineState s = initial_state(prog(kAddPair), 11, 22);
  CHECK(s.reg(1) == 11);
  CHECK(s.reg(2) == 22);
  CHECK(s.reg(30) == kDefaultMemSize);
  CHECK(s.reg(31) == kTerminationPc);
  CHECK(s.reg(7) == 0);
  CHECK(s.pc == 0);
  CHECK_THROWS_AS(initial_state(std::vector<Word>(1 << 19, 0), 0, 0, 1 << 20),
                  std::invalid_argument);  // 2 MiB of words into 1 MiB
}

TEST_CASE("signed and unsigned arithmetic semantics") {
  // slt vs sltu on 0x80000000
  RunRes res = run(prog("slt $3, $1, $2\njr $31\n"), 0x80000000u, 1, 10);
  CHECK(res.state.reg(3) == 1);  // INT_MIN < 1 signed
  RunRes res2 = run(prog("sltu $3, $1, $2\njr $31\n"), 0x80000000u, 1, 10);
  CHECK(res2.state.reg(3) == 0);  // huge unsigned

  // add wraps silently
  RunRes res3 = run(prog("add $3, $1, $2\njr $31\n"), 0xffffffffu, 1, 10);
  CHECK(res3.state.reg(3) == 0);

  // mult produces a 64-bit hi:lo pair
  RunRes res4 = run(prog("mult $1, $2\nmfhi $3\nmflo $4\njr $31\n"),
                    0x10000u, 0x10000u, 10);
  CHECK(res4.state.reg(3) == 1);
  CHECK(res4.state.reg(4) == 0);

  // div: quotient in lo, remainder in hi, truncation toward zero
  RunRes res5 = run(prog("div $1, $2\nmflo $3\nmfhi $4\njr $31\n"),
                    static_cast<Word>(-7), 2, 10);
  CHECK(res5.state.reg(3) == static_cast<Word>(-3));
  CHECK(res5.state.reg(4) == static_cast<Word>(-1));

  // divu is unsigned
  RunRes res6 = run(prog("divu $1, $2\nmflo $3\njr $31\n"), static_cast<Word>(-7), 2, 10);
  CHECK(res6.state.reg(3) == 0x7ffffffcu);

  // INT_MIN / -1 wraps with remainder zero
  RunRes res7 = run(prog("div $1, $2\nmflo $3\nmfhi $4\njr $31\n"),
                    0x80000000u, static_cast<Word>(-1), 10);
  CHECK(res7.state.reg(3) == 0x80000000u);
  CHECK(res7.state.reg(4) == 0);
}

TEST_CASE("fuel monotonicity") {
  std::vector<Word> p = prog(kBoundedLoop);
  RunRes done = run(p, 3, 9, 200);
  REQUIRE(done.status == RunRes::Status::Done);
  for (uint64_t extra : {1, 10, 1000}) {
    RunRes again = run(p, 3, 9, 200 + extra);
    REQUIRE(again.status == RunRes::Status::Done);
    CHECK(again.state.regs == done.state.regs);
    CHECK(again.trace == done.trace);
  }
  // and below the threshold it is NotDone
  uint64_t steps = done.trace.instrs.size();  // lower bound on executed steps
  CHECK(run(p, 3, 9, steps / 2).status == RunRes::Status::NotDone);
}

TEST_CASE("determinism") {
  RunRes a = run(prog(kBoundedLoop), 5, 9, 10000);
  RunRes b = run(prog(kBoundedLoop), 5, 9, 10000);
  CHECK(a.status == b.status);
  CHECK(a.state.regs == b.state.regs);
  CHECK(a.trace == b.trace);
}

TEST_CASE("trace fidelity: replaying assignments reproduces the run") {
  std::mt19937 rng(99);
  for (int n = 0; n < 100; ++n) {
    std::string text = diseq::testsupport::random_straightline_program(rng, 12);
    std::vector<Word> p = assemble_text(text);
    Word r1 = rng(), r2 = rng();
    RunRes res = run(p, r1, r2, 1000);
    REQUIRE(res.status == RunRes::Status::Done);

    diseq::testsupport::RawTraceInterp interp(r1, r2);
    REQUIRE(interp.run(res.trace));
    for (const auto& i : res.trace.instrs) {
      if (i.op == SymOp::PathCond || i.op == SymOp::Sw) continue;
      if (i.dst.id <= 31 && !(i.op == SymOp::Mult || i.op == SymOp::Multu ||
                              i.op == SymOp::Div || i.op == SymOp::Divu)) {
        CHECK(static_cast<Word>(interp.get(i.dst)) == res.state.reg(i.dst.id));
      }
    }
    CHECK(static_cast<Word>(interp.env[Var::kHi]) == res.state.hi);
    CHECK(static_cast<Word>(interp.env[Var::kLo]) == res.state.lo);
  }
}

TEST_CASE("branchy programs replay through the interpreter too") {
  std::mt19937 rng(123);
  for (int n = 0; n < 100; ++n) {
    std::string text = diseq::testsupport::random_branchy_program(rng, 3);
    std::vector<Word> p = assemble_text(text);
    Word r1 = rng() % 64, r2 = rng() % 64;
    RunRes res = run(p, r1, r2, 1000);
    REQUIRE(res.status == RunRes::Status::Done);
    diseq::testsupport::RawTraceInterp interp(r1, r2);
    CHECK(interp.run(res.trace));  // all recorded conditions hold
    CHECK(static_cast<Word>(interp.get(reg_var(3))) == res.state.reg(3));
  }
}
