#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "diseq/trace.hpp"
#include "support/random_gen.hpp"

using namespace diseq;

namespace {
Var r(int n, int v = 0) { return Var{n, v}; }
}

TEST_CASE("desugar rewrites multiplies into 64-bit helper forms") {
  Trace t;
  t.instrs.push_back(SymInstr::mult(r(1), r(2)));
  Trace d = desugar(t);
  REQUIRE(d.instrs.size() == 3);
  CHECK(d.instrs[0] == SymInstr::mult64(kTmp64Var, r(1), r(2), true));
  CHECK(d.instrs[1] == SymInstr::low32(kLoVar, kTmp64Var));
  CHECK(d.instrs[2] == SymInstr::high32(kHiVar, kTmp64Var));

  t.instrs[0] = SymInstr::multu(r(1), r(2));
  CHECK(desugar(t).instrs[0].is_signed == false);
}

TEST_CASE("desugar rewrites divides into quotient/remainder") {
  Trace t;
  t.instrs.push_back(SymInstr::div(r(1), r(2)));
  Trace d = desugar(t);
  REQUIRE(d.instrs.size() == 2);
  CHECK(d.instrs[0] == SymInstr::quot(kLoVar, r(1), r(2), true));
  CHECK(d.instrs[1] == SymInstr::rem(kHiVar, r(1), r(2), true));
}

TEST_CASE("desugar turns hi/lo moves and jalr into plain assignments") {
  Trace t;
  t.instrs.push_back(SymInstr::mfhi(r(4)));
  t.instrs.push_back(SymInstr::mflo(r(5)));
  t.instrs.push_back(SymInstr::jalr(0x10));
  Trace d = desugar(t);
  CHECK(d.instrs[0] == SymInstr::add(r(4), kHiVar, r(0)));
  CHECK(d.instrs[1] == SymInstr::add(r(5), kLoVar, r(0)));
  CHECK(d.instrs[2] == SymInstr::constant(r(31), 0x10));
}

TEST_CASE("desugar leaves simple instructions unchanged") {
  Trace t;
  t.instrs.push_back(SymInstr::add(r(3), r(1), r(2)));
  CHECK(desugar(t).instrs == t.instrs);
}

TEST_CASE("simplify drops syntactically-true path conditions only") {
  Trace t;
  t.instrs.push_back(SymInstr::path_cond(Rel::Eq, r(0), r(0)));
  t.instrs.push_back(SymInstr::add(r(3), r(1), r(2)));
  t.instrs.push_back(SymInstr::path_cond(Rel::Eq, r(4), r(4)));
  t.instrs.push_back(SymInstr::path_cond(Rel::Ne, r(4), r(5)));
  Trace s = simplify(t);
  REQUIRE(s.instrs.size() == 2);
  CHECK(s.instrs[0] == SymInstr::add(r(3), r(1), r(2)));
  CHECK(s.instrs[1] == SymInstr::path_cond(Rel::Ne, r(4), r(5)));
}

TEST_CASE("trim keeps at most depth conditions") {
  // six-instruction fixture, conditions at positions 1, 3, 5
  Trace t;
  t.instrs.push_back(SymInstr::add(r(3), r(1), r(2)));        // 0
  t.instrs.push_back(SymInstr::path_cond(Rel::Ne, r(1), r(2)));  // 1
  t.instrs.push_back(SymInstr::add(r(4), r(3), r(1)));        // 2
  t.instrs.push_back(SymInstr::path_cond(Rel::Eq, r(4), r(0)));  // 3
  t.instrs.push_back(SymInstr::add(r(5), r(4), r(4)));        // 4
  t.instrs.push_back(SymInstr::path_cond(Rel::Ne, r(5), r(1)));  // 5

  SUBCASE("depth below the count cuts at the depth-th condition") {
    Trace cut = trim(t, 2);
    REQUIRE(cut.instrs.size() == 4);  // ends at the second condition
    CHECK(cut.instrs.back() == SymInstr::path_cond(Rel::Eq, r(4), r(0)));
    CHECK(cut.path_cond_count() == 2);
  }
  SUBCASE("depth at or above the count is the identity") {
    CHECK(trim(t, 3) == t);
    CHECK(trim(t, 50) == t);
  }
  SUBCASE("depth zero keeps the leading assignment prefix") {
    Trace cut = trim(t, 0);
    REQUIRE(cut.instrs.size() == 1);
    CHECK(cut.instrs[0] == SymInstr::add(r(3), r(1), r(2)));
  }
  SUBCASE("a cut drops assignments trailing the last kept condition") {
    Trace cut = trim(t, 1);
    REQUIRE(cut.instrs.size() == 2);
    CHECK(cut.instrs.back() == SymInstr::path_cond(Rel::Ne, r(1), r(2)));
  }
}

TEST_CASE("ssa versions mirror the write-after-read example") {
  Trace t;
  t.instrs.push_back(SymInstr::add(r(3), r(1), r(2)));
  t.instrs.push_back(SymInstr::sub(r(1), r(1), r(2)));
  t.instrs.push_back(SymInstr::add(r(2), r(1), r(2)));
  Trace s = ssa_convert(t);
  REQUIRE(s.ssa);
  REQUIRE(s.instrs.size() == 3);
  CHECK(s.instrs[0] == SymInstr::add(r(3, 1), r(1, 1), r(2, 1)));
  CHECK(s.instrs[1] == SymInstr::sub(r(1, 2), r(1, 1), r(2, 1)));
  CHECK(s.instrs[2] == SymInstr::add(r(2, 2), r(1, 2), r(2, 1)));
  CHECK(check_ssa(s));
}

TEST_CASE("ssa on the empty trace") {
  Trace s = ssa_convert(Trace{});
  CHECK(s.instrs.empty());
  CHECK(s.ssa);
}

TEST_CASE("memory is versioned like a register") {
  Trace t;
  t.instrs.push_back(SymInstr::sw(r(1), 0, r(30)));
  t.instrs.push_back(SymInstr::lw(r(4), 0, r(30)));
  Trace s = ssa_convert(t);
  REQUIRE(s.instrs.size() == 2);
  CHECK(s.instrs[0].mem_in == Var{Var::kMem, 1});
  CHECK(s.instrs[0].mem_out == Var{Var::kMem, 2});
  CHECK(s.instrs[1].mem_in == Var{Var::kMem, 2});
  CHECK(s.instrs[1].dst == r(4, 1));
  CHECK(check_ssa(s));
}

TEST_CASE("ssa_convert requires a desugared trace") {
  Trace t;
  t.instrs.push_back(SymInstr::mult(r(1), r(2)));
  CHECK_THROWS_AS(ssa_convert(t), std::invalid_argument);
}

TEST_CASE("transform composes the four phases in order") {
  Trace t;
  t.instrs.push_back(SymInstr::mult(r(1), r(2)));
  t.instrs.push_back(SymInstr::mflo(r(3)));
  t.instrs.push_back(SymInstr::path_cond(Rel::Eq, r(0), r(0)));
  t.instrs.push_back(SymInstr::path_cond(Rel::Ne, r(3), r(0)));
  t.instrs.push_back(SymInstr::add(r(4), r(3), r(3)));

  Trace out = transform(t, 50);
  REQUIRE(out.ssa);
  CHECK(check_ssa(out));
  CHECK(out.path_cond_count() == 1);  // reflexive condition removed
  // mult64 + low32 + high32 + mflo-as-add + cond + trailing add
  CHECK(out.instrs.size() == 6);

  SUBCASE("depth zero leaves no conditions") {
    Trace cut = transform(t, 0);
    CHECK(cut.path_cond_count() == 0);
    CHECK(cut.ssa);
  }
  SUBCASE("transform is idempotent on its own output") {
    CHECK(transform(out, 50) == out);
    Trace cut = transform(t, 1);
    CHECK(transform(cut, 1) == cut);
  }
}

TEST_CASE("single assignment holds on random traces") {
  std::mt19937 rng(7);
  for (int n = 0; n < 200; ++n) {
    Trace raw = diseq::testsupport::random_reg_trace(rng, 30, 5);
    Trace ssa = transform(raw, 50);
    std::string why;
    CHECK_MESSAGE(check_ssa(ssa, &why), why);
  }
}

TEST_CASE("check_ssa rejects double definitions and stale uses") {
  Trace bad;
  bad.ssa = true;
  bad.instrs.push_back(SymInstr::add(r(3, 1), r(1, 1), r(2, 1)));
  bad.instrs.push_back(SymInstr::add(r(3, 1), r(1, 1), r(2, 1)));
  CHECK_FALSE(check_ssa(bad));

  Trace stale;
  stale.ssa = true;
  stale.instrs.push_back(SymInstr::add(r(1, 2), r(1, 1), r(2, 1)));
  stale.instrs.push_back(SymInstr::add(r(3, 1), r(1, 1), r(2, 1)));  // stale r1_1
  CHECK_FALSE(check_ssa(stale));
}
