#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>
#include <sstream>

#include "minismt/bitblast.hpp"
#include "minismt/sat.hpp"
#include "minismt/session.hpp"
#include "minismt/sexpr.hpp"
#include "minismt/term.hpp"

using namespace minismt;

// ---------------------------------------------------------------------------
// SAT core

TEST_CASE("tiny sat instances") {
  SatSolver s;
  uint32_t a = s.new_var(), b = s.new_var();
  s.add_clause({mk_lit(a), mk_lit(b)});
  s.add_clause({mk_lit(a, true), mk_lit(b)});
  REQUIRE(s.solve());
  CHECK(s.value_of(b));
}

TEST_CASE("pigeonhole 3 into 2 is unsat") {
  SatSolver s;
  // p[i][j]: pigeon i in hole j
  uint32_t p[3][2];
  for (auto& row : p)
    for (auto& v : row) v = s.new_var();
  for (auto& row : p) s.add_clause({mk_lit(row[0]), mk_lit(row[1])});
  for (int j = 0; j < 2; ++j)
    for (int i = 0; i < 3; ++i)
      for (int k = i + 1; k < 3; ++k)
        s.add_clause({mk_lit(p[i][j], true), mk_lit(p[k][j], true)});
  CHECK_FALSE(s.solve());
}

namespace {

bool brute_force_sat(int nvars, const std::vector<std::vector<int>>& clauses) {
  for (uint32_t m = 0; m < (1u << nvars); ++m) {
    bool all = true;
    for (const auto& c : clauses) {
      bool any = false;
      for (int lit : c) {
        int v = std::abs(lit) - 1;
        bool val = (m >> v) & 1;
        if (lit < 0) val = !val;
        if (val) {
          any = true;
          break;
        }
      }
      if (!any) {
        all = false;
        break;
      }
    }
    if (all) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("random 3-sat agrees with brute force") {
  std::mt19937 rng(42);
  for (int round = 0; round < 300; ++round) {
    int nvars = std::uniform_int_distribution<int>(3, 10)(rng);
    int nclauses = std::uniform_int_distribution<int>(2, 45)(rng);
    std::vector<std::vector<int>> clauses;
    for (int c = 0; c < nclauses; ++c) {
      std::vector<int> clause;
      for (int k = 0; k < 3; ++k) {
        int v = std::uniform_int_distribution<int>(1, nvars)(rng);
        clause.push_back(std::uniform_int_distribution<int>(0, 1)(rng) ? v : -v);
      }
      clauses.push_back(clause);
    }

    SatSolver s;
    std::vector<uint32_t> vars;
    for (int v = 0; v < nvars; ++v) vars.push_back(s.new_var());
    for (const auto& c : clauses) {
      std::vector<Lit> lits;
      for (int lit : c)
        lits.push_back(mk_lit(vars[static_cast<size_t>(std::abs(lit) - 1)], lit < 0));
      s.add_clause(lits);
    }
    bool got = s.solve();
    bool expected = brute_force_sat(nvars, clauses);
    REQUIRE_MESSAGE(got == expected, "round ", round);
    if (got) {
      for (const auto& c : clauses) {
        bool any = false;
        for (int lit : c) {
          bool val = s.value_of(vars[static_cast<size_t>(std::abs(lit) - 1)]);
          if (lit < 0) val = !val;
          any |= val;
        }
        CHECK(any);  // the model satisfies every clause
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Term-level oracle: exhaustive enumeration at width 8

namespace {

struct RandomTermGen {
  TermStore& ts;
  std::mt19937& rng;
  TermId x, y;

  TermId bv(int depth) {
    int pick = std::uniform_int_distribution<int>(0, depth <= 0 ? 3 : 11)(rng);
    switch (pick) {
      case 0: return x;
      case 1: return y;
      case 2:
      case 3: return ts.mk_const(rng() & 0xff, 8);
      case 4: return ts.mk(TermOp::BvAdd, {bv(depth - 1), bv(depth - 1)});
      case 5: return ts.mk(TermOp::BvSub, {bv(depth - 1), bv(depth - 1)});
      case 6: return ts.mk(TermOp::BvMul, {bv(depth - 1), bv(depth - 1)});
      case 7: return ts.mk(TermOp::BvUdiv, {bv(depth - 1), bv(depth - 1)});
      case 8: return ts.mk(TermOp::BvUrem, {bv(depth - 1), bv(depth - 1)});
      case 9: return ts.mk(TermOp::BvSdiv, {bv(depth - 1), bv(depth - 1)});
      case 10: return ts.mk(TermOp::BvSrem, {bv(depth - 1), bv(depth - 1)});
      default: return ts.mk(TermOp::Ite, {cond(depth - 1), bv(depth - 1), bv(depth - 1)});
    }
  }

  TermId cond(int depth) {
    int pick = std::uniform_int_distribution<int>(0, depth <= 0 ? 2 : 4)(rng);
    switch (pick) {
      case 0: return ts.mk(TermOp::Eq, {bv(depth), bv(depth)});
      case 1: return ts.mk(TermOp::BvUlt, {bv(depth), bv(depth)});
      case 2: return ts.mk(TermOp::BvSlt, {bv(depth), bv(depth)});
      case 3: return ts.mk(TermOp::Not, {cond(depth - 1)});
      default:
        return ts.mk(TermOp::And, {cond(depth - 1), cond(depth - 1)});
    }
  }
};

uint64_t eval_bv(const TermStore& ts, TermId id, uint8_t xv, uint8_t yv);

bool eval_bool(const TermStore& ts, TermId id, uint8_t xv, uint8_t yv) {
  const Term& t = ts.at(id);
  switch (t.op) {
    case TermOp::TrueConst: return true;
    case TermOp::FalseConst: return false;
    case TermOp::Not: return !eval_bool(ts, t.args[0], xv, yv);
    case TermOp::And: {
      for (TermId a : t.args)
        if (!eval_bool(ts, a, xv, yv)) return false;
      return true;
    }
    case TermOp::Or: {
      for (TermId a : t.args)
        if (eval_bool(ts, a, xv, yv)) return true;
      return false;
    }
    case TermOp::Eq:
      return eval_bv(ts, t.args[0], xv, yv) == eval_bv(ts, t.args[1], xv, yv);
    case TermOp::BvUlt:
      return eval_bv(ts, t.args[0], xv, yv) < eval_bv(ts, t.args[1], xv, yv);
    case TermOp::BvSlt: {
      auto sign8 = [](uint64_t v) { return static_cast<int8_t>(v & 0xff); };
      return sign8(eval_bv(ts, t.args[0], xv, yv)) < sign8(eval_bv(ts, t.args[1], xv, yv));
    }
    case TermOp::Ite:
      return eval_bool(ts, t.args[0], xv, yv) ? eval_bool(ts, t.args[1], xv, yv)
                                              : eval_bool(ts, t.args[2], xv, yv);
    default:
      FAIL("unexpected bool op");
      return false;
  }
}

uint64_t eval_bv(const TermStore& ts, TermId id, uint8_t xv, uint8_t yv) {
  const Term& t = ts.at(id);
  uint64_t mask = 0xff;
  auto a = [&] { return eval_bv(ts, t.args[0], xv, yv); };
  auto b = [&] { return eval_bv(ts, t.args[1], xv, yv); };
  switch (t.op) {
    case TermOp::Var: return t.name == "x" ? xv : yv;
    case TermOp::Const: return t.value;
    case TermOp::BvAdd: return (a() + b()) & mask;
    case TermOp::BvSub: return (a() - b()) & mask;
    case TermOp::BvMul: return (a() * b()) & mask;
    case TermOp::BvUdiv: {
      uint64_t d = b();
      return d == 0 ? mask : (a() / d);
    }
    case TermOp::BvUrem: {
      uint64_t d = b();
      return d == 0 ? a() : (a() % d);
    }
    case TermOp::BvSdiv: {
      uint64_t av = a(), dv = b();
      bool an = av & 0x80, dn = dv & 0x80;
      uint64_t am = an ? (0x100 - av) & mask : av;
      uint64_t dm = dn ? (0x100 - dv) & mask : dv;
      uint64_t q = dm == 0 ? mask : am / dm;
      return (an != dn ? (0x100 - q) : q) & mask;
    }
    case TermOp::BvSrem: {
      uint64_t av = a(), dv = b();
      bool an = av & 0x80, dn = dv & 0x80;
      uint64_t am = an ? (0x100 - av) & mask : av;
      uint64_t dm = dn ? (0x100 - dv) & mask : dv;
      uint64_t r = dm == 0 ? am : am % dm;
      return (an ? (0x100 - r) : r) & mask;
    }
    case TermOp::Ite:
      return eval_bool(ts, t.args[0], xv, yv) ? eval_bv(ts, t.args[1], xv, yv)
                                              : eval_bv(ts, t.args[2], xv, yv);
    default:
      FAIL("unexpected bv op");
      return 0;
  }
}

}  // namespace

TEST_CASE("width-8 assertions agree with exhaustive enumeration") {
  std::mt19937 rng(20250810);
  for (int round = 0; round < 60; ++round) {
    TermStore ts;
    TermId x = ts.mk_var("x", Sort::bv(8));
    TermId y = ts.mk_var("y", Sort::bv(8));
    RandomTermGen gen{ts, rng, x, y};
    TermId assertion = gen.cond(3);

    bool expected = false;
    uint8_t wx = 0, wy = 0;
    for (int xv = 0; xv < 256 && !expected; ++xv)
      for (int yv = 0; yv < 256; ++yv)
        if (eval_bool(ts, assertion, static_cast<uint8_t>(xv), static_cast<uint8_t>(yv))) {
          expected = true;
          wx = static_cast<uint8_t>(xv);
          wy = static_cast<uint8_t>(yv);
          break;
        }
    (void)wx;
    (void)wy;

    SolveResult got = solve_assertions(ts, {assertion}, {{"x", x}, {"y", y}});
    REQUIRE_MESSAGE(got.sat == expected, "round ", round);
    if (got.sat) {
      uint8_t mx = static_cast<uint8_t>(got.model["x"]);
      uint8_t my = static_cast<uint8_t>(got.model["y"]);
      CHECK_MESSAGE(eval_bool(ts, assertion, mx, my), "model check, round ", round);
    }
  }
}

TEST_CASE("division corner cases at full width") {
  TermStore ts;
  TermId x = ts.mk_var("x", Sort::bv(32));
  TermId int_min = ts.mk_const(0x80000000u, 32);
  TermId minus_one = ts.mk_const(0xffffffffu, 32);
  // INT_MIN / -1 wraps to INT_MIN with remainder 0
  TermId q = ts.mk(TermOp::BvSdiv, {int_min, minus_one});
  TermId r = ts.mk(TermOp::BvSrem, {int_min, minus_one});
  TermId ok = ts.mk(TermOp::And, {ts.mk(TermOp::Eq, {q, int_min}),
                                  ts.mk(TermOp::Eq, {r, ts.mk_const(0, 32)})});
  CHECK(solve_assertions(ts, {ok}, {}).sat);
  // bvudiv by zero is all-ones for every x
  TermId uq = ts.mk(TermOp::BvUdiv, {x, ts.mk_const(0, 32)});
  TermId bad = ts.mk(TermOp::Not, {ts.mk(TermOp::Eq, {uq, minus_one})});
  CHECK_FALSE(solve_assertions(ts, {bad}, {}).sat);
}

TEST_CASE("extract and extend line up with 64-bit multiplication") {
  TermStore ts;
  TermId a = ts.mk_const(0xffffffffu, 32);  // -1
  TermId b = ts.mk_const(2, 32);
  TermId prod = ts.mk(TermOp::BvMul, {ts.mk(TermOp::SignExtend, {a}, 32),
                                      ts.mk(TermOp::SignExtend, {b}, 32)});
  TermId lo = ts.mk(TermOp::Extract, {prod}, 31, 0);
  TermId hi = ts.mk(TermOp::Extract, {prod}, 63, 32);
  TermId ok = ts.mk(TermOp::And, {ts.mk(TermOp::Eq, {lo, ts.mk_const(0xfffffffeu, 32)}),
                                  ts.mk(TermOp::Eq, {hi, ts.mk_const(0xffffffffu, 32)})});
  CHECK(solve_assertions(ts, {ok}, {}).sat);
}

// ---------------------------------------------------------------------------
// Arrays

TEST_CASE("select over store honors aliasing both ways") {
  TermStore ts;
  Sort arr_sort = Sort::array(32, 32);
  TermId mem1 = ts.mk_var("mem_1", arr_sort);
  TermId mem2 = ts.mk_var("mem_2", arr_sort);
  TermId a = ts.mk_var("a", Sort::bv(32));
  TermId b = ts.mk_var("b", Sort::bv(32));
  TermId v = ts.mk_var("v", Sort::bv(32));
  TermId def = ts.mk(TermOp::Eq, {mem2, ts.mk(TermOp::Store, {mem1, a, v})});

  SUBCASE("same address reads the stored value") {
    TermId sel = ts.mk(TermOp::Select, {mem2, a});
    TermId bad = ts.mk(TermOp::Not, {ts.mk(TermOp::Eq, {sel, v})});
    CHECK_FALSE(solve_assertions(ts, {def, bad}, {}).sat);
  }
  SUBCASE("distinct addresses read through to the base array") {
    TermId sel_b2 = ts.mk(TermOp::Select, {mem2, b});
    TermId sel_b1 = ts.mk(TermOp::Select, {mem1, b});
    TermId distinct = ts.mk(TermOp::Not, {ts.mk(TermOp::Eq, {a, b})});
    TermId bad = ts.mk(TermOp::Not, {ts.mk(TermOp::Eq, {sel_b2, sel_b1})});
    CHECK_FALSE(solve_assertions(ts, {def, distinct, bad}, {}).sat);
  }
  SUBCASE("aliased base selects are congruent") {
    TermId s1 = ts.mk(TermOp::Select, {mem1, a});
    TermId s2 = ts.mk(TermOp::Select, {mem1, b});
    TermId same = ts.mk(TermOp::Eq, {a, b});
    TermId bad = ts.mk(TermOp::Not, {ts.mk(TermOp::Eq, {s1, s2})});
    CHECK_FALSE(solve_assertions(ts, {same, bad}, {}).sat);
    // without the address equality the values are free
    CHECK(solve_assertions(ts, {bad}, {}).sat);
  }
}

// ---------------------------------------------------------------------------
// SMT-LIB session

namespace {

std::string run_script(const std::string& script) {
  std::istringstream in(script);
  std::ostringstream out;
  run_session(in, out);
  return out.str();
}

}  // namespace

TEST_CASE("session answers check-sat and prints models") {
  std::string out = run_script(
      "(set-logic QF_ABV)\n"
      "(declare-const x (_ BitVec 32))\n"
      "(assert (= x (_ bv7 32)))\n"
      "(check-sat)\n"
      "(get-model)\n"
      "(exit)\n");
  CHECK(out.find("sat\n") == 0);
  CHECK(out.find("(define-fun x () (_ BitVec 32) #x00000007)") != std::string::npos);
}

TEST_CASE("session reports unsat") {
  std::string out = run_script(
      "(declare-const x (_ BitVec 8))\n"
      "(assert (bvult x x))\n"
      "(check-sat)\n(exit)\n");
  CHECK(out == "unsat\n");
}

TEST_CASE("hex and binary literals parse with their natural widths") {
  std::string out = run_script(
      "(declare-const x (_ BitVec 8))\n"
      "(assert (= x #b00000011))\n"
      "(assert (= x #x03))\n"
      "(check-sat)\n(exit)\n");
  CHECK(out == "sat\n");
}

TEST_CASE("declare-fun with no arguments behaves like declare-const") {
  std::string out = run_script(
      "(declare-fun x () (_ BitVec 8))\n"
      "(assert (= x #x2a))\n(check-sat)\n(get-model)\n(exit)\n");
  CHECK(out.find("sat") == 0);
  CHECK(out.find("#x2a") != std::string::npos);
}

TEST_CASE("errors are reported inline without terminating the session") {
  std::string out = run_script(
      "(frobnicate)\n"
      "(declare-const x (_ BitVec 8))\n"
      "(assert (= x #x01))\n(check-sat)\n(exit)\n");
  CHECK(out.find("(error") == 0);
  CHECK(out.find("sat\n") != std::string::npos);
}

TEST_CASE("get-model before sat is an error") {
  std::string out = run_script("(get-model)\n(exit)\n");
  CHECK(out.find("(error") == 0);
}

TEST_CASE("unbalanced input is an error, not a hang") {
  std::string out = run_script("(assert (= x");
  CHECK(out.find("(error") == 0);
}
