#include "minismt/bitblast.hpp"

#include <cassert>
#include <set>
#include <tuple>
#include <unordered_map>

namespace minismt {

namespace {

// ---------------------------------------------------------------------------
// Array elimination.
//
// Assertions of the shape (= arrayVar arrayTerm) are treated as
// definitions and substituted; selects are pushed through store chains
// with read-over-write; what remains are selects on undefined base
// arrays, which become fresh bitvector variables constrained pairwise by
// index congruence (Ackermann expansion).

class ArrayEliminator {
 public:
  ArrayEliminator(TermStore& ts) : ts_(ts) {}

  std::vector<TermId> run(const std::vector<TermId>& assertions) {
    collect_definitions(assertions);
    std::vector<TermId> out;
    for (size_t i = 0; i < assertions.size(); ++i) {
      if (consumed_.count(assertions[i])) continue;
      out.push_back(rewrite(assertions[i]));
    }
    add_congruence(out);
    return out;
  }

 private:
  void collect_definitions(const std::vector<TermId>& assertions) {
    for (TermId a : assertions) {
      const Term& t = ts_.at(a);
      if (t.op != TermOp::Eq) continue;
      TermId lhs = t.args[0], rhs = t.args[1];
      if (ts_.sort_of(lhs).kind != SortKind::Array) continue;
      if (ts_.at(lhs).op != TermOp::Var) std::swap(lhs, rhs);
      if (ts_.at(lhs).op != TermOp::Var) throw SmtError("array equality is not supported");
      if (defs_.count(lhs)) throw SmtError("array redefined: " + ts_.at(lhs).name);
      defs_[lhs] = rhs;
      consumed_.insert(a);
    }
  }

  // Resolves an array-sorted term to a Store chain over a base Var.
  TermId resolve_array(TermId id) {
    const Term& t = ts_.at(id);
    if (t.op == TermOp::Var) {
      auto it = defs_.find(id);
      if (it == defs_.end()) return id;  // base array
      if (!resolving_.insert(id).second)
        throw SmtError("cyclic array definition: " + t.name);
      TermId r = resolve_array(it->second);
      resolving_.erase(id);
      return r;
    }
    if (t.op == TermOp::Store) {
      TermId base = resolve_array(t.args[0]);
      TermId idx = rewrite(t.args[1]);
      TermId val = rewrite(t.args[2]);
      return ts_.mk(TermOp::Store, {base, idx, val});
    }
    throw SmtError("unsupported array expression");
  }

  TermId select_from(TermId array, TermId index) {
    const Term& arr = ts_.at(array);
    if (arr.op == TermOp::Store) {
      TermId hit = ts_.mk(TermOp::Eq, {arr.args[1], index});
      TermId miss = select_from(arr.args[0], index);
      return ts_.mk(TermOp::Ite, {hit, arr.args[2], miss});
    }
    assert(arr.op == TermOp::Var);
    auto key = std::make_pair(array, index);
    auto it = base_selects_.find(key);
    if (it != base_selects_.end()) return it->second;
    std::string name = "__sel" + std::to_string(base_selects_.size());
    TermId fresh = ts_.mk_var(name, Sort::bv(ts_.sort_of(array).elem_width));
    base_selects_.emplace(key, fresh);
    by_base_[array].push_back({index, fresh});
    return fresh;
  }

  TermId rewrite(TermId id) {
    auto memo = memo_.find(id);
    if (memo != memo_.end()) return memo->second;
    const Term& t = ts_.at(id);
    TermId out;
    if (t.op == TermOp::Select) {
      TermId array = resolve_array(t.args[0]);
      TermId index = rewrite(t.args[1]);
      out = select_from(array, index);
    } else if (t.sort.kind == SortKind::Array) {
      throw SmtError("array term outside select/store context");
    } else {
      bool changed = false;
      std::vector<TermId> args;
      args.reserve(t.args.size());
      for (TermId a : t.args) {
        if (ts_.sort_of(a).kind == SortKind::Array)
          throw SmtError("array operand outside select/store context");
        TermId r = rewrite(a);
        changed |= r != a;
        args.push_back(r);
      }
      out = changed ? ts_.mk(t.op, std::move(args), t.aux0, t.aux1) : id;
    }
    memo_.emplace(id, out);
    return out;
  }

  void add_congruence(std::vector<TermId>& out) {
    for (const auto& [base, selects] : by_base_) {
      for (size_t i = 0; i < selects.size(); ++i) {
        for (size_t j = i + 1; j < selects.size(); ++j) {
          TermId same_index = ts_.mk(TermOp::Eq, {selects[i].first, selects[j].first});
          TermId same_value = ts_.mk(TermOp::Eq, {selects[i].second, selects[j].second});
          out.push_back(ts_.mk(TermOp::Or,
                               {ts_.mk(TermOp::Not, {same_index}), same_value}));
        }
      }
    }
  }

  TermStore& ts_;
  std::map<TermId, TermId> defs_;
  std::set<TermId> consumed_;
  std::set<TermId> resolving_;
  std::map<TermId, TermId> memo_;
  std::map<std::pair<TermId, TermId>, TermId> base_selects_;
  std::map<TermId, std::vector<std::pair<TermId, TermId>>> by_base_;
};

// ---------------------------------------------------------------------------
// Tseitin encoding with constant folding and gate sharing.

class Blaster {
 public:
  Blaster(TermStore& ts, SatSolver& sat) : ts_(ts), sat_(sat) {
    tru_ = sat_.true_lit();
    fls_ = sat_.false_lit();
  }

  void assert_term(TermId id) { sat_.add_clause({blast_bool(id)}); }

  const std::vector<Lit>* bits_of(TermId id) const {
    auto it = bv_.find(id);
    return it == bv_.end() ? nullptr : &it->second;
  }

  Lit blast_bool(TermId id) {
    auto memo = bools_.find(id);
    if (memo != bools_.end()) return memo->second;
    const Term& t = ts_.at(id);
    Lit out;
    switch (t.op) {
      case TermOp::TrueConst: out = tru_; break;
      case TermOp::FalseConst: out = fls_; break;
      case TermOp::Var: out = mk_lit(sat_.new_var()); break;
      case TermOp::Not: out = negate(blast_bool(t.args[0])); break;
      case TermOp::And: {
        out = tru_;
        for (TermId a : t.args) out = land(out, blast_bool(a));
        break;
      }
      case TermOp::Or: {
        out = fls_;
        for (TermId a : t.args) out = lor(out, blast_bool(a));
        break;
      }
      case TermOp::Ite:
        out = lmux(blast_bool(t.args[0]), blast_bool(t.args[1]), blast_bool(t.args[2]));
        break;
      case TermOp::Eq: {
        if (ts_.sort_of(t.args[0]).kind == SortKind::Bool) {
          out = negate(lxor(blast_bool(t.args[0]), blast_bool(t.args[1])));
        } else {
          out = eq_vec(blast_bv(t.args[0]), blast_bv(t.args[1]));
        }
        break;
      }
      case TermOp::BvUlt:
        out = ult(blast_bv(t.args[0]), blast_bv(t.args[1]));
        break;
      case TermOp::BvSlt: {
        std::vector<Lit> a = blast_bv(t.args[0]);
        std::vector<Lit> b = blast_bv(t.args[1]);
        a.back() = negate(a.back());  // signed order = unsigned with sign flipped
        b.back() = negate(b.back());
        out = ult(a, b);
        break;
      }
      default:
        throw SmtError("expected a boolean term");
    }
    bools_.emplace(id, out);
    return out;
  }

  // Bits are least-significant first.
  std::vector<Lit> blast_bv(TermId id) {
    auto memo = bv_.find(id);
    if (memo != bv_.end()) return memo->second;
    const Term& t = ts_.at(id);
    int w = t.sort.width;
    std::vector<Lit> out;
    switch (t.op) {
      case TermOp::Const:
        for (int i = 0; i < w; ++i)
          out.push_back((t.value >> i) & 1 ? tru_ : fls_);
        break;
      case TermOp::Var:
        for (int i = 0; i < w; ++i) out.push_back(mk_lit(sat_.new_var()));
        break;
      case TermOp::Ite: {
        Lit c = blast_bool(t.args[0]);
        out = mux_vec(c, blast_bv(t.args[1]), blast_bv(t.args[2]));
        break;
      }
      case TermOp::BvAdd:
        out = add_vec(blast_bv(t.args[0]), blast_bv(t.args[1]), fls_, nullptr);
        break;
      case TermOp::BvSub: {
        std::vector<Lit> b = blast_bv(t.args[1]);
        for (Lit& l : b) l = negate(l);
        out = add_vec(blast_bv(t.args[0]), b, tru_, nullptr);
        break;
      }
      case TermOp::BvNeg:
        out = neg_vec(blast_bv(t.args[0]));
        break;
      case TermOp::BvMul:
        out = mul_vec(blast_bv(t.args[0]), blast_bv(t.args[1]), w);
        break;
      case TermOp::BvUdiv:
      case TermOp::BvUrem: {
        auto [q, r] = udivrem(t.args[0], t.args[1]);
        out = t.op == TermOp::BvUdiv ? q : r;
        break;
      }
      case TermOp::BvSdiv:
      case TermOp::BvSrem: {
        auto [q, r] = sdivrem(t.args[0], t.args[1]);
        out = t.op == TermOp::BvSdiv ? q : r;
        break;
      }
      case TermOp::Extract: {
        std::vector<Lit> a = blast_bv(t.args[0]);
        out.assign(a.begin() + t.aux1, a.begin() + t.aux0 + 1);
        break;
      }
      case TermOp::ZeroExtend: {
        out = blast_bv(t.args[0]);
        out.resize(static_cast<size_t>(w), fls_);
        break;
      }
      case TermOp::SignExtend: {
        out = blast_bv(t.args[0]);
        Lit sign = out.back();
        out.resize(static_cast<size_t>(w), sign);
        break;
      }
      case TermOp::Concat: {
        out = blast_bv(t.args[1]);  // low part
        std::vector<Lit> high = blast_bv(t.args[0]);
        out.insert(out.end(), high.begin(), high.end());
        break;
      }
      default:
        throw SmtError("expected a bitvector term");
    }
    assert(static_cast<int>(out.size()) == w);
    bv_.emplace(id, out);
    return out;
  }

 private:
  Lit land(Lit a, Lit b) {
    if (a == fls_ || b == fls_) return fls_;
    if (a == tru_) return b;
    if (b == tru_) return a;
    if (a == b) return a;
    if (a == negate(b)) return fls_;
    if (a > b) std::swap(a, b);
    auto key = std::make_pair(a, b);
    auto it = and_cache_.find(key);
    if (it != and_cache_.end()) return it->second;
    Lit g = mk_lit(sat_.new_var());
    sat_.add_clause({negate(g), a});
    sat_.add_clause({negate(g), b});
    sat_.add_clause({g, negate(a), negate(b)});
    and_cache_.emplace(key, g);
    return g;
  }

  Lit lor(Lit a, Lit b) { return negate(land(negate(a), negate(b))); }

  Lit lxor(Lit a, Lit b) {
    if (a == fls_) return b;
    if (b == fls_) return a;
    if (a == tru_) return negate(b);
    if (b == tru_) return negate(a);
    if (a == b) return fls_;
    if (a == negate(b)) return tru_;
    bool flip = false;
    if (sign_of(a)) { a = negate(a); flip = !flip; }
    if (sign_of(b)) { b = negate(b); flip = !flip; }
    if (a > b) std::swap(a, b);
    auto key = std::make_pair(a, b);
    auto it = xor_cache_.find(key);
    Lit g;
    if (it != xor_cache_.end()) {
      g = it->second;
    } else {
      g = mk_lit(sat_.new_var());
      sat_.add_clause({negate(g), a, b});
      sat_.add_clause({negate(g), negate(a), negate(b)});
      sat_.add_clause({g, negate(a), b});
      sat_.add_clause({g, a, negate(b)});
      xor_cache_.emplace(key, g);
    }
    return flip ? negate(g) : g;
  }

  Lit lmux(Lit c, Lit t, Lit e) {
    if (c == tru_) return t;
    if (c == fls_) return e;
    if (t == e) return t;
    if (t == tru_ && e == fls_) return c;
    if (t == fls_ && e == tru_) return negate(c);
    if (t == fls_) return land(negate(c), e);
    if (t == tru_) return lor(c, e);
    if (e == fls_) return land(c, t);
    if (e == tru_) return lor(negate(c), t);
    auto key = std::make_tuple(c, t, e);
    auto it = mux_cache_.find(key);
    if (it != mux_cache_.end()) return it->second;
    Lit g = mk_lit(sat_.new_var());
    sat_.add_clause({negate(g), negate(c), t});
    sat_.add_clause({negate(g), c, e});
    sat_.add_clause({g, negate(c), negate(t)});
    sat_.add_clause({g, c, negate(e)});
    sat_.add_clause({g, negate(t), negate(e)});
    sat_.add_clause({negate(g), t, e});
    mux_cache_.emplace(key, g);
    return g;
  }

  std::vector<Lit> mux_vec(Lit c, const std::vector<Lit>& t, const std::vector<Lit>& e) {
    std::vector<Lit> out(t.size());
    for (size_t i = 0; i < t.size(); ++i) out[i] = lmux(c, t[i], e[i]);
    return out;
  }

  std::vector<Lit> add_vec(const std::vector<Lit>& a, const std::vector<Lit>& b,
                           Lit carry, Lit* carry_out) {
    std::vector<Lit> out(a.size());
    for (size_t i = 0; i < a.size(); ++i) {
      Lit axb = lxor(a[i], b[i]);
      out[i] = lxor(axb, carry);
      carry = lor(land(a[i], b[i]), land(axb, carry));
    }
    if (carry_out != nullptr) *carry_out = carry;
    return out;
  }

  std::vector<Lit> neg_vec(const std::vector<Lit>& a) {
    std::vector<Lit> flipped(a.size());
    for (size_t i = 0; i < a.size(); ++i) flipped[i] = negate(a[i]);
    std::vector<Lit> one(a.size(), fls_);
    one[0] = tru_;
    return add_vec(flipped, one, fls_, nullptr);
  }

  // Shift-and-add multiplier, result truncated to `width` bits.
  std::vector<Lit> mul_vec(const std::vector<Lit>& a, const std::vector<Lit>& b,
                           int width) {
    std::vector<Lit> acc(static_cast<size_t>(width), fls_);
    for (int i = 0; i < width; ++i) {
      if (b[static_cast<size_t>(i)] == fls_) continue;
      std::vector<Lit> partial(static_cast<size_t>(width), fls_);
      for (int j = 0; i + j < width; ++j)
        partial[static_cast<size_t>(i + j)] =
            land(a[static_cast<size_t>(j)], b[static_cast<size_t>(i)]);
      acc = add_vec(acc, partial, fls_, nullptr);
    }
    return acc;
  }

  Lit eq_vec(const std::vector<Lit>& a, const std::vector<Lit>& b) {
    Lit acc = tru_;
    for (size_t i = 0; i < a.size(); ++i) acc = land(acc, negate(lxor(a[i], b[i])));
    return acc;
  }

  Lit ult(const std::vector<Lit>& a, const std::vector<Lit>& b) {
    Lit lt = fls_;
    for (size_t i = 0; i < a.size(); ++i)
      lt = lmux(lxor(a[i], b[i]), b[i], lt);
    return lt;
  }

  std::vector<Lit> fresh_vec(int w) {
    std::vector<Lit> v(static_cast<size_t>(w));
    for (Lit& l : v) l = mk_lit(sat_.new_var());
    return v;
  }

  std::vector<Lit> zext(const std::vector<Lit>& a, int w) {
    std::vector<Lit> out = a;
    out.resize(static_cast<size_t>(w), fls_);
    return out;
  }

  // Unsigned division with SMT-LIB zero semantics: q = ~0 and r = n when
  // the divisor is zero; otherwise q*d + r = n with r < d, enforced at
  // double width so the product cannot wrap.
  std::pair<std::vector<Lit>, std::vector<Lit>> udivrem(TermId nid, TermId did) {
    auto key = std::make_pair(nid, did);
    auto it = udiv_cache_.find(key);
    if (it != udiv_cache_.end()) return it->second;
    std::vector<Lit> n = blast_bv(nid);
    std::vector<Lit> d = blast_bv(did);
    int w = static_cast<int>(n.size());
    std::vector<Lit> q = fresh_vec(w);
    std::vector<Lit> r = fresh_vec(w);

    Lit zero_div = eq_vec(d, std::vector<Lit>(static_cast<size_t>(w), fls_));
    std::vector<Lit> prod = mul_vec(zext(q, 2 * w), zext(d, 2 * w), 2 * w);
    Lit carry = fls_;
    std::vector<Lit> sum = add_vec(prod, zext(r, 2 * w), fls_, &carry);
    Lit fits = land(eq_vec(sum, zext(n, 2 * w)), negate(carry));
    Lit in_range = ult(r, d);
    Lit normal_ok = land(fits, in_range);
    Lit zero_ok = land(eq_vec(q, std::vector<Lit>(static_cast<size_t>(w), tru_)),
                       eq_vec(r, n));
    sat_.add_clause({lmux(zero_div, zero_ok, normal_ok)});

    auto result = std::make_pair(q, r);
    udiv_cache_.emplace(key, result);
    return result;
  }

  // Signed division via unsigned division of magnitudes, matching the
  // SMT-LIB bvsdiv/bvsrem case expansion (including division by zero).
  std::pair<std::vector<Lit>, std::vector<Lit>> sdivrem(TermId nid, TermId did) {
    auto key = std::make_pair(nid, did);
    auto it = sdiv_cache_.find(key);
    if (it != sdiv_cache_.end()) return it->second;
    std::vector<Lit> n = blast_bv(nid);
    std::vector<Lit> d = blast_bv(did);
    int w = static_cast<int>(n.size());
    Lit n_neg = n.back();
    Lit d_neg = d.back();
    std::vector<Lit> abs_n = mux_vec(n_neg, neg_vec(n), n);
    std::vector<Lit> abs_d = mux_vec(d_neg, neg_vec(d), d);

    // Shared magnitude division, keyed separately from the unsigned op.
    std::vector<Lit> q = fresh_vec(w);
    std::vector<Lit> r = fresh_vec(w);
    Lit zero_div = eq_vec(abs_d, std::vector<Lit>(static_cast<size_t>(w), fls_));
    Lit carry = fls_;
    std::vector<Lit> prod = mul_vec(zext(q, 2 * w), zext(abs_d, 2 * w), 2 * w);
    std::vector<Lit> sum = add_vec(prod, zext(r, 2 * w), fls_, &carry);
    Lit fits = land(eq_vec(sum, zext(abs_n, 2 * w)), negate(carry));
    Lit normal_ok = land(fits, ult(r, abs_d));
    Lit zero_ok = land(eq_vec(q, std::vector<Lit>(static_cast<size_t>(w), tru_)),
                       eq_vec(r, abs_n));
    sat_.add_clause({lmux(zero_div, zero_ok, normal_ok)});

    std::vector<Lit> sdiv = mux_vec(lxor(n_neg, d_neg), neg_vec(q), q);
    std::vector<Lit> srem = mux_vec(n_neg, neg_vec(r), r);
    auto result = std::make_pair(sdiv, srem);
    sdiv_cache_.emplace(key, result);
    return result;
  }

  TermStore& ts_;
  SatSolver& sat_;
  Lit tru_, fls_;
  std::unordered_map<TermId, Lit> bools_;
  std::unordered_map<TermId, std::vector<Lit>> bv_;
  std::map<std::pair<Lit, Lit>, Lit> and_cache_;
  std::map<std::pair<Lit, Lit>, Lit> xor_cache_;
  std::map<std::tuple<Lit, Lit, Lit>, Lit> mux_cache_;
  std::map<std::pair<TermId, TermId>, std::pair<std::vector<Lit>, std::vector<Lit>>>
      udiv_cache_, sdiv_cache_;
};

}  // namespace

SolveResult solve_assertions(TermStore& store, const std::vector<TermId>& assertions,
                             const std::vector<std::pair<std::string, TermId>>& model_vars) {
  ArrayEliminator arrays(store);
  std::vector<TermId> ground = arrays.run(assertions);

  SatSolver sat;
  Blaster blaster(store, sat);
  for (TermId a : ground) blaster.assert_term(a);

  SolveResult result;
  result.sat = sat.solve();
  if (!result.sat) return result;

  for (const auto& [name, id] : model_vars) {
    if (store.sort_of(id).kind != SortKind::Bv) continue;
    const std::vector<Lit>* bits = blaster.bits_of(id);
    uint64_t value = 0;
    if (bits != nullptr) {
      for (size_t i = 0; i < bits->size(); ++i)
        if (sat.lit_value((*bits)[i])) value |= uint64_t(1) << i;
    }
    result.model.emplace(name, value);
  }
  return result;
}

}  // namespace minismt
