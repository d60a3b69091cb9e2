#include "diseq/trace.hpp"

#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace diseq {

std::string Var::name() const {
  std::string base;
  switch (id) {
    case kHi: base = "hi"; break;
    case kLo: base = "lo"; break;
    case kTmp64: base = "tmp64"; break;
    case kMem: base = "mem"; break;
    default: base = "r" + std::to_string(id); break;
  }
  if (version > 0) base += "_" + std::to_string(version);
  return base;
}

int Trace::path_cond_count() const {
  int n = 0;
  for (const auto& i : instrs)
    if (i.op == SymOp::PathCond) ++n;
  return n;
}

Trace desugar(const Trace& t) {
  Trace out;
  out.ssa = t.ssa;
  for (const auto& i : t.instrs) {
    switch (i.op) {
      case SymOp::Mult:
      case SymOp::Multu: {
        bool sign = i.op == SymOp::Mult;
        out.instrs.push_back(SymInstr::mult64(kTmp64Var, i.a, i.b, sign));
        out.instrs.push_back(SymInstr::low32(kLoVar, kTmp64Var));
        out.instrs.push_back(SymInstr::high32(kHiVar, kTmp64Var));
        break;
      }
      case SymOp::Div:
      case SymOp::Divu: {
        bool sign = i.op == SymOp::Div;
        out.instrs.push_back(SymInstr::quot(kLoVar, i.a, i.b, sign));
        out.instrs.push_back(SymInstr::rem(kHiVar, i.a, i.b, sign));
        break;
      }
      case SymOp::Mfhi:
        out.instrs.push_back(SymInstr::add(i.dst, kHiVar, reg_var(0)));
        break;
      case SymOp::Mflo:
        out.instrs.push_back(SymInstr::add(i.dst, kLoVar, reg_var(0)));
        break;
      case SymOp::Jalr:
        out.instrs.push_back(SymInstr::constant(reg_var(31), i.value));
        break;
      default:
        out.instrs.push_back(i);
        break;
    }
  }
  return out;
}

Trace simplify(const Trace& t) {
  Trace out;
  out.ssa = t.ssa;
  for (const auto& i : t.instrs) {
    if (i.op == SymOp::PathCond && i.rel == Rel::Eq && i.a == i.b) continue;
    out.instrs.push_back(i);
  }
  return out;
}

Trace trim(const Trace& t, int depth) {
  if (depth < 0) throw std::invalid_argument("trim: negative depth");
  if (t.path_cond_count() <= depth) return t;
  Trace out;
  out.ssa = t.ssa;
  int conds = 0;
  size_t end = 0;  // one past the depth-th path condition
  for (size_t k = 0; k < t.instrs.size(); ++k) {
    if (t.instrs[k].op != SymOp::PathCond) continue;
    if (++conds == depth) {
      end = k + 1;
      break;
    }
  }
  if (depth == 0) {
    // keep the assignment prefix before the first condition
    while (end < t.instrs.size() && t.instrs[end].op != SymOp::PathCond) ++end;
  }
  out.instrs.assign(t.instrs.begin(), t.instrs.begin() + static_cast<long>(end));
  return out;
}

namespace {

// Latest-version table used by the SSA pass. A variable first seen as a
// read gets version 1 (its initial value); a variable first seen as a
// write also gets version 1 (its first definition).
struct VersionTable {
  std::map<int, int> latest;

  Var use(Var v) {
    auto [it, fresh] = latest.emplace(v.id, 1);
    (void)fresh;
    return Var{v.id, it->second};
  }
  Var def(Var v) {
    auto [it, fresh] = latest.emplace(v.id, 1);
    if (!fresh) ++it->second;
    return Var{v.id, it->second};
  }
};

}  // namespace

Trace ssa_convert(const Trace& t) {
  if (t.ssa) return t;
  Trace out;
  out.ssa = true;
  VersionTable vt;
  for (const auto& i : t.instrs) {
    SymInstr n = i;
    switch (i.op) {
      case SymOp::Add:
      case SymOp::Sub:
      case SymOp::Slt:
      case SymOp::Sltu:
      case SymOp::Mult64:
      case SymOp::Quot:
      case SymOp::Rem:
        n.a = vt.use(i.a);
        n.b = vt.use(i.b);
        n.dst = vt.def(i.dst);
        break;
      case SymOp::Low32:
      case SymOp::High32:
        n.a = vt.use(i.a);
        n.dst = vt.def(i.dst);
        break;
      case SymOp::Const:
        n.dst = vt.def(i.dst);
        break;
      case SymOp::Lw:
        n.a = vt.use(i.a);
        n.mem_in = vt.use(kMemVar);
        n.dst = vt.def(i.dst);
        break;
      case SymOp::Sw:
        n.a = vt.use(i.a);
        n.b = vt.use(i.b);
        n.mem_in = vt.use(kMemVar);
        n.mem_out = vt.def(kMemVar);
        break;
      case SymOp::PathCond:
        n.a = vt.use(i.a);
        n.b = vt.use(i.b);
        break;
      case SymOp::Mult:
      case SymOp::Multu:
      case SymOp::Div:
      case SymOp::Divu:
      case SymOp::Mfhi:
      case SymOp::Mflo:
      case SymOp::Jalr:
        throw std::invalid_argument("ssa_convert: trace is not desugared");
    }
    out.instrs.push_back(n);
  }
  return out;
}

Trace transform(const Trace& t, int depth) {
  return ssa_convert(trim(simplify(desugar(t)), depth));
}

namespace {

struct SsaChecker {
  std::map<int, int> latest;
  std::set<std::pair<int, int>> defined;
  std::string error;

  bool use(Var v) {
    auto it = latest.find(v.id);
    if (it == latest.end()) {
      if (v.version != 1) {
        error = "first use of " + v.name() + " is not version 1";
        return false;
      }
      latest[v.id] = 1;
      return true;
    }
    if (v.version != it->second) {
      error = "use of " + v.name() + " does not name the latest version";
      return false;
    }
    return true;
  }

  bool def(Var v) {
    if (!defined.emplace(v.id, v.version).second) {
      error = v.name() + " is defined more than once";
      return false;
    }
    auto it = latest.find(v.id);
    int expect = it == latest.end() ? 1 : it->second + 1;
    if (v.version != expect) {
      error = "definition of " + v.name() + " skips versions";
      return false;
    }
    latest[v.id] = v.version;
    return true;
  }
};

}  // namespace

bool check_ssa(const Trace& t, std::string* why) {
  SsaChecker c;
  auto fail = [&](const std::string& msg) {
    if (why) *why = msg;
    return false;
  };
  if (!t.ssa) return fail("trace is not flagged ssa");
  for (const auto& i : t.instrs) {
    bool ok = true;
    switch (i.op) {
      case SymOp::Add:
      case SymOp::Sub:
      case SymOp::Slt:
      case SymOp::Sltu:
      case SymOp::Mult64:
      case SymOp::Quot:
      case SymOp::Rem:
        ok = c.use(i.a) && c.use(i.b) && c.def(i.dst);
        break;
      case SymOp::Low32:
      case SymOp::High32:
        ok = c.use(i.a) && c.def(i.dst);
        break;
      case SymOp::Const:
        ok = c.def(i.dst);
        break;
      case SymOp::Lw:
        ok = c.use(i.a) && c.use(i.mem_in) && c.def(i.dst);
        break;
      case SymOp::Sw:
        ok = c.use(i.a) && c.use(i.b) && c.use(i.mem_in) && c.def(i.mem_out);
        break;
      case SymOp::PathCond:
        ok = c.use(i.a) && c.use(i.b);
        break;
      default:
        return fail("raw multi-effect instruction in ssa trace");
    }
    if (!ok) return fail(c.error);
  }
  return true;
}

std::string to_string(const SymInstr& i) {
  std::ostringstream os;
  auto mem_addr = [&](Var base, int32_t off) {
    return base.name() + (off >= 0 ? " + " : " - ") + std::to_string(off >= 0 ? off : -off);
  };
  switch (i.op) {
    case SymOp::Add: os << i.dst.name() << " = add(" << i.a.name() << ", " << i.b.name() << ")"; break;
    case SymOp::Sub: os << i.dst.name() << " = sub(" << i.a.name() << ", " << i.b.name() << ")"; break;
    case SymOp::Slt: os << i.dst.name() << " = slt(" << i.a.name() << ", " << i.b.name() << ")"; break;
    case SymOp::Sltu: os << i.dst.name() << " = sltu(" << i.a.name() << ", " << i.b.name() << ")"; break;
    case SymOp::Mult: os << "mult(" << i.a.name() << ", " << i.b.name() << ")"; break;
    case SymOp::Multu: os << "multu(" << i.a.name() << ", " << i.b.name() << ")"; break;
    case SymOp::Div: os << "div(" << i.a.name() << ", " << i.b.name() << ")"; break;
    case SymOp::Divu: os << "divu(" << i.a.name() << ", " << i.b.name() << ")"; break;
    case SymOp::Mfhi: os << i.dst.name() << " = hi"; break;
    case SymOp::Mflo: os << i.dst.name() << " = lo"; break;
    case SymOp::Const: os << i.dst.name() << " = " << i.value; break;
    case SymOp::Lw:
      os << i.dst.name() << " = select(" << i.mem_in.name() << ", "
         << mem_addr(i.a, i.offset) << ")";
      break;
    case SymOp::Sw:
      os << i.mem_out.name() << " = store(" << i.mem_in.name() << ", "
         << mem_addr(i.b, i.offset) << ", " << i.a.name() << ")";
      break;
    case SymOp::Jalr: os << "r31 = " << hex_word(i.value) << " (jalr)"; break;
    case SymOp::PathCond:
      os << i.a.name() << (i.rel == Rel::Eq ? " == " : " != ") << i.b.name();
      break;
    case SymOp::Mult64:
      os << i.dst.name() << " = mult64" << (i.is_signed ? "s" : "u") << "("
         << i.a.name() << ", " << i.b.name() << ")";
      break;
    case SymOp::Low32: os << i.dst.name() << " = low32(" << i.a.name() << ")"; break;
    case SymOp::High32: os << i.dst.name() << " = high32(" << i.a.name() << ")"; break;
    case SymOp::Quot:
      os << i.dst.name() << " = quot" << (i.is_signed ? "s" : "u") << "("
         << i.a.name() << ", " << i.b.name() << ")";
      break;
    case SymOp::Rem:
      os << i.dst.name() << " = rem" << (i.is_signed ? "s" : "u") << "("
         << i.a.name() << ", " << i.b.name() << ")";
      break;
  }
  return os.str();
}

std::string to_string(const Trace& t) {
  std::string out;
  for (const auto& i : t.instrs) {
    out += to_string(i);
    out += '\n';
  }
  return out;
}

}  // namespace diseq
