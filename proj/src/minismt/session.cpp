#include "minismt/session.hpp"

#include <charconv>
#include <ostream>

#include "minismt/bitblast.hpp"

namespace minismt {

namespace {

uint64_t parse_u64(const std::string& text, int base, const std::string& what) {
  uint64_t value = 0;
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), value, base);
  if (ec != std::errc() || p != text.data() + text.size())
    throw SmtError("malformed " + what + ": " + text);
  return value;
}

std::string hex_digits(uint64_t value, int width) {
  int digits = width / 4;
  std::string out(static_cast<size_t>(digits), '0');
  for (int i = digits - 1; i >= 0; --i) {
    out[static_cast<size_t>(digits - 1 - i)] = "0123456789abcdef"[(value >> (4 * i)) & 0xf];
  }
  return out;
}

}  // namespace

Sort Session::parse_sort(const Sexpr& s) const {
  if (s.is_atom()) {
    if (s.atom == "Bool") return Sort::boolean();
    throw SmtError("unsupported sort: " + s.atom);
  }
  if (s.items.size() == 3 && s.items[0].atom == "_" && s.items[1].atom == "BitVec") {
    int w = static_cast<int>(parse_u64(s.items[2].atom, 10, "bitvector width"));
    return Sort::bv(w);
  }
  if (s.items.size() == 3 && s.items[0].atom == "Array") {
    Sort index = parse_sort(s.items[1]);
    Sort elem = parse_sort(s.items[2]);
    if (index.kind != SortKind::Bv || elem.kind != SortKind::Bv)
      throw SmtError("only bitvector-indexed arrays are supported");
    return Sort::array(index.width, elem.width);
  }
  throw SmtError("unsupported sort: " + s.to_string());
}

TermId Session::build_term(const Sexpr& s) {
  if (s.is_atom()) {
    const std::string& a = s.atom;
    if (a == "true") return terms_.mk_bool(true);
    if (a == "false") return terms_.mk_bool(false);
    if (a.size() > 2 && a[0] == '#' && a[1] == 'x')
      return terms_.mk_const(parse_u64(a.substr(2), 16, "hex literal"),
                             static_cast<int>(a.size() - 2) * 4);
    if (a.size() > 2 && a[0] == '#' && a[1] == 'b')
      return terms_.mk_const(parse_u64(a.substr(2), 2, "binary literal"),
                             static_cast<int>(a.size() - 2));
    auto it = symbols_.find(a);
    if (it == symbols_.end()) throw SmtError("unknown symbol: " + a);
    return it->second;
  }

  if (s.items.empty()) throw SmtError("empty term");
  const Sexpr& head = s.items[0];

  // (_ bvN w)
  if (head.is_atom() && head.atom == "_") {
    if (s.items.size() == 3 && s.items[1].atom.rfind("bv", 0) == 0) {
      uint64_t value = parse_u64(s.items[1].atom.substr(2), 10, "bv literal");
      int width = static_cast<int>(parse_u64(s.items[2].atom, 10, "bv width"));
      return terms_.mk_const(value, width);
    }
    throw SmtError("unsupported indexed term: " + s.to_string());
  }

  // ((_ extract hi lo) x) and friends
  if (head.is_list()) {
    if (head.items.size() >= 2 && head.items[0].atom == "_") {
      const std::string& op = head.items[1].atom;
      if (op == "extract" && head.items.size() == 4 && s.items.size() == 2) {
        int hi = static_cast<int>(parse_u64(head.items[2].atom, 10, "extract bound"));
        int lo = static_cast<int>(parse_u64(head.items[3].atom, 10, "extract bound"));
        return terms_.mk(TermOp::Extract, {build_term(s.items[1])}, hi, lo);
      }
      if ((op == "zero_extend" || op == "sign_extend") && head.items.size() == 3 &&
          s.items.size() == 2) {
        int by = static_cast<int>(parse_u64(head.items[2].atom, 10, "extend amount"));
        return terms_.mk(op == "zero_extend" ? TermOp::ZeroExtend : TermOp::SignExtend,
                         {build_term(s.items[1])}, by);
      }
    }
    throw SmtError("unsupported term: " + s.to_string());
  }

  std::vector<TermId> args;
  args.reserve(s.items.size() - 1);
  for (size_t i = 1; i < s.items.size(); ++i) args.push_back(build_term(s.items[i]));
  const std::string& op = head.atom;

  auto nary_chain = [&](TermOp kind) {
    if (args.size() < 2) throw SmtError(op + " expects at least two arguments");
    TermId acc = args[0];
    for (size_t i = 1; i < args.size(); ++i) acc = terms_.mk(kind, {acc, args[i]});
    return acc;
  };

  if (op == "=") {
    if (args.size() < 2) throw SmtError("= expects at least two arguments");
    std::vector<TermId> eqs;
    for (size_t i = 0; i + 1 < args.size(); ++i)
      eqs.push_back(terms_.mk(TermOp::Eq, {args[i], args[i + 1]}));
    return eqs.size() == 1 ? eqs[0] : terms_.mk(TermOp::And, std::move(eqs));
  }
  if (op == "not") {
    if (args.size() != 1) throw SmtError("not expects one argument");
    return terms_.mk(TermOp::Not, std::move(args));
  }
  if (op == "and") return args.empty() ? terms_.mk_bool(true) : terms_.mk(TermOp::And, std::move(args));
  if (op == "or") return args.empty() ? terms_.mk_bool(false) : terms_.mk(TermOp::Or, std::move(args));
  if (op == "=>") {
    if (args.size() != 2) throw SmtError("=> expects two arguments");
    return terms_.mk(TermOp::Or, {terms_.mk(TermOp::Not, {args[0]}), args[1]});
  }
  if (op == "ite") return terms_.mk(TermOp::Ite, std::move(args));
  if (op == "bvadd") return nary_chain(TermOp::BvAdd);
  if (op == "bvmul") return nary_chain(TermOp::BvMul);
  if (op == "bvsub") {
    if (args.size() != 2) throw SmtError("bvsub expects two arguments");
    return terms_.mk(TermOp::BvSub, std::move(args));
  }
  if (op == "bvneg") {
    if (args.size() != 1) throw SmtError("bvneg expects one argument");
    return terms_.mk(TermOp::BvNeg, std::move(args));
  }
  if (op == "bvudiv") return terms_.mk(TermOp::BvUdiv, std::move(args));
  if (op == "bvurem") return terms_.mk(TermOp::BvUrem, std::move(args));
  if (op == "bvsdiv") return terms_.mk(TermOp::BvSdiv, std::move(args));
  if (op == "bvsrem") return terms_.mk(TermOp::BvSrem, std::move(args));
  if (op == "bvult") return terms_.mk(TermOp::BvUlt, std::move(args));
  if (op == "bvslt") return terms_.mk(TermOp::BvSlt, std::move(args));
  if (op == "bvule") {
    if (args.size() != 2) throw SmtError("bvule expects two arguments");
    return terms_.mk(TermOp::Not, {terms_.mk(TermOp::BvUlt, {args[1], args[0]})});
  }
  if (op == "bvsle") {
    if (args.size() != 2) throw SmtError("bvsle expects two arguments");
    return terms_.mk(TermOp::Not, {terms_.mk(TermOp::BvSlt, {args[1], args[0]})});
  }
  if (op == "bvugt") {
    if (args.size() != 2) throw SmtError("bvugt expects two arguments");
    return terms_.mk(TermOp::BvUlt, {args[1], args[0]});
  }
  if (op == "bvsgt") {
    if (args.size() != 2) throw SmtError("bvsgt expects two arguments");
    return terms_.mk(TermOp::BvSlt, {args[1], args[0]});
  }
  if (op == "concat") {
    if (args.size() != 2) throw SmtError("concat expects two arguments");
    return terms_.mk(TermOp::Concat, std::move(args));
  }
  if (op == "select") return terms_.mk(TermOp::Select, std::move(args));
  if (op == "store") return terms_.mk(TermOp::Store, std::move(args));
  if (op == "distinct") {
    if (args.size() != 2) throw SmtError("distinct expects two arguments");
    return terms_.mk(TermOp::Not, {terms_.mk(TermOp::Eq, std::move(args))});
  }
  throw SmtError("unsupported operator: " + op);
}

void Session::declare(const std::string& name, const Sexpr& sort_expr) {
  if (symbols_.count(name)) throw SmtError("symbol redeclared: " + name);
  Sort sort = parse_sort(sort_expr);
  TermId id = terms_.mk_var(name, sort);
  symbols_.emplace(name, id);
  declarations_.emplace_back(name, id);
}

void Session::do_check_sat(std::ostream& out) {
  SolveResult result = solve_assertions(terms_, assertions_, declarations_);
  sat_known_ = true;
  last_sat_ = result.sat;
  model_ = std::move(result.model);
  out << (last_sat_ ? "sat" : "unsat") << "\n";
}

void Session::do_get_model(std::ostream& out) const {
  if (!sat_known_ || !last_sat_) throw SmtError("model is not available");
  out << "(\n";
  for (const auto& [name, id] : declarations_) {
    Sort sort = terms_.sort_of(id);
    if (sort.kind != SortKind::Bv) continue;  // arrays are not reported
    uint64_t value = 0;
    auto it = model_.find(name);
    if (it != model_.end()) value = it->second;
    out << "  (define-fun " << name << " () " << sort.to_string() << " ";
    if (sort.width % 4 == 0) {
      out << "#x" << hex_digits(value, sort.width);
    } else {
      out << "#b";
      for (int i = sort.width - 1; i >= 0; --i) out << ((value >> i) & 1);
    }
    out << ")\n";
  }
  out << ")\n";
}

bool Session::execute(const Sexpr& cmd, std::ostream& out) {
  if (!cmd.is_list() || cmd.items.empty() || !cmd.items[0].is_atom())
    throw SmtError("malformed command: " + cmd.to_string());
  const std::string& name = cmd.items[0].atom;

  if (name == "exit") return false;
  if (name == "set-logic" || name == "set-option" || name == "set-info") return true;
  if (name == "declare-const") {
    if (cmd.items.size() != 3) throw SmtError("declare-const expects a name and a sort");
    declare(cmd.items[1].atom, cmd.items[2]);
    return true;
  }
  if (name == "declare-fun") {
    if (cmd.items.size() != 4 || !cmd.items[2].items.empty() || !cmd.items[2].atom.empty())
      throw SmtError("only zero-argument declare-fun is supported");
    declare(cmd.items[1].atom, cmd.items[3]);
    return true;
  }
  if (name == "assert") {
    if (cmd.items.size() != 2) throw SmtError("assert expects one term");
    TermId t = build_term(cmd.items[1]);
    if (terms_.sort_of(t).kind != SortKind::Bool)
      throw SmtError("asserted term is not boolean");
    assertions_.push_back(t);
    sat_known_ = false;
    return true;
  }
  if (name == "check-sat") {
    do_check_sat(out);
    return true;
  }
  if (name == "get-model") {
    do_get_model(out);
    return true;
  }
  if (name == "reset") {
    *this = Session();
    return true;
  }
  throw SmtError("unsupported command: " + name);
}

int run_session(std::istream& in, std::ostream& out) {
  Session session;
  SexprReader reader(in);
  for (;;) {
    std::optional<Sexpr> cmd;
    try {
      cmd = reader.next();
    } catch (const std::exception& e) {
      out << "(error \"" << e.what() << "\")" << std::endl;
      return 1;
    }
    if (!cmd) return 0;
    try {
      if (!session.execute(*cmd, out)) {
        out.flush();
        return 0;
      }
    } catch (const SmtError& e) {
      out << "(error \"" << e.what() << "\")" << std::endl;
    }
    out.flush();
  }
}

}  // namespace minismt
