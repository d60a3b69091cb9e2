#include "minismt/term.hpp"

namespace minismt {

std::string Sort::to_string() const {
  switch (kind) {
    case SortKind::Bool: return "Bool";
    case SortKind::Bv: return "(_ BitVec " + std::to_string(width) + ")";
    case SortKind::Array:
      return "(Array (_ BitVec " + std::to_string(index_width) + ") (_ BitVec " +
             std::to_string(elem_width) + "))";
  }
  return "?";
}

namespace {

uint64_t mask_width(uint64_t v, int width) {
  return width >= 64 ? v : (v & ((uint64_t(1) << width) - 1));
}

void require(bool cond, const std::string& msg) {
  if (!cond) throw SmtError(msg);
}

}  // namespace

TermId TermStore::mk_var(const std::string& name, Sort sort) {
  if (sort.kind == SortKind::Bv)
    require(sort.width >= 1 && sort.width <= 64, "bitvector width out of range");
  Term t;
  t.op = TermOp::Var;
  t.sort = sort;
  t.name = name;
  return intern(std::move(t));
}

TermId TermStore::mk_const(uint64_t value, int width) {
  require(width >= 1 && width <= 64, "bitvector width out of range");
  Term t;
  t.op = TermOp::Const;
  t.sort = Sort::bv(width);
  t.value = mask_width(value, width);
  return intern(std::move(t));
}

TermId TermStore::mk_bool(bool value) {
  Term t;
  t.op = value ? TermOp::TrueConst : TermOp::FalseConst;
  t.sort = Sort::boolean();
  return intern(std::move(t));
}

Sort TermStore::infer_sort(const Term& t) const {
  auto arg_sort = [&](size_t i) { return at(t.args[i]).sort; };
  auto require_bv_pair = [&]() {
    require(t.args.size() == 2, "operator expects two arguments");
    require(arg_sort(0).kind == SortKind::Bv && arg_sort(0) == arg_sort(1),
            "operands must be bitvectors of equal width");
    return arg_sort(0);
  };

  switch (t.op) {
    case TermOp::Eq: {
      require(t.args.size() == 2, "= expects two arguments");
      require(arg_sort(0) == arg_sort(1), "= operands must share a sort");
      return Sort::boolean();
    }
    case TermOp::Not:
      require(t.args.size() == 1 && arg_sort(0).kind == SortKind::Bool,
              "not expects one boolean");
      return Sort::boolean();
    case TermOp::And:
    case TermOp::Or: {
      require(!t.args.empty(), "and/or expects arguments");
      for (size_t i = 0; i < t.args.size(); ++i)
        require(arg_sort(i).kind == SortKind::Bool, "and/or expects booleans");
      return Sort::boolean();
    }
    case TermOp::Ite: {
      require(t.args.size() == 3, "ite expects three arguments");
      require(arg_sort(0).kind == SortKind::Bool, "ite condition must be boolean");
      require(arg_sort(1) == arg_sort(2), "ite branches must share a sort");
      return arg_sort(1);
    }
    case TermOp::BvAdd:
    case TermOp::BvSub:
    case TermOp::BvMul:
    case TermOp::BvUdiv:
    case TermOp::BvUrem:
    case TermOp::BvSdiv:
    case TermOp::BvSrem:
      return require_bv_pair();
    case TermOp::BvNeg:
      require(t.args.size() == 1 && arg_sort(0).kind == SortKind::Bv,
              "bvneg expects one bitvector");
      return arg_sort(0);
    case TermOp::BvUlt:
    case TermOp::BvSlt:
      require_bv_pair();
      return Sort::boolean();
    case TermOp::Extract: {
      require(t.args.size() == 1 && arg_sort(0).kind == SortKind::Bv,
              "extract expects one bitvector");
      require(t.aux0 >= t.aux1 && t.aux1 >= 0 && t.aux0 < arg_sort(0).width,
              "extract bounds out of range");
      return Sort::bv(t.aux0 - t.aux1 + 1);
    }
    case TermOp::ZeroExtend:
    case TermOp::SignExtend: {
      require(t.args.size() == 1 && arg_sort(0).kind == SortKind::Bv,
              "extend expects one bitvector");
      int w = arg_sort(0).width + t.aux0;
      require(w <= 64, "extended width exceeds 64 bits");
      return Sort::bv(w);
    }
    case TermOp::Concat: {
      require(t.args.size() == 2 && arg_sort(0).kind == SortKind::Bv &&
                  arg_sort(1).kind == SortKind::Bv,
              "concat expects two bitvectors");
      int w = arg_sort(0).width + arg_sort(1).width;
      require(w <= 64, "concatenated width exceeds 64 bits");
      return Sort::bv(w);
    }
    case TermOp::Select: {
      require(t.args.size() == 2, "select expects two arguments");
      Sort arr = arg_sort(0);
      require(arr.kind == SortKind::Array, "select expects an array");
      require(arg_sort(1) == Sort::bv(arr.index_width), "select index width mismatch");
      return Sort::bv(arr.elem_width);
    }
    case TermOp::Store: {
      require(t.args.size() == 3, "store expects three arguments");
      Sort arr = arg_sort(0);
      require(arr.kind == SortKind::Array, "store expects an array");
      require(arg_sort(1) == Sort::bv(arr.index_width), "store index width mismatch");
      require(arg_sort(2) == Sort::bv(arr.elem_width), "store value width mismatch");
      return arr;
    }
    case TermOp::Var:
    case TermOp::Const:
    case TermOp::TrueConst:
    case TermOp::FalseConst:
      return t.sort;
  }
  throw SmtError("unknown operator");
}

TermId TermStore::mk(TermOp op, std::vector<TermId> args, int aux0, int aux1) {
  Term t;
  t.op = op;
  t.args = std::move(args);
  t.aux0 = aux0;
  t.aux1 = aux1;
  t.sort = infer_sort(t);
  return intern(std::move(t));
}

TermId TermStore::intern(Term t) {
  std::string key;
  key += static_cast<char>(static_cast<int>(t.op) + 1);
  key += t.sort.to_string();
  key += '|';
  key += std::to_string(t.value);
  key += '|';
  key += std::to_string(t.aux0) + ":" + std::to_string(t.aux1);
  key += '|';
  key += t.name;
  for (TermId a : t.args) key += "," + std::to_string(a);
  auto it = index_.find(key);
  if (it != index_.end()) return it->second;
  TermId id = static_cast<TermId>(terms_.size());
  terms_.push_back(std::move(t));
  index_.emplace(std::move(key), id);
  return id;
}

}  // namespace minismt
