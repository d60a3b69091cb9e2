#include "diseq/engine.hpp"

#include <algorithm>
#include <cassert>

namespace diseq {

Outcome outcome_of(const RunRes& r) {
  switch (r.status) {
    case RunRes::Status::Done: return Outcome::of_value(r.state.reg(3));
    case RunRes::Status::Error: return Outcome::of_error(r.error);
    case RunRes::Status::NotDone: return Outcome::timeout();
  }
  return Outcome::timeout();
}

std::string to_string(const Outcome& o) {
  switch (o.kind) {
    case Outcome::Kind::Value: return "$3 = " + std::to_string(o.value) + " (" + hex_word(o.value) + ")";
    case Outcome::Kind::Failed: return "error: " + to_string(o.error);
    case Outcome::Kind::Timeout: return "timeout";
  }
  return "?";
}

OutcomeRel compare_outcomes(const Outcome& a, const Outcome& b) {
  if (a.kind == Outcome::Kind::Timeout || b.kind == Outcome::Kind::Timeout)
    return OutcomeRel::NoInference;
  if (a.kind == Outcome::Kind::Failed && b.kind == Outcome::Kind::Failed)
    return OutcomeRel::Consistent;  // error kinds are not distinguished
  if (a.kind != b.kind) return OutcomeRel::Conflict;
  return a.value == b.value ? OutcomeRel::Consistent : OutcomeRel::Conflict;
}

std::vector<PathCondKey> path_conds(const Trace& ssa) {
  std::vector<PathCondKey> out;
  for (const auto& i : ssa.instrs)
    if (i.op == SymOp::PathCond) out.push_back({i.rel, i.a, i.b});
  return out;
}

// --------------------------------------------------------------------------
// PathStore

PathStore::Node* PathStore::find(std::span<const PathCondKey> prefix) {
  auto* level = &roots_;
  Node* node = nullptr;
  for (const auto& key : prefix) {
    auto it = level->find(key);
    if (it == level->end()) return nullptr;
    node = it->second.get();
    level = &node->children;
  }
  return node;
}

const PathStore::Node* PathStore::find(std::span<const PathCondKey> prefix) const {
  return const_cast<PathStore*>(this)->find(prefix);
}

void PathStore::insert(const Trace& ssa) {
  std::vector<PathCondKey> conds = path_conds(ssa);
  complete_paths_.insert(conds);

  auto* level = &roots_;
  size_t cond_index = 0;
  Trace prefix;
  prefix.ssa = true;
  for (const auto& instr : ssa.instrs) {
    prefix.instrs.push_back(instr);
    if (instr.op != SymOp::PathCond) continue;
    const PathCondKey& key = conds[cond_index++];
    auto it = level->find(key);
    if (it == level->end()) {
      auto node = std::make_unique<Node>();
      node->cond = key;
      node->prefix = prefix;
      ++untried_;
      it = level->emplace(key, std::move(node)).first;
    }
    level = &it->second->children;
  }
}

void PathStore::mark_attempted(Node* node) {
  if (node != nullptr && !node->attempted) {
    node->attempted = true;
    assert(untried_ > 0);
    --untried_;
  }
}

std::optional<PathStore::Target> PathStore::next_on_trace(const Trace& last) {
  std::vector<PathCondKey> conds = path_conds(last);
  for (size_t depth = conds.size(); depth > 0; --depth) {
    std::span<const PathCondKey> prefix(conds.data(), depth);
    Node* node = find(prefix);
    assert(node != nullptr);  // every observed trace was inserted
    if (node == nullptr || node->attempted) continue;
    // The flipped branch may have been observed already by another run.
    std::vector<PathCondKey> sibling(conds.begin(), conds.begin() + static_cast<long>(depth));
    sibling.back() = sibling.back().flipped_key();
    if (find(sibling) != nullptr) {
      mark_attempted(node);
      continue;
    }
    Target target;
    target.node = node;
    target.query.ssa = true;
    size_t seen = 0;
    for (const auto& instr : last.instrs) {
      SymInstr copy = instr;
      if (instr.op == SymOp::PathCond && ++seen == depth) {
        copy.rel = flipped(copy.rel);
        target.query.instrs.push_back(copy);
        break;
      }
      target.query.instrs.push_back(copy);
    }
    return target;
  }
  return std::nullopt;
}

std::optional<PathStore::Target> PathStore::next_anywhere() {
  // Deepest-first walk over the whole tree, mirroring the DFS order.
  struct Frame {
    Node* node;
    size_t depth;
  };
  Node* best = nullptr;
  size_t best_depth = 0;
  std::vector<Frame> stack;
  for (auto& [key, node] : roots_) stack.push_back({node.get(), 1});
  while (!stack.empty()) {
    Frame f = stack.back();
    stack.pop_back();
    if (!f.node->attempted && (best == nullptr || f.depth > best_depth)) {
      best = f.node;
      best_depth = f.depth;
    }
    for (auto& [key, child] : f.node->children)
      stack.push_back({child.get(), f.depth + 1});
  }
  if (best == nullptr) return std::nullopt;
  Target target;
  target.node = best;
  target.query = best->prefix;
  target.query.instrs.back().rel = flipped(target.query.instrs.back().rel);
  return target;
}

std::optional<Trace> next_target(PathStore& store, const Trace& last) {
  auto target = store.next_on_trace(last);
  if (!target) return std::nullopt;
  return target->query;
}

bool check_divergence(const std::vector<PathCondKey>& expected, const Trace& actual) {
  std::vector<PathCondKey> got = path_conds(actual);
  if (got.size() < expected.size()) return false;
  return std::equal(expected.begin(), expected.end(), got.begin());
}

// --------------------------------------------------------------------------
// compare

namespace {

struct ProgramState {
  std::span<const Word> prog;
  PathStore store;
  Trace last;  // most recent transformed trace
};

}  // namespace

Verdict compare(std::span<const Word> p1, std::span<const Word> p2,
                const EngineConfig& config) {
  if (config.fuel == 0) throw std::invalid_argument("compare: fuel must be positive");
  if (config.depth < 0) throw std::invalid_argument("compare: depth must be >= 0");

  Stats stats;
  ProgramState prog[2] = {{p1, {}, {}}, {p2, {}, {}}};

  auto record = [&](int index, const RunRes& res) {
    Trace tr = transform(res.trace, config.depth);
    stats.max_path_conds = std::max(stats.max_path_conds, tr.path_cond_count());
    prog[index].store.insert(tr);
    prog[index].last = std::move(tr);
  };

  auto run_pair = [&](Word r1, Word r2) {
    RunRes res1 = run(prog[0].prog, r1, r2, config.fuel, config.mem_size);
    RunRes res2 = run(prog[1].prog, r1, r2, config.fuel, config.mem_size);
    stats.runs += 2;
    record(0, res1);
    record(1, res2);
    return std::make_pair(outcome_of(res1), outcome_of(res2));
  };

  auto finish_stats = [&] {
    stats.paths_explored_1 = prog[0].store.distinct_paths();
    stats.paths_explored_2 = prog[1].store.distinct_paths();
  };

  // Soundness self-check: the counterexample must reproduce concretely
  // before a verdict is produced.
  auto disequivalent = [&](Word r1, Word r2, const Outcome& o1, const Outcome& o2,
                           int found_by) {
    RunRes res1 = run(prog[0].prog, r1, r2, config.fuel, config.mem_size);
    RunRes res2 = run(prog[1].prog, r1, r2, config.fuel, config.mem_size);
    Outcome check1 = outcome_of(res1), check2 = outcome_of(res2);
    if (check1 != o1 || check2 != o2 ||
        compare_outcomes(check1, check2) != OutcomeRel::Conflict)
      throw EngineError("counterexample failed its re-execution self-check");
    Verdict v;
    v.kind = Verdict::Kind::Disequivalent;
    v.r1 = r1;
    v.r2 = r2;
    v.outcome1 = o1;
    v.outcome2 = o2;
    v.found_by = found_by;
    finish_stats();
    v.stats = std::move(stats);
    return v;
  };

  // Seed both programs with the initial inputs.
  auto [seed1, seed2] = run_pair(config.r1, config.r2);
  if (compare_outcomes(seed1, seed2) == OutcomeRel::Conflict)
    return disequivalent(config.r1, config.r2, seed1, seed2, 0);

  // The turn's program drives when it has unexplored paths; otherwise
  // roles swap immediately. Skip-marking inside next_on_trace can drain
  // a frontier mid-iteration, so selection falls through to the other
  // program and, failing that, back to the loop condition.
  auto pick_target = [&](int preferred)
      -> std::optional<std::pair<int, PathStore::Target>> {
    for (int candidate : {preferred, 1 - preferred}) {
      if (!prog[candidate].store.has_frontier()) continue;
      auto target = prog[candidate].store.next_on_trace(prog[candidate].last);
      if (!target) target = prog[candidate].store.next_anywhere();
      if (target) return std::make_pair(candidate, std::move(*target));
    }
    return std::nullopt;
  };

  int turn = 0;
  while (prog[0].store.has_frontier() || prog[1].store.has_frontier()) {
    ++stats.iterations;
    IterationRecord rec;
    rec.frontier1 = prog[0].store.has_frontier();
    rec.frontier2 = prog[1].store.has_frontier();

    auto picked = pick_target(turn);
    if (!picked) continue;  // frontiers drained by skip-marking
    int driver = picked->first;
    PathStore::Target* target = &picked->second;
    rec.driver = driver + 1;

    ++stats.solver_queries;
    std::optional<Soln> soln = solve(target->query, config.solver);
    if (config.on_query) config.on_query(target->query, soln);
    prog[driver].store.mark_attempted(target->node);

    if (!soln) {
      ++stats.unsat;
      stats.log.push_back(rec);
      turn = 1 - turn;
      continue;
    }

    rec.sat = true;
    rec.ran = true;
    std::vector<PathCondKey> expected = path_conds(target->query);
    Word r1 = soln->r1_or_zero();
    Word r2 = soln->r2_or_zero();
    auto [o1, o2] = run_pair(r1, r2);
    rec.outcome1 = o1;
    rec.outcome2 = o2;
    if (!check_divergence(expected, prog[driver].last)) ++stats.divergences;
    stats.log.push_back(rec);

    if (compare_outcomes(o1, o2) == OutcomeRel::Conflict)
      return disequivalent(r1, r2, o1, o2, driver + 1);
    turn = 1 - turn;
  }

  Verdict v;
  v.kind = Verdict::Kind::PossiblyEquivalent;
  finish_stats();
  v.stats = std::move(stats);
  return v;
}

}  // namespace diseq
