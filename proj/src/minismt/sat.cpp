#include "minismt/sat.hpp"

#include <algorithm>
#include <cassert>

namespace minismt {

SatSolver::SatSolver() {
  uint32_t t = new_var();
  (void)t;
  add_clause({true_lit()});
}

SatSolver::~SatSolver() {
  for (Clause* c : clauses_) delete c;
  for (Clause* c : learned_) delete c;
}

uint32_t SatSolver::new_var() {
  uint32_t v = static_cast<uint32_t>(assign_.size());
  assign_.push_back(kUndef);
  phase_.push_back(false);
  level_.push_back(0);
  reason_.push_back(nullptr);
  activity_.push_back(0.0);
  seen_.push_back(0);
  watches_.emplace_back();
  watches_.emplace_back();
  heap_pos_.push_back(-1);
  heap_insert(v);
  return v;
}

void SatSolver::attach(Clause* c) {
  watches_[c->lits[0]].push_back({c, c->lits[1]});
  watches_[c->lits[1]].push_back({c, c->lits[0]});
}

void SatSolver::add_clause(std::vector<Lit> lits) {
  if (!ok_) return;
  assert(decision_level() == 0);
  std::sort(lits.begin(), lits.end());
  std::vector<Lit> out;
  for (size_t i = 0; i < lits.size(); ++i) {
    Lit l = lits[i];
    if (i + 1 < lits.size() && lits[i + 1] == negate(l)) return;  // tautology
    if (i > 0 && l == lits[i - 1]) continue;
    uint8_t v = lit_state(l);
    if (v == kTrue) return;     // satisfied at top level
    if (v == kFalse) continue;  // falsified at top level
    out.push_back(l);
  }
  if (out.empty()) {
    ok_ = false;
    return;
  }
  if (out.size() == 1) {
    enqueue(out[0], nullptr);
    if (propagate() != nullptr) ok_ = false;
    return;
  }
  Clause* c = new Clause{std::move(out)};
  clauses_.push_back(c);
  attach(c);
}

void SatSolver::enqueue(Lit l, Clause* reason) {
  uint32_t v = var_of(l);
  assert(assign_[v] == kUndef);
  assign_[v] = sign_of(l) ? kFalse : kTrue;
  level_[v] = decision_level();
  reason_[v] = reason;
  trail_.push_back(l);
}

SatSolver::Clause* SatSolver::propagate() {
  while (qhead_ < trail_.size()) {
    Lit p = trail_[qhead_++];
    Lit fl = negate(p);  // literal that just became false
    std::vector<Watch>& ws = watches_[fl];
    size_t keep = 0;
    for (size_t i = 0; i < ws.size(); ++i) {
      Watch w = ws[i];
      if (lit_state(w.blocker) == kTrue) {
        ws[keep++] = w;
        continue;
      }
      Clause& c = *w.clause;
      if (c.lits[0] == fl) std::swap(c.lits[0], c.lits[1]);
      if (lit_state(c.lits[0]) == kTrue) {
        ws[keep++] = {w.clause, c.lits[0]};
        continue;
      }
      bool moved = false;
      for (size_t k = 2; k < c.lits.size(); ++k) {
        if (lit_state(c.lits[k]) != kFalse) {
          std::swap(c.lits[1], c.lits[k]);
          watches_[c.lits[1]].push_back({w.clause, c.lits[0]});
          moved = true;
          break;
        }
      }
      if (moved) continue;
      // unit or conflicting on lits[0]
      ws[keep++] = w;
      if (lit_state(c.lits[0]) == kFalse) {
        for (size_t k = i + 1; k < ws.size(); ++k) ws[keep++] = ws[k];
        ws.resize(keep);
        qhead_ = trail_.size();
        return w.clause;
      }
      enqueue(c.lits[0], w.clause);
    }
    ws.resize(keep);
  }
  return nullptr;
}

void SatSolver::bump_var(uint32_t v) {
  activity_[v] += var_inc_;
  if (activity_[v] > 1e100) {
    for (double& a : activity_) a *= 1e-100;
    var_inc_ *= 1e-100;
  }
  if (heap_pos_[v] >= 0) heap_sift_up(static_cast<size_t>(heap_pos_[v]));
}

void SatSolver::bump_clause(Clause* c) {
  c->activity += clause_inc_;
  if (c->activity > 1e20) {
    for (Clause* l : learned_) l->activity *= 1e-20;
    clause_inc_ *= 1e-20;
  }
}

void SatSolver::decay() {
  var_inc_ /= 0.95;
  clause_inc_ /= 0.999;
}

void SatSolver::analyze(Clause* conflict, std::vector<Lit>& learnt,
                        int& backtrack_level) {
  learnt.clear();
  learnt.push_back(0);  // slot for the asserting literal
  int counter = 0;
  Lit p = 0;
  size_t index = trail_.size();
  Clause* reason = conflict;

  for (;;) {
    bump_clause(reason);
    for (Lit q : reason->lits) {
      if (p != 0 && q == p) continue;
      uint32_t v = var_of(q);
      if (!seen_[v] && level_[v] > 0) {
        seen_[v] = 1;
        bump_var(v);
        if (level_[v] >= decision_level()) {
          ++counter;
        } else {
          learnt.push_back(q);
        }
      }
    }
    while (!seen_[var_of(trail_[index - 1])]) --index;
    p = trail_[index - 1];
    --index;
    seen_[var_of(p)] = 0;
    --counter;
    if (counter == 0) break;
    reason = reason_[var_of(p)];
    assert(reason != nullptr);
  }
  learnt[0] = negate(p);

  backtrack_level = 0;
  if (learnt.size() > 1) {
    size_t max_i = 1;
    for (size_t i = 2; i < learnt.size(); ++i)
      if (level_[var_of(learnt[i])] > level_[var_of(learnt[max_i])]) max_i = i;
    std::swap(learnt[1], learnt[max_i]);
    backtrack_level = level_[var_of(learnt[1])];
  }
  for (size_t i = 1; i < learnt.size(); ++i) seen_[var_of(learnt[i])] = 0;
}

void SatSolver::backtrack(int target) {
  if (decision_level() <= target) return;
  size_t limit = trail_lim_[static_cast<size_t>(target)];
  for (size_t i = trail_.size(); i > limit; --i) {
    uint32_t v = var_of(trail_[i - 1]);
    phase_[v] = assign_[v] == kTrue;
    assign_[v] = kUndef;
    reason_[v] = nullptr;
    if (heap_pos_[v] < 0) heap_insert(v);
  }
  trail_.resize(limit);
  trail_lim_.resize(static_cast<size_t>(target));
  qhead_ = trail_.size();
}

Lit SatSolver::pick_branch() {
  while (!heap_.empty()) {
    uint32_t v = heap_pop();
    if (assign_[v] == kUndef) return mk_lit(v, !phase_[v]);
  }
  return 0;  // all assigned; 0 is never a decision (var 0 is forced true)
}

bool SatSolver::locked(const Clause* c) const {
  uint32_t v = var_of(c->lits[0]);
  return reason_[v] == c && assign_[v] != kUndef;
}

void SatSolver::reduce_learned() {
  std::sort(learned_.begin(), learned_.end(),
            [](const Clause* a, const Clause* b) { return a->activity < b->activity; });
  size_t target = learned_.size() / 2;
  std::vector<Clause*> kept;
  kept.reserve(learned_.size());
  for (size_t i = 0; i < learned_.size(); ++i) {
    Clause* c = learned_[i];
    if (i < target && !locked(c) && c->lits.size() > 2) {
      for (Lit l : {c->lits[0], c->lits[1]}) {
        auto& ws = watches_[l];
        for (size_t k = 0; k < ws.size(); ++k) {
          if (ws[k].clause == c) {
            ws[k] = ws.back();
            ws.pop_back();
            break;
          }
        }
      }
      delete c;
    } else {
      kept.push_back(c);
    }
  }
  learned_ = std::move(kept);
}

bool SatSolver::solve() {
  if (!ok_) return false;
  uint64_t restart_limit = 100;
  uint64_t conflicts_since_restart = 0;
  std::vector<Lit> learnt;

  for (;;) {
    Clause* conflict = propagate();
    if (conflict != nullptr) {
      ++conflicts_;
      ++conflicts_since_restart;
      if (decision_level() == 0) return false;
      int backtrack_level = 0;
      analyze(conflict, learnt, backtrack_level);
      backtrack(backtrack_level);
      if (learnt.size() == 1) {
        enqueue(learnt[0], nullptr);
      } else {
        Clause* c = new Clause{learnt, 0.0, true};
        learned_.push_back(c);
        attach(c);
        bump_clause(c);
        enqueue(learnt[0], c);
      }
      decay();
    } else {
      if (conflicts_since_restart >= restart_limit) {
        conflicts_since_restart = 0;
        restart_limit = restart_limit + restart_limit / 2;
        backtrack(0);
        if (learned_.size() > std::max<size_t>(4000, 2 * clauses_.size()))
          reduce_learned();
        continue;
      }
      Lit next = pick_branch();
      if (next == 0) return true;  // complete assignment
      trail_lim_.push_back(trail_.size());
      enqueue(next, nullptr);
    }
  }
}

void SatSolver::heap_insert(uint32_t v) {
  heap_pos_[v] = static_cast<int>(heap_.size());
  heap_.push_back(v);
  heap_sift_up(heap_.size() - 1);
}

void SatSolver::heap_update(uint32_t v) {
  if (heap_pos_[v] >= 0) {
    heap_sift_up(static_cast<size_t>(heap_pos_[v]));
    heap_sift_down(static_cast<size_t>(heap_pos_[v]));
  }
}

uint32_t SatSolver::heap_pop() {
  uint32_t top = heap_[0];
  heap_pos_[top] = -1;
  heap_[0] = heap_.back();
  heap_.pop_back();
  if (!heap_.empty()) {
    heap_pos_[heap_[0]] = 0;
    heap_sift_down(0);
  }
  return top;
}

void SatSolver::heap_sift_up(size_t i) {
  while (i > 0) {
    size_t parent = (i - 1) / 2;
    if (!heap_less(heap_[parent], heap_[i])) break;
    std::swap(heap_[parent], heap_[i]);
    heap_pos_[heap_[parent]] = static_cast<int>(parent);
    heap_pos_[heap_[i]] = static_cast<int>(i);
    i = parent;
  }
}

void SatSolver::heap_sift_down(size_t i) {
  for (;;) {
    size_t left = 2 * i + 1, right = 2 * i + 2, best = i;
    if (left < heap_.size() && heap_less(heap_[best], heap_[left])) best = left;
    if (right < heap_.size() && heap_less(heap_[best], heap_[right])) best = right;
    if (best == i) break;
    std::swap(heap_[best], heap_[i]);
    heap_pos_[heap_[best]] = static_cast<int>(best);
    heap_pos_[heap_[i]] = static_cast<int>(i);
    i = best;
  }
}

}  // namespace minismt
