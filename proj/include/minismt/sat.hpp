#ifndef MINISMT_SAT_HPP
#define MINISMT_SAT_HPP

#include <cstdint>
#include <vector>

namespace minismt {

// Literal encoding: var << 1 | sign, sign 1 = negated.
using Lit = uint32_t;

inline Lit mk_lit(uint32_t var, bool negated = false) {
  return (var << 1) | (negated ? 1u : 0u);
}
inline Lit negate(Lit l) { return l ^ 1u; }
inline uint32_t var_of(Lit l) { return l >> 1; }
inline bool sign_of(Lit l) { return l & 1u; }

// Conflict-driven clause learning SAT solver: two-watched literals,
// first-UIP learning, activity-ordered decisions with phase saving,
// geometric restarts and learned-clause reduction.
class SatSolver {
 public:
  SatSolver();
  ~SatSolver();
  SatSolver(const SatSolver&) = delete;
  SatSolver& operator=(const SatSolver&) = delete;

  uint32_t new_var();
  uint32_t num_vars() const { return static_cast<uint32_t>(assign_.size()); }

  // Literal that is true in every model (variable 0).
  Lit true_lit() const { return mk_lit(0, false); }
  Lit false_lit() const { return mk_lit(0, true); }

  void add_clause(std::vector<Lit> lits);
  bool solve();

  // Model access, valid after solve() returned true.
  bool value_of(uint32_t var) const { return assign_[var] == kTrue; }
  bool lit_value(Lit l) const { return value_of(var_of(l)) != sign_of(l); }

  uint64_t conflicts() const { return conflicts_; }

 private:
  static constexpr uint8_t kFalse = 0, kTrue = 1, kUndef = 2;

  struct Clause {
    std::vector<Lit> lits;
    double activity = 0.0;
    bool learned = false;
  };

  struct Watch {
    Clause* clause;
    Lit blocker;
  };

  uint8_t lit_state(Lit l) const {
    uint8_t v = assign_[var_of(l)];
    if (v == kUndef) return kUndef;
    return (v == kTrue) != sign_of(l) ? kTrue : kFalse;
  }

  void attach(Clause* c);
  void enqueue(Lit l, Clause* reason);
  Clause* propagate();
  void analyze(Clause* conflict, std::vector<Lit>& learnt, int& backtrack_level);
  void backtrack(int level);
  Lit pick_branch();
  void bump_var(uint32_t v);
  void bump_clause(Clause* c);
  void decay();
  void reduce_learned();
  bool locked(const Clause* c) const;

  // Activity-ordered max-heap over variables.
  void heap_insert(uint32_t v);
  void heap_update(uint32_t v);
  uint32_t heap_pop();
  bool heap_less(uint32_t a, uint32_t b) const { return activity_[a] < activity_[b]; }
  void heap_sift_up(size_t i);
  void heap_sift_down(size_t i);

  std::vector<Clause*> clauses_;
  std::vector<Clause*> learned_;
  std::vector<std::vector<Watch>> watches_;  // indexed by literal
  std::vector<uint8_t> assign_;              // per var
  std::vector<bool> phase_;
  std::vector<int> level_;
  std::vector<Clause*> reason_;
  std::vector<double> activity_;
  std::vector<Lit> trail_;
  std::vector<size_t> trail_lim_;
  size_t qhead_ = 0;

  std::vector<uint32_t> heap_;
  std::vector<int> heap_pos_;  // -1 when absent

  std::vector<uint8_t> seen_;
  double var_inc_ = 1.0;
  double clause_inc_ = 1.0;
  uint64_t conflicts_ = 0;
  bool ok_ = true;

  int decision_level() const { return static_cast<int>(trail_lim_.size()); }
};

}  // namespace minismt

#endif
