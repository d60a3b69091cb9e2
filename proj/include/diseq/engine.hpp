#ifndef DISEQ_ENGINE_HPP
#define DISEQ_ENGINE_HPP

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <vector>

#include "diseq/cpu.hpp"
#include "diseq/smt.hpp"
#include "diseq/trace.hpp"

namespace diseq {

// Observable result of one bounded run: the output register, a boxed
// execution error, or running out of fuel.
struct Outcome {
  enum class Kind { Value, Failed, Timeout };
  Kind kind = Kind::Timeout;
  Word value = 0;                                   // Value
  ErrorKind error = ErrorKind::InvalidInstruction;  // Failed

  bool operator==(const Outcome&) const = default;
  static Outcome of_value(Word w) { return {Kind::Value, w, {}}; }
  static Outcome of_error(ErrorKind e) { return {Kind::Failed, 0, e}; }
  static Outcome timeout() { return {Kind::Timeout, 0, {}}; }
};

Outcome outcome_of(const RunRes& r);
std::string to_string(const Outcome& o);

// Timeouts license no inference; two failures are indistinguishable;
// otherwise outputs must agree.
enum class OutcomeRel { Conflict, Consistent, NoInference };
OutcomeRel compare_outcomes(const Outcome& a, const Outcome& b);

// A path condition stripped to its comparison, used to key path prefixes.
struct PathCondKey {
  Rel rel = Rel::Eq;
  Var a, b;
  auto operator<=>(const PathCondKey&) const = default;
  PathCondKey flipped_key() const { return {diseq::flipped(rel), a, b}; }
};

std::vector<PathCondKey> path_conds(const Trace& ssa);

// Prefix tree of observed path-condition sequences for one program.
// A node exists for every observed prefix; `attempted` records that its
// final condition's negation has been handed to the solver (or found
// already explored).
class PathStore {
 public:
  struct Node {
    PathCondKey cond;
    Trace prefix;  // SSA prefix ending at this condition
    bool attempted = false;
    std::map<PathCondKey, std::unique_ptr<Node>> children;
  };

  // Records every prefix of the trace's condition sequence.
  void insert(const Trace& ssa);

  bool has_frontier() const { return untried_ > 0; }
  size_t distinct_paths() const { return complete_paths_.size(); }

  struct Target {
    Trace query;  // prefix ending in the flipped condition
    Node* node;   // node whose negation this attempts
  };

  // Deepest not-yet-attempted condition along `last`, with its relation
  // flipped. Nodes whose flipped sibling was already observed are
  // skipped (marked attempted). Returns nothing when the path is
  // exhausted.
  std::optional<Target> next_on_trace(const Trace& last);

  // Store-wide fallback: deepest untried node anywhere in the tree.
  std::optional<Target> next_anywhere();

  void mark_attempted(Node* node);

 private:
  Node* find(std::span<const PathCondKey> prefix);
  const Node* find(std::span<const PathCondKey> prefix) const;

  std::map<PathCondKey, std::unique_ptr<Node>> roots_;
  std::set<std::vector<PathCondKey>> complete_paths_;
  size_t untried_ = 0;
};

// Spec-shaped helper: the next negated-prefix query for a program whose
// most recent transformed trace is `last`.
std::optional<Trace> next_target(PathStore& store, const Trace& last);

// True iff the fresh trace's condition sequence extends the expected
// prefix (solver inputs actually steered execution down the negated
// path).
bool check_divergence(const std::vector<PathCondKey>& expected, const Trace& actual);

struct IterationRecord {
  int driver = 0;            // 1 or 2
  bool frontier1 = false;    // before the iteration
  bool frontier2 = false;
  bool sat = false;
  bool ran = false;          // a run pair was executed
  Outcome outcome1, outcome2;
};

struct Stats {
  uint64_t runs = 0;            // individual program executions
  uint64_t iterations = 0;      // engine loop passes
  uint64_t solver_queries = 0;
  uint64_t unsat = 0;
  uint64_t divergences = 0;
  size_t paths_explored_1 = 0;  // distinct condition sequences observed
  size_t paths_explored_2 = 0;
  int max_path_conds = 0;       // deepest trimmed trace seen
  std::vector<IterationRecord> log;
};

struct Verdict {
  enum class Kind { Disequivalent, PossiblyEquivalent };
  Kind kind = Kind::PossiblyEquivalent;
  Word r1 = 0, r2 = 0;   // counterexample inputs (Disequivalent)
  Outcome outcome1, outcome2;
  int found_by = 0;      // 0 = seed run, 1/2 = driving program
  Stats stats;

  bool disequivalent() const { return kind == Kind::Disequivalent; }
};

class EngineError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EngineConfig {
  uint64_t fuel = 10000;
  int depth = 50;
  Word r1 = 1, r2 = 1;   // initial inputs
  uint32_t mem_size = kDefaultMemSize;
  SolverConfig solver;
  // Observation hook: every solver query with its result.
  std::function<void(const Trace&, const std::optional<Soln>&)> on_query;
};

// The alternating concolic disequivalence loop. Throws SolverError on
// solver-process failure and EngineError if a counterexample fails its
// re-execution self-check.
Verdict compare(std::span<const Word> p1, std::span<const Word> p2,
                const EngineConfig& config);

}  // namespace diseq

#endif
