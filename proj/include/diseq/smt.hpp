#ifndef DISEQ_SMT_HPP
#define DISEQ_SMT_HPP

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "diseq/trace.hpp"
#include "diseq/word.hpp"

namespace diseq {

// One declared constant of the formula (register/hi/lo version, 64-bit
// multiply temporary, or memory array version).
struct Decl {
  std::string name;
  std::string sort;
  bool operator==(const Decl&) const = default;
};

// A quantifier-free bitvector+array formula in SMT-LIB v2 text form:
// one assertion per trace instruction plus the r0 pin.
struct Formula {
  std::vector<Decl> decls;          // first-occurrence order
  std::vector<std::string> assertions;
  std::string preamble() const;     // options + logic
  std::string script() const;       // full script incl. check-sat/get-model
};

// Translates an SSA trace. Throws std::invalid_argument on non-SSA input.
Formula emit_formula(const Trace& ssa);

// Value of an input register in a solver model: absent means the solver
// left the register unconstrained.
using RegVal = std::optional<Word>;

struct Soln {
  RegVal r1;
  RegVal r2;
  Word r1_or_zero() const { return r1.value_or(0); }
  Word r2_or_zero() const { return r2.value_or(0); }
};

// Solver-process failure (spawn error, timeout, crash, or unparseable
// output). Distinct from unsat, which is a regular result.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SolverConfig {
  std::string path;                // solver binary
  std::vector<std::string> args;
  double timeout_sec = 10.0;
};

// Picks the solver binary: explicit path, then the DISEQ_SOLVER
// environment variable, then z3 on PATH, then the bundled minismt next
// to the current executable. Throws SolverError when nothing is found.
SolverConfig resolve_solver(const std::string& explicit_path = "",
                            double timeout_sec = 10.0);

// Extracts the input-register bindings from a (get-model) response.
// Accepts "(model (define-fun ...))" and the bare "((define-fun ...))"
// form; values may be #x..., #b... or (_ bvN w) literals. Throws
// SolverError on malformed text.
Soln parse_model(const std::string& text);

// Emits the trace's formula, runs the solver over SMT-LIB v2 text on
// stdin/stdout, and returns the input assignment on sat or nullopt on
// unsat. Throws SolverError on solver failure.
std::optional<Soln> solve(const Trace& ssa, const SolverConfig& config);

}  // namespace diseq

#endif
