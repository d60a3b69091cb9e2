#ifndef MINISMT_BITBLAST_HPP
#define MINISMT_BITBLAST_HPP

#include <map>
#include <string>
#include <vector>

#include "minismt/sat.hpp"
#include "minismt/term.hpp"

namespace minismt {

struct SolveResult {
  bool sat = false;
  // Values of the requested bitvector variables (name -> value). A
  // variable that never reached the SAT core reports 0.
  std::map<std::string, uint64_t> model;
};

// Decides the conjunction of the given assertions. Arrays are eliminated
// first: store chains feeding selects are reduced with read-over-write,
// base-array selects become fresh variables related by index congruence.
// Everything else is Tseitin-encoded over an internal CDCL solver.
// `model_vars` lists (name, term id) pairs to evaluate on sat.
SolveResult solve_assertions(TermStore& store, const std::vector<TermId>& assertions,
                             const std::vector<std::pair<std::string, TermId>>& model_vars);

}  // namespace minismt

#endif
