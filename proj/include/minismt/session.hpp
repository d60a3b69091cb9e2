#ifndef MINISMT_SESSION_HPP
#define MINISMT_SESSION_HPP

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "minismt/sexpr.hpp"
#include "minismt/term.hpp"

namespace minismt {

// SMT-LIB v2 command interpreter over the QF_ABV fragment used by the
// checker: declare-const/declare-fun (no arguments), assert, check-sat,
// get-model, exit. set-logic/set-option/set-info are accepted and
// ignored.
class Session {
 public:
  // Executes one command, writing any response. Returns false once
  // (exit) has been processed.
  bool execute(const Sexpr& cmd, std::ostream& out);

 private:
  TermId build_term(const Sexpr& s);
  Sort parse_sort(const Sexpr& s) const;
  void declare(const std::string& name, const Sexpr& sort_expr);
  void do_check_sat(std::ostream& out);
  void do_get_model(std::ostream& out) const;

  TermStore terms_;
  std::map<std::string, TermId> symbols_;
  std::vector<std::pair<std::string, TermId>> declarations_;  // in order
  std::vector<TermId> assertions_;
  bool sat_known_ = false;
  bool last_sat_ = false;
  std::map<std::string, uint64_t> model_;
};

// Reads commands from `in` until exhaustion or (exit); responses go to
// `out` and are flushed per command. Returns the process exit code.
int run_session(std::istream& in, std::ostream& out);

}  // namespace minismt

#endif
