// minismt: a small SMT-LIB v2 solver for quantifier-free bitvectors and
// arrays, answering over stdin/stdout. Intended as the bundled fallback
// solver for the diseq checker; any SMT-LIB v2 solver (e.g. z3) can be
// used in its place.

#include <fstream>
#include <iostream>

#include "minismt/session.hpp"

int main(int argc, char** argv) {
  std::ios::sync_with_stdio(false);
  if (argc > 2 || (argc == 2 && std::string(argv[1]) == "--help")) {
    std::cerr << "usage: minismt [script.smt2]   (default: read stdin)\n";
    return argc > 2 ? 2 : 0;
  }
  if (argc == 2) {
    std::ifstream file(argv[1]);
    if (!file) {
      std::cerr << "minismt: cannot open " << argv[1] << "\n";
      return 2;
    }
    return minismt::run_session(file, std::cout);
  }
  return minismt::run_session(std::cin, std::cout);
}
