// diseq: concolic disequivalence checker for a MIPS assembly subset.
//
// Subcommands:
//   compare A.asm B.asm   search for an input on which the programs differ
//   run PROG.asm          execute one program and print its outcome
//   asm PROG.asm          assemble to big-endian binary
//
// Exit codes for compare: 0 possibly equivalent, 1 disequivalent,
// 2 usage/assembly error, 3 solver or engine failure.

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "diseq/asm.hpp"
#include "diseq/cpu.hpp"
#include "diseq/engine.hpp"
#include "diseq/smt.hpp"

namespace {

using diseq::Outcome;
using diseq::Word;
using json = nlohmann::ordered_json;

constexpr int kExitPossiblyEquivalent = 0;
constexpr int kExitDisequivalent = 1;
constexpr int kExitUsage = 2;
constexpr int kExitSolverFailure = 3;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw diseq::AsmError(path, 0, "cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<Word> load_program(const std::string& path, bool binary) {
  if (binary) return diseq::from_big_endian(read_file(path));
  return diseq::assemble_text(read_file(path), path);
}

json word_json(Word w) {
  return json{{"dec", w}, {"hex", diseq::hex_word(w)}};
}

json outcome_json(const Outcome& o) {
  switch (o.kind) {
    case Outcome::Kind::Value: return json{{"kind", "value"}, {"value", word_json(o.value)}};
    case Outcome::Kind::Failed: return json{{"kind", "failed"}, {"error", to_string(o.error)}};
    case Outcome::Kind::Timeout: return json{{"kind", "timeout"}};
  }
  return json{{"kind", "timeout"}};
}

json stats_json(const diseq::Stats& s) {
  return json{{"runs", s.runs},
              {"iterations", s.iterations},
              {"solver_queries", s.solver_queries},
              {"unsat", s.unsat},
              {"divergences", s.divergences},
              {"paths_explored", json::array({s.paths_explored_1, s.paths_explored_2})},
              {"max_path_conds", s.max_path_conds}};
}

struct CompareArgs {
  std::string file1, file2;
  uint64_t fuel = 10000;
  int depth = 50;
  std::string solver_path;
  double solver_timeout = 10.0;
  Word r1 = 1, r2 = 1;
  bool json_output = false;
  bool verbose = false;
};

int run_compare(const CompareArgs& args) {
  std::vector<Word> p1, p2;
  try {
    p1 = load_program(args.file1, false);
    p2 = load_program(args.file2, false);
  } catch (const std::exception& e) {
    std::cerr << "diseq: " << e.what() << "\n";
    return kExitUsage;
  }

  diseq::EngineConfig config;
  config.fuel = args.fuel;
  config.depth = args.depth;
  config.r1 = args.r1;
  config.r2 = args.r2;
  try {
    config.solver = diseq::resolve_solver(args.solver_path, args.solver_timeout);
  } catch (const diseq::SolverError& e) {
    std::cerr << "diseq: " << e.what() << "\n";
    return kExitSolverFailure;
  }
  if (args.verbose) {
    std::cerr << "solver: " << config.solver.path << "\n";
    config.on_query = [](const diseq::Trace& query, const std::optional<diseq::Soln>& soln) {
      std::cerr << "query (" << query.instrs.size() << " instrs) -> "
                << (soln ? "sat" : "unsat") << "\n";
    };
  }

  diseq::Verdict verdict;
  try {
    verdict = diseq::compare(p1, p2, config);
  } catch (const std::exception& e) {
    std::cerr << "diseq: " << e.what() << "\n";
    return kExitSolverFailure;
  }

  if (args.json_output) {
    json out;
    out["version"] = 1;
    out["verdict"] = verdict.disequivalent() ? "disequivalent" : "possibly-equivalent";
    if (verdict.disequivalent()) {
      out["counterexample"] = json{{"r1", word_json(verdict.r1)}, {"r2", word_json(verdict.r2)}};
      out["outcomes"] =
          json{{"program1", outcome_json(verdict.outcome1)},
               {"program2", outcome_json(verdict.outcome2)}};
      out["found_by"] = verdict.found_by == 0
                            ? "seed"
                            : "program" + std::to_string(verdict.found_by);
    }
    out["stats"] = stats_json(verdict.stats);
    std::cout << out.dump(2) << "\n";
  } else if (verdict.disequivalent()) {
    std::cout << "verdict: disequivalent\n"
              << "counterexample: $1 = " << verdict.r1 << " (" << diseq::hex_word(verdict.r1)
              << "), $2 = " << verdict.r2 << " (" << diseq::hex_word(verdict.r2) << ")\n"
              << "program 1: " << to_string(verdict.outcome1) << "\n"
              << "program 2: " << to_string(verdict.outcome2) << "\n";
    if (verdict.found_by != 0)
      std::cout << "found by: driving program " << verdict.found_by << "\n";
  } else {
    std::cout << "verdict: possibly equivalent\n";
  }
  if (!args.json_output) {
    const auto& s = verdict.stats;
    std::cout << "stats: runs=" << s.runs << " iterations=" << s.iterations
              << " queries=" << s.solver_queries << " unsat=" << s.unsat
              << " paths=[" << s.paths_explored_1 << ", " << s.paths_explored_2 << "]\n";
  }
  return verdict.disequivalent() ? kExitDisequivalent : kExitPossiblyEquivalent;
}

struct RunArgs {
  std::string file;
  uint64_t fuel = 10000;
  Word r1 = 1, r2 = 1;
  bool binary = false;
  bool dump_trace = false;
  bool dump_ssa = false;
  int depth = 50;
  bool json_output = false;
};

int run_single(const RunArgs& args) {
  std::vector<Word> prog;
  try {
    prog = load_program(args.file, args.binary);
  } catch (const std::exception& e) {
    std::cerr << "diseq: " << e.what() << "\n";
    return kExitUsage;
  }
  diseq::RunRes res = diseq::run(prog, args.r1, args.r2, args.fuel);
  Outcome outcome = diseq::outcome_of(res);

  if (args.json_output) {
    json out;
    out["version"] = 1;
    out["outcome"] = outcome_json(outcome);
    out["trace_length"] = res.trace.instrs.size();
    std::cout << out.dump(2) << "\n";
  } else {
    std::cout << to_string(outcome) << "\n";
    if (args.dump_trace) std::cout << to_string(res.trace);
    if (args.dump_ssa) std::cout << to_string(diseq::transform(res.trace, args.depth));
  }
  return 0;
}

struct AsmArgs {
  std::string file;
  std::string output;
  bool hex = false;
};

int run_asm(const AsmArgs& args) {
  std::vector<Word> words;
  try {
    words = diseq::assemble_file(args.file);
  } catch (const std::exception& e) {
    std::cerr << "diseq: " << e.what() << "\n";
    return kExitUsage;
  }
  if (args.hex) {
    for (Word w : words) std::cout << diseq::hex_word(w) << "\n";
    return 0;
  }
  std::string bytes = diseq::to_big_endian(words);
  if (args.output.empty()) {
    std::cout.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  } else {
    std::ofstream out(args.output, std::ios::binary);
    if (!out) {
      std::cerr << "diseq: cannot write " << args.output << "\n";
      return kExitUsage;
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  }
  return 0;
}

// Accepts decimal or 0x-hex, signed or unsigned 32-bit.
bool parse_word(const std::string& text, Word& out) {
  try {
    size_t pos = 0;
    long long v = std::stoll(text, &pos, 0);
    if (pos != text.size() || v < INT32_MIN || v > static_cast<long long>(UINT32_MAX))
      return false;
    out = static_cast<Word>(v);
    return true;
  } catch (...) {
    return false;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"concolic disequivalence checker for a MIPS assembly subset"};
  app.require_subcommand(1);

  CompareArgs cmp;
  std::string cmp_r1 = "1", cmp_r2 = "1";
  auto* compare_cmd =
      app.add_subcommand("compare", "compare two programs for disequivalence");
  compare_cmd->add_option("program1", cmp.file1, "first assembly file")->required();
  compare_cmd->add_option("program2", cmp.file2, "second assembly file")->required();
  compare_cmd->add_option("--fuel", cmp.fuel, "max steps per run (default 10000)");
  compare_cmd->add_option("--depth", cmp.depth, "max path conditions per trace (default 50)");
  compare_cmd->add_option("--solver", cmp.solver_path, "SMT solver binary (SMT-LIB v2 on stdin/stdout)");
  compare_cmd->add_option("--solver-timeout", cmp.solver_timeout, "per-query timeout in seconds (default 10)");
  compare_cmd->add_option("--r1", cmp_r1, "initial input register $1 (default 1)");
  compare_cmd->add_option("--r2", cmp_r2, "initial input register $2 (default 1)");
  compare_cmd->add_flag("--json", cmp.json_output, "machine-readable output");
  compare_cmd->add_flag("-v,--verbose", cmp.verbose, "log solver queries to stderr");

  RunArgs run_args;
  std::string run_r1 = "1", run_r2 = "1";
  auto* run_cmd = app.add_subcommand("run", "run one program and print the outcome");
  run_cmd->add_option("program", run_args.file, "assembly file")->required();
  run_cmd->add_option("--fuel", run_args.fuel, "max steps (default 10000)");
  run_cmd->add_option("--r1", run_r1, "input register $1 (default 1)");
  run_cmd->add_option("--r2", run_r2, "input register $2 (default 1)");
  run_cmd->add_flag("--binary", run_args.binary, "input is big-endian binary, not assembly");
  run_cmd->add_flag("--trace", run_args.dump_trace, "dump the raw symbolic trace");
  run_cmd->add_flag("--ssa", run_args.dump_ssa, "dump the transformed (SSA) trace");
  run_cmd->add_option("--depth", run_args.depth, "trim depth for --ssa (default 50)");
  run_cmd->add_flag("--json", run_args.json_output, "machine-readable output");

  AsmArgs asm_args;
  auto* asm_cmd = app.add_subcommand("asm", "assemble to big-endian binary");
  asm_cmd->add_option("program", asm_args.file, "assembly file")->required();
  asm_cmd->add_option("-o,--output", asm_args.output, "output file (default stdout)");
  asm_cmd->add_flag("--hex", asm_args.hex, "print one hex word per line instead");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  if (compare_cmd->parsed()) {
    if (!parse_word(cmp_r1, cmp.r1) || !parse_word(cmp_r2, cmp.r2)) {
      std::cerr << "diseq: --r1/--r2 must be 32-bit integers\n";
      return kExitUsage;
    }
    return run_compare(cmp);
  }
  if (run_cmd->parsed()) {
    if (!parse_word(run_r1, run_args.r1) || !parse_word(run_r2, run_args.r2)) {
      std::cerr << "diseq: --r1/--r2 must be 32-bit integers\n";
      return kExitUsage;
    }
    return run_single(run_args);
  }
  return run_asm(asm_args);
}
