#include "diseq/smt.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cassert>
#include <cctype>
#include <cerrno>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <sstream>
#include <utility>

namespace diseq {

namespace {

constexpr int kR0Id = 0;

std::string bv_literal(Word v) { return "(_ bv" + std::to_string(v) + " 32)"; }

std::string sort_of(const Var& v) {
  if (v.is_mem()) return "(Array (_ BitVec 32) (_ BitVec 32))";
  if (v.is_wide()) return "(_ BitVec 64)";
  return "(_ BitVec 32)";
}

struct Emitter {
  Formula formula;
  std::map<std::pair<int, int>, bool> declared;

  void declare(const Var& v) {
    if (declared.emplace(std::make_pair(v.id, v.version), true).second)
      formula.decls.push_back({v.name(), sort_of(v)});
  }

  void assert_line(const std::string& body) {
    formula.assertions.push_back("(assert " + body + ")");
  }

  std::string eq(const std::string& a, const std::string& b) {
    return "(= " + a + " " + b + ")";
  }

  // address expression shared by lw/sw: (bvadd i r_s)
  std::string addr(int32_t offset, const Var& base) {
    return "(bvadd " + bv_literal(static_cast<Word>(offset)) + " " + base.name() + ")";
  }

  void instr(const SymInstr& i) {
    switch (i.op) {
      case SymOp::Add:
      case SymOp::Sub: {
        declare(i.a); declare(i.b); declare(i.dst);
        const char* op = i.op == SymOp::Add ? "bvadd" : "bvsub";
        assert_line(eq(i.dst.name(),
                       std::string("(") + op + " " + i.a.name() + " " + i.b.name() + ")"));
        break;
      }
      case SymOp::Slt:
      case SymOp::Sltu: {
        declare(i.a); declare(i.b); declare(i.dst);
        const char* cmp = i.op == SymOp::Slt ? "bvslt" : "bvult";
        assert_line(eq(i.dst.name(),
                       std::string("(ite (") + cmp + " " + i.a.name() + " " + i.b.name() +
                           ") (_ bv1 32) (_ bv0 32))"));
        break;
      }
      case SymOp::Const:
        declare(i.dst);
        assert_line(eq(i.dst.name(), bv_literal(i.value)));
        break;
      case SymOp::Mult64: {
        declare(i.a); declare(i.b); declare(i.dst);
        const char* ext = i.is_signed ? "sign_extend" : "zero_extend";
        assert_line(eq(i.dst.name(),
                       std::string("(bvmul ((_ ") + ext + " 32) " + i.a.name() +
                           ") ((_ " + ext + " 32) " + i.b.name() + "))"));
        break;
      }
      case SymOp::Low32:
        declare(i.a); declare(i.dst);
        assert_line(eq(i.dst.name(), "((_ extract 31 0) " + i.a.name() + ")"));
        break;
      case SymOp::High32:
        declare(i.a); declare(i.dst);
        assert_line(eq(i.dst.name(), "((_ extract 63 32) " + i.a.name() + ")"));
        break;
      case SymOp::Quot:
      case SymOp::Rem: {
        declare(i.a); declare(i.b); declare(i.dst);
        const char* op = i.op == SymOp::Quot ? (i.is_signed ? "bvsdiv" : "bvudiv")
                                             : (i.is_signed ? "bvsrem" : "bvurem");
        assert_line(eq(i.dst.name(),
                       std::string("(") + op + " " + i.a.name() + " " + i.b.name() + ")"));
        break;
      }
      case SymOp::Lw:
        declare(i.a); declare(i.mem_in); declare(i.dst);
        assert_line(eq(i.dst.name(),
                       "(select " + i.mem_in.name() + " " + addr(i.offset, i.a) + ")"));
        break;
      case SymOp::Sw:
        declare(i.a); declare(i.b); declare(i.mem_in); declare(i.mem_out);
        assert_line(eq(i.mem_out.name(),
                       "(store " + i.mem_in.name() + " " + addr(i.offset, i.b) + " " +
                           i.a.name() + ")"));
        break;
      case SymOp::PathCond: {
        declare(i.a); declare(i.b);
        std::string body = eq(i.a.name(), i.b.name());
        if (i.rel == Rel::Ne) body = "(not " + body + ")";
        assert_line(body);
        break;
      }
      default:
        throw std::invalid_argument("emit_formula: raw multi-effect instruction");
    }
  }
};

}  // namespace

std::string Formula::preamble() const {
  return "(set-option :produce-models true)\n(set-logic QF_ABV)\n";
}

std::string Formula::script() const {
  std::string out = preamble();
  for (const auto& d : decls) out += "(declare-const " + d.name + " " + d.sort + ")\n";
  for (const auto& a : assertions) out += a + "\n";
  out += "(check-sat)\n(get-model)\n";
  return out;
}

Formula emit_formula(const Trace& ssa) {
  if (!ssa.ssa) throw std::invalid_argument("emit_formula: trace is not in SSA form");
  Emitter e;
  // r0 is never reassigned; its single version is pinned to zero.
  Var r0{kR0Id, 1};
  e.declare(r0);
  e.assert_line(e.eq(r0.name(), bv_literal(0)));
  for (const auto& i : ssa.instrs) e.instr(i);
  return e.formula;
}

// ---------------------------------------------------------------------------
// Model parsing

namespace {

struct Sexpr {
  std::string atom;
  std::vector<Sexpr> items;
  bool is_atom() const { return items.empty() && !atom.empty(); }
};

struct SexprParser {
  const std::string& text;
  size_t pos = 0;

  void skip_ws() {
    while (pos < text.size()) {
      char c = text[pos];
      if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos;
      } else if (c == ';') {
        while (pos < text.size() && text[pos] != '\n') ++pos;
      } else {
        break;
      }
    }
  }

  bool done() {
    skip_ws();
    return pos >= text.size();
  }

  Sexpr next() {
    skip_ws();
    if (pos >= text.size()) throw SolverError("unexpected end of solver output");
    char c = text[pos];
    if (c == '(') {
      ++pos;
      Sexpr list;
      list.atom.clear();
      for (;;) {
        skip_ws();
        if (pos >= text.size()) throw SolverError("unbalanced '(' in solver output");
        if (text[pos] == ')') {
          ++pos;
          return list;
        }
        list.items.push_back(next());
      }
    }
    if (c == ')') throw SolverError("unbalanced ')' in solver output");
    size_t start = pos;
    if (c == '|') {
      ++pos;
      while (pos < text.size() && text[pos] != '|') ++pos;
      if (pos < text.size()) ++pos;
    } else if (c == '"') {
      ++pos;
      while (pos < text.size() && text[pos] != '"') ++pos;
      if (pos < text.size()) ++pos;
    } else {
      while (pos < text.size() && !std::isspace(static_cast<unsigned char>(text[pos])) &&
             text[pos] != '(' && text[pos] != ')')
        ++pos;
    }
    Sexpr atom;
    atom.atom = text.substr(start, pos - start);
    return atom;
  }
};

std::optional<Word> bitvector_value(const Sexpr& v) {
  if (v.is_atom()) {
    const std::string& a = v.atom;
    if (a.size() > 2 && a[0] == '#' && a[1] == 'x')
      return static_cast<Word>(std::stoull(a.substr(2), nullptr, 16));
    if (a.size() > 2 && a[0] == '#' && a[1] == 'b')
      return static_cast<Word>(std::stoull(a.substr(2), nullptr, 2));
    return std::nullopt;
  }
  // (_ bvN w)
  if (v.items.size() == 3 && v.items[0].atom == "_" &&
      v.items[1].atom.rfind("bv", 0) == 0)
    return static_cast<Word>(std::stoull(v.items[1].atom.substr(2)));
  return std::nullopt;
}

}  // namespace

Soln parse_model(const std::string& text) {
  SexprParser parser{text};
  Sexpr top = parser.next();
  if (top.is_atom()) throw SolverError("malformed model: " + text);

  Soln soln;
  size_t begin = 0;
  if (!top.items.empty() && top.items[0].is_atom() && top.items[0].atom == "model")
    begin = 1;
  for (size_t k = begin; k < top.items.size(); ++k) {
    const Sexpr& entry = top.items[k];
    if (entry.items.size() < 5 || entry.items[0].atom != "define-fun") continue;
    const std::string& name = entry.items[1].atom;
    if (!entry.items[2].items.empty() || !entry.items[2].atom.empty())
      continue;  // functions with arguments are not register bindings
    auto value = bitvector_value(entry.items[4]);
    if (!value) continue;  // arrays and other sorts
    if (name == "r1_1" || name == "r1") soln.r1 = value;
    if (name == "r2_1" || name == "r2") soln.r2 = value;
  }
  return soln;
}

// ---------------------------------------------------------------------------
// Solver subprocess

namespace {

using Clock = std::chrono::steady_clock;

// One solver process per query, spoken to over stdin/stdout pipes.
class SolverProcess {
 public:
  explicit SolverProcess(const SolverConfig& config)
      : deadline_(Clock::now() + std::chrono::duration_cast<Clock::duration>(
                                     std::chrono::duration<double>(config.timeout_sec))) {
    signal(SIGPIPE, SIG_IGN);
    int to_child[2], from_child[2];
    if (pipe(to_child) != 0 || pipe(from_child) != 0)
      throw SolverError("cannot create solver pipes");
    pid_ = fork();
    if (pid_ < 0) throw SolverError("cannot fork solver process");
    if (pid_ == 0) {
      dup2(to_child[0], STDIN_FILENO);
      dup2(from_child[1], STDOUT_FILENO);
      close(to_child[0]); close(to_child[1]);
      close(from_child[0]); close(from_child[1]);
      std::vector<char*> argv;
      argv.push_back(const_cast<char*>(config.path.c_str()));
      for (const auto& a : config.args) argv.push_back(const_cast<char*>(a.c_str()));
      argv.push_back(nullptr);
      execvp(config.path.c_str(), argv.data());
      _exit(127);
    }
    close(to_child[0]);
    close(from_child[1]);
    in_fd_ = to_child[1];
    out_fd_ = from_child[0];
  }

  ~SolverProcess() {
    close_input();
    if (out_fd_ >= 0) close(out_fd_);
    if (pid_ > 0) {
      kill(pid_, SIGKILL);
      waitpid(pid_, nullptr, 0);
    }
  }

  void send(const std::string& text) {
    size_t written = 0;
    while (written < text.size()) {
      ssize_t n = write(in_fd_, text.data() + written, text.size() - written);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw SolverError("solver process closed its input");
      }
      written += static_cast<size_t>(n);
    }
  }

  void close_input() {
    if (in_fd_ >= 0) {
      close(in_fd_);
      in_fd_ = -1;
    }
  }

  // First non-empty output line (the check-sat result).
  std::string read_line() {
    for (;;) {
      size_t nl = buffer_.find('\n');
      if (nl != std::string::npos) {
        std::string line = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) return line;
        continue;
      }
      if (!fill()) {
        if (buffer_.empty()) throw SolverError("solver produced no output");
        std::string line = std::move(buffer_);
        buffer_.clear();
        return line;
      }
    }
  }

  std::string read_all() {
    while (fill()) {
    }
    return std::exchange(buffer_, std::string());
  }

 private:
  // Appends available output; false on EOF. Throws on timeout.
  bool fill() {
    auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline_ - Clock::now());
    if (remaining.count() <= 0) throw SolverError("solver timed out");
    pollfd pfd{out_fd_, POLLIN, 0};
    int pr = poll(&pfd, 1, static_cast<int>(remaining.count()) + 1);
    if (pr == 0) throw SolverError("solver timed out");
    if (pr < 0) throw SolverError("error waiting for solver output");
    char chunk[4096];
    ssize_t n = read(out_fd_, chunk, sizeof chunk);
    if (n < 0) throw SolverError("error reading solver output");
    if (n == 0) return false;
    buffer_.append(chunk, static_cast<size_t>(n));
    return true;
  }

  pid_t pid_ = -1;
  int in_fd_ = -1;
  int out_fd_ = -1;
  std::string buffer_;
  Clock::time_point deadline_;
};

bool looks_like_z3(const std::string& path) {
  return std::filesystem::path(path).filename().string().rfind("z3", 0) == 0;
}

std::optional<std::string> find_on_path(const std::string& name) {
  const char* path_env = std::getenv("PATH");
  if (!path_env) return std::nullopt;
  std::istringstream dirs(path_env);
  std::string dir;
  while (std::getline(dirs, dir, ':')) {
    if (dir.empty()) continue;
    std::filesystem::path candidate = std::filesystem::path(dir) / name;
    std::error_code ec;
    if (std::filesystem::is_regular_file(candidate, ec) &&
        access(candidate.c_str(), X_OK) == 0)
      return candidate.string();
  }
  return std::nullopt;
}

std::optional<std::string> bundled_solver() {
  std::error_code ec;
  std::filesystem::path self = std::filesystem::read_symlink("/proc/self/exe", ec);
  if (ec) return std::nullopt;
  std::filesystem::path candidate = self.parent_path() / "minismt";
  if (std::filesystem::is_regular_file(candidate, ec) &&
      access(candidate.c_str(), X_OK) == 0)
    return candidate.string();
  return std::nullopt;
}

}  // namespace

SolverConfig resolve_solver(const std::string& explicit_path, double timeout_sec) {
  SolverConfig config;
  config.timeout_sec = timeout_sec;
  std::string path = explicit_path;
  if (path.empty()) {
    if (const char* env = std::getenv("DISEQ_SOLVER")) path = env;
  }
  if (path.empty()) {
    if (auto z3 = find_on_path("z3")) path = *z3;
  }
  if (path.empty()) {
    if (auto bundled = bundled_solver()) path = *bundled;
  }
  if (path.empty())
    throw SolverError(
        "no SMT solver found: pass --solver, set DISEQ_SOLVER, or install z3");
  config.path = path;
  if (looks_like_z3(path)) {
    config.args = {"-in", "-T:" + std::to_string(std::max(1, int(timeout_sec)))};
  }
  return config;
}

std::optional<Soln> solve(const Trace& ssa, const SolverConfig& config) {
  Formula formula = emit_formula(ssa);
  SolverProcess proc(config);
  std::string request = formula.preamble();
  for (const auto& d : formula.decls)
    request += "(declare-const " + d.name + " " + d.sort + ")\n";
  for (const auto& a : formula.assertions) request += a + "\n";
  request += "(check-sat)\n";
  proc.send(request);

  std::string result = proc.read_line();
  if (result == "unsat") {
    proc.send("(exit)\n");
    return std::nullopt;
  }
  if (result != "sat")
    throw SolverError("solver answered '" + result + "'");

  proc.send("(get-model)\n(exit)\n");
  proc.close_input();
  std::string model_text = proc.read_all();
  return parse_model(model_text);
}

}  // namespace diseq
