#include "diseq/asm.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

namespace diseq {

std::string hex_word(Word w) {
  char buf[11];
  snprintf(buf, sizeof buf, "0x%08x", w);
  return buf;
}

AsmError::AsmError(const std::string& origin, int line, const std::string& msg)
    : std::runtime_error(origin + ":" + std::to_string(line) + ": " + msg),
      line_(line) {}

namespace {

bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

SourceProgram parse_source(const std::string& text, const std::string& origin) {
  SourceProgram prog;
  prog.origin = origin;
  std::istringstream in(text);
  std::string raw;
  int number = 0;
  while (std::getline(in, raw)) {
    ++number;
    SourceLine line;
    line.number = number;
    size_t hash = raw.find('#');
    if (hash != std::string::npos) {
      line.comment = raw.substr(hash + 1);
      raw = raw.substr(0, hash);
    }
    std::string body = trim(raw);
    // Leading "name:" groups are label definitions.
    for (;;) {
      size_t i = 0;
      while (i < body.size() && is_ident_char(body[i])) ++i;
      if (i == 0 || i >= body.size() || body[i] != ':') break;
      std::string label = body.substr(0, i);
      if (std::isdigit(static_cast<unsigned char>(label[0])))
        throw AsmError(origin, number, "label may not start with a digit: " + label);
      line.labels.push_back(label);
      body = trim(body.substr(i + 1));
    }
    line.text = body;
    prog.lines.push_back(std::move(line));
  }
  return prog;
}

namespace {

// Operand scanner for one instruction line. Understands registers,
// integer literals, labels, and the i($reg) addressing form.
struct Operands {
  const std::string& origin;
  int line;
  std::string text;
  size_t pos = 0;

  [[noreturn]] void fail(const std::string& msg) const {
    throw AsmError(origin, line, msg + " in '" + text + "'");
  }

  void skip_ws() {
    while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t')) ++pos;
  }

  bool at_end() {
    skip_ws();
    return pos >= text.size();
  }

  void expect(char c) {
    skip_ws();
    if (pos >= text.size() || text[pos] != c)
      fail(std::string("expected '") + c + "'");
    ++pos;
  }

  std::string token() {
    skip_ws();
    size_t start = pos;
    if (pos < text.size() && (text[pos] == '-' || text[pos] == '$' || text[pos] == '.'))
      ++pos;
    while (pos < text.size() && is_ident_char(text[pos])) ++pos;
    if (pos == start) fail("expected token");
    return text.substr(start, pos - start);
  }

  int reg() {
    std::string tok = token();
    if (tok.empty() || tok[0] != '$') fail("expected register, got '" + tok + "'");
    int value = 0;
    auto [p, ec] = std::from_chars(tok.data() + 1, tok.data() + tok.size(), value);
    if (ec != std::errc() || p != tok.data() + tok.size() || value < 0 || value > 31)
      fail("bad register '" + tok + "'");
    return value;
  }

  // Decimal (optionally negative) or 0x-hex literal.
  std::optional<int64_t> try_int(const std::string& tok) const {
    if (tok.empty()) return std::nullopt;
    bool neg = tok[0] == '-';
    std::string body = neg ? tok.substr(1) : tok;
    int base = 10;
    if (body.size() > 2 && body[0] == '0' && (body[1] == 'x' || body[1] == 'X')) {
      base = 16;
      body = body.substr(2);
    }
    if (body.empty()) return std::nullopt;
    uint64_t mag = 0;
    auto [p, ec] = std::from_chars(body.data(), body.data() + body.size(), mag, base);
    if (ec != std::errc() || p != body.data() + body.size()) return std::nullopt;
    if (mag > uint64_t(1) << 32) return std::nullopt;
    return neg ? -static_cast<int64_t>(mag) : static_cast<int64_t>(mag);
  }
};

struct Assembler {
  const SourceProgram& source;
  std::map<std::string, Word> labels;  // name -> byte address

  explicit Assembler(const SourceProgram& src) : source(src) { collect_labels(); }

  [[noreturn]] void fail(int line, const std::string& msg) const {
    throw AsmError(source.origin, line, msg);
  }

  void collect_labels() {
    Word addr = 0;
    for (const auto& line : source.lines) {
      for (const auto& label : line.labels) {
        if (!labels.emplace(label, addr).second)
          fail(line.number, "duplicate label: " + label);
      }
      if (!line.text.empty()) addr += 4;
    }
  }

  Word label_address(const std::string& name, int line) const {
    auto it = labels.find(name);
    if (it == labels.end()) fail(line, "undefined label: " + name);
    return it->second;
  }

  // 16-bit immediate: decimal in [-32768, 32767] or hex in [0, 0xffff].
  int32_t check_imm16(int64_t v, bool hex, int line) const {
    if (hex ? (v < 0 || v > 0xffff) : (v < -32768 || v > 32767))
      fail(line, "immediate out of range: " + std::to_string(v));
    return hex ? static_cast<int32_t>(static_cast<int16_t>(v)) : static_cast<int32_t>(v);
  }

  Word encode_line(const SourceLine& line, Word addr) const {
    Operands ops{source.origin, line.number, line.text};
    std::string mnem = ops.token();

    if (mnem == ".word") {
      ops.skip_ws();
      std::string tok = ops.token();
      if (!ops.at_end()) ops.fail("trailing operands");
      if (auto v = ops.try_int(tok)) {
        if (*v < INT32_MIN || *v > int64_t(UINT32_MAX))
          fail(line.number, ".word operand does not fit in 32 bits");
        return static_cast<Word>(*v);
      }
      if (tok.empty() || tok[0] == '$' || std::isdigit(static_cast<unsigned char>(tok[0])))
        ops.fail("bad .word operand '" + tok + "'");
      return label_address(tok, line.number);
    }

    Instruction instr;
    auto three_regs = [&](InstrKind k) {
      instr.kind = k;
      instr.d = ops.reg();
      ops.expect(',');
      instr.s = ops.reg();
      ops.expect(',');
      instr.t = ops.reg();
    };
    auto two_regs = [&](InstrKind k) {
      instr.kind = k;
      instr.s = ops.reg();
      ops.expect(',');
      instr.t = ops.reg();
    };
    auto one_reg = [&](InstrKind k, int Instruction::* field) {
      instr.kind = k;
      instr.*field = ops.reg();
    };

    if (mnem == "add") three_regs(InstrKind::Add);
    else if (mnem == "sub") three_regs(InstrKind::Sub);
    else if (mnem == "slt") three_regs(InstrKind::Slt);
    else if (mnem == "sltu") three_regs(InstrKind::Sltu);
    else if (mnem == "mult") two_regs(InstrKind::Mult);
    else if (mnem == "multu") two_regs(InstrKind::Multu);
    else if (mnem == "div") two_regs(InstrKind::Div);
    else if (mnem == "divu") two_regs(InstrKind::Divu);
    else if (mnem == "mfhi") one_reg(InstrKind::Mfhi, &Instruction::d);
    else if (mnem == "mflo") one_reg(InstrKind::Mflo, &Instruction::d);
    else if (mnem == "lis") one_reg(InstrKind::Lis, &Instruction::d);
    else if (mnem == "jr") one_reg(InstrKind::Jr, &Instruction::s);
    else if (mnem == "jalr") one_reg(InstrKind::Jalr, &Instruction::s);
    else if (mnem == "beq" || mnem == "bne") {
      instr.kind = mnem == "beq" ? InstrKind::Beq : InstrKind::Bne;
      instr.s = ops.reg();
      ops.expect(',');
      instr.t = ops.reg();
      ops.expect(',');
      std::string tok = ops.token();
      if (tok[0] == '$') ops.fail("branch target may not be a register");
      if (auto v = ops.try_int(tok)) {
        bool hex = tok.find('x') != std::string::npos || tok.find('X') != std::string::npos;
        instr.imm = check_imm16(*v, hex, line.number);
      } else {
        // pc-relative word offset from the already-incremented pc
        Word target = label_address(tok, line.number);
        int64_t offset = (static_cast<int64_t>(target) - (static_cast<int64_t>(addr) + 4)) / 4;
        instr.imm = check_imm16(offset, false, line.number);
      }
    } else if (mnem == "lw" || mnem == "sw") {
      instr.kind = mnem == "lw" ? InstrKind::Lw : InstrKind::Sw;
      instr.t = ops.reg();
      ops.expect(',');
      std::string tok = ops.token();
      auto v = ops.try_int(tok);
      if (!v) ops.fail("expected offset, got '" + tok + "'");
      bool hex = tok.find('x') != std::string::npos || tok.find('X') != std::string::npos;
      instr.imm = check_imm16(*v, hex, line.number);
      ops.skip_ws();
      // Both "lw $t, i($s)" and "lw $t, i, $s" are accepted.
      if (ops.pos < ops.text.size() && ops.text[ops.pos] == '(') {
        ops.expect('(');
        instr.s = ops.reg();
        ops.expect(')');
      } else {
        ops.expect(',');
        instr.s = ops.reg();
      }
    } else {
      fail(line.number, "unknown mnemonic: " + mnem);
    }

    if (!ops.at_end()) ops.fail("trailing operands");
    return encode(instr);
  }

  std::vector<Word> run() const {
    std::vector<Word> words;
    Word addr = 0;
    for (const auto& line : source.lines) {
      if (line.text.empty()) continue;
      words.push_back(encode_line(line, addr));
      addr += 4;
    }
    return words;
  }
};

constexpr Word kFunctAdd = 0x20, kFunctSub = 0x22, kFunctMult = 0x18,
               kFunctMultu = 0x19, kFunctDiv = 0x1a, kFunctDivu = 0x1b,
               kFunctMfhi = 0x10, kFunctMflo = 0x12, kFunctLis = 0x14,
               kFunctSlt = 0x2a, kFunctSltu = 0x2b, kFunctJr = 0x08,
               kFunctJalr = 0x09;
constexpr Word kOpBeq = 0x04, kOpBne = 0x05, kOpLw = 0x23, kOpSw = 0x2b;

Word r_format(Word s, Word t, Word d, Word funct) {
  return (s << 21) | (t << 16) | (d << 11) | funct;
}

Word i_format(Word op, Word s, Word t, int32_t imm) {
  return (op << 26) | (s << 21) | (t << 16) | (static_cast<Word>(imm) & 0xffff);
}

}  // namespace

Word encode(const Instruction& i) {
  Word s = static_cast<Word>(i.s), t = static_cast<Word>(i.t), d = static_cast<Word>(i.d);
  switch (i.kind) {
    case InstrKind::Add:  return r_format(s, t, d, kFunctAdd);
    case InstrKind::Sub:  return r_format(s, t, d, kFunctSub);
    case InstrKind::Slt:  return r_format(s, t, d, kFunctSlt);
    case InstrKind::Sltu: return r_format(s, t, d, kFunctSltu);
    case InstrKind::Mult: return r_format(s, t, 0, kFunctMult);
    case InstrKind::Multu:return r_format(s, t, 0, kFunctMultu);
    case InstrKind::Div:  return r_format(s, t, 0, kFunctDiv);
    case InstrKind::Divu: return r_format(s, t, 0, kFunctDivu);
    case InstrKind::Mfhi: return r_format(0, 0, d, kFunctMfhi);
    case InstrKind::Mflo: return r_format(0, 0, d, kFunctMflo);
    case InstrKind::Lis:  return r_format(0, 0, d, kFunctLis);
    case InstrKind::Jr:   return r_format(s, 0, 0, kFunctJr);
    case InstrKind::Jalr: return r_format(s, 0, 0, kFunctJalr);
    case InstrKind::Beq:  return i_format(kOpBeq, s, t, i.imm);
    case InstrKind::Bne:  return i_format(kOpBne, s, t, i.imm);
    case InstrKind::Lw:   return i_format(kOpLw, s, t, i.imm);
    case InstrKind::Sw:   return i_format(kOpSw, s, t, i.imm);
    case InstrKind::RawWord: return i.raw;
  }
  return i.raw;
}

Instruction decode(Word w) {
  Instruction instr;
  Word op = w >> 26;
  Word s = (w >> 21) & 31, t = (w >> 16) & 31, d = (w >> 11) & 31;
  Word shamt = (w >> 6) & 31, funct = w & 63;
  auto raw = [&] {
    instr.kind = InstrKind::RawWord;
    instr.d = instr.s = instr.t = 0;
    instr.raw = w;
    return instr;
  };

  if (op == 0) {
    if (shamt != 0) return raw();
    instr.s = static_cast<int>(s);
    instr.t = static_cast<int>(t);
    instr.d = static_cast<int>(d);
    switch (funct) {
      case kFunctAdd:  instr.kind = InstrKind::Add; return instr;
      case kFunctSub:  instr.kind = InstrKind::Sub; return instr;
      case kFunctSlt:  instr.kind = InstrKind::Slt; return instr;
      case kFunctSltu: instr.kind = InstrKind::Sltu; return instr;
      case kFunctMult:
      case kFunctMultu:
      case kFunctDiv:
      case kFunctDivu:
        if (d != 0) return raw();
        instr.d = 0;
        instr.kind = funct == kFunctMult ? InstrKind::Mult
                   : funct == kFunctMultu ? InstrKind::Multu
                   : funct == kFunctDiv ? InstrKind::Div : InstrKind::Divu;
        return instr;
      case kFunctMfhi:
      case kFunctMflo:
      case kFunctLis:
        if (s != 0 || t != 0) return raw();
        instr.s = instr.t = 0;
        instr.kind = funct == kFunctMfhi ? InstrKind::Mfhi
                   : funct == kFunctMflo ? InstrKind::Mflo : InstrKind::Lis;
        return instr;
      case kFunctJr:
      case kFunctJalr:
        if (t != 0 || d != 0) return raw();
        instr.t = instr.d = 0;
        instr.kind = funct == kFunctJr ? InstrKind::Jr : InstrKind::Jalr;
        return instr;
      default:
        return raw();
    }
  }

  instr.s = static_cast<int>(s);
  instr.t = static_cast<int>(t);
  instr.imm = static_cast<int16_t>(w & 0xffff);
  switch (op) {
    case kOpBeq: instr.kind = InstrKind::Beq; return instr;
    case kOpBne: instr.kind = InstrKind::Bne; return instr;
    case kOpLw:  instr.kind = InstrKind::Lw; return instr;
    case kOpSw:  instr.kind = InstrKind::Sw; return instr;
    default:     return raw();
  }
}

std::vector<Word> assemble(const SourceProgram& source) {
  return Assembler(source).run();
}

std::vector<Word> assemble_text(const std::string& text, const std::string& origin) {
  return assemble(parse_source(text, origin));
}

std::vector<Word> assemble_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw AsmError(path, 0, "cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return assemble_text(buf.str(), path);
}

std::string format_instruction(const Instruction& i) {
  auto r = [](int n) { return "$" + std::to_string(n); };
  switch (i.kind) {
    case InstrKind::Add:  return "add " + r(i.d) + ", " + r(i.s) + ", " + r(i.t);
    case InstrKind::Sub:  return "sub " + r(i.d) + ", " + r(i.s) + ", " + r(i.t);
    case InstrKind::Slt:  return "slt " + r(i.d) + ", " + r(i.s) + ", " + r(i.t);
    case InstrKind::Sltu: return "sltu " + r(i.d) + ", " + r(i.s) + ", " + r(i.t);
    case InstrKind::Mult: return "mult " + r(i.s) + ", " + r(i.t);
    case InstrKind::Multu:return "multu " + r(i.s) + ", " + r(i.t);
    case InstrKind::Div:  return "div " + r(i.s) + ", " + r(i.t);
    case InstrKind::Divu: return "divu " + r(i.s) + ", " + r(i.t);
    case InstrKind::Mfhi: return "mfhi " + r(i.d);
    case InstrKind::Mflo: return "mflo " + r(i.d);
    case InstrKind::Lis:  return "lis " + r(i.d);
    case InstrKind::Jr:   return "jr " + r(i.s);
    case InstrKind::Jalr: return "jalr " + r(i.s);
    case InstrKind::Beq:  return "beq " + r(i.s) + ", " + r(i.t) + ", " + std::to_string(i.imm);
    case InstrKind::Bne:  return "bne " + r(i.s) + ", " + r(i.t) + ", " + std::to_string(i.imm);
    case InstrKind::Lw:   return "lw " + r(i.t) + ", " + std::to_string(i.imm) + "(" + r(i.s) + ")";
    case InstrKind::Sw:   return "sw " + r(i.t) + ", " + std::to_string(i.imm) + "(" + r(i.s) + ")";
    case InstrKind::RawWord: return ".word " + hex_word(i.raw);
  }
  return ".word " + hex_word(i.raw);
}

std::string to_big_endian(std::span<const Word> words) {
  std::string bytes;
  bytes.reserve(words.size() * 4);
  for (Word w : words) {
    bytes.push_back(static_cast<char>(w >> 24));
    bytes.push_back(static_cast<char>(w >> 16));
    bytes.push_back(static_cast<char>(w >> 8));
    bytes.push_back(static_cast<char>(w));
  }
  return bytes;
}

std::vector<Word> from_big_endian(const std::string& bytes) {
  if (bytes.size() % 4 != 0)
    throw std::runtime_error("binary program length is not a multiple of 4");
  std::vector<Word> words(bytes.size() / 4);
  for (size_t i = 0; i < words.size(); ++i) {
    words[i] = (static_cast<Word>(static_cast<unsigned char>(bytes[4 * i])) << 24) |
               (static_cast<Word>(static_cast<unsigned char>(bytes[4 * i + 1])) << 16) |
               (static_cast<Word>(static_cast<unsigned char>(bytes[4 * i + 2])) << 8) |
               static_cast<Word>(static_cast<unsigned char>(bytes[4 * i + 3]));
  }
  return words;
}

}  // namespace diseq
