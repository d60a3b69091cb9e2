#ifndef DISEQ_ASM_HPP
#define DISEQ_ASM_HPP

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "diseq/word.hpp"

namespace diseq {

// The supported instruction subset. RawWord carries .word data and any
// encoding that does not match one of the instruction patterns.
enum class InstrKind {
  Add, Sub, Mult, Multu, Div, Divu, Mfhi, Mflo, Lis,
  Slt, Sltu, Jr, Jalr, Beq, Bne, Lw, Sw, RawWord,
};

struct Instruction {
  InstrKind kind = InstrKind::RawWord;
  int d = 0;        // destination register (R-format)
  int s = 0;        // first source / base register
  int t = 0;        // second source / transfer register
  int32_t imm = 0;  // 16-bit signed immediate (beq/bne/lw/sw)
  Word raw = 0;     // RawWord payload

  bool operator==(const Instruction&) const = default;
};

// One source line, split into label definitions, instruction text and
// trailing comment. Instruction operands are parsed during assembly.
struct SourceLine {
  int number = 0;  // 1-based
  std::vector<std::string> labels;
  std::string text;     // instruction or directive, possibly empty
  std::string comment;  // without the leading '#'
};

struct SourceProgram {
  std::vector<SourceLine> lines;
  std::string origin = "<inline>";
};

class AsmError : public std::runtime_error {
 public:
  AsmError(const std::string& origin, int line, const std::string& msg);
  int line() const { return line_; }

 private:
  int line_;
};

// Splits text into lines/labels/comments. Throws AsmError on malformed
// label syntax; operand errors surface in assemble().
SourceProgram parse_source(const std::string& text,
                           const std::string& origin = "<inline>");

// Two-pass assembly: label collection, then encoding. One word per
// instruction or .word directive, loaded at address 0.
std::vector<Word> assemble(const SourceProgram& source);
std::vector<Word> assemble_text(const std::string& text,
                                const std::string& origin = "<inline>");
std::vector<Word> assemble_file(const std::string& path);

// Encodes a single instruction. RawWord encodes to its payload.
Word encode(const Instruction& instr);

// Inverse of encode where the word matches a subset pattern; all other
// words (including 0x00000000) decode to RawWord.
Instruction decode(Word w);

// "add $3, $1, $2" style rendering for diagnostics.
std::string format_instruction(const Instruction& instr);

// Big-endian serialization of an assembled program.
std::string to_big_endian(std::span<const Word> words);
std::vector<Word> from_big_endian(const std::string& bytes);

}  // namespace diseq

#endif
