#ifndef DISEQ_WORD_HPP
#define DISEQ_WORD_HPP

#include <cstdint>
#include <string>

namespace diseq {

// 32-bit bit pattern: the unit of program text, register contents and
// memory cells. Arithmetic is two's-complement; wrapping is silent.
using Word = uint32_t;

inline int32_t as_signed(Word w) { return static_cast<int32_t>(w); }
inline Word as_word(int32_t v) { return static_cast<Word>(v); }

std::string hex_word(Word w);  // "0x00221820"

}  // namespace diseq

#endif
