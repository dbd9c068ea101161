#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

namespace testgen::java {

enum class TokKind { Ident, Number, Str, Chr, Punct };

struct Token {
  TokKind kind = TokKind::Punct;
  std::string_view text;
  std::size_t begin = 0;  // byte offset into the lexed source
  std::size_t end = 0;    // one past the last byte
  int line = 1;
};

// Tokenizes Java-family source. Whitespace and comments are dropped, string
// and char literals come through as single tokens, and "&&" / "||" are kept
// as one token each; every other operator is split into single characters.
// Unterminated comments and literals are tolerated (they run to EOF) so that
// LLM output can still be scanned.
std::vector<Token> lex(std::string_view source);

}  // namespace testgen::java
