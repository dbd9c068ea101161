#include "testgen/lexer.hpp"

#include <cctype>

namespace testgen::java {

namespace {

bool is_ident_start(unsigned char c) {
  return std::isalpha(c) || c == '_' || c == '$' || c >= 0x80;
}

bool is_ident_part(unsigned char c) {
  return is_ident_start(c) || std::isdigit(c);
}

}  // namespace

std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  out.reserve(src.size() / 4);
  std::size_t i = 0;
  const std::size_t n = src.size();
  int line = 1;

  auto push = [&](TokKind kind, std::size_t begin, std::size_t end) {
    out.push_back(Token{kind, src.substr(begin, end - begin), begin, end, line});
  };

  while (i < n) {
    unsigned char c = static_cast<unsigned char>(src[i]);

    if (c == '\n') {
      ++line;
      ++i;
      continue;
    }
    if (std::isspace(c)) {
      ++i;
      continue;
    }

    // Comments.
    if (c == '/' && i + 1 < n) {
      if (src[i + 1] == '/') {
        i += 2;
        while (i < n && src[i] != '\n') ++i;
        continue;
      }
      if (src[i + 1] == '*') {
        i += 2;
        while (i + 1 < n && !(src[i] == '*' && src[i + 1] == '/')) {
          if (src[i] == '\n') ++line;
          ++i;
        }
        i = (i + 1 < n) ? i + 2 : n;
        continue;
      }
    }

    // Text blocks and plain string literals.
    if (c == '"') {
      std::size_t begin = i;
      if (i + 2 < n && src[i + 1] == '"' && src[i + 2] == '"') {
        i += 3;
        while (i + 2 < n && !(src[i] == '"' && src[i + 1] == '"' && src[i + 2] == '"')) {
          if (src[i] == '\n') ++line;
          if (src[i] == '\\' && i + 1 < n) ++i;
          ++i;
        }
        i = (i + 2 < n) ? i + 3 : n;
      } else {
        ++i;
        while (i < n && src[i] != '"' && src[i] != '\n') {
          if (src[i] == '\\' && i + 1 < n) ++i;
          ++i;
        }
        if (i < n && src[i] == '"') ++i;
      }
      push(TokKind::Str, begin, i);
      continue;
    }

    if (c == '\'') {
      std::size_t begin = i;
      ++i;
      while (i < n && src[i] != '\'' && src[i] != '\n') {
        if (src[i] == '\\' && i + 1 < n) ++i;
        ++i;
      }
      if (i < n && src[i] == '\'') ++i;
      push(TokKind::Chr, begin, i);
      continue;
    }

    if (std::isdigit(c) || (c == '.' && i + 1 < n && std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
      std::size_t begin = i;
      ++i;
      while (i < n) {
        unsigned char d = static_cast<unsigned char>(src[i]);
        if (std::isalnum(d) || d == '_' || d == '.') {
          ++i;
          continue;
        }
        // Exponent sign: 1e+5, 0x1p-3.
        if ((d == '+' || d == '-') && i > begin) {
          unsigned char prev = static_cast<unsigned char>(src[i - 1]);
          if (prev == 'e' || prev == 'E' || prev == 'p' || prev == 'P') {
            ++i;
            continue;
          }
        }
        break;
      }
      push(TokKind::Number, begin, i);
      continue;
    }

    if (is_ident_start(c)) {
      std::size_t begin = i;
      ++i;
      while (i < n && is_ident_part(static_cast<unsigned char>(src[i]))) ++i;
      push(TokKind::Ident, begin, i);
      continue;
    }

    // Punctuation. Only the short-circuit operators need to stay whole.
    if ((c == '&' || c == '|') && i + 1 < n && src[i + 1] == src[i]) {
      push(TokKind::Punct, i, i + 2);
      i += 2;
      continue;
    }
    push(TokKind::Punct, i, i + 1);
    ++i;
  }
  return out;
}

}  // namespace testgen::java
