#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "sthl/dsl/ast.hpp"
#include "sthl/dsl/diagnostics.hpp"

namespace sthl::dsl {

enum class TokenKind {
  Identifier,
  Number,
  String,
  Semicolon,
  Comma,
  LParen,
  RParen,
  Dot,
  Arrow,  // <-
  Plus,
  Minus,
  Star,
  Slash,
  Eq,
  Ne,
  Lt,
  Le,
  Gt,
  Ge,
  AndAnd,
  OrOr,
  Bang,
  End,
};

std::string_view to_string(TokenKind kind);

struct Token {
  TokenKind kind = TokenKind::End;
  std::string text;  // identifier name, decoded string contents, or raw number text
  double number = 0.0;
  SourceSpan span;
};

/// Splits `source` into tokens terminated by an End token. Comments (`//` and
/// `/* */`) and whitespace are skipped. Lexical errors are appended to `errors`
/// and the offending character is skipped.
std::vector<Token> tokenize(std::string_view source, std::vector<Diagnostic>& errors);

bool is_reserved_word(std::string_view word);

}  // namespace sthl::dsl
