#include "sthl/dsl/lexer.hpp"

#include <array>
#include <charconv>
#include <cctype>

namespace sthl::dsl {

namespace {

constexpr std::array<std::string_view, 18> kReserved{
    "object", "entity", "region", "assert", "allowCollide", "allowOutside", "inside", "rand", "vec3",
    "rot", "dot", "Number", "Degree", "Bool", "Vector3", "Rotation", "Color", "Material"};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool digit(char c) { return c >= '0' && c <= '9'; }

class Lexer {
 public:
  Lexer(std::string_view src, std::vector<Diagnostic>& errors) : src_(src), errors_(errors) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skip_trivia();
      if (pos_ >= src_.size()) break;
      const std::size_t start = pos_;
      const int line = line_, col = col_;
      Token tok;
      if (!lex_one(tok)) continue;
      tok.span = {start, pos_ - start, line, col};
      out.push_back(std::move(tok));
    }
    Token end;
    end.kind = TokenKind::End;
    end.span = {src_.size(), 0, line_, col_};
    out.push_back(std::move(end));
    return out;
  }

 private:
  char peek(std::size_t ahead = 0) const { return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0'; }

  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void error(std::string msg, std::size_t start, int line, int col) {
    errors_.push_back({DiagnosticKind::LexError, std::move(msg), {start, std::max<std::size_t>(1, pos_ - start), line, col}});
  }

  void skip_trivia() {
    while (pos_ < src_.size()) {
      const char c = peek();
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (c == '/' && peek(1) == '/') {
        while (pos_ < src_.size() && peek() != '\n') advance();
      } else if (c == '/' && peek(1) == '*') {
        const std::size_t start = pos_;
        const int line = line_, col = col_;
        advance();
        advance();
        bool closed = false;
        while (pos_ < src_.size()) {
          if (peek() == '*' && peek(1) == '/') {
            advance();
            advance();
            closed = true;
            break;
          }
          advance();
        }
        if (!closed) error("unterminated block comment", start, line, col);
      } else {
        break;
      }
    }
  }

  bool lex_one(Token& tok) {
    const std::size_t start = pos_;
    const int line = line_, col = col_;
    const char c = peek();

    if (ident_start(c)) {
      while (ident_char(peek())) advance();
      tok.kind = TokenKind::Identifier;
      tok.text = std::string(src_.substr(start, pos_ - start));
      return true;
    }
    if (digit(c)) {
      while (digit(peek())) advance();
      if (peek() == '.' && digit(peek(1))) {
        advance();
        while (digit(peek())) advance();
      }
      if ((peek() == 'e' || peek() == 'E') &&
          (digit(peek(1)) || ((peek(1) == '+' || peek(1) == '-') && digit(peek(2))))) {
        advance();
        if (peek() == '+' || peek() == '-') advance();
        while (digit(peek())) advance();
      }
      tok.kind = TokenKind::Number;
      tok.text = std::string(src_.substr(start, pos_ - start));
      const auto res = std::from_chars(tok.text.data(), tok.text.data() + tok.text.size(), tok.number);
      if (res.ec != std::errc{}) {
        error("number literal out of range: " + tok.text, start, line, col);
        return false;
      }
      if (ident_start(peek())) {
        while (ident_char(peek())) advance();
        error("malformed number literal '" + std::string(src_.substr(start, pos_ - start)) + "'", start, line, col);
        return false;
      }
      return true;
    }
    if (c == '"') {
      advance();
      std::string value;
      while (true) {
        if (pos_ >= src_.size() || peek() == '\n') {
          error("unterminated string literal", start, line, col);
          return false;
        }
        const char ch = peek();
        advance();
        if (ch == '"') break;
        if (ch == '\\') {
          if (pos_ >= src_.size()) continue;
          const char esc = peek();
          advance();
          switch (esc) {
            case 'n': value += '\n'; break;
            case 't': value += '\t'; break;
            case '"': value += '"'; break;
            case '\\': value += '\\'; break;
            default:
              error(std::string("unknown escape sequence '\\") + esc + "'", start, line, col);
              value += esc;
          }
        } else {
          value += ch;
        }
      }
      tok.kind = TokenKind::String;
      tok.text = std::move(value);
      return true;
    }

    auto single = [&](TokenKind k) {
      advance();
      tok.kind = k;
      return true;
    };
    auto pair = [&](TokenKind k) {
      advance();
      advance();
      tok.kind = k;
      return true;
    };

    switch (c) {
      case ';': return single(TokenKind::Semicolon);
      case ',': return single(TokenKind::Comma);
      case '(': return single(TokenKind::LParen);
      case ')': return single(TokenKind::RParen);
      case '.': return single(TokenKind::Dot);
      case '+': return single(TokenKind::Plus);
      case '-': return single(TokenKind::Minus);
      case '*': return single(TokenKind::Star);
      case '/': return single(TokenKind::Slash);
      case '=': return single(TokenKind::Eq);
      case '<':
        if (peek(1) == '-') return pair(TokenKind::Arrow);
        if (peek(1) == '=') return pair(TokenKind::Le);
        return single(TokenKind::Lt);
      case '>':
        if (peek(1) == '=') return pair(TokenKind::Ge);
        return single(TokenKind::Gt);
      case '!':
        if (peek(1) == '=') return pair(TokenKind::Ne);
        return single(TokenKind::Bang);
      case '&':
        if (peek(1) == '&') return pair(TokenKind::AndAnd);
        break;
      case '|':
        if (peek(1) == '|') return pair(TokenKind::OrOr);
        break;
      default: break;
    }
    // Consume one UTF-8 code point so the diagnostic covers the whole character.
    advance();
    while (pos_ < src_.size() && (static_cast<unsigned char>(peek()) & 0xC0) == 0x80) advance();
    error("illegal character '" + std::string(src_.substr(start, pos_ - start)) + "'", start, line, col);
    return false;
  }

  std::string_view src_;
  std::vector<Diagnostic>& errors_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

}  // namespace

std::string_view to_string(TokenKind kind) {
  switch (kind) {
    case TokenKind::Identifier: return "identifier";
    case TokenKind::Number: return "number";
    case TokenKind::String: return "string";
    case TokenKind::Semicolon: return "';'";
    case TokenKind::Comma: return "','";
    case TokenKind::LParen: return "'('";
    case TokenKind::RParen: return "')'";
    case TokenKind::Dot: return "'.'";
    case TokenKind::Arrow: return "'<-'";
    case TokenKind::Plus: return "'+'";
    case TokenKind::Minus: return "'-'";
    case TokenKind::Star: return "'*'";
    case TokenKind::Slash: return "'/'";
    case TokenKind::Eq: return "'='";
    case TokenKind::Ne: return "'!='";
    case TokenKind::Lt: return "'<'";
    case TokenKind::Le: return "'<='";
    case TokenKind::Gt: return "'>'";
    case TokenKind::Ge: return "'>='";
    case TokenKind::AndAnd: return "'&&'";
    case TokenKind::OrOr: return "'||'";
    case TokenKind::Bang: return "'!'";
    case TokenKind::End: return "end of input";
  }
  return "token";
}

std::vector<Token> tokenize(std::string_view source, std::vector<Diagnostic>& errors) {
  return Lexer(source, errors).run();
}

bool is_reserved_word(std::string_view word) {
  for (auto r : kReserved) {
    if (r == word) return true;
  }
  return false;
}

}  // namespace sthl::dsl
