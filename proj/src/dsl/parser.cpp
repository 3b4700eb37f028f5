#include "sthl/dsl/parser.hpp"

#include <set>
#include <unordered_set>

#include "sthl/dsl/lexer.hpp"

namespace sthl::dsl {

namespace {

struct Failure {
  Diagnostic diag;
};

SourceSpan cover(const SourceSpan& a, const SourceSpan& b) {
  SourceSpan s = a;
  s.length = (b.offset + b.length > a.offset) ? b.offset + b.length - a.offset : a.length;
  return s;
}

class Parser {
 public:
  Parser(std::vector<Token> tokens, std::vector<Diagnostic>& errors, std::vector<Diagnostic>& notes)
      : toks_(std::move(tokens)), errors_(errors), notes_(notes) {}

  Program run() {
    Program prog;
    while (!at(TokenKind::End)) {
      const std::size_t stmt_start = pos_;
      try {
        Statement stmt = statement();
        const Token& semi = expect(TokenKind::Semicolon, "';' after statement");
        stmt.span = cover(toks_[stmt_start].span, semi.span);
        prog.statements.push_back(std::move(stmt));
      } catch (const Failure& f) {
        errors_.push_back(f.diag);
        recover();
      }
    }
    if (prog.statements.empty() && errors_.empty()) {
      fail_here("a program is one or more statements, found empty input");
    }
    return prog;
  }

 private:
  const Token& cur() const { return toks_[pos_]; }
  const Token& prev() const { return toks_[pos_ == 0 ? 0 : pos_ - 1]; }
  bool at(TokenKind k) const { return cur().kind == k; }
  bool at_word(std::string_view w) const { return at(TokenKind::Identifier) && cur().text == w; }

  const Token& take() {
    const Token& t = toks_[pos_];
    if (t.kind != TokenKind::End) ++pos_;
    return t;
  }

  [[noreturn]] void fail(std::string msg, const SourceSpan& span) const {
    throw Failure{{DiagnosticKind::ParseError, std::move(msg), span}};
  }

  void fail_here(std::string msg) {
    errors_.push_back({DiagnosticKind::ParseError, std::move(msg), cur().span});
  }

  std::string describe(const Token& t) const {
    if (t.kind == TokenKind::Identifier) return "'" + t.text + "'";
    if (t.kind == TokenKind::Number) return "number " + t.text;
    if (t.kind == TokenKind::String) return "string literal";
    return std::string(to_string(t.kind));
  }

  const Token& expect(TokenKind k, std::string_view what) {
    if (!at(k)) fail("expected " + std::string(what) + ", found " + describe(cur()), cur().span);
    return take();
  }

  const Token& expect_word(std::string_view w) {
    if (!at_word(w)) fail("expected '" + std::string(w) + "', found " + describe(cur()), cur().span);
    return take();
  }

  // A user identifier: not a reserved word.
  const Token& identifier(std::string_view what) {
    if (!at(TokenKind::Identifier)) fail("expected " + std::string(what) + ", found " + describe(cur()), cur().span);
    if (is_reserved_word(cur().text)) fail("'" + cur().text + "' is a reserved word", cur().span);
    return take();
  }

  void recover() {
    while (!at(TokenKind::End) && !at(TokenKind::Semicolon)) take();
    if (at(TokenKind::Semicolon)) take();
  }

  Statement statement() {
    const Token& first = cur();
    if (first.kind != TokenKind::Identifier) fail("expected a statement, found " + describe(first), first.span);

    if (first.text == "object" || first.text == "entity" || first.text == "region") {
      take();
      Declaration d;
      d.kind = first.text == "region" ? DeclKind::Region : DeclKind::Object;
      if (first.text == "entity") {
        notes_.push_back({DiagnosticKind::Note, "'entity' normalized to 'object'", first.span});
      }
      d.id = identifier("an identifier after '" + first.text + "'").text;
      return {d, {}};
    }
    if (auto vt = value_type_from(first.text)) {
      take();
      Declaration d;
      d.kind = DeclKind::Variable;
      d.var_type = vt;
      d.id = identifier("a variable name after type " + first.text).text;
      return {d, {}};
    }
    if (first.text == "assert") {
      take();
      ConstraintStmt c;
      c.kind = ConstraintKind::Assert;
      c.assertion = or_assertion();
      return {c, {}};
    }
    if (first.text == "allowCollide" || first.text == "allowOutside") {
      take();
      ConstraintStmt c;
      c.kind = first.text == "allowCollide" ? ConstraintKind::AllowCollide : ConstraintKind::AllowOutside;
      expect(TokenKind::LParen, "'('");
      c.subjects.push_back(identifier("an object identifier").text);
      if (c.kind == ConstraintKind::AllowCollide) {
        expect(TokenKind::Comma, "','");
        c.subjects.push_back(identifier("an object identifier").text);
      }
      expect(TokenKind::RParen, "')'");
      return {c, {}};
    }

    // Assignment: id <- e | id.prop <- e
    Assignment a;
    a.target = identifier("a statement").text;
    if (at(TokenKind::Dot)) {
      take();
      const Token& prop = expect(TokenKind::Identifier, "a property name");
      a.property = property_from(prop.text);
      if (!a.property) {
        fail("unknown property '" + prop.text + "'; expected one of color, material, features, pos, rot, scale",
             prop.span);
      }
      if (at(TokenKind::Dot)) fail("assignment targets a whole property, not a component", cur().span);
    }
    expect(TokenKind::Arrow, "'<-'");
    a.value = expression();
    return {a, {}};
  }

  // ---- assertions ---------------------------------------------------------

  AssertionPtr or_assertion() {
    const SourceSpan start = cur().span;
    AssertionPtr lhs = and_assertion();
    while (at(TokenKind::OrOr)) {
      take();
      AssertionPtr rhs = and_assertion();
      lhs = make_or(std::move(lhs), std::move(rhs), cover(start, prev().span));
    }
    return lhs;
  }

  AssertionPtr and_assertion() {
    const SourceSpan start = cur().span;
    AssertionPtr lhs = not_assertion();
    while (at(TokenKind::AndAnd)) {
      take();
      AssertionPtr rhs = not_assertion();
      lhs = make_and(std::move(lhs), std::move(rhs), cover(start, prev().span));
    }
    return lhs;
  }

  AssertionPtr not_assertion() {
    if (at(TokenKind::Bang)) {
      const SourceSpan start = take().span;
      AssertionPtr inner = not_assertion();
      return make_not(std::move(inner), cover(start, prev().span));
    }
    return atom_assertion();
  }

  AssertionPtr atom_assertion() {
    const SourceSpan start = cur().span;
    if (at_word("inside")) {
      take();
      expect(TokenKind::LParen, "'(' after inside");
      std::string obj = identifier("an object identifier").text;
      expect(TokenKind::Comma, "','");
      std::string reg = identifier("a region identifier").text;
      expect(TokenKind::RParen, "')'");
      return make_inside(std::move(obj), std::move(reg), cover(start, prev().span));
    }
    if (at(TokenKind::LParen)) {
      // Either a parenthesized arithmetic operand of a comparison or a grouped assertion.
      const std::size_t mark = pos_;
      try {
        return comparison();
      } catch (const Failure& as_comparison) {
        pos_ = mark;
        try {
          take();
          AssertionPtr inner = or_assertion();
          expect(TokenKind::RParen, "')'");
          return inner;
        } catch (const Failure& as_group) {
          throw as_group.diag.span.offset >= as_comparison.diag.span.offset ? as_group : as_comparison;
        }
      }
    }
    return comparison();
  }

  AssertionPtr comparison() {
    const SourceSpan start = cur().span;
    ExprPtr lhs = expression();
    CompareOp op;
    switch (cur().kind) {
      case TokenKind::Eq: op = CompareOp::Eq; break;
      case TokenKind::Ne: op = CompareOp::Ne; break;
      case TokenKind::Lt: op = CompareOp::Lt; break;
      case TokenKind::Le: op = CompareOp::Le; break;
      case TokenKind::Gt: op = CompareOp::Gt; break;
      case TokenKind::Ge: op = CompareOp::Ge; break;
      case TokenKind::Arrow:
        fail("'<-' is assignment; write '< -' to compare against a negative number", cur().span);
      default:
        fail("expected a comparison operator (=, !=, <, <=, >, >=), found " + describe(cur()), cur().span);
    }
    take();
    ExprPtr rhs = expression();
    return make_compare(op, std::move(lhs), std::move(rhs), cover(start, prev().span));
  }

  // ---- expressions --------------------------------------------------------

  ExprPtr expression() {
    const SourceSpan start = cur().span;
    ExprPtr lhs = term();
    while (at(TokenKind::Plus) || at(TokenKind::Minus)) {
      const BinaryOp op = take().kind == TokenKind::Plus ? BinaryOp::Add : BinaryOp::Sub;
      ExprPtr rhs = term();
      lhs = make_binary(op, std::move(lhs), std::move(rhs), cover(start, prev().span));
    }
    return lhs;
  }

  ExprPtr term() {
    const SourceSpan start = cur().span;
    ExprPtr lhs = primary();
    while (at(TokenKind::Star) || at(TokenKind::Slash)) {
      const BinaryOp op = take().kind == TokenKind::Star ? BinaryOp::Mul : BinaryOp::Div;
      ExprPtr rhs = primary();
      lhs = make_binary(op, std::move(lhs), std::move(rhs), cover(start, prev().span));
    }
    return lhs;
  }

  ExprPtr primary() {
    const Token& t = cur();
    switch (t.kind) {
      case TokenKind::Number:
        take();
        return make_number(t.number, t.span);
      case TokenKind::Minus: {
        const SourceSpan start = take().span;
        if (!at(TokenKind::Number)) fail("unary '-' applies to number literals only", cur().span);
        const Token& n = take();
        return make_number(-n.number, cover(start, n.span));
      }
      case TokenKind::String:
        take();
        return make_string(t.text, t.span);
      case TokenKind::LParen: {
        take();
        ExprPtr inner = expression();
        expect(TokenKind::RParen, "')'");
        return inner;
      }
      case TokenKind::Identifier:
        return identifier_expression();
      default:
        fail("expected an expression, found " + describe(t), t.span);
    }
  }

  ExprPtr identifier_expression() {
    const Token& t = cur();
    const SourceSpan start = t.span;
    static const std::pair<std::string_view, Builtin> kBuiltins[] = {
        {"rand", Builtin::Rand}, {"vec3", Builtin::Vec3}, {"rot", Builtin::Rot}, {"dot", Builtin::Dot}};
    for (const auto& [name, fn] : kBuiltins) {
      if (t.text != name) continue;
      take();
      expect(TokenKind::LParen, "'(' after " + std::string(name));
      std::vector<ExprPtr> args;
      args.push_back(expression());
      while (at(TokenKind::Comma)) {
        take();
        args.push_back(expression());
      }
      expect(TokenKind::RParen, "')'");
      const std::size_t arity = fn == Builtin::Rand || fn == Builtin::Dot ? 2 : 3;
      if (args.size() != arity) {
        fail(std::string(name) + " takes " + std::to_string(arity) + " arguments, got " + std::to_string(args.size()),
             cover(start, prev().span));
      }
      return make_call(fn, std::move(args), cover(start, prev().span));
    }

    std::string id = identifier("an expression").text;
    if (!at(TokenKind::Dot)) return make_ident(std::move(id), start);
    std::vector<std::string> path;
    while (at(TokenKind::Dot)) {
      take();
      path.push_back(expect(TokenKind::Identifier, "a property name after '.'").text);
      if (path.size() > 2) fail("property paths have at most two segments (e.g. pos.y)", prev().span);
    }
    return make_property(std::move(id), std::move(path), cover(start, prev().span));
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::vector<Diagnostic>& errors_;
  std::vector<Diagnostic>& notes_;
};

// ---- resolution: declaration-before-use, no duplicates -----------------------

class Resolver {
 public:
  explicit Resolver(std::vector<Diagnostic>& errors) : errors_(errors) {}

  void run(const Program& prog) {
    for (const Statement& s : prog.statements) {
      std::visit([&](const auto& node) { visit(node, s.span); }, s.node);
    }
  }

 private:
  void use(const std::string& id, const SourceSpan& span) {
    if (!declared_.contains(id)) {
      errors_.push_back({DiagnosticKind::ResolveError, "undeclared identifier '" + id + "'", span});
    }
  }

  void visit(const Declaration& d, const SourceSpan& span) {
    if (!declared_.insert(d.id).second) {
      errors_.push_back({DiagnosticKind::ResolveError, "duplicate declaration of '" + d.id + "'", span});
    }
  }

  void visit(const ConstraintStmt& c, const SourceSpan& span) {
    for (const auto& s : c.subjects) use(s, span);
    if (c.assertion) visit(*c.assertion);
  }

  void visit(const Assignment& a, const SourceSpan& span) {
    use(a.target, span);
    if (a.value) visit(*a.value);
  }

  void visit(const Assertion& a) {
    std::visit(
        [&](const auto& n) {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, Comparison>) {
            visit(*n.lhs);
            visit(*n.rhs);
          } else if constexpr (std::is_same_v<T, InsidePred>) {
            use(n.object, a.span);
            use(n.region, a.span);
          } else if constexpr (std::is_same_v<T, NotAssert>) {
            visit(*n.operand);
          } else {
            visit(*n.lhs);
            visit(*n.rhs);
          }
        },
        a.node);
  }

  void visit(const Expr& e) {
    std::visit(
        [&](const auto& n) {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, IdentRef>) {
            use(n.name, e.span);
          } else if constexpr (std::is_same_v<T, PropertyRef>) {
            use(n.id, e.span);
          } else if constexpr (std::is_same_v<T, BinaryExpr>) {
            visit(*n.lhs);
            visit(*n.rhs);
          } else if constexpr (std::is_same_v<T, CallExpr>) {
            for (const auto& arg : n.args) visit(*arg);
          }
        },
        e.node);
  }

  std::unordered_set<std::string> declared_;
  std::vector<Diagnostic>& errors_;
};

}  // namespace

Program parse(std::string_view source, std::vector<Diagnostic>* notes) {
  std::vector<Diagnostic> errors;
  std::vector<Diagnostic> local_notes;
  std::vector<Token> tokens = tokenize(source, errors);
  if (!errors.empty()) throw DslError(std::move(errors));

  Program prog = Parser(std::move(tokens), errors, local_notes).run();
  if (!errors.empty()) throw DslError(std::move(errors));

  Resolver(errors).run(prog);
  if (!errors.empty()) throw DslError(std::move(errors));

  if (notes) notes->insert(notes->end(), local_notes.begin(), local_notes.end());
  return prog;
}

}  // namespace sthl::dsl
