#include "sthl/dsl/printer.hpp"

#include <charconv>
#include <cmath>

namespace sthl::dsl {

namespace {

int precedence(BinaryOp op) { return op == BinaryOp::Add || op == BinaryOp::Sub ? 1 : 2; }

void print_expr(const Expr& e, std::string& out);

// Left operands of equal precedence need no parentheses (left-associative
// parse); right operands of equal precedence always do.
void print_operand(const ExprPtr& e, int parent_prec, bool right, std::string& out) {
  const auto* bin = std::get_if<BinaryExpr>(&e->node);
  const bool parens = bin && (precedence(bin->op) < parent_prec || (right && precedence(bin->op) == parent_prec));
  if (parens) out += '(';
  print_expr(*e, out);
  if (parens) out += ')';
}

void print_expr(const Expr& e, std::string& out) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, NumberLit>) {
          out += format_number(n.value);
        } else if constexpr (std::is_same_v<T, StringLit>) {
          out += quote_string(n.value);
        } else if constexpr (std::is_same_v<T, IdentRef>) {
          out += n.name;
        } else if constexpr (std::is_same_v<T, BinaryExpr>) {
          const int p = precedence(n.op);
          print_operand(n.lhs, p, false, out);
          out += ' ';
          out += to_string(n.op);
          out += ' ';
          print_operand(n.rhs, p, true, out);
        } else if constexpr (std::is_same_v<T, CallExpr>) {
          out += to_string(n.fn);
          out += '(';
          for (std::size_t i = 0; i < n.args.size(); ++i) {
            if (i) out += ", ";
            print_expr(*n.args[i], out);
          }
          out += ')';
        } else {
          out += n.id;
          for (const auto& seg : n.path) {
            out += '.';
            out += seg;
          }
        }
      },
      e.node);
}

// Assertion precedence levels: or=1, and=2, not=3, atom=4.
int level(const Assertion& a) {
  if (std::holds_alternative<OrAssert>(a.node)) return 1;
  if (std::holds_alternative<AndAssert>(a.node)) return 2;
  if (std::holds_alternative<NotAssert>(a.node)) return 3;
  return 4;
}

void print_assertion(const Assertion& a, std::string& out);

void print_child(const AssertionPtr& child, int min_level, std::string& out) {
  const bool parens = level(*child) < min_level;
  if (parens) out += '(';
  print_assertion(*child, out);
  if (parens) out += ')';
}

void print_assertion(const Assertion& a, std::string& out) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Comparison>) {
          print_expr(*n.lhs, out);
          out += ' ';
          out += to_string(n.op);
          out += ' ';
          print_expr(*n.rhs, out);
        } else if constexpr (std::is_same_v<T, InsidePred>) {
          out += "inside(" + n.object + ", " + n.region + ")";
        } else if constexpr (std::is_same_v<T, NotAssert>) {
          out += '!';
          // A bare comparison after '!' would parse the same way, but reads as
          // negating the left operand; bracket it.
          const bool parens = level(*n.operand) < 3 || std::holds_alternative<Comparison>(n.operand->node);
          if (parens) out += '(';
          print_assertion(*n.operand, out);
          if (parens) out += ')';
        } else if constexpr (std::is_same_v<T, AndAssert>) {
          print_child(n.lhs, 2, out);
          out += " && ";
          print_child(n.rhs, 3, out);
        } else {
          print_child(n.lhs, 1, out);
          out += " || ";
          print_child(n.rhs, 2, out);
        }
      },
      a.node);
}

}  // namespace

std::string format_number(double v) {
  if (v == 0.0) return std::signbit(v) ? "-0" : "0";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string quote_string(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  out += '"';
  return out;
}

std::string print(const Expr& expr) {
  std::string out;
  print_expr(expr, out);
  return out;
}

std::string print(const Assertion& assertion) {
  std::string out;
  print_assertion(assertion, out);
  return out;
}

std::string print(const Statement& stmt) {
  return std::visit(
      [](const auto& n) -> std::string {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Declaration>) {
          switch (n.kind) {
            case DeclKind::Object: return "object " + n.id + ";";
            case DeclKind::Region: return "region " + n.id + ";";
            case DeclKind::Variable: return std::string(to_string(*n.var_type)) + " " + n.id + ";";
          }
          return {};
        } else if constexpr (std::is_same_v<T, ConstraintStmt>) {
          switch (n.kind) {
            case ConstraintKind::Assert: return "assert " + print(*n.assertion) + ";";
            case ConstraintKind::AllowCollide: return "allowCollide(" + n.subjects.at(0) + ", " + n.subjects.at(1) + ");";
            case ConstraintKind::AllowOutside: return "allowOutside(" + n.subjects.at(0) + ");";
          }
          return {};
        } else {
          std::string out = n.target;
          if (n.property) {
            out += '.';
            out += to_string(*n.property);
          }
          return out + " <- " + print(*n.value) + ";";
        }
      },
      stmt.node);
}

std::string print(const Program& program) {
  std::string out;
  for (const auto& s : program.statements) {
    out += print(s);
    out += '\n';
  }
  return out;
}

}  // namespace sthl::dsl
