#include "sthl/dsl/ast.hpp"

#include <array>
#include <sstream>

#include "sthl/dsl/diagnostics.hpp"

namespace sthl::dsl {

namespace {

constexpr std::array<std::string_view, 7> kTypeNames{"Number", "Degree", "Bool", "Vector3",
                                                     "Rotation", "Color", "Material"};
constexpr std::array<std::string_view, 6> kPropertyNames{"color", "material", "features", "pos", "rot", "scale"};

bool equal_ptr(const ExprPtr& a, const ExprPtr& b) {
  if (!a || !b) return a == b;
  return structurally_equal(*a, *b);
}

bool equal_ptr(const AssertionPtr& a, const AssertionPtr& b) {
  if (!a || !b) return a == b;
  return structurally_equal(*a, *b);
}

}  // namespace

std::string_view to_string(ValueType t) { return kTypeNames[static_cast<std::size_t>(t)]; }

std::string_view to_string(BinaryOp op) {
  switch (op) {
    case BinaryOp::Add: return "+";
    case BinaryOp::Sub: return "-";
    case BinaryOp::Mul: return "*";
    case BinaryOp::Div: return "/";
  }
  return "?";
}

std::string_view to_string(CompareOp op) {
  switch (op) {
    case CompareOp::Eq: return "=";
    case CompareOp::Ne: return "!=";
    case CompareOp::Lt: return "<";
    case CompareOp::Le: return "<=";
    case CompareOp::Gt: return ">";
    case CompareOp::Ge: return ">=";
  }
  return "?";
}

std::string_view to_string(Builtin fn) {
  switch (fn) {
    case Builtin::Rand: return "rand";
    case Builtin::Vec3: return "vec3";
    case Builtin::Rot: return "rot";
    case Builtin::Dot: return "dot";
  }
  return "?";
}

std::string_view to_string(Property p) { return kPropertyNames[static_cast<std::size_t>(p)]; }

std::optional<ValueType> value_type_from(std::string_view name) {
  for (std::size_t i = 0; i < kTypeNames.size(); ++i) {
    if (kTypeNames[i] == name) return static_cast<ValueType>(i);
  }
  return std::nullopt;
}

std::optional<Property> property_from(std::string_view name) {
  for (std::size_t i = 0; i < kPropertyNames.size(); ++i) {
    if (kPropertyNames[i] == name) return static_cast<Property>(i);
  }
  return std::nullopt;
}

bool is_transform_property(Property p) {
  return p == Property::Pos || p == Property::Rot || p == Property::Scale;
}

ExprPtr make_number(double v, SourceSpan span) { return std::make_shared<const Expr>(Expr{NumberLit{v}, span}); }
ExprPtr make_string(std::string v, SourceSpan span) {
  return std::make_shared<const Expr>(Expr{StringLit{std::move(v)}, span});
}
ExprPtr make_ident(std::string name, SourceSpan span) {
  return std::make_shared<const Expr>(Expr{IdentRef{std::move(name)}, span});
}
ExprPtr make_binary(BinaryOp op, ExprPtr lhs, ExprPtr rhs, SourceSpan span) {
  return std::make_shared<const Expr>(Expr{BinaryExpr{op, std::move(lhs), std::move(rhs)}, span});
}
ExprPtr make_call(Builtin fn, std::vector<ExprPtr> args, SourceSpan span) {
  return std::make_shared<const Expr>(Expr{CallExpr{fn, std::move(args)}, span});
}
ExprPtr make_property(std::string id, std::vector<std::string> path, SourceSpan span) {
  return std::make_shared<const Expr>(Expr{PropertyRef{std::move(id), std::move(path)}, span});
}

AssertionPtr make_compare(CompareOp op, ExprPtr lhs, ExprPtr rhs, SourceSpan span) {
  return std::make_shared<const Assertion>(Assertion{Comparison{op, std::move(lhs), std::move(rhs)}, span});
}
AssertionPtr make_inside(std::string object, std::string region, SourceSpan span) {
  return std::make_shared<const Assertion>(Assertion{InsidePred{std::move(object), std::move(region)}, span});
}
AssertionPtr make_and(AssertionPtr lhs, AssertionPtr rhs, SourceSpan span) {
  return std::make_shared<const Assertion>(Assertion{AndAssert{std::move(lhs), std::move(rhs)}, span});
}
AssertionPtr make_or(AssertionPtr lhs, AssertionPtr rhs, SourceSpan span) {
  return std::make_shared<const Assertion>(Assertion{OrAssert{std::move(lhs), std::move(rhs)}, span});
}
AssertionPtr make_not(AssertionPtr operand, SourceSpan span) {
  return std::make_shared<const Assertion>(Assertion{NotAssert{std::move(operand)}, span});
}

bool structurally_equal(const Expr& a, const Expr& b) {
  if (a.node.index() != b.node.index()) return false;
  return std::visit(
      [&](const auto& x) -> bool {
        using T = std::decay_t<decltype(x)>;
        const T& y = std::get<T>(b.node);
        if constexpr (std::is_same_v<T, NumberLit>) {
          return x.value == y.value;
        } else if constexpr (std::is_same_v<T, StringLit>) {
          return x.value == y.value;
        } else if constexpr (std::is_same_v<T, IdentRef>) {
          return x.name == y.name;
        } else if constexpr (std::is_same_v<T, BinaryExpr>) {
          return x.op == y.op && equal_ptr(x.lhs, y.lhs) && equal_ptr(x.rhs, y.rhs);
        } else if constexpr (std::is_same_v<T, CallExpr>) {
          if (x.fn != y.fn || x.args.size() != y.args.size()) return false;
          for (std::size_t i = 0; i < x.args.size(); ++i) {
            if (!equal_ptr(x.args[i], y.args[i])) return false;
          }
          return true;
        } else {
          return x.id == y.id && x.path == y.path;
        }
      },
      a.node);
}

bool structurally_equal(const Assertion& a, const Assertion& b) {
  if (a.node.index() != b.node.index()) return false;
  return std::visit(
      [&](const auto& x) -> bool {
        using T = std::decay_t<decltype(x)>;
        const T& y = std::get<T>(b.node);
        if constexpr (std::is_same_v<T, Comparison>) {
          return x.op == y.op && equal_ptr(x.lhs, y.lhs) && equal_ptr(x.rhs, y.rhs);
        } else if constexpr (std::is_same_v<T, InsidePred>) {
          return x.object == y.object && x.region == y.region;
        } else if constexpr (std::is_same_v<T, NotAssert>) {
          return equal_ptr(x.operand, y.operand);
        } else {
          return equal_ptr(x.lhs, y.lhs) && equal_ptr(x.rhs, y.rhs);
        }
      },
      a.node);
}

bool structurally_equal(const Statement& a, const Statement& b) {
  if (a.node.index() != b.node.index()) return false;
  return std::visit(
      [&](const auto& x) -> bool {
        using T = std::decay_t<decltype(x)>;
        const T& y = std::get<T>(b.node);
        if constexpr (std::is_same_v<T, Declaration>) {
          return x.kind == y.kind && x.id == y.id && x.var_type == y.var_type;
        } else if constexpr (std::is_same_v<T, ConstraintStmt>) {
          return x.kind == y.kind && x.subjects == y.subjects && equal_ptr(x.assertion, y.assertion);
        } else {
          return x.target == y.target && x.property == y.property && equal_ptr(x.value, y.value);
        }
      },
      a.node);
}

bool structurally_equal(const Program& a, const Program& b) {
  if (a.statements.size() != b.statements.size()) return false;
  for (std::size_t i = 0; i < a.statements.size(); ++i) {
    if (!structurally_equal(a.statements[i], b.statements[i])) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------

std::string_view to_string(DiagnosticKind kind) {
  switch (kind) {
    case DiagnosticKind::LexError: return "LexError";
    case DiagnosticKind::ParseError: return "ParseError";
    case DiagnosticKind::ResolveError: return "ResolveError";
    case DiagnosticKind::TypeError: return "TypeError";
    case DiagnosticKind::Note: return "note";
  }
  return "error";
}

std::string format(const Diagnostic& d) {
  std::ostringstream os;
  os << d.span.line << ':' << d.span.column << ": " << to_string(d.kind) << ": " << d.message;
  return os.str();
}

namespace {
std::string join_diagnostics(const std::vector<Diagnostic>& ds) {
  std::string out;
  for (const auto& d : ds) {
    if (!out.empty()) out += '\n';
    out += format(d);
  }
  return out;
}
}  // namespace

DslError::DslError(std::vector<Diagnostic> diagnostics)
    : std::runtime_error(join_diagnostics(diagnostics)), diagnostics_(std::move(diagnostics)) {
  if (diagnostics_.empty()) diagnostics_.push_back({DiagnosticKind::ParseError, "unknown error", {}});
}

}  // namespace sthl::dsl
