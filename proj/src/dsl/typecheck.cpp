#include "sthl/dsl/typecheck.hpp"

#include <array>

namespace sthl::dsl {

namespace {

bool is_component(const std::string& s) { return s == "x" || s == "y" || s == "z"; }

bool is_constant(const Expr& e) {
  return std::visit(
      [](const auto& n) -> bool {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, NumberLit> || std::is_same_v<T, StringLit>) {
          return true;
        } else if constexpr (std::is_same_v<T, BinaryExpr>) {
          return is_constant(*n.lhs) && is_constant(*n.rhs);
        } else if constexpr (std::is_same_v<T, CallExpr>) {
          for (const auto& a : n.args) {
            if (!is_constant(*a)) return false;
          }
          return true;
        } else {
          return false;
        }
      },
      e.node);
}

class Checker {
 public:
  explicit Checker(TypedProgram& out) : out_(out) {}

  void run() {
    const auto& stmts = out_.program.statements;
    for (std::size_t i = 0; i < stmts.size(); ++i) {
      const Statement& s = stmts[i];
      std::visit([&](const auto& n) { check(n, s.span, i); }, s.node);
    }
    if (!errors_.empty()) throw DslError(std::move(errors_));
  }

 private:
  void error(std::string msg, const SourceSpan& span) {
    errors_.push_back({DiagnosticKind::TypeError, std::move(msg), span});
  }

  const Symbol* symbol(const std::string& id) const {
    auto it = out_.symbols.find(id);
    return it == out_.symbols.end() ? nullptr : &it->second;
  }

  void check(const Declaration& d, const SourceSpan&, std::size_t index) {
    Symbol sym;
    sym.kind = d.kind == DeclKind::Object ? SymbolKind::Object
               : d.kind == DeclKind::Region ? SymbolKind::Region
                                            : SymbolKind::Variable;
    sym.type = d.var_type;
    sym.decl_index = index;
    out_.symbols.emplace(d.id, sym);
  }

  void check(const ConstraintStmt& c, const SourceSpan& span, std::size_t) {
    if (c.kind == ConstraintKind::Assert) {
      check_assertion(*c.assertion);
      return;
    }
    for (const auto& s : c.subjects) {
      const Symbol* sym = symbol(s);
      if (sym && sym->kind != SymbolKind::Object) {
        error("'" + s + "' is not an object; allowCollide/allowOutside take object identifiers", span);
      }
    }
    if (c.kind == ConstraintKind::AllowCollide && c.subjects.size() == 2 && c.subjects[0] == c.subjects[1]) {
      error("allowCollide needs two distinct objects, got '" + c.subjects[0] + "' twice", span);
    }
  }

  void check(const Assignment& a, const SourceSpan& span, std::size_t) {
    const Symbol* sym = symbol(a.target);
    std::optional<ExprType> value = check_expr(*a.value);
    if (!sym || !value) return;

    if (!a.property) {
      if (sym->kind != SymbolKind::Variable) {
        error("cannot assign to " + std::string(sym->kind == SymbolKind::Object ? "object" : "region") + " '" +
                  a.target + "' directly; assign one of its properties",
              span);
        return;
      }
      if (!assignable(sym->kind, std::nullopt, sym->type, *value)) {
        error("cannot assign " + std::string(to_string(*value)) + " to variable '" + a.target + "' of type " +
                  std::string(to_string(*sym->type)),
              a.value->span);
      }
      return;
    }

    const Property prop = *a.property;
    if (sym->kind == SymbolKind::Variable) {
      error("variable '" + a.target + "' has no property '" + std::string(to_string(prop)) + "'", span);
      return;
    }
    if (sym->kind == SymbolKind::Region && !is_transform_property(prop)) {
      error("region '" + a.target + "' has no property '" + std::string(to_string(prop)) +
                "'; regions take pos, rot and scale",
            span);
      return;
    }
    if (!assignable(sym->kind, prop, std::nullopt, *value)) {
      error("type mismatch assigning to " + a.target + "." + std::string(to_string(prop)) + ": expected " +
                expected_for(prop) + ", got " + std::string(to_string(*value)),
            a.value->span);
    }
  }

  static std::string expected_for(Property p) {
    switch (p) {
      case Property::Color: return "Color";
      case Property::Material: return "Material";
      case Property::Features: return "String";
      case Property::Pos:
      case Property::Scale: return "Vector3";
      case Property::Rot: return "Rotation";
    }
    return "?";
  }

  void check_assertion(const Assertion& a) {
    std::visit(
        [&](const auto& n) {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, Comparison>) {
            check_comparison(n, a.span);
          } else if constexpr (std::is_same_v<T, InsidePred>) {
            const Symbol* o = symbol(n.object);
            const Symbol* r = symbol(n.region);
            if (o && o->kind != SymbolKind::Object) error("inside: '" + n.object + "' is not an object", a.span);
            if (r && r->kind != SymbolKind::Region) error("inside: '" + n.region + "' is not a region", a.span);
          } else if constexpr (std::is_same_v<T, NotAssert>) {
            check_assertion(*n.operand);
          } else {
            check_assertion(*n.lhs);
            check_assertion(*n.rhs);
          }
        },
        a.node);
  }

  void check_comparison(const Comparison& c, const SourceSpan& span) {
    auto lhs = check_expr(*c.lhs);
    auto rhs = check_expr(*c.rhs);
    if (!lhs || !rhs) return;
    const bool equality = c.op == CompareOp::Eq || c.op == CompareOp::Ne;
    const bool ok = (is_numeric(*lhs) && is_numeric(*rhs)) ||
                    (equality && *lhs == ExprType::Bool && *rhs == ExprType::Bool) ||
                    (equality && is_text(*lhs) && is_text(*rhs));
    if (!ok) {
      error("cannot compare " + std::string(to_string(*lhs)) + " " + std::string(to_string(c.op)) + " " +
                std::string(to_string(*rhs)) + "; comparisons need two numeric operands (or equal-kind Bool/text with = and !=)",
            span);
    }
  }

  std::optional<ExprType> annotate(const Expr& e, std::optional<ExprType> t) {
    if (t) out_.types[&e] = *t;
    return t;
  }

  std::optional<ExprType> check_expr(const Expr& e) {
    return std::visit(
        [&](const auto& n) -> std::optional<ExprType> {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, NumberLit>) {
            return annotate(e, ExprType::Number);
          } else if constexpr (std::is_same_v<T, StringLit>) {
            return annotate(e, ExprType::String);
          } else if constexpr (std::is_same_v<T, IdentRef>) {
            const Symbol* sym = symbol(n.name);
            if (!sym) return std::nullopt;
            if (sym->kind != SymbolKind::Variable) {
              error("'" + n.name + "' is " + (sym->kind == SymbolKind::Object ? "an object" : "a region") +
                        " and has no value; use a property such as " + n.name + ".pos",
                    e.span);
              return std::nullopt;
            }
            return annotate(e, expr_type_of(*sym->type));
          } else if constexpr (std::is_same_v<T, PropertyRef>) {
            const Symbol* sym = symbol(n.id);
            if (!sym) return std::nullopt;
            auto t = property_path_type(sym->kind, sym->type, n.path);
            if (!t) {
              std::string path;
              for (const auto& s : n.path) path += "." + s;
              error("invalid property path '" + n.id + path + "'", e.span);
              return std::nullopt;
            }
            return annotate(e, t);
          } else if constexpr (std::is_same_v<T, BinaryExpr>) {
            return annotate(e, check_binary(n, e.span));
          } else {
            return annotate(e, check_call(n, e.span));
          }
        },
        e.node);
  }

  std::optional<ExprType> check_binary(const BinaryExpr& b, const SourceSpan& span) {
    auto l = check_expr(*b.lhs);
    auto r = check_expr(*b.rhs);
    if (!l || !r) return std::nullopt;
    if (is_numeric(*l) && is_numeric(*r)) {
      return (*l == ExprType::Degree || *r == ExprType::Degree) ? ExprType::Degree : ExprType::Number;
    }
    const bool additive = b.op == BinaryOp::Add || b.op == BinaryOp::Sub;
    if (additive && *l == ExprType::Vector3 && *r == ExprType::Vector3) return ExprType::Vector3;
    if (b.op == BinaryOp::Mul && ((*l == ExprType::Vector3 && is_numeric(*r)) || (is_numeric(*l) && *r == ExprType::Vector3))) {
      return ExprType::Vector3;
    }
    if (b.op == BinaryOp::Div && *l == ExprType::Vector3 && is_numeric(*r)) return ExprType::Vector3;
    error("operator '" + std::string(to_string(b.op)) + "' is not defined for " + std::string(to_string(*l)) + " and " +
              std::string(to_string(*r)),
          span);
    return std::nullopt;
  }

  std::optional<ExprType> check_call(const CallExpr& c, const SourceSpan& span) {
    std::vector<std::optional<ExprType>> args;
    for (const auto& a : c.args) args.push_back(check_expr(*a));
    for (const auto& a : args) {
      if (!a) return std::nullopt;
    }
    const std::string name(to_string(c.fn));
    switch (c.fn) {
      case Builtin::Rand:
        for (std::size_t i = 0; i < args.size(); ++i) {
          if (!is_numeric(*args[i])) {
            error("rand bounds must be numeric, got " + std::string(to_string(*args[i])), c.args[i]->span);
            return std::nullopt;
          }
          if (!is_constant(*c.args[i])) {
            error("rand bounds must be constant expressions (no identifiers or properties)", c.args[i]->span);
            return std::nullopt;
          }
        }
        return ExprType::Number;
      case Builtin::Vec3:
      case Builtin::Rot:
        for (std::size_t i = 0; i < args.size(); ++i) {
          if (!is_numeric(*args[i])) {
            error(name + " components must be Number or Degree, got " + std::string(to_string(*args[i])),
                  c.args[i]->span);
            return std::nullopt;
          }
        }
        return c.fn == Builtin::Vec3 ? ExprType::Vector3 : ExprType::Rotation;
      case Builtin::Dot:
        if (*args[0] != ExprType::Vector3 || *args[1] != ExprType::Vector3) {
          error("dot takes two Vector3 operands, got " + std::string(to_string(*args[0])) + " and " +
                    std::string(to_string(*args[1])),
                span);
          return std::nullopt;
        }
        return ExprType::Number;
    }
    return std::nullopt;
  }

  TypedProgram& out_;
  std::vector<Diagnostic> errors_;
};

}  // namespace

std::string_view to_string(ExprType t) {
  static constexpr std::array<std::string_view, 8> names{"Number", "Degree", "Bool", "Vector3",
                                                         "Rotation", "Color", "Material", "String"};
  return names[static_cast<std::size_t>(t)];
}

ExprType expr_type_of(ValueType t) { return static_cast<ExprType>(static_cast<int>(t)); }

bool is_numeric(ExprType t) { return t == ExprType::Number || t == ExprType::Degree; }

bool is_text(ExprType t) { return t == ExprType::Color || t == ExprType::Material || t == ExprType::String; }

const Symbol* TypedProgram::find(std::string_view id) const {
  auto it = symbols.find(id);
  return it == symbols.end() ? nullptr : &it->second;
}

std::optional<ExprType> property_path_type(SymbolKind kind, std::optional<ValueType> var_type,
                                           const std::vector<std::string>& path) {
  if (path.empty() || path.size() > 2) return std::nullopt;
  if (kind == SymbolKind::Variable) {
    if (path.size() != 1 || !is_component(path[0])) return std::nullopt;
    if (var_type == ValueType::Vector3) return ExprType::Number;
    if (var_type == ValueType::Rotation) return ExprType::Degree;
    return std::nullopt;
  }
  auto prop = property_from(path[0]);
  if (!prop) return std::nullopt;
  if (kind == SymbolKind::Region && !is_transform_property(*prop)) return std::nullopt;
  if (path.size() == 2) {
    if (!is_transform_property(*prop) || !is_component(path[1])) return std::nullopt;
    return *prop == Property::Rot ? ExprType::Degree : ExprType::Number;
  }
  switch (*prop) {
    case Property::Color: return ExprType::Color;
    case Property::Material: return ExprType::Material;
    case Property::Features: return ExprType::String;
    case Property::Pos:
    case Property::Scale: return ExprType::Vector3;
    case Property::Rot: return ExprType::Rotation;
  }
  return std::nullopt;
}

bool assignable(SymbolKind kind, std::optional<Property> prop, std::optional<ValueType> var_type, ExprType value) {
  if (!prop) {
    if (kind != SymbolKind::Variable || !var_type) return false;
    switch (*var_type) {
      case ValueType::Number:
      case ValueType::Degree: return is_numeric(value);
      case ValueType::Bool: return value == ExprType::Bool || is_numeric(value);
      case ValueType::Vector3: return value == ExprType::Vector3;
      case ValueType::Rotation: return value == ExprType::Rotation;
      case ValueType::Color: return value == ExprType::Color || value == ExprType::String;
      case ValueType::Material: return value == ExprType::Material || value == ExprType::String;
    }
    return false;
  }
  if (kind == SymbolKind::Variable) return false;
  if (kind == SymbolKind::Region && !is_transform_property(*prop)) return false;
  switch (*prop) {
    case Property::Color: return value == ExprType::Color || value == ExprType::String;
    case Property::Material: return value == ExprType::Material || value == ExprType::String;
    case Property::Features: return value == ExprType::String;
    case Property::Pos:
    case Property::Scale: return value == ExprType::Vector3;
    case Property::Rot: return value == ExprType::Rotation;
  }
  return false;
}

TypedProgram type_check(const Program& program) {
  TypedProgram out;
  out.program = program;
  Checker(out).run();
  return out;
}

}  // namespace sthl::dsl
