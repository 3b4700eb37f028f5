#include "coverage.hpp"

namespace sthl::testing {
namespace {

using namespace sthl::dsl;

void walk(const Expr& e, std::set<std::string>& out) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, NumberLit>) {
          out.insert(n.value < 0 ? "expr.negative" : "expr.number");
        } else if constexpr (std::is_same_v<T, StringLit>) {
          out.insert("expr.string");
        } else if constexpr (std::is_same_v<T, IdentRef>) {
          out.insert("expr.ident");
        } else if constexpr (std::is_same_v<T, PropertyRef>) {
          out.insert("expr.path" + std::to_string(n.path.size()));
        } else if constexpr (std::is_same_v<T, BinaryExpr>) {
          out.insert("op." + std::string(to_string(n.op)));
          walk(*n.lhs, out);
          walk(*n.rhs, out);
        } else {
          out.insert("call." + std::string(to_string(n.fn)));
          for (const auto& a : n.args) walk(*a, out);
        }
      },
      e.node);
}

void walk(const Assertion& a, std::set<std::string>& out) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Comparison>) {
          out.insert("cmp." + std::string(to_string(n.op)));
          walk(*n.lhs, out);
          walk(*n.rhs, out);
        } else if constexpr (std::is_same_v<T, InsidePred>) {
          out.insert("assert.inside");
        } else if constexpr (std::is_same_v<T, AndAssert>) {
          out.insert("assert.and");
          walk(*n.lhs, out);
          walk(*n.rhs, out);
        } else if constexpr (std::is_same_v<T, OrAssert>) {
          out.insert("assert.or");
          walk(*n.lhs, out);
          walk(*n.rhs, out);
        } else {
          out.insert("assert.not");
          walk(*n.operand, out);
        }
      },
      a.node);
}

}  // namespace

std::set<std::string> productions(const dsl::Program& p, bool used_entity) {
  std::set<std::string> out;
  if (used_entity) out.insert("decl.entity");
  for (const auto& st : p.statements) {
    if (const auto* d = std::get_if<Declaration>(&st.node)) {
      switch (d->kind) {
        case DeclKind::Object: out.insert("decl.object"); break;
        case DeclKind::Region: out.insert("decl.region"); break;
        case DeclKind::Variable: out.insert("decl." + std::string(to_string(*d->var_type))); break;
      }
    } else if (const auto* a = std::get_if<Assignment>(&st.node)) {
      out.insert(a->property ? "assign." + std::string(to_string(*a->property)) : "assign.variable");
      walk(*a->value, out);
    } else {
      const auto& c = std::get<ConstraintStmt>(st.node);
      switch (c.kind) {
        case ConstraintKind::Assert:
          out.insert("stmt.assert");
          walk(*c.assertion, out);
          break;
        case ConstraintKind::AllowCollide: out.insert("stmt.allowCollide"); break;
        case ConstraintKind::AllowOutside: out.insert("stmt.allowOutside"); break;
      }
    }
  }
  return out;
}

std::vector<std::string> all_productions() {
  std::vector<std::string> out{"decl.object",  "decl.entity",      "decl.region",       "assign.variable",
                               "stmt.assert",  "stmt.allowCollide", "stmt.allowOutside", "assert.inside",
                               "assert.and",   "assert.or",        "assert.not",        "expr.number",
                               "expr.negative", "expr.string",     "expr.ident",        "expr.path1",
                               "expr.path2"};
  for (ValueType t : {ValueType::Number, ValueType::Degree, ValueType::Bool, ValueType::Vector3, ValueType::Rotation,
                      ValueType::Color, ValueType::Material}) {
    out.push_back("decl." + std::string(to_string(t)));
  }
  for (Property p : {Property::Color, Property::Material, Property::Features, Property::Pos, Property::Rot,
                     Property::Scale}) {
    out.push_back("assign." + std::string(to_string(p)));
  }
  for (CompareOp op : {CompareOp::Eq, CompareOp::Ne, CompareOp::Lt, CompareOp::Le, CompareOp::Gt, CompareOp::Ge}) {
    out.push_back("cmp." + std::string(to_string(op)));
  }
  for (BinaryOp op : {BinaryOp::Add, BinaryOp::Sub, BinaryOp::Mul, BinaryOp::Div}) {
    out.push_back("op." + std::string(to_string(op)));
  }
  for (Builtin fn : {Builtin::Rand, Builtin::Vec3, Builtin::Rot, Builtin::Dot}) {
    out.push_back("call." + std::string(to_string(fn)));
  }
  return out;
}

}  // namespace sthl::testing
