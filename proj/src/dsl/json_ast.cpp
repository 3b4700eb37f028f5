#include "sthl/dsl/json_ast.hpp"

namespace sthl::dsl {

namespace {

nlohmann::ordered_json span_json(const SourceSpan& s) {
  return {{"line", s.line}, {"column", s.column}, {"offset", s.offset}, {"length", s.length}};
}

}  // namespace

nlohmann::ordered_json to_json(const Expr& expr) {
  nlohmann::ordered_json j = std::visit(
      [](const auto& n) -> nlohmann::ordered_json {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, NumberLit>) {
          return {{"kind", "number"}, {"value", n.value}};
        } else if constexpr (std::is_same_v<T, StringLit>) {
          return {{"kind", "string"}, {"value", n.value}};
        } else if constexpr (std::is_same_v<T, IdentRef>) {
          return {{"kind", "identifier"}, {"name", n.name}};
        } else if constexpr (std::is_same_v<T, BinaryExpr>) {
          return {{"kind", "binary"}, {"op", to_string(n.op)}, {"lhs", to_json(*n.lhs)}, {"rhs", to_json(*n.rhs)}};
        } else if constexpr (std::is_same_v<T, CallExpr>) {
          nlohmann::ordered_json args = nlohmann::ordered_json::array();
          for (const auto& a : n.args) args.push_back(to_json(*a));
          return {{"kind", "call"}, {"function", to_string(n.fn)}, {"args", std::move(args)}};
        } else {
          return {{"kind", "property"}, {"id", n.id}, {"path", n.path}};
        }
      },
      expr.node);
  j["span"] = span_json(expr.span);
  return j;
}

nlohmann::ordered_json to_json(const Assertion& assertion) {
  nlohmann::ordered_json j = std::visit(
      [](const auto& n) -> nlohmann::ordered_json {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Comparison>) {
          return {{"kind", "compare"}, {"op", to_string(n.op)}, {"lhs", to_json(*n.lhs)}, {"rhs", to_json(*n.rhs)}};
        } else if constexpr (std::is_same_v<T, InsidePred>) {
          return {{"kind", "inside"}, {"object", n.object}, {"region", n.region}};
        } else if constexpr (std::is_same_v<T, AndAssert>) {
          return {{"kind", "and"}, {"lhs", to_json(*n.lhs)}, {"rhs", to_json(*n.rhs)}};
        } else if constexpr (std::is_same_v<T, OrAssert>) {
          return {{"kind", "or"}, {"lhs", to_json(*n.lhs)}, {"rhs", to_json(*n.rhs)}};
        } else {
          return {{"kind", "not"}, {"operand", to_json(*n.operand)}};
        }
      },
      assertion.node);
  j["span"] = span_json(assertion.span);
  return j;
}

nlohmann::ordered_json to_json(const Program& program) {
  nlohmann::ordered_json stmts = nlohmann::ordered_json::array();
  for (const auto& s : program.statements) {
    nlohmann::ordered_json j = std::visit(
        [](const auto& n) -> nlohmann::ordered_json {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, Declaration>) {
            nlohmann::ordered_json d{{"kind", "declaration"}};
            d["declares"] = n.kind == DeclKind::Object ? "object" : n.kind == DeclKind::Region ? "region" : "variable";
            d["id"] = n.id;
            if (n.var_type) d["type"] = to_string(*n.var_type);
            return d;
          } else if constexpr (std::is_same_v<T, ConstraintStmt>) {
            nlohmann::ordered_json c{{"kind", n.kind == ConstraintKind::Assert         ? "assert"
                                              : n.kind == ConstraintKind::AllowCollide ? "allowCollide"
                                                                                       : "allowOutside"}};
            if (n.assertion) c["assertion"] = to_json(*n.assertion);
            if (!n.subjects.empty()) c["subjects"] = n.subjects;
            return c;
          } else {
            nlohmann::ordered_json a{{"kind", "assignment"}, {"target", n.target}};
            if (n.property) a["property"] = to_string(*n.property);
            a["value"] = to_json(*n.value);
            return a;
          }
        },
        s.node);
    j["span"] = span_json(s.span);
    stmts.push_back(std::move(j));
  }
  return {{"statements", std::move(stmts)}};
}

}  // namespace sthl::dsl
