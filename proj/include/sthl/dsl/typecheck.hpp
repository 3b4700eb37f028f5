#pragma once

#include <map>
#include <optional>
#include <string>
#include <unordered_map>

#include "sthl/dsl/ast.hpp"
#include "sthl/dsl/diagnostics.hpp"

namespace sthl::dsl {

/// Static type of an expression. `String` is the type of string literals and
/// of the `features` property; it is not a declarable ValueType.
enum class ExprType { Number, Degree, Bool, Vector3, Rotation, Color, Material, String };

std::string_view to_string(ExprType t);
ExprType expr_type_of(ValueType t);
bool is_numeric(ExprType t);
bool is_text(ExprType t);

enum class SymbolKind { Object, Region, Variable };

struct Symbol {
  SymbolKind kind = SymbolKind::Object;
  std::optional<ValueType> type;  // variables only
  std::size_t decl_index = 0;     // statement index of the declaration
};

/// A program that passed type checking, with every expression node annotated.
/// Copies share the (immutable) AST nodes, so annotations stay valid.
struct TypedProgram {
  Program program;
  std::map<std::string, Symbol, std::less<>> symbols;
  std::unordered_map<const Expr*, ExprType> types;

  ExprType type_of(const Expr& e) const { return types.at(&e); }
  const Symbol* find(std::string_view id) const;
};

/// Type of a property path on an object/region (`pos`, `pos.y`, `color`, ...)
/// or on a Vector3/Rotation variable (`x`, `y`, `z`). nullopt if invalid.
std::optional<ExprType> property_path_type(SymbolKind kind, std::optional<ValueType> var_type,
                                           const std::vector<std::string>& path);

/// Throws DslError (TypeError diagnostics) if any node is ill-typed.
TypedProgram type_check(const Program& program);

/// Whether a value of type `value` can be assigned to `id.prop` (prop given)
/// or to a variable of type `var_type` (prop empty), for a target of `kind`.
bool assignable(SymbolKind kind, std::optional<Property> prop, std::optional<ValueType> var_type, ExprType value);

}  // namespace sthl::dsl
