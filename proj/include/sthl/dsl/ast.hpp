#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace sthl::dsl {

struct SourceSpan {
  std::size_t offset = 0;
  std::size_t length = 0;
  int line = 1;
  int column = 1;
};

enum class ValueType { Number, Degree, Bool, Vector3, Rotation, Color, Material };

enum class BinaryOp { Add, Sub, Mul, Div };
enum class CompareOp { Eq, Ne, Lt, Le, Gt, Ge };
enum class Builtin { Rand, Vec3, Rot, Dot };

/// Object properties (color, material, features) and transform properties (pos, rot, scale).
enum class Property { Color, Material, Features, Pos, Rot, Scale };

std::string_view to_string(ValueType t);
std::string_view to_string(BinaryOp op);
std::string_view to_string(CompareOp op);
std::string_view to_string(Builtin fn);
std::string_view to_string(Property p);
std::optional<ValueType> value_type_from(std::string_view name);
std::optional<Property> property_from(std::string_view name);
bool is_transform_property(Property p);

// ---------------------------------------------------------------------------
// Expressions

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct NumberLit {
  double value = 0.0;
};
struct StringLit {
  std::string value;
};
struct IdentRef {
  std::string name;
};
struct BinaryExpr {
  BinaryOp op;
  ExprPtr lhs;
  ExprPtr rhs;
};
struct CallExpr {
  Builtin fn;
  std::vector<ExprPtr> args;
};
/// `id.p` where p is a property optionally followed by a component, e.g. `lamp.pos.y`.
struct PropertyRef {
  std::string id;
  std::vector<std::string> path;
};

struct Expr {
  std::variant<NumberLit, StringLit, IdentRef, BinaryExpr, CallExpr, PropertyRef> node;
  SourceSpan span;
};

// ---------------------------------------------------------------------------
// Assertions

struct Assertion;
using AssertionPtr = std::shared_ptr<const Assertion>;

struct Comparison {
  CompareOp op;
  ExprPtr lhs;
  ExprPtr rhs;
};
struct InsidePred {
  std::string object;
  std::string region;
};
struct AndAssert {
  AssertionPtr lhs;
  AssertionPtr rhs;
};
struct OrAssert {
  AssertionPtr lhs;
  AssertionPtr rhs;
};
struct NotAssert {
  AssertionPtr operand;
};

struct Assertion {
  std::variant<Comparison, InsidePred, AndAssert, OrAssert, NotAssert> node;
  SourceSpan span;
};

// ---------------------------------------------------------------------------
// Statements

enum class DeclKind { Object, Region, Variable };

struct Declaration {
  DeclKind kind = DeclKind::Object;
  std::string id;
  std::optional<ValueType> var_type;
};

enum class ConstraintKind { Assert, AllowCollide, AllowOutside };

struct ConstraintStmt {
  ConstraintKind kind = ConstraintKind::Assert;
  AssertionPtr assertion;
  std::vector<std::string> subjects;
};

struct Assignment {
  std::string target;
  std::optional<Property> property;
  ExprPtr value;
};

struct Statement {
  std::variant<Declaration, ConstraintStmt, Assignment> node;
  SourceSpan span;
};

struct Program {
  std::vector<Statement> statements;
};

// Node factories used by the parser, tests and the constraint compiler.
ExprPtr make_number(double v, SourceSpan span = {});
ExprPtr make_string(std::string v, SourceSpan span = {});
ExprPtr make_ident(std::string name, SourceSpan span = {});
ExprPtr make_binary(BinaryOp op, ExprPtr lhs, ExprPtr rhs, SourceSpan span = {});
ExprPtr make_call(Builtin fn, std::vector<ExprPtr> args, SourceSpan span = {});
ExprPtr make_property(std::string id, std::vector<std::string> path, SourceSpan span = {});

AssertionPtr make_compare(CompareOp op, ExprPtr lhs, ExprPtr rhs, SourceSpan span = {});
AssertionPtr make_inside(std::string object, std::string region, SourceSpan span = {});
AssertionPtr make_and(AssertionPtr lhs, AssertionPtr rhs, SourceSpan span = {});
AssertionPtr make_or(AssertionPtr lhs, AssertionPtr rhs, SourceSpan span = {});
AssertionPtr make_not(AssertionPtr operand, SourceSpan span = {});

// Structural equality ignores source spans.
bool structurally_equal(const Expr& a, const Expr& b);
bool structurally_equal(const Assertion& a, const Assertion& b);
bool structurally_equal(const Statement& a, const Statement& b);
bool structurally_equal(const Program& a, const Program& b);

}  // namespace sthl::dsl
