#pragma once

#include <string>

#include "sthl/dsl/ast.hpp"

namespace sthl::dsl {

/// Canonical text: one statement per line, single spaces around binary
/// operators, parentheses only where precedence or left-associativity
/// requires them. `parse(print(p))` is structurally equal to `p`.
std::string print(const Program& program);
std::string print(const Statement& stmt);
std::string print(const Assertion& assertion);
std::string print(const Expr& expr);

/// Shortest decimal text that parses back to exactly `v`.
std::string format_number(double v);

std::string quote_string(const std::string& s);

}  // namespace sthl::dsl
