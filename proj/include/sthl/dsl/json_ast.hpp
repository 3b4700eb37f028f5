#pragma once

#include <json.hpp>

#include "sthl/dsl/ast.hpp"

namespace sthl::dsl {

nlohmann::ordered_json to_json(const Program& program);
nlohmann::ordered_json to_json(const Assertion& assertion);
nlohmann::ordered_json to_json(const Expr& expr);

}  // namespace sthl::dsl
