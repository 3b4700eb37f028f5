#pragma once

#include <cstdint>

#include "sthl/dsl/ast.hpp"

namespace sthl::testing {

/// Random well-typed program: declarations first, then a mix of assignments
/// and constraints that only reference declared identifiers.
dsl::Program random_program(std::uint64_t seed, int statements = 12);

}  // namespace sthl::testing
