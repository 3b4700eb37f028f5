#pragma once

#include <string_view>
#include <vector>

#include "sthl/dsl/ast.hpp"
#include "sthl/dsl/diagnostics.hpp"

namespace sthl::dsl {

/// Parses and resolves a ScenethesisLang program.
///
/// Identifiers must be declared before use and at most once. On failure a
/// DslError carrying every collected diagnostic is thrown; the parser
/// resynchronizes at the next `;` so one bad statement does not hide the rest.
/// Non-fatal notes (e.g. the `entity` spelling of `object`) go to `notes`.
Program parse(std::string_view source, std::vector<Diagnostic>* notes = nullptr);

}  // namespace sthl::dsl
