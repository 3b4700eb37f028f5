#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "sthl/dsl/ast.hpp"

namespace sthl::dsl {

enum class DiagnosticKind { LexError, ParseError, ResolveError, TypeError, Note };

std::string_view to_string(DiagnosticKind kind);

struct Diagnostic {
  DiagnosticKind kind = DiagnosticKind::ParseError;
  std::string message;
  SourceSpan span;
};

/// `<line>:<col>: <kind>: <message>`
std::string format(const Diagnostic& d);

/// Thrown by parse and type_check. `kind()` is the kind of the first error.
class DslError : public std::runtime_error {
 public:
  explicit DslError(std::vector<Diagnostic> diagnostics);

  const std::vector<Diagnostic>& diagnostics() const noexcept { return diagnostics_; }
  DiagnosticKind kind() const noexcept { return diagnostics_.front().kind; }

 private:
  std::vector<Diagnostic> diagnostics_;
};

}  // namespace sthl::dsl
