#include <algorithm>
#include <set>

#include "sthl/constraints.hpp"
#include "sthl/dsl/printer.hpp"

namespace sthl::constraints {

using namespace sthl::dsl;

namespace {

// Prefix form with commutative operands sorted; unambiguous without
// precedence rules.
std::string canonical(const Assertion& a) {
  return std::visit(
      [](const auto& n) -> std::string {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Comparison>) {
          std::string l = dsl::print(*n.lhs), r = dsl::print(*n.rhs);
          if ((n.op == CompareOp::Eq || n.op == CompareOp::Ne) && r < l) std::swap(l, r);
          return "(" + std::string(to_string(n.op)) + " " + l + " | " + r + ")";
        } else if constexpr (std::is_same_v<T, InsidePred>) {
          return "(inside " + n.object + " " + n.region + ")";
        } else if constexpr (std::is_same_v<T, NotAssert>) {
          return "(not " + canonical(*n.operand) + ")";
        } else {
          std::string l = canonical(*n.lhs), r = canonical(*n.rhs);
          if (r < l) std::swap(l, r);
          return std::string(std::is_same_v<T, AndAssert> ? "(and " : "(or ") + l + " " + r + ")";
        }
      },
      a.node);
}

}  // namespace

std::string normalized_text(const CompiledConstraint& c) {
  if (auto a = c.assertion()) return canonical(*a);
  if (auto n = std::get_if<NoCollide>(&c.body)) {
    return "(nocollide " + std::min(n->a, n->b) + " " + std::max(n->a, n->b) + ")";
  }
  return "(supported " + std::get<Supported>(c.body).object + ")";
}

ConstraintSet dedupe_syntactic(const ConstraintSet& cs) {
  ConstraintSet out;
  out.allow_collide = cs.allow_collide;
  out.allow_outside = cs.allow_outside;
  std::set<std::string> seen;
  for (const auto& c : cs.constraints) {
    if (seen.insert(normalized_text(c)).second) out.constraints.push_back(c);
  }
  return out;
}

ConstraintSet apply_semantic_checker(const ConstraintSet& cs, SemanticChecker& checker) {
  const auto drop = checker.redundant(cs);
  const std::set<std::size_t> ids(drop.begin(), drop.end());
  ConstraintSet out;
  out.allow_collide = cs.allow_collide;
  out.allow_outside = cs.allow_outside;
  for (const auto& c : cs.constraints) {
    if (!ids.count(c.id)) out.constraints.push_back(c);
  }
  return out;
}

}  // namespace sthl::constraints
