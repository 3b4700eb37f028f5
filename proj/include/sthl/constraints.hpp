#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "sthl/dsl/ast.hpp"
#include "sthl/dsl/typecheck.hpp"
#include "sthl/scene.hpp"

namespace sthl::constraints {

/// Tolerance of `=` (and `!=`) on numbers.
inline constexpr double kEqualityTolerance = 1e-6;

class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Runtime value of an expression. Rotations are Vectors of degrees; Bool
/// values are Numbers (0 or 1).
struct Value {
  enum class Kind { Number, Vector, Text };
  Kind kind = Kind::Number;
  double number = 0.0;
  Vec3 vector;
  std::string text;

  static Value of(double n) { return {Kind::Number, n, {}, {}}; }
  static Value of(Vec3 v) { return {Kind::Vector, 0.0, v, {}}; }
  static Value of(std::string s) { return {Kind::Text, 0.0, {}, std::move(s)}; }
  friend bool operator==(const Value&, const Value&) = default;
};

using Bindings = std::map<std::string, Value, std::less<>>;

struct EvalContext {
  scene::SceneLayout layout;
  Bindings bindings;  // values of typed variables that were never assigned
  std::uint64_t rng_seed = 0;
  double support_tolerance = scene::kSupportTolerance;
};

enum class Provenance { Explicit, HiddenCollision, HiddenGravity, HiddenBoundary };
std::string_view to_string(Provenance p);

/// Hidden non-collision constraint between two objects.
struct NoCollide {
  std::string a;
  std::string b;
};

/// Hidden gravity constraint: the object rests on its floor or another top face.
struct Supported {
  std::string object;
};

using ConstraintBody = std::variant<dsl::AssertionPtr, NoCollide, Supported>;

struct CompiledConstraint {
  std::size_t id = 0;
  Provenance provenance = Provenance::Explicit;
  /// Assertion with variables substituted; NoCollide/Supported for the
  /// collision and gravity built-ins (which have no user syntax).
  ConstraintBody body;
  /// Objects named by the constraint, sorted and unique.
  std::vector<std::string> involved_objects;
  /// Regions named by the constraint (regions never move).
  std::vector<std::string> involved_regions;

  const dsl::Assertion* assertion() const;
};

/// Canonical text of a constraint body: the printed assertion,
/// `!collides(a, b)` or `supported(a)`.
std::string print(const CompiledConstraint& c);

struct ConstraintSet {
  std::vector<CompiledConstraint> constraints;
  std::set<std::pair<std::string, std::string>> allow_collide;  // (min, max) ordered pairs
  std::set<std::string, std::less<>> allow_outside;

  bool collision_allowed(std::string_view a, std::string_view b) const;
  std::size_t count(Provenance p) const;
  const CompiledConstraint* find(std::size_t id) const;
  std::size_t size() const { return constraints.size(); }
};

// ---------------------------------------------------------------------------
// From program to scene and constraints

/// Replaces every `rand(lo, hi)` with a sample uniform on [lo, hi], drawn once
/// from a generator seeded with `seed`, walking statements in order.
dsl::TypedProgram freeze_random(const dsl::TypedProgram& program, std::uint64_t seed);

/// Object category derived from its identifier: trailing digits and
/// underscores dropped, inner underscores become spaces (`dining_table2` ->
/// `dining table`).
std::string category_from_id(std::string_view id);

/// Regions and objects declared by a (frozen) program, with assigned
/// properties applied and each object attached to its region. Objects
/// without an assigned position sit at their region's center on the floor.
scene::SceneLayout build_scene(const dsl::TypedProgram& program);

/// One constraint per `assert` (variables substituted in statement order),
/// then the hidden collision, gravity and boundary constraints.
ConstraintSet compile(const dsl::TypedProgram& program);

/// Everything the later stages need from a program text.
struct CompiledProgram {
  dsl::TypedProgram program;  // rand-frozen
  scene::SceneLayout layout;  // declared scene, before solving
  ConstraintSet constraints;
};

/// parse -> type_check -> freeze_random -> build_scene + compile.
CompiledProgram compile_source(std::string_view source, std::uint64_t seed);
CompiledProgram compile_program(const dsl::TypedProgram& program, std::uint64_t seed);

/// Object id -> region id under the declaration rules (see build_scene).
std::map<std::string, std::string> region_assignment(const dsl::TypedProgram& program);

// ---------------------------------------------------------------------------
// Evaluation

/// Value of an expression against a layout. Throws EvalError for unknown ids,
/// missing property paths and unbound variables.
Value evaluate(const dsl::Expr& expr, const EvalContext& ctx);

bool evaluate(const CompiledConstraint& c, const EvalContext& ctx);

/// Satisfied / total over the whole set; 1.0 for an empty set.
double satisfaction_ratio(const ConstraintSet& cs, const EvalContext& ctx);

std::vector<bool> verdicts(const ConstraintSet& cs, const EvalContext& ctx);

/// `<id> <provenance> <satisfied|violated> <assertion>` per line.
std::string report(const ConstraintSet& cs, const std::vector<bool>& verdicts);

/// Incremental evaluator over a mutable copy of a layout. Constraints are
/// bound once (ids to indices, world boxes cached); moving an object
/// re-evaluates only the constraints that can change.
class Evaluator {
 public:
  Evaluator(const ConstraintSet& cs, scene::SceneLayout layout, const Bindings& bindings = {},
            double support_tolerance = scene::kSupportTolerance);
  ~Evaluator();
  Evaluator(Evaluator&&) noexcept;
  Evaluator& operator=(Evaluator&&) noexcept;

  const scene::SceneLayout& layout() const;
  const ConstraintSet& constraints() const;
  std::size_t size() const;
  bool satisfied(std::size_t index) const;
  std::size_t satisfied_count() const;
  std::vector<bool> verdicts() const;
  double ratio() const;

  std::optional<std::size_t> object_index(std::string_view id) const;
  const scene::OrientedBox& box(std::size_t object) const;
  /// Constraint indices whose verdict may change when `object` moves.
  const std::vector<std::size_t>& affected_by(std::size_t object) const;
  /// Object indices named by constraint `index`.
  const std::vector<std::size_t>& objects_of(std::size_t index) const;

  void set_transform(std::size_t object, const scene::Transform& t);
  /// Satisfied count if `object` had transform `t`; the layout is unchanged afterwards.
  std::size_t score_move(std::size_t object, const scene::Transform& t);

  /// Inactive objects are ignored: constraints naming them are not counted
  /// by `active_violations` and they never support other objects.
  void set_active(std::size_t object, bool active);
  bool active(std::size_t object) const;
  /// Violated constraints whose named objects are all active.
  std::size_t active_violations() const;

 private:
  friend Value evaluate(const dsl::Expr& expr, const EvalContext& ctx);
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// ---------------------------------------------------------------------------
// Redundancy

/// Drops constraints whose normalized assertion equals an earlier one.
/// Normalization orders the operands of `&&`, `||`, `=` and `!=`.
ConstraintSet dedupe_syntactic(const ConstraintSet& cs);

/// Normalized text used by dedupe_syntactic.
std::string normalized_text(const CompiledConstraint& c);

/// Hook for an external redundancy/contradiction pass. Returns the ids of
/// constraints to drop.
class SemanticChecker {
 public:
  virtual ~SemanticChecker() = default;
  virtual std::vector<std::size_t> redundant(const ConstraintSet& cs) = 0;
};

ConstraintSet apply_semantic_checker(const ConstraintSet& cs, SemanticChecker& checker);

}  // namespace sthl::constraints
