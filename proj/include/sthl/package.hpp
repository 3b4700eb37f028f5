#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sthl/assets.hpp"
#include "sthl/constraints.hpp"
#include "sthl/dsl/ast.hpp"
#include "sthl/scene.hpp"
#include "sthl/solver.hpp"

namespace sthl::package {

inline constexpr int kSchemaVersion = 1;

class PackageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
/// An object's asset has no native bounding box to scale from.
class AssetMismatch : public PackageError {
 public:
  using PackageError::PackageError;
};
class IoError : public PackageError {
 public:
  using PackageError::PackageError;
};
/// Malformed package or intermediate file; the message starts with `file:line:`.
class FormatError : public PackageError {
 public:
  FormatError(std::string file, std::size_t line, const std::string& what);
  const std::string& file() const { return file_; }
  std::size_t line() const { return line_; }

 private:
  std::string file_;
  std::size_t line_;
};

// ---------------------------------------------------------------------------
// Solve results as the export stage consumes them

struct SolveSummary {
  scene::SceneLayout layout;  // best layout
  double best_ratio = 1.0;
  std::size_t best_iteration = 0;
  std::string terminated = "iterationLimit";
  std::vector<bool> verdicts;
  std::vector<double> ratios;  // per iteration record
  std::string report;          // solver::format_report text
};

SolveSummary summarize(const solver::SolveReport& report, const constraints::ConstraintSet& cs);

/// What `sthl solve` writes: the canonical program, the seed and solver
/// settings, and the summary. Enough to rebuild every later stage.
struct SolveOutput {
  std::string program;  // canonical text of the parsed (not rand-frozen) program
  std::uint64_t seed = 0;
  solver::SolverConfig config;
  SolveSummary summary;
};

std::string write_solve_output(const SolveOutput& out);
/// Recompiles the program and overlays the stored transforms.
SolveOutput read_solve_output(std::string_view json_text, std::string_view file = "solve.json");

std::string write_decisions(const std::vector<assets::ObjectDecision>& decisions);
std::vector<assets::ObjectDecision> read_decisions(std::string_view json_text, std::string_view file = "assets.json");

/// Object transforms only (regions follow from the program).
std::string write_layout(const scene::SceneLayout& layout);

// ---------------------------------------------------------------------------
// Package

struct PhysicsInfo {
  std::string collider = "box";
  bool is_static = true;
};

struct ObjectEntry {
  std::string id;
  std::string category;
  std::string region;
  std::string asset_ref;
  std::string verdict;    // retrieved | generated
  std::string candidate;  // best database candidate, empty if none
  double score = 0.0;
  bool below_threshold = false;
  Vec3 native_extents{1, 1, 1};
  Vec3 dimensions;      // declared world extents
  Vec3 position;        // box center
  Vec3 rotation;        // degrees about x, y, z; applied x, then z, then y
  Vec3 scale{1, 1, 1};  // asset scale factor: dimensions / native_extents
  std::string color;
  std::string material;
  std::string features;
  PhysicsInfo physics;
};

struct RegionEntry {
  std::string id;
  Polygon2 vertices;
  double floor_y = 0.0;
  double height = 0.0;
  double wall_thickness = 0.0;
  std::string floor_texture;
  std::string wall_texture;
  std::vector<scene::WallSlab> walls;
};

struct LightEntry {
  std::string id;
  std::string kind;  // ceiling | lamp
  std::string region;
  Vec3 position;
  double intensity = 1.0;
};

struct ConstraintVerdict {
  std::size_t id = 0;
  std::string provenance;
  std::string text;
  std::vector<std::string> objects;
  bool satisfied = false;
};

struct Metadata {
  std::string program;  // canonical ScenethesisLang text
  std::uint64_t seed = 0;
  solver::SolverConfig config;
  double best_ratio = 1.0;
  std::size_t best_iteration = 0;
  std::string terminated = "iterationLimit";
  std::vector<ConstraintVerdict> verdicts;
};

struct ScenePackage {
  int schema_version = kSchemaVersion;
  std::vector<RegionEntry> regions;
  std::vector<ObjectEntry> objects;
  std::vector<LightEntry> lights;
  Metadata metadata;
  std::vector<std::string> notes;  // snap reverts and other warnings
  std::string report;              // solver report text

  const ObjectEntry* find_object(std::string_view id) const;
};

struct SnapResult {
  scene::SceneLayout layout;
  std::vector<std::string> snapped;   // objects whose pos.y changed
  std::vector<std::string> reverted;  // snaps undone because a constraint broke
  std::vector<std::string> notes;
};

/// Moves each supported object so its bottom lies exactly on its supporting
/// surface (pos.y only). A snap that turns any satisfied constraint into a
/// violated one is undone and noted.
SnapResult snap_to_supports(const scene::SceneLayout& layout, const constraints::ConstraintSet& cs);

/// Builds the package from a solved layout. Decisions must cover every object.
ScenePackage assemble(const dsl::Program& program, const constraints::CompiledProgram& compiled,
                      const SolveSummary& solved, const solver::SolverConfig& config, std::uint64_t seed,
                      const std::vector<assets::ObjectDecision>& decisions);

/// scene.json document (schemaVersion 1).
std::string scene_json(const ScenePackage& pkg);
std::string manifest_tsv(const ScenePackage& pkg);
/// Header comments with seed, solver settings and verdicts, then the program.
std::string metadata_sthl(const ScenePackage& pkg);

/// Writes scene.json, manifest.tsv, metadata.sthl and report.txt into `dir`
/// (created if missing). Throws PackageError if the program does not parse.
void write_package(const ScenePackage& pkg, const std::string& dir);
ScenePackage read_package(const std::string& dir);

// ---------------------------------------------------------------------------
// Round-trip engineering

std::vector<ConstraintVerdict> verdicts_for(const ScenePackage& pkg, std::string_view object);

/// The package program compiled with its seed, objects placed where the
/// package has them.
constraints::CompiledProgram package_scene(const ScenePackage& pkg);

/// Drops an object from the program (declaration, assignments and every
/// constraint naming it) and from the package.
void remove_object(ScenePackage& pkg, std::string_view object);

/// Re-solves one region with the constraints local to it; objects of other
/// regions are left untouched. Verdicts are recomputed over the whole program.
void resolve_region(ScenePackage& pkg, std::string_view region, const solver::SolverConfig& config);

}  // namespace sthl::package
