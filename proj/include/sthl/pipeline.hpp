#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sthl/assets.hpp"
#include "sthl/constraints.hpp"
#include "sthl/package.hpp"
#include "sthl/solver.hpp"

namespace sthl::pipeline {

enum class ProviderKind { Hash, Trigram };

struct AssetOptions {
  std::vector<assets::Candidate> database;
  double tau = assets::kDefaultTau;
  assets::Weights weights;
  ProviderKind provider = ProviderKind::Trigram;
  bool generator = true;  // placeholder text-to-3D stand-in
};

std::unique_ptr<assets::SimilarityProvider> make_provider(ProviderKind kind);

/// Stage II over every object of the layout.
std::vector<assets::ObjectDecision> decide_assets(const scene::SceneLayout& layout, const AssetOptions& options);

struct Options {
  std::uint64_t seed = 0;
  solver::SolverConfig solver;  // its seed is replaced by `seed`
  AssetOptions assets;
  /// Wall thickness for every region; the program's value when unset.
  std::optional<double> wall_thickness;
  /// When set, every stage writes its artifact under this directory.
  std::optional<std::string> intermediates_dir;
};

struct Result {
  dsl::Program program;
  constraints::CompiledProgram compiled;
  std::vector<assets::ObjectDecision> decisions;
  solver::SolveReport report;
  package::SolveSummary summary;
  package::ScenePackage package;
};

/// parse and compile, assets, solve, assemble. The first failing stage
/// throws its own error.
Result run(const std::string& source, const Options& options);

/// Stage III on its own: the solve output `sthl solve` writes.
package::SolveOutput solve_source(const std::string& source, std::uint64_t seed, solver::SolverConfig config,
                                  solver::SolveReport* report = nullptr);

/// Stage IV from a solve output and decisions (placeholder assets for objects
/// without one).
package::ScenePackage export_solved(const package::SolveOutput& solved,
                                    std::vector<assets::ObjectDecision> decisions,
                                    std::optional<double> wall_thickness = std::nullopt);

}  // namespace sthl::pipeline
