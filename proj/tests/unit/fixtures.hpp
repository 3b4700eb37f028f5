#pragma once

#include <string>
#include <vector>

#include "sthl/constraints.hpp"

namespace sthl::testing {

std::string fixture_dir();
std::string read_file(const std::string& path);

struct SolverScene {
  std::string name;
  constraints::CompiledProgram program;
  scene::SceneLayout truth;  // the valid layout the scene was built from
};

/// The 20 benchmark scenes under fixtures/solver, sorted by name.
std::vector<SolverScene> solver_scenes(std::uint64_t seed = 0);

/// Every *.sthl program under fixtures/programs, sorted by name.
std::vector<std::string> program_fixtures();

}  // namespace sthl::testing
