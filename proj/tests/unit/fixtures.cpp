#include "fixtures.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace sthl::testing {

namespace fs = std::filesystem;

std::string fixture_dir() { return STHL_FIXTURE_DIR; }

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

std::vector<fs::path> files_with(const fs::path& dir, const std::string& ext) {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    const std::string name = e.path().filename().string();
    if (name.size() > ext.size() && name.compare(name.size() - ext.size(), ext.size(), ext) == 0) {
      out.push_back(e.path());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

Vec3 vec(const nlohmann::json& j) { return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()}; }

}  // namespace

std::vector<SolverScene> solver_scenes(std::uint64_t seed) {
  std::vector<SolverScene> out;
  for (const fs::path& p : files_with(fs::path(fixture_dir()) / "solver", ".sthl")) {
    SolverScene s;
    s.name = p.stem().string();
    s.program = constraints::compile_source(read_file(p.string()), seed);
    s.truth = s.program.layout;
    fs::path truth = p;
    truth.replace_extension(".truth.json");
    const auto j = nlohmann::json::parse(read_file(truth.string()));
    for (auto& o : s.truth.objects) {
      o.transform.pos = vec(j.at(o.id).at("pos"));
      o.transform.rot = vec(j.at(o.id).at("rot"));
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<std::string> program_fixtures() {
  std::vector<std::string> out;
  for (const fs::path& p : files_with(fs::path(fixture_dir()) / "programs", ".sthl")) out.push_back(p.string());
  return out;
}

}  // namespace sthl::testing
