#include "sthl/pipeline.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "sthl/dsl/parser.hpp"
#include "sthl/dsl/printer.hpp"

namespace sthl::pipeline {

namespace fs = std::filesystem;

namespace {

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw package::IoError("cannot write " + p.string());
  out << content;
}

std::string constraints_text(const constraints::ConstraintSet& cs) {
  std::string out;
  for (const auto& c : cs.constraints) {
    out += std::to_string(c.id) + "\t" + std::string(constraints::to_string(c.provenance)) + "\t" +
           constraints::print(c) + "\n";
  }
  return out;
}

void write_intermediates(const fs::path& dir, const Result& r, const package::SolveOutput& solved) {
  std::error_code ec;
  fs::create_directories(dir / "iterations", ec);
  if (ec) throw package::IoError("cannot create " + (dir / "iterations").string() + ": " + ec.message());
  write_file(dir / "program.sthl", dsl::print(r.program));
  write_file(dir / "constraints.txt", constraints_text(r.compiled.constraints));
  write_file(dir / "assets.json", package::write_decisions(r.decisions));
  write_file(dir / "solve.json", package::write_solve_output(solved));
  for (const auto& it : r.report.iterations) {
    char name[32];
    std::snprintf(name, sizeof name, "%03d.json", it.index);
    write_file(dir / "iterations" / name, package::write_layout(it.layout));
  }
}

void set_walls(scene::SceneLayout& layout, std::optional<double> thickness) {
  if (!thickness) return;
  if (!(*thickness >= 0.0)) throw std::invalid_argument("wall thickness must be >= 0");
  for (auto& r : layout.regions) r.wall_thickness = *thickness;
}

}  // namespace

std::unique_ptr<assets::SimilarityProvider> make_provider(ProviderKind kind) {
  if (kind == ProviderKind::Trigram) return std::make_unique<assets::TrigramSimilarityProvider>();
  return std::make_unique<assets::HashSimilarityProvider>();
}

std::vector<assets::ObjectDecision> decide_assets(const scene::SceneLayout& layout, const AssetOptions& options) {
  auto provider = make_provider(options.provider);
  assets::PlaceholderGenerator generator;
  return assets::decide_all(layout, options.database, options.tau, options.weights, *provider,
                            options.generator ? &generator : nullptr);
}

package::SolveOutput solve_source(const std::string& source, std::uint64_t seed, solver::SolverConfig config,
                                  solver::SolveReport* report) {
  config.seed = seed;
  config.validate();
  const dsl::Program program = dsl::parse(source);
  const auto cp = constraints::compile_source(source, seed);
  const auto rep = solver::solve(cp.layout, cp.constraints, config);
  package::SolveOutput out;
  out.program = dsl::print(program);
  out.seed = seed;
  out.config = config;
  out.summary = package::summarize(rep, cp.constraints);
  if (report) *report = rep;
  return out;
}

package::ScenePackage export_solved(const package::SolveOutput& solved,
                                    std::vector<assets::ObjectDecision> decisions,
                                    std::optional<double> wall_thickness) {
  const dsl::Program program = dsl::parse(solved.program);
  const auto cp = constraints::compile_source(solved.program, solved.seed);
  assets::PlaceholderGenerator generator;
  for (const auto& o : solved.summary.layout.objects) {
    bool found = false;
    for (const auto& d : decisions) found = found || d.object == o.id;
    if (found) continue;
    assets::AssetDecision d;
    d.query = assets::object_query(o);
    d.verdict = assets::Verdict::Generated;
    d.asset = generator.generate(d.query);
    decisions.push_back({o.id, d});
  }
  package::SolveSummary summary = solved.summary;
  set_walls(summary.layout, wall_thickness);
  return package::assemble(program, cp, summary, solved.config, solved.seed, decisions);
}

Result run(const std::string& source, const Options& options) {
  solver::SolverConfig config = options.solver;
  config.seed = options.seed;
  config.validate();
  Result r;
  r.program = dsl::parse(source);
  r.compiled = constraints::compile_source(source, options.seed);
  r.decisions = decide_assets(r.compiled.layout, options.assets);
  r.report = solver::solve(r.compiled.layout, r.compiled.constraints, config);
  r.summary = package::summarize(r.report, r.compiled.constraints);
  package::SolveSummary summary = r.summary;
  set_walls(summary.layout, options.wall_thickness);
  r.package = package::assemble(r.program, r.compiled, summary, config, options.seed, r.decisions);
  if (options.intermediates_dir) {
    package::SolveOutput solved{dsl::print(r.program), options.seed, config, r.summary};
    write_intermediates(*options.intermediates_dir, r, solved);
  }
  return r;
}

}  // namespace sthl::pipeline
