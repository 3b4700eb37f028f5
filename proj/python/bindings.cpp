#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <json.hpp>

#include "sthl/assets.hpp"
#include "sthl/constraints.hpp"
#include "sthl/dsl/json_ast.hpp"
#include "sthl/dsl/parser.hpp"
#include "sthl/dsl/printer.hpp"
#include "sthl/metrics.hpp"
#include "sthl/package.hpp"
#include "sthl/pipeline.hpp"

namespace py = pybind11;
using namespace sthl;
using json = nlohmann::ordered_json;

// JSON crosses the boundary as text; the Python package decodes it.

namespace {

solver::SolverConfig solver_config(int k, int T) {
  solver::SolverConfig c;
  c.batch_size = k;
  c.max_iterations = T;
  return c;
}

pipeline::AssetOptions asset_options(const std::string& db, double tau, double lambda_v, double lambda_t,
                                     const std::string& provider, bool generate) {
  pipeline::AssetOptions o;
  if (!db.empty()) o.database = assets::load_index(db);
  o.tau = tau;
  o.weights = {lambda_v, lambda_t};
  if (provider == "hash") {
    o.provider = pipeline::ProviderKind::Hash;
  } else if (provider == "trigram") {
    o.provider = pipeline::ProviderKind::Trigram;
  } else {
    throw std::invalid_argument("provider must be 'hash' or 'trigram'");
  }
  o.generator = generate;
  return o;
}

json scores(const metrics::MatchScores& s) {
  return {{"tp", s.tp}, {"fp", s.fp}, {"fn", s.fn}, {"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "ScenethesisLang toolchain core";

  static py::exception<dsl::DslError> dsl_error(m, "DslError", PyExc_ValueError);
  static py::exception<package::PackageError> package_error(m, "PackageError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const dsl::DslError& e) {
      std::string msg;
      for (const auto& d : e.diagnostics()) msg += (msg.empty() ? "" : "\n") + dsl::format(d);
      py::set_error(dsl_error, msg.c_str());
    } catch (const package::PackageError& e) {
      py::set_error(package_error, e.what());
    }
  });

  m.def(
      "parse_json", [](const std::string& source) { return dsl::to_json(dsl::parse(source)).dump(); },
      py::arg("source"), "Parse a program; the AST as JSON text.");
  m.def(
      "format", [](const std::string& source) { return dsl::print(dsl::parse(source)); }, py::arg("source"),
      "Canonical text of a program.");
  m.def(
      "check_json",
      [](const std::string& source, std::uint64_t seed) {
        const auto cp = constraints::compile_source(source, seed);
        json constraints = json::array();
        for (const auto& c : cp.constraints.constraints) {
          constraints.push_back({{"id", c.id},
                                 {"provenance", std::string(constraints::to_string(c.provenance))},
                                 {"text", constraints::print(c)}});
        }
        json objects = json::array();
        for (const auto& o : cp.layout.objects) objects.push_back(o.id);
        json regions = json::array();
        for (const auto& r : cp.layout.regions) regions.push_back(r.id);
        return json{{"regions", regions}, {"objects", objects}, {"constraints", constraints}}.dump();
      },
      py::arg("source"), py::arg("seed") = 0, "Type check and compile; regions, objects and constraints as JSON.");
  m.def(
      "solve_json",
      [](const std::string& source, std::uint64_t seed, int k, int T) {
        solver::SolveReport report;
        py::gil_scoped_release release;
        return package::write_solve_output(pipeline::solve_source(source, seed, solver_config(k, T), &report));
      },
      py::arg("source"), py::arg("seed") = 0, py::arg("k") = 3, py::arg("T") = 5,
      "Solve a program; the solve output document as JSON.");
  m.def(
      "assets_json",
      [](const std::string& source, const std::string& db, double tau, double lambda_v, double lambda_t,
         const std::string& provider, bool generate, std::uint64_t seed) {
        const auto cp = constraints::compile_source(source, seed);
        const auto opts = asset_options(db, tau, lambda_v, lambda_t, provider, generate);
        return package::write_decisions(pipeline::decide_assets(cp.layout, opts));
      },
      py::arg("source"), py::arg("db") = "", py::arg("tau") = assets::kDefaultTau,
      py::arg("lambda_v") = assets::kDefaultVisualWeight, py::arg("lambda_t") = assets::kDefaultSemanticWeight,
      py::arg("provider") = "trigram", py::arg("generate") = true, py::arg("seed") = 0,
      "Asset decision for every object, as JSON.");
  m.def(
      "export",
      [](const std::string& solve_json, const std::string& assets_json, const std::string& out_dir) {
        const auto solved = package::read_solve_output(solve_json);
        std::vector<assets::ObjectDecision> decisions;
        if (!assets_json.empty()) decisions = package::read_decisions(assets_json);
        const auto pkg = pipeline::export_solved(solved, decisions);
        package::write_package(pkg, out_dir);
        return package::scene_json(pkg);
      },
      py::arg("solve_json"), py::arg("assets_json") = "", py::arg("out_dir"),
      "Write a package from a solve output; returns scene.json text.");
  m.def(
      "pipeline",
      [](const std::string& source, const std::string& out_dir, std::uint64_t seed, int k, int T,
         const std::string& db, double tau, const std::string& provider, bool keep_intermediates) {
        pipeline::Options opts;
        opts.seed = seed;
        opts.solver = solver_config(k, T);
        opts.assets = asset_options(db, tau, assets::kDefaultVisualWeight, assets::kDefaultSemanticWeight, provider,
                                    true);
        if (keep_intermediates) opts.intermediates_dir = out_dir + "/intermediates";
        py::gil_scoped_release release;
        const auto r = pipeline::run(source, opts);
        package::write_package(r.package, out_dir);
        return package::scene_json(r.package);
      },
      py::arg("source"), py::arg("out_dir"), py::arg("seed") = 0, py::arg("k") = 3, py::arg("T") = 5,
      py::arg("db") = "", py::arg("tau") = assets::kDefaultTau, py::arg("provider") = "trigram",
      py::arg("keep_intermediates") = false, "Compile, choose assets, solve and export; returns scene.json text.");
  m.def(
      "compare_json",
      [](const std::string& gen, const std::string& gt, double tau_o, double tau_l, const std::string& embeddings) {
        const auto a = constraints::compile_source(gen, 0);
        const auto b = constraints::compile_source(gt, 0);
        std::shared_ptr<metrics::Embedder> emb = std::make_shared<metrics::TrigramEmbedder>();
        if (!embeddings.empty()) {
          emb = std::make_shared<metrics::TableEmbedder>(metrics::TableEmbedder::load(embeddings, emb));
        }
        const auto cmp = metrics::compare_programs(a, b, *emb, tau_o, tau_l);
        return json{{"objects", scores(cmp.objects.scores)},
                    {"layout", scores(cmp.layout.scores)},
                    {"overall", scores(cmp.overall)}}
            .dump();
      },
      py::arg("gen"), py::arg("gt"), py::arg("tau_o") = 0.7, py::arg("tau_l") = 0.7, py::arg("embeddings") = "",
      "Object, layout and overall resemblance of two programs, as JSON.");
  m.def(
      "solution_correctness",
      [](const std::string& solve_json) {
        const auto solved = package::read_solve_output(solve_json);
        const auto cp = constraints::compile_source(solved.program, solved.seed);
        return metrics::solution_correctness(cp.constraints, solved.summary.layout);
      },
      py::arg("solve_json"), "Satisfied fraction of all constraints in a solve output.");
  m.def(
      "hungarian",
      [](const metrics::Matrix& m) { return metrics::hungarian_assign(m); }, py::arg("matrix"),
      "Maximum-weight one-to-one assignment as (row, col) pairs; zero entries never match.");
}
