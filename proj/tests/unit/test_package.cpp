#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>

#include "fixtures.hpp"
#include "sthl/dsl/parser.hpp"
#include "sthl/dsl/printer.hpp"
#include "sthl/package.hpp"
#include "sthl/pipeline.hpp"

using namespace sthl;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("sthl_test_package_" + name);
  fs::remove_all(p);
  return p;
}

pipeline::Options small_options(std::uint64_t seed = 0) {
  pipeline::Options o;
  o.seed = seed;
  o.solver.max_iterations = 3;
  return o;
}

assets::ObjectDecision decision_for(const std::string& id, std::optional<Vec3> native) {
  assets::ObjectDecision d;
  d.object = id;
  d.decision.verdict = assets::Verdict::Retrieved;
  d.decision.asset.ref = "models/" + id + ".glb";
  d.decision.asset.native_extents = native;
  return d;
}

package::SolveSummary unsolved(const constraints::CompiledProgram& cp) {
  package::SolveSummary s;
  s.layout = cp.layout;
  return s;
}

std::string slurp(const fs::path& p) { return testing::read_file(p.string()); }

void spit(const fs::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << s;
}

}  // namespace

TEST_CASE("assemble: scale is dimensions over native extents") {
  const std::string src =
      "region room; room.scale <- vec3(8, 3, 8);\n"
      "object table; table.scale <- vec3(1, 0.75, 1); table.pos <- vec3(0, 0.375, 0);\n";
  const auto cp = constraints::compile_source(src, 0);
  const auto pkg = package::assemble(dsl::parse(src), cp, unsolved(cp), {}, 0,
                                     {decision_for("table", Vec3{2, 1.5, 2})});
  const auto* t = pkg.find_object("table");
  REQUIRE(t);
  CHECK(t->scale.x == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(t->scale.y == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(t->scale.z == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(t->dimensions.y == doctest::Approx(0.75));
  CHECK(t->physics.is_static);
  CHECK(t->physics.collider == "box");

  CHECK_THROWS_AS(package::assemble(dsl::parse(src), cp, unsolved(cp), {}, 0, {decision_for("table", std::nullopt)}),
                  package::AssetMismatch);
  CHECK_THROWS_AS(package::assemble(dsl::parse(src), cp, unsolved(cp), {}, 0, {}), package::AssetMismatch);
  CHECK_THROWS_AS(package::assemble(dsl::parse(src), cp, unsolved(cp), {}, 0,
                                    {decision_for("table", Vec3{0, 1, 1})}),
                  package::AssetMismatch);
}

TEST_CASE("snap: exact supports are left alone, near ones land exactly") {
  const std::string src =
      "region room; room.scale <- vec3(8, 3, 8);\n"
      "object a; a.pos <- vec3(0, 0.5, 0);\n"
      "object b; b.pos <- vec3(2, 0.503, 0);\n"
      "object c; c.pos <- vec3(2, 1.503, 0);\n";
  const auto cp = constraints::compile_source(src, 0);
  const auto snap = package::snap_to_supports(cp.layout, cp.constraints);
  CHECK(snap.reverted.empty());
  CHECK(snap.snapped == std::vector<std::string>{"b", "c"});
  CHECK(snap.layout.find_object("a")->transform.pos.y == 0.5);
  CHECK(snap.layout.find_object("b")->transform.pos.y == 0.5);
  // c rests exactly on b and follows it down.
  CHECK(snap.layout.find_object("c")->transform.pos.y == doctest::Approx(1.5).epsilon(1e-12));

  const auto again = package::snap_to_supports(snap.layout, cp.constraints);
  CHECK(again.snapped.empty());
}

TEST_CASE("snap: a snap that would break a constraint is reverted and noted") {
  const std::string src =
      "region room; room.scale <- vec3(8, 3, 8);\n"
      "object a; a.pos <- vec3(0, 0.504, 0);\n"
      "assert a.pos.y > 0.503;\n";
  const auto cp = constraints::compile_source(src, 0);
  const auto snap = package::snap_to_supports(cp.layout, cp.constraints);
  CHECK(snap.reverted == std::vector<std::string>{"a"});
  CHECK(snap.layout.find_object("a")->transform.pos.y == 0.504);
  REQUIRE(snap.notes.size() == 1);
  CHECK(snap.notes[0].find("a.pos.y > 0.503") != std::string::npos);

  const auto pkg = package::assemble(dsl::parse(src), cp, unsolved(cp), {}, 0, {decision_for("a", Vec3{1, 1, 1})});
  CHECK(pkg.report.find("snap reverted for a") != std::string::npos);
  CHECK(pkg.metadata.verdicts.back().satisfied);
}

TEST_CASE("package: an empty scene still has regions and a light") {
  const std::string src = "region hall; hall.scale <- vec3(4, 2.5, 4);\n";
  const auto r = pipeline::run(src, small_options());
  CHECK(r.package.objects.empty());
  REQUIRE(r.package.regions.size() == 1);
  CHECK(r.package.regions[0].walls.size() == 4);
  REQUIRE(r.package.lights.size() == 1);
  CHECK(r.package.lights[0].position.y == doctest::Approx(2.45));

  const fs::path dir = scratch("empty");
  package::write_package(r.package, dir.string());
  const auto back = package::read_package(dir.string());
  CHECK(back.objects.empty());
  CHECK(package::scene_json(back) == package::scene_json(r.package));
}

TEST_CASE("package: lamps carry a light at their top") {
  const std::string src =
      "region room; room.scale <- vec3(6, 3, 6);\n"
      "object floor_lamp; floor_lamp.scale <- vec3(0.3, 1.6, 0.3);\n";
  const auto r = pipeline::run(src, small_options());
  REQUIRE(r.package.lights.size() == 2);
  const auto& lamp = r.package.lights[1];
  CHECK(lamp.kind == "lamp");
  CHECK(lamp.intensity == doctest::Approx(0.6));
  const auto* o = r.package.find_object("floor_lamp");
  CHECK(lamp.position.y == doctest::Approx(o->position.y + 0.8));
}

TEST_CASE("package: write and read back every fixture program") {
  const auto programs = testing::program_fixtures();
  REQUIRE(programs.size() >= 30);
  const fs::path root = scratch("roundtrip");
  for (const auto& path : programs) {
    CAPTURE(path);
    const std::string src = testing::read_file(path);
    const auto r = pipeline::run(src, small_options(7));
    const fs::path dir = root / fs::path(path).stem();
    package::write_package(r.package, dir.string());
    const auto back = package::read_package(dir.string());

    REQUIRE(back.objects.size() == r.package.objects.size());
    for (std::size_t i = 0; i < back.objects.size(); ++i) {
      const auto& a = r.package.objects[i];
      const auto& b = back.objects[i];
      CHECK(a.id == b.id);
      CHECK(a.asset_ref == b.asset_ref);
      for (auto [x, y] : {std::pair{a.position, b.position}, {a.rotation, b.rotation}, {a.scale, b.scale}}) {
        CHECK(std::abs(x.x - y.x) <= 1e-6);
        CHECK(std::abs(x.y - y.y) <= 1e-6);
        CHECK(std::abs(x.z - y.z) <= 1e-6);
      }
    }
    REQUIRE(back.metadata.verdicts.size() == r.package.metadata.verdicts.size());
    for (std::size_t i = 0; i < back.metadata.verdicts.size(); ++i) {
      CHECK(back.metadata.verdicts[i].satisfied == r.package.metadata.verdicts[i].satisfied);
    }
    // The embedded program re-parses to the same tree as the source.
    const std::string embedded = slurp(dir / "metadata.sthl");
    CHECK(dsl::structurally_equal(dsl::parse(embedded), dsl::parse(src)));
    CHECK(package::scene_json(back) == slurp(dir / "scene.json"));
  }
}

TEST_CASE("package: read errors name the file and line") {
  const auto r = pipeline::run(testing::read_file(testing::fixture_dir() + "/livingroom.sthl"), small_options());
  const fs::path dir = scratch("tamper");
  package::write_package(r.package, dir.string());
  const std::string manifest = slurp(dir / "manifest.tsv");

  SUBCASE("manifest names an object missing from scene.json") {
    spit(dir / "manifest.tsv", manifest + "ghost_chair\tmodels/ghost.glb\tretrieved\tghost\t0.9\n");
    try {
      package::read_package(dir.string());
      FAIL("expected FormatError");
    } catch (const package::FormatError& e) {
      CHECK(e.file().find("scene.json") != std::string::npos);
      CHECK(e.line() > 1);
      CHECK(std::string(e.what()).find("manifest.tsv line") != std::string::npos);
      CHECK(std::string(e.what()).find("ghost_chair") != std::string::npos);
    }
  }
  SUBCASE("truncated scene.json") {
    const std::string scene = slurp(dir / "scene.json");
    spit(dir / "scene.json", scene.substr(0, scene.size() / 2));
    CHECK_THROWS_AS(package::read_package(dir.string()), package::FormatError);
  }
  SUBCASE("missing directory") { CHECK_THROWS_AS(package::read_package((dir / "nope").string()), package::IoError); }
}

TEST_CASE("package: remove an object and re-solve its region only") {
  const auto r = pipeline::run(testing::read_file(testing::fixture_dir() + "/livingroom.sthl"), small_options(3));
  auto pkg = r.package;
  const auto living_before = nlohmann::json::parse(package::scene_json(pkg));

  CHECK_FALSE(package::verdicts_for(pkg, "chair_2").empty());
  package::remove_object(pkg, "chair_2");
  CHECK(pkg.find_object("chair_2") == nullptr);
  CHECK(pkg.metadata.program.find("chair_2") == std::string::npos);
  CHECK(package::verdicts_for(pkg, "chair_2").empty());
  // chair_1 survives: the conjunction naming both chairs was dropped whole.
  CHECK(pkg.find_object("chair_1") != nullptr);

  solver::SolverConfig cfg;
  cfg.seed = 11;
  package::resolve_region(pkg, "dining", cfg);

  const auto after = nlohmann::json::parse(package::scene_json(pkg));
  auto by_id = [](const nlohmann::json& doc, const std::string& id) {
    for (const auto& o : doc["objects"]) {
      if (o["id"] == id) return o.dump();
    }
    return std::string();
  };
  for (const auto& o : r.package.objects) {
    if (o.region != "living") continue;
    CAPTURE(o.id);
    CHECK(by_id(after, o.id) == by_id(living_before, o.id));
  }
  for (std::size_t i = 0; i < 2; ++i) CHECK(after["regions"][i].dump() == living_before["regions"][i].dump());
  CHECK(pkg.metadata.verdicts.size() < r.package.metadata.verdicts.size());

  const fs::path dir = scratch("regen");
  package::write_package(pkg, dir.string());
  const auto back = package::read_package(dir.string());
  CHECK(back.find_object("chair_2") == nullptr);
  CHECK(package::scene_json(back) == package::scene_json(pkg));

  CHECK_THROWS_AS(package::remove_object(pkg, "nothing_here"), package::PackageError);
  CHECK_THROWS_AS(package::resolve_region(pkg, "attic", cfg), package::PackageError);
}

TEST_CASE("solve output and decisions survive JSON") {
  const std::string src = testing::read_file(testing::fixture_dir() + "/livingroom.sthl");
  solver::SolverConfig cfg;
  cfg.max_iterations = 2;
  const auto solved = pipeline::solve_source(src, 5, cfg);
  const auto back = package::read_solve_output(package::write_solve_output(solved));
  CHECK(back.seed == 5);
  CHECK(back.program == solved.program);
  CHECK(back.config.max_iterations == 2);
  CHECK(back.summary.verdicts == solved.summary.verdicts);
  CHECK(back.summary.best_ratio == solved.summary.best_ratio);
  for (const auto& o : solved.summary.layout.objects) {
    const auto* b = back.summary.layout.find_object(o.id);
    REQUIRE(b);
    CHECK(b->transform.pos.x == o.transform.pos.x);
    CHECK(b->transform.pos.y == o.transform.pos.y);
    CHECK(b->transform.rot.y == o.transform.rot.y);
  }
  CHECK(package::write_solve_output(back) == package::write_solve_output(solved));

  pipeline::AssetOptions ao;
  ao.database = assets::load_index(testing::fixture_dir() + "/assets/index.tsv");
  const auto decisions = pipeline::decide_assets(back.summary.layout, ao);
  const auto dback = package::read_decisions(package::write_decisions(decisions));
  REQUIRE(dback.size() == decisions.size());
  CHECK(package::write_decisions(dback) == package::write_decisions(decisions));

  const auto pkg = pipeline::export_solved(back, dback);
  CHECK(pkg.objects.size() == back.summary.layout.objects.size());

  CHECK_THROWS_AS(package::read_solve_output("{\"schemaVersion\": 1,\n\"seed\": -1}"), package::FormatError);
  try {
    package::read_solve_output("{\n  \"schemaVersion\": 1,\n  oops\n}");
    FAIL("expected FormatError");
  } catch (const package::FormatError& e) {
    CHECK(e.line() == 3);
  }
}

TEST_CASE("pipeline: same seed, same bytes; intermediates on request") {
  const std::string src = testing::read_file(testing::fixture_dir() + "/livingroom.sthl");
  auto opts = small_options(21);
  const fs::path dir = scratch("inter");
  opts.intermediates_dir = dir.string();
  const auto a = pipeline::run(src, opts);
  opts.intermediates_dir.reset();
  const auto b = pipeline::run(src, opts);
  CHECK(package::scene_json(a.package) == package::scene_json(b.package));
  CHECK(fs::exists(dir / "constraints.txt"));
  CHECK(fs::exists(dir / "iterations" / "000.json"));
  CHECK(fs::exists(dir / "solve.json"));
  CHECK(fs::exists(dir / "assets.json"));
}
