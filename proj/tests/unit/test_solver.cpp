#include <doctest.h>

#include <algorithm>
#include <set>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "sthl/solver.hpp"

using namespace sthl;
using namespace sthl::solver;
using constraints::compile_source;
using constraints::Evaluator;

namespace {

const scene::Transform& tf(const scene::SceneLayout& l, const std::string& id) { return l.find_object(id)->transform; }

bool same_transforms(const scene::SceneLayout& a, const scene::SceneLayout& b) {
  if (a.objects.size() != b.objects.size()) return false;
  for (std::size_t i = 0; i < a.objects.size(); ++i) {
    if (!(a.objects[i].transform == b.objects[i].transform)) return false;
  }
  return true;
}

std::size_t satisfied(const constraints::ConstraintSet& cs, const scene::SceneLayout& l) {
  return Evaluator(cs, l).satisfied_count();
}

}  // namespace

TEST_CASE("config validation") {
  SolverConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.batch_size = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.max_iterations = -1;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.max_iterations = 0;
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("initial placement") {
  SUBCASE("one cube lands inside its room") {
    auto cp = compile_source("region room; room.scale <- vec3(10, 3, 10); object cube;", 0);
    Rng rng(3);
    const auto l = initial_placement(cp.layout, cp.constraints, {}, rng);
    CHECK(scene::inside(l.objects[0], l.regions[0]));
  }
  SUBCASE("two cubes rarely collide") {
    auto cp = compile_source("region room; room.scale <- vec3(6, 3, 6); object a; object b;", 0);
    int clear = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      Rng rng(seed);
      const auto l = initial_placement(cp.layout, cp.constraints, {}, rng);
      clear += !scene::collides(l.objects[0], l.objects[1]);
    }
    CHECK(clear >= 95);
  }
  SUBCASE("same seed, same layout") {
    auto cp = compile_source(testing::read_file(testing::fixture_dir() + "/solver/s05_library.sthl"), 0);
    Rng a(11), b(11);
    CHECK(same_transforms(initial_placement(cp.layout, cp.constraints, {}, a),
                          initial_placement(cp.layout, cp.constraints, {}, b)));
  }
  SUBCASE("oversized object") {
    auto cp = compile_source("region room; room.scale <- vec3(10, 3, 10); object wall; wall.scale <- vec3(12, 1, 11);", 0);
    Rng rng(0);
    CHECK_THROWS_AS(initial_placement(cp.layout, cp.constraints, {}, rng), PlacementError);
  }
  SUBCASE("a long object fits when turned") {
    auto cp = compile_source("region room; room.scale <- vec3(3, 3, 10); object bench; bench.scale <- vec3(6, 0.5, 1);", 0);
    Rng rng(0);
    const auto l = initial_placement(cp.layout, cp.constraints, {}, rng);
    CHECK(scene::inside(l.objects[0], l.regions[0]));
  }
}

TEST_CASE("physics relaxation") {
  auto cp = compile_source("region room; room.scale <- vec3(10, 3, 10); object a; object b; object table; object book;", 0);
  auto& objs = cp.layout.objects;
  objs[0].transform.pos = {-3, 3, -3};
  objs[1].transform.pos = {3, 0.5, 3};
  objs[2].transform.pos = {0, 0.375, 0};
  objs[2].transform.scale = {1.2, 0.75, 0.8};
  objs[3].transform.pos = {0.1, 2.2, 0.05};
  objs[3].transform.scale = {0.25, 0.05, 0.18};

  SUBCASE("free fall") {
    const auto l = physics_relaxation(cp.layout, cp.constraints, {});
    CHECK(scene::world_box(l.objects[0]).min_y() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(tf(l, "a").pos.x == -3.0);
  }
  SUBCASE("overlapping cubes separate") {
    objs[1].transform.pos = {-2.6, 0.5, -3.2};
    objs[0].transform.pos = {-3, 0.5, -3};
    const auto l = physics_relaxation(cp.layout, cp.constraints, {});
    CHECK_FALSE(scene::collides(l.objects[0], l.objects[1]));
    // The push is shared.
    CHECK(tf(l, "a").pos.x < -3.0);
    CHECK(tf(l, "b").pos.x > -2.6);
  }
  SUBCASE("book stops on the table") {
    const auto l = physics_relaxation(cp.layout, cp.constraints, {});
    const auto book = scene::world_box(*l.find_object("book"));
    CHECK(book.min_y() == doctest::Approx(0.75));
    CHECK(scene::supported(*l.find_object("book"), l));
  }
  SUBCASE("vertical overlap lifts the upper object only") {
    objs[3].transform.pos = {0.1, 0.76, 0.05};
    const auto l = physics_relaxation(cp.layout, cp.constraints, {});
    CHECK(tf(l, "table").pos.y == 0.375);
    CHECK_FALSE(scene::collides(*l.find_object("book"), *l.find_object("table")));
    CHECK(scene::supported(*l.find_object("book"), l));
  }
  SUBCASE("allowed pairs may overlap") {
    auto rug = compile_source(
        "region room; room.scale <- vec3(10, 3, 10); object rug; rug.scale <- vec3(2, 0.02, 2); object table;"
        "allowCollide(rug, table);",
        0);
    rug.layout.objects[0].transform.pos = {0, 0.01, 0};
    rug.layout.objects[1].transform.pos = {0.2, 0.5, 0};
    const auto l = physics_relaxation(rug.layout, rug.constraints, {});
    CHECK(tf(l, "table").pos.x == 0.2);
    CHECK(tf(l, "rug").pos.x == 0.0);
  }
}

TEST_CASE("select batch") {
  auto cp = compile_source(R"(
    region room; object a; object b; object c; object d;
    assert a.pos.x < b.pos.x + c.pos.x + d.pos.x;
    assert a.pos.x > 0;
    assert b.pos.x > 0;
    assert a.pos.x < b.pos.x;
    assert c.pos.z > 0;
  )",
                           0);
  const auto& cs = cp.constraints;
  BatchHistory none;
  const std::vector<std::size_t> unsat{0, 1, 2, 3, 4};
  const auto batch = select_batch(unsat, 3, cs, none);
  CHECK(batch == std::vector<std::size_t>{1, 2, 4});
  CHECK(select_batch(unsat, 3, cs, none) == batch);
  CHECK(select_batch(unsat, 10, cs, none).size() == 5);
  CHECK(select_batch({0, 1}, 1, cs, none) == std::vector<std::size_t>{1});

  SUBCASE("a constraint left waiting two iterations is promoted") {
    BatchHistory h;
    h.record(unsat, batch);
    CHECK(select_batch(unsat, 3, cs, h) == batch);
    h.record(unsat, batch);
    const auto next = select_batch(unsat, 3, cs, h);
    CHECK(next == std::vector<std::size_t>{3, 0, 1});
    h.record(unsat, next);
    CHECK(h.waiting.count(0) == 0);
    CHECK(h.waiting.at(2) == 1);
    CHECK(h.waiting.at(4) == 1);
  }
  SUBCASE("resolved constraints leave the history") {
    BatchHistory h;
    h.record(unsat, batch);
    h.record({1, 2}, {1, 2});
    CHECK(h.waiting.empty());
  }
}

TEST_CASE("local search") {
  SUBCASE("floating lamp rises above the table") {
    auto cp = compile_source(R"(
      region room; room.scale <- vec3(8, 3, 8);
      object table; table.scale <- vec3(1.2, 0.75, 0.8);
      object lamp; lamp.scale <- vec3(0.3, 0.5, 0.3);
      assert lamp.pos.y > table.pos.y + table.scale.y;
    )",
                             0);
    auto& l = cp.layout;
    l.find_object("table")->transform.pos = {0, 0.375, 0};
    l.find_object("lamp")->transform.pos = {2, 0.9, 2};
    const std::size_t before = satisfied(cp.constraints, l);
    Rng rng(1);
    const auto out = local_search_batch_solve(l, {0}, cp.constraints, {}, rng);
    CHECK(tf(out, "lamp").pos.y > tf(out, "table").pos.y + tf(out, "table").scale.y);
    CHECK(satisfied(cp.constraints, out) > before);
  }
  SUBCASE("a satisfied batch leaves the layout alone") {
    auto cp = compile_source("region room; object a; object b; assert a.pos.x < b.pos.x; assert a.pos.z > 100;", 0);
    cp.layout.objects[0].transform.pos = {-1, 0.5, 0};
    cp.layout.objects[1].transform.pos = {1, 0.5, 0};
    Rng rng(1);
    CHECK(same_transforms(local_search_batch_solve(cp.layout, {0}, cp.constraints, {}, rng), cp.layout));
  }
  SUBCASE("blocked cubes in a tight room never lose ground") {
    auto cp = compile_source(
        "region room; room.scale <- vec3(2.2, 3, 1.3); object a; a.scale <- vec3(1.2, 1, 1.2);"
        "object b; b.scale <- vec3(1.2, 1, 1.2); assert a.pos.x < b.pos.x;",
        0);
    cp.layout.objects[0].transform.pos = {0.3, 0.5, 0};
    cp.layout.objects[1].transform.pos = {-0.3, 0.5, 0};
    const std::size_t before = satisfied(cp.constraints, cp.layout);
    Rng rng(5);
    const auto out = local_search_batch_solve(cp.layout, {0, 1}, cp.constraints, {}, rng);
    CHECK(satisfied(cp.constraints, out) >= before);
  }
  SUBCASE("random cases: monotone and confined to the batch") {
    for (std::uint64_t seed = 1; seed <= 60; ++seed) {
      auto tc = testing::random_constraint_case(seed);
      Evaluator ev(tc.constraints, tc.layout);
      std::vector<std::size_t> unsat;
      for (std::size_t k = 0; k < ev.size(); ++k) {
        if (!ev.satisfied(k)) unsat.push_back(tc.constraints.constraints[k].id);
      }
      if (unsat.empty()) continue;
      const auto batch = select_batch(unsat, 3, tc.constraints, {});
      const auto allowed = batch_objects(ev, batch);
      const std::size_t before = ev.satisfied_count();
      const auto snapshot = ev.layout();
      Rng rng(seed);
      local_search(ev, batch, {}, rng);
      CHECK(ev.satisfied_count() >= before);
      for (std::size_t i = 0; i < snapshot.objects.size(); ++i) {
        if (std::find(allowed.begin(), allowed.end(), i) != allowed.end()) continue;
        CHECK(ev.layout().objects[i].transform == snapshot.objects[i].transform);
      }
    }
  }
}

TEST_CASE("enforce bounds") {
  auto cp = compile_source("region room; room.scale <- vec3(10, 3, 10); object cube; object bird; allowOutside(bird);", 0);
  auto& l = cp.layout;
  SUBCASE("pushed back to the wall") {
    l.objects[0].transform.pos = {4.8, 0.5, 1};
    const auto out = enforce_bounds(l, cp.constraints);
    CHECK(tf(out, "cube").pos.x == doctest::Approx(4.5));
    CHECK(tf(out, "cube").pos.z == 1.0);
    CHECK(scene::inside(out.objects[0], out.regions[0]));
  }
  SUBCASE("allowOutside is untouched") {
    l.objects[1].transform.pos = {8, 0.5, 0};
    CHECK(tf(enforce_bounds(l, cp.constraints), "bird").pos.x == 8.0);
  }
  SUBCASE("interior objects stay") {
    l.objects[0].transform.pos = {1, 0.5, 1};
    CHECK_FALSE(clamp_into_region(l.objects[0], l.regions[0]).has_value());
  }
  SUBCASE("vertical clamp") {
    l.objects[0].transform.pos = {0, 2.9, 0};
    auto t = clamp_into_region(l.objects[0], l.regions[0]);
    REQUIRE(t);
    CHECK(t->pos.y == doctest::Approx(2.5));
    l.objects[0].transform.pos = {0, -1, 0};
    CHECK(clamp_into_region(l.objects[0], l.regions[0])->pos.y == doctest::Approx(0.5));
  }
  SUBCASE("turned box in a corner") {
    l.objects[0].transform.pos = {-5, 0.5, -5};
    l.objects[0].transform.rot = {0, 45, 0};
    auto t = clamp_into_region(l.objects[0], l.regions[0]);
    REQUIRE(t);
    scene::SceneObject moved = l.objects[0];
    moved.transform = *t;
    CHECK(scene::inside(moved, l.regions[0]));
    CHECK(t->pos.x == doctest::Approx(-5 + std::sqrt(0.5)).epsilon(1e-6));
  }
  SUBCASE("non-convex room") {
    scene::Region room = testing::l_shaped_room();
    scene::SceneObject cube;
    cube.id = "cube";
    cube.transform.pos = {4.5, 0.5, 4.5};  // in the notch
    auto t = clamp_into_region(cube, room);
    REQUIRE(t);
    cube.transform = *t;
    CHECK(scene::inside(cube, room));
    CHECK(length(t->pos - Vec3{4.5, 0.5, 4.5}) == doctest::Approx(2.0).epsilon(0.01));
  }
}

TEST_CASE("solve") {
  SUBCASE("trivial scene converges immediately") {
    auto cp = compile_source("region room; object cube;", 0);
    const auto r = solve(cp.layout, cp.constraints, {});
    CHECK(r.terminated == Termination::AllSatisfied);
    CHECK(r.iterations.size() <= 2);
    CHECK(r.best_ratio == 1.0);
  }
  SUBCASE("contradiction runs out of iterations") {
    auto cp = compile_source("region room; object a; assert a.pos.x > 1 && a.pos.x < 0;", 0);
    const auto r = solve(cp.layout, cp.constraints, {});
    CHECK(r.terminated == Termination::IterationLimit);
    CHECK(r.iterations.size() == 6);
    CHECK(r.best_ratio == doctest::Approx(2.0 / 3.0));
    CHECK(r.best_iteration == 0);
  }
  SUBCASE("zero iterations returns the relaxed start") {
    auto cp = compile_source("region room; object a; assert a.pos.x > 1 && a.pos.x < 0;", 0);
    SolverConfig cfg;
    cfg.max_iterations = 0;
    const auto r = solve(cp.layout, cp.constraints, cfg);
    CHECK(r.iterations.size() == 1);
  }
  SUBCASE("reports are reproducible") {
    auto cp = compile_source(testing::read_file(testing::fixture_dir() + "/solver/s09_loft.sthl"), 4);
    SolverConfig cfg;
    cfg.seed = 4;
    const std::string a = format_report(solve(cp.layout, cp.constraints, cfg), cp.constraints);
    const std::string b = format_report(solve(cp.layout, cp.constraints, cfg), cp.constraints);
    CHECK(a == b);
    CHECK(a.find("terminated ") != std::string::npos);
  }
}

TEST_CASE("batch solver slot") {
  struct Rogue : BatchSolver {
    scene::SceneLayout propose(const scene::SceneLayout& layout, const std::vector<std::size_t>&,
                               const constraints::ConstraintSet&) override {
      scene::SceneLayout out = layout;
      for (auto& o : out.objects) o.transform.pos.x += 0.01;
      return out;
    }
  } rogue;
  auto cp = compile_source(
      "region room; room.scale <- vec3(10, 3, 10); object a; object b; object c; assert a.pos.x > 100;", 0);
  const auto r = solve(cp.layout, cp.constraints, {}, &rogue);
  REQUIRE(r.iterations.size() > 1);
  for (const auto& it : r.iterations) {
    for (const auto& id : it.moved) CHECK(std::find(it.involved.begin(), it.involved.end(), id) != it.involved.end());
  }
  CHECK(r.iterations[1].moved == std::vector<std::string>{"a"});
}

TEST_CASE("benchmark scenes are valid by construction") {
  const auto scenes = testing::solver_scenes();
  REQUIRE(scenes.size() == 20);
  int large = 0;
  for (const auto& s : scenes) {
    CAPTURE(s.name);
    const auto& cs = s.program.constraints;
    CHECK(s.program.layout.objects.size() <= 12);
    CHECK(cs.size() >= 30);
    CHECK(cs.size() <= 130);
    large += cs.size() > 100;
    Evaluator truth(cs, s.truth);
    CHECK(truth.ratio() == 1.0);
  }
  CHECK(large >= 1);
}

TEST_CASE("solver runs: running best and batch isolation") {
  for (const auto& s : testing::solver_scenes()) {
    for (std::uint64_t seed : {0u, 9u}) {
      SolverConfig cfg;
      cfg.seed = seed;
      const auto r = solve(s.program.layout, s.program.constraints, cfg);
      CAPTURE(s.name);
      double best = 0.0;
      for (const auto& it : r.iterations) {
        best = std::max(best, it.ratio);
        CHECK(it.best_ratio == best);
        const std::set<std::string> allowed(it.involved.begin(), it.involved.end());
        for (const auto& id : it.moved) CHECK(allowed.count(id) == 1);
      }
      CHECK(r.best_ratio == best);
      CHECK(r.iterations[r.best_iteration].ratio == best);
      for (std::size_t i = 0; i < r.best_iteration; ++i) CHECK(r.iterations[i].ratio < best);
    }
  }
}
