#include <doctest.h>

#include <map>
#include <set>
#include <random>

#include "sthl/assets.hpp"

using namespace sthl;
using namespace sthl::assets;

namespace {

/// Fixed scores per candidate id.
struct ScriptedProvider : SimilarityProvider {
  std::map<std::string, std::pair<double, double>> scores;
  double visual(const Candidate& c, const AssetQuery&) override { return scores.at(c.id).first; }
  double semantic(const Candidate& c, const AssetQuery&) override { return scores.at(c.id).second; }
};

struct CountingGenerator : AssetGenerator {
  int calls = 0;
  AssetHandle generate(const AssetQuery& q) override {
    ++calls;
    return {"gen:" + q.text, Vec3{1, 1, 1}};
  }
};

Candidate cand(const std::string& id) { return {id, id + ".glb", id + ".png", "a " + id, std::nullopt}; }

std::vector<Candidate> database(int n) {
  std::vector<Candidate> db;
  for (int i = 0; i < n; ++i) db.push_back(cand("asset" + std::to_string(i)));
  return db;
}

}  // namespace

TEST_CASE("query: object template") {
  CHECK(object_query("red", "armchair", "velvet", "plush and modern").text ==
        "a 3D model of a red armchair made with velvet that is plush and modern");
  CHECK(object_query("", "lamp", "", "").text == "a 3D model of a lamp");
  CHECK(object_query("", "desk", "oak", "").text == "a 3D model of a desk made with oak");
  CHECK(object_query("  dark   blue ", "sofa", "", " worn ").text == "a 3D model of a dark blue sofa that is worn");
}

TEST_CASE("query: texture template") {
  CHECK(texture_query(QueryKind::Wall, "white", "plaster", "matte").text == "a white wall made of plaster that is matte");
  CHECK(texture_query(QueryKind::Floor, "", "oak", "").text == "a floor made of oak");
  CHECK(texture_query(QueryKind::Floor, "grey", "", "").text == "a grey floor");
  CHECK_THROWS_AS(texture_query(QueryKind::Object, "a", "b", "c"), std::invalid_argument);
}

TEST_CASE("query: distinct fields give distinct text") {
  const std::vector<std::string> vals{"", "red", "oak", "tall"};
  std::set<std::string> seen;
  int n = 0;
  for (const auto& c : vals)
    for (const auto& m : vals)
      for (const auto& f : vals) {
        seen.insert(object_query(c, "chair", m, f).text);
        ++n;
      }
  CHECK(seen.size() == static_cast<std::size_t>(n));
}

TEST_CASE("score: composite formula") {
  ScriptedProvider p;
  p.scores["a"] = {0.5, 0.9};
  p.scores["one"] = {1.0, 1.0};
  const AssetQuery q = object_query("", "lamp", "", "");
  CHECK(score_retrieval(cand("a"), q, {}, p) == doctest::Approx(50.9 / 101.0).epsilon(1e-12));
  CHECK(score_retrieval(cand("a"), q, {}, p) == doctest::Approx(0.50396).epsilon(1e-5));
  CHECK(score_retrieval(cand("one"), q, {3.0, 7.0}, p) == doctest::Approx(1.0));
  CHECK(score_retrieval(cand("a"), q, {0.0, 1.0}, p) == doctest::Approx(0.9));
  CHECK(score_retrieval(cand("a"), q, {1.0, 0.0}, p) == doctest::Approx(0.5));
  CHECK_THROWS_AS(score_retrieval(cand("a"), q, {0.0, 0.0}, p), WeightError);
  CHECK_THROWS_AS(score_retrieval(cand("a"), q, {-1.0, 2.0}, p), WeightError);
  p.scores["bad"] = {1.5, 0.0};
  CHECK_THROWS_AS(score_retrieval(cand("bad"), q, {}, p), AssetError);
}

TEST_CASE("score: convex combination and weight scaling") {
  HashSimilarityProvider p(7);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> w(0.0, 50.0);
  const auto db = database(20);
  for (int i = 0; i < 200; ++i) {
    const AssetQuery q = object_query("c" + std::to_string(i % 5), "thing" + std::to_string(i), "", "");
    const Weights ws{w(rng), w(rng) + 1e-3};
    const Candidate& c = db[static_cast<std::size_t>(i) % db.size()];
    const double sv = p.visual(c, q), st = p.semantic(c, q);
    const double s = score_retrieval(c, q, ws, p);
    CHECK(s >= std::min(sv, st) - 1e-12);
    CHECK(s <= std::max(sv, st) + 1e-12);
    const Weights scaled{ws.visual * 4.0, ws.semantic * 4.0};
    const auto a = decide(q, db, 0.5, ws, p, nullptr);
    const auto b = decide(q, db, 0.5, scaled, p, nullptr);
    CHECK(a.best_id == b.best_id);
    CHECK(a.best_score == doctest::Approx(b.best_score).epsilon(1e-12));
  }
}

TEST_CASE("hash provider: deterministic and bounded") {
  HashSimilarityProvider p(1), same(1), other(2);
  const AssetQuery q = object_query("red", "chair", "", "");
  for (const auto& c : database(50)) {
    const double v = p.visual(c, q);
    CHECK(v >= 0.0);
    CHECK(v < 1.0);
    CHECK(v == same.visual(c, q));
    CHECK(p.semantic(c, q) >= 0.0);
    CHECK(p.semantic(c, q) < 1.0);
  }
  CHECK(p.visual(cand("x"), q) != other.visual(cand("x"), q));
}

TEST_CASE("decide: threshold rule") {
  ScriptedProvider p;
  p.scores["hi"] = {0.7, 0.7};
  p.scores["lo"] = {0.6, 0.6};
  CountingGenerator gen;
  const AssetQuery q = object_query("", "table", "", "");

  auto d = decide(q, {cand("lo"), cand("hi")}, kDefaultTau, {}, p, &gen);
  CHECK(d.verdict == Verdict::Retrieved);
  CHECK(d.best_id == "hi");
  CHECK(d.asset.ref == "hi.glb");
  CHECK(gen.calls == 0);

  d = decide(q, {cand("lo")}, kDefaultTau, {}, p, &gen);
  CHECK(d.verdict == Verdict::Generated);
  CHECK(d.best_id == "lo");
  CHECK(d.best_score == doctest::Approx(0.6));
  CHECK(d.asset.ref == "gen:a 3D model of a table");
  CHECK(gen.calls == 1);

  d = decide(q, {cand("lo")}, kDefaultTau, {}, p, nullptr);
  CHECK(d.verdict == Verdict::Retrieved);
  CHECK(d.below_threshold);
  CHECK(d.asset.ref == "lo.glb");

  // exactly at the threshold retrieves
  d = decide(q, {cand("lo")}, 0.6, {}, p, &gen);
  CHECK(d.verdict == Verdict::Retrieved);
}

TEST_CASE("decide: first candidate wins ties") {
  ScriptedProvider p;
  p.scores["first"] = {0.8, 0.2};
  p.scores["second"] = {0.8, 0.2};
  const auto d = decide(object_query("", "x", "", ""), {cand("first"), cand("second")}, 0.0, {}, p, nullptr);
  CHECK(d.best_id == "first");
}

TEST_CASE("decide: empty database") {
  HashSimilarityProvider p;
  CountingGenerator gen;
  const AssetQuery q = object_query("", "lamp", "", "");
  CHECK_THROWS_AS(decide(q, {}, kDefaultTau, {}, p, nullptr), NoAssetError);
  const auto d = decide(q, {}, 0.0, {}, p, &gen);
  CHECK(d.verdict == Verdict::Generated);
  CHECK(d.best_id.empty());
}

TEST_CASE("decide: tau sweep over hash scores") {
  HashSimilarityProvider p(11);
  PlaceholderGenerator gen;
  const auto db = database(8);
  int retrieved = 0, generated = 0;
  for (int i = 0; i < 200; ++i) {
    const AssetQuery q = object_query("", "object" + std::to_string(i), "", "");
    CHECK(decide(q, db, 0.0, {}, p, &gen).verdict == Verdict::Retrieved);
    CHECK(decide(q, db, 1.0, {}, p, &gen).verdict == Verdict::Generated);
    const auto d = decide(q, db, kDefaultTau, {}, p, &gen);
    CHECK((d.verdict == Verdict::Retrieved) == (d.best_score >= kDefaultTau));
    (d.verdict == Verdict::Retrieved ? retrieved : generated)++;
    // raising tau never turns a generated verdict into a retrieved one
    bool was_generated = false;
    for (double tau = 0.0; tau <= 1.0; tau += 0.05) {
      const bool gen_now = decide(q, db, tau, {}, p, &gen).verdict == Verdict::Generated;
      CHECK_FALSE((was_generated && !gen_now));
      was_generated = gen_now;
    }
  }
  CHECK(retrieved > 0);
  CHECK(generated > 0);
}

TEST_CASE("decide_all: one decision per object in order") {
  scene::SceneLayout layout;
  for (const char* id : {"sofa_1", "lamp_2", "table"}) {
    scene::SceneObject o;
    o.id = id;
    o.category = std::string(id).substr(0, std::string(id).find('_'));
    layout.objects.push_back(o);
  }
  HashSimilarityProvider p;
  PlaceholderGenerator gen;
  const auto all = decide_all(layout, database(3), kDefaultTau, {}, p, &gen);
  REQUIRE(all.size() == 3);
  CHECK(all[0].object == "sofa_1");
  CHECK(all[0].decision.query.text == "a 3D model of a sofa");
  CHECK(all[2].object == "table");
}

TEST_CASE("placeholder generator: unit extents and stable names") {
  PlaceholderGenerator gen;
  const auto a = gen.generate(object_query("red", "chair", "", ""));
  const auto b = gen.generate(object_query("red", "chair", "", ""));
  CHECK(a.ref == b.ref);
  REQUIRE(a.native_extents);
  CHECK(*a.native_extents == Vec3{1, 1, 1});
  CHECK(a.ref.find("red_chair") != std::string::npos);
}

TEST_CASE("trigram provider: related text scores higher") {
  TrigramSimilarityProvider p;
  const AssetQuery q = object_query("red", "armchair", "velvet", "");
  Candidate chair{"c", "c.glb", "thumbs/red_armchair.png", "red velvet armchair", std::nullopt};
  Candidate lamp{"l", "l.glb", "thumbs/floor_lamp.png", "tall brass floor lamp", std::nullopt};
  CHECK(p.semantic(chair, q) > p.semantic(lamp, q));
  CHECK(p.visual(chair, q) > p.visual(lamp, q));
  CHECK(p.semantic(chair, q) <= 1.0);
}

TEST_CASE("index: parse records and extents") {
  const auto db = parse_index(
      "# id\tmodel\tthumb\tdesc\n"
      "sofa01\tmodels/sofa01.glb\tthumbs/sofa01.png\tgrey fabric sofa\n"
      "\n"
      "table02\tmodels/t.glb\tthumbs/t.png\toak table\t2,1.5,2\r\n");
  REQUIRE(db.size() == 2);
  CHECK(db[0].id == "sofa01");
  CHECK(db[0].description == "grey fabric sofa");
  CHECK_FALSE(db[0].native_extents);
  REQUIRE(db[1].native_extents);
  CHECK(*db[1].native_extents == Vec3{2, 1.5, 2});
}

TEST_CASE("index: errors name the line") {
  try {
    parse_index("a\tb\tc\td\nbroken line\n", "db.tsv");
    FAIL("expected IndexFormatError");
  } catch (const IndexFormatError& e) {
    CHECK(std::string(e.what()).find("db.tsv:2") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_index("a\tb\tc\td\t1,2\n"), IndexFormatError);
  CHECK_THROWS_AS(parse_index("a\tb\tc\td\t1,0,2\n"), IndexFormatError);
  CHECK_THROWS_AS(parse_index("\tb\tc\td\n"), IndexFormatError);
  CHECK_THROWS_AS(load_index("/nonexistent/index.tsv"), IndexFormatError);
}

namespace {

struct ScriptedOrientation : OrientationProvider {
  std::map<char, double> answers;
  std::vector<std::pair<char, Vec3>> seen;
  double choose(const AssetHandle&, char axis, const std::array<double, 4>&, const Vec3& so_far) override {
    seen.emplace_back(axis, so_far);
    return answers.count(axis) ? answers.at(axis) : 0.0;
  }
};

}  // namespace

TEST_CASE("orientation: identity without provider") {
  const auto plan = orientation_check_plan({"m.glb", std::nullopt});
  REQUIRE(plan.checks.size() == 3);
  CHECK(plan.checks[0].axis == 'x');
  CHECK(plan.checks[1].axis == 'z');
  CHECK(plan.checks[2].axis == 'y');
  for (const auto& c : plan.checks) {
    CHECK(c.angles == kOrientationAngles);
    CHECK(c.grid_rows == 2);
    CHECK(c.grid_cols == 2);
  }
  CHECK(plan.correction == Vec3{0, 0, 0});
}

TEST_CASE("orientation: scripted provider") {
  ScriptedOrientation p;
  p.answers['x'] = 90.0;
  p.answers['y'] = 270.0;
  const auto plan = orientation_check_plan({"m.glb", std::nullopt}, &p);
  CHECK(plan.checks[0].chosen == 90.0);
  CHECK(plan.correction == Vec3{90, 270, 0});
  REQUIRE(p.seen.size() == 3);
  CHECK(p.seen[0].first == 'x');
  CHECK(p.seen[1].first == 'z');
  CHECK(p.seen[1].second == Vec3{90, 0, 0});
  CHECK(p.seen[2].first == 'y');

  p.answers['z'] = 45.0;
  CHECK_THROWS_AS(orientation_check_plan({"m.glb", std::nullopt}, &p), AssetError);
}
