#include "sthl/package.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <set>
#include <sstream>

#include "sthl/dsl/parser.hpp"
#include "sthl/dsl/printer.hpp"
#include "sthl/dsl/typecheck.hpp"
#include "sthl/text.hpp"

namespace sthl::package {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

FormatError::FormatError(std::string file, std::size_t line, const std::string& what)
    : PackageError(file + ":" + std::to_string(line) + ": " + what), file_(std::move(file)), line_(line) {}

namespace {

constexpr double kSnapTolerance = scene::kSupportTolerance;
constexpr double kCeilingLightDrop = 0.05;
constexpr double kCeilingLightIntensity = 1.0;
constexpr double kLampLightIntensity = 0.6;

// --- small helpers ------------------------------------------------------------

std::size_t line_at(std::string_view text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n')) + 1;
}

std::size_t line_of(std::string_view text, std::string_view needle) {
  const std::size_t at = text.find(needle);
  return at == std::string_view::npos ? 1 : line_at(text, at);
}

json parse_json(std::string_view text, std::string_view file) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string(file), line_at(text, e.byte == 0 ? 0 : e.byte - 1), e.what());
  }
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + p.string());
  out << content;
  if (!out) throw IoError("write failed: " + p.string());
}

json vec3(Vec3 v) { return json::array({v.x, v.y, v.z}); }
json vec2(Vec2 v) { return json::array({v.x, v.z}); }

/// Typed field access that reports the file and the line of `anchor`.
struct Reader {
  std::string_view text;
  std::string file;

  [[noreturn]] void fail(std::string_view anchor, const std::string& why) const {
    throw FormatError(file, line_of(text, anchor), why);
  }

  const json& field(const json& obj, const char* key, std::string_view anchor) const {
    if (!obj.is_object() || !obj.contains(key)) fail(anchor, std::string("missing field '") + key + "'");
    return obj.at(key);
  }
  double number(const json& obj, const char* key, std::string_view anchor) const {
    const json& v = field(obj, key, anchor);
    if (!v.is_number()) fail(anchor, std::string("field '") + key + "' must be a number");
    return v.get<double>();
  }
  std::string str(const json& obj, const char* key, std::string_view anchor) const {
    const json& v = field(obj, key, anchor);
    if (!v.is_string()) fail(anchor, std::string("field '") + key + "' must be a string");
    return v.get<std::string>();
  }
  bool boolean(const json& obj, const char* key, std::string_view anchor) const {
    const json& v = field(obj, key, anchor);
    if (!v.is_boolean()) fail(anchor, std::string("field '") + key + "' must be true or false");
    return v.get<bool>();
  }
  Vec3 v3(const json& obj, const char* key, std::string_view anchor) const {
    const json& v = field(obj, key, anchor);
    if (!v.is_array() || v.size() != 3 || !v[0].is_number() || !v[1].is_number() || !v[2].is_number()) {
      fail(anchor, std::string("field '") + key + "' must be an array of 3 numbers");
    }
    return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
  }
  Vec2 v2(const json& v, std::string_view anchor) const {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
      fail(anchor, "expected an [x, z] pair");
    }
    return {v[0].get<double>(), v[1].get<double>()};
  }
  const json& array(const json& obj, const char* key, std::string_view anchor) const {
    const json& v = field(obj, key, anchor);
    if (!v.is_array()) fail(anchor, std::string("field '") + key + "' must be an array");
    return v;
  }
};

std::string anchor_for(std::string_view id) { return "\"" + std::string(id) + "\""; }

// --- solver settings ------------------------------------------------------------

json config_json(const solver::SolverConfig& c) {
  return json{{"batchSize", c.batch_size},
              {"maxIterations", c.max_iterations},
              {"seed", c.seed},
              {"movesPerProposal", c.moves_per_proposal},
              {"candidateSamples", c.candidate_samples},
              {"translationStep", c.translation_step},
              {"rotationSteps", c.rotation_steps},
              {"relaxationSweeps", c.relaxation_sweeps}};
}

solver::SolverConfig config_from(const json& j, const Reader& r) {
  solver::SolverConfig c;
  c.batch_size = static_cast<int>(r.number(j, "batchSize", "batchSize"));
  c.max_iterations = static_cast<int>(r.number(j, "maxIterations", "maxIterations"));
  const json& seed = r.field(j, "seed", "\"seed\"");
  if (!seed.is_number_unsigned()) r.fail("\"seed\"", "seed must be a non-negative integer");
  c.seed = seed.get<std::uint64_t>();
  c.moves_per_proposal = static_cast<int>(r.number(j, "movesPerProposal", "movesPerProposal"));
  c.candidate_samples = static_cast<int>(r.number(j, "candidateSamples", "candidateSamples"));
  c.translation_step = r.number(j, "translationStep", "translationStep");
  c.rotation_steps.clear();
  for (const json& v : r.array(j, "rotationSteps", "rotationSteps")) {
    if (!v.is_number()) r.fail("rotationSteps", "rotation steps must be numbers");
    c.rotation_steps.push_back(v.get<double>());
  }
  c.relaxation_sweeps = static_cast<int>(r.number(j, "relaxationSweeps", "relaxationSweeps"));
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    r.fail("batchSize", e.what());
  }
  return c;
}

std::string config_line(const solver::SolverConfig& c) {
  std::string steps;
  for (double s : c.rotation_steps) steps += (steps.empty() ? "" : ",") + dsl::format_number(s);
  return "k=" + std::to_string(c.batch_size) + " T=" + std::to_string(c.max_iterations) +
         " moves=" + std::to_string(c.moves_per_proposal) + " samples=" + std::to_string(c.candidate_samples) +
         " step=" + dsl::format_number(c.translation_step) + " rotations=" + steps +
         " sweeps=" + std::to_string(c.relaxation_sweeps);
}

// --- layout overlay --------------------------------------------------------------

json transforms_json(const scene::SceneLayout& layout) {
  json objs = json::array();
  for (const auto& o : layout.objects) {
    objs.push_back(json{{"id", o.id},
                        {"region", o.region},
                        {"position", vec3(o.transform.pos)},
                        {"rotation", vec3(o.transform.rot)},
                        {"scale", vec3(o.transform.scale)}});
  }
  return objs;
}

void overlay_transforms(scene::SceneLayout& layout, const json& objs, const Reader& r) {
  std::set<std::string> seen;
  for (const json& o : objs) {
    const std::string id = r.str(o, "id", "\"id\"");
    scene::SceneObject* obj = layout.find_object(id);
    if (obj == nullptr) r.fail(anchor_for(id), "object '" + id + "' is not declared by the program");
    obj->transform.pos = r.v3(o, "position", anchor_for(id));
    obj->transform.rot = r.v3(o, "rotation", anchor_for(id));
    obj->transform.scale = r.v3(o, "scale", anchor_for(id));
    seen.insert(id);
  }
  for (const auto& o : layout.objects) {
    if (!seen.count(o.id)) r.fail("\"objects\"", "object '" + o.id + "' has no transform");
  }
}

// --- program editing --------------------------------------------------------------

bool expr_mentions(const dsl::Expr& e, const std::set<std::string>& names) {
  return std::visit(
      [&](const auto& n) -> bool {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, dsl::IdentRef>) {
          return names.count(n.name) > 0;
        } else if constexpr (std::is_same_v<T, dsl::PropertyRef>) {
          return names.count(n.id) > 0;
        } else if constexpr (std::is_same_v<T, dsl::BinaryExpr>) {
          return expr_mentions(*n.lhs, names) || expr_mentions(*n.rhs, names);
        } else if constexpr (std::is_same_v<T, dsl::CallExpr>) {
          return std::any_of(n.args.begin(), n.args.end(), [&](const auto& a) { return expr_mentions(*a, names); });
        } else {
          return false;
        }
      },
      e.node);
}

bool assertion_mentions(const dsl::Assertion& a, const std::set<std::string>& names) {
  return std::visit(
      [&](const auto& n) -> bool {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, dsl::Comparison>) {
          return expr_mentions(*n.lhs, names) || expr_mentions(*n.rhs, names);
        } else if constexpr (std::is_same_v<T, dsl::InsidePred>) {
          return names.count(n.object) > 0 || names.count(n.region) > 0;
        } else if constexpr (std::is_same_v<T, dsl::NotAssert>) {
          return assertion_mentions(*n.operand, names);
        } else {
          return assertion_mentions(*n.lhs, names) || assertion_mentions(*n.rhs, names);
        }
      },
      a.node);
}

// --- support --------------------------------------------------------------------

struct Surface {
  double y = 0.0;
  bool floor = false;
};

std::optional<Surface> support_surface(const scene::SceneObject& obj, const scene::SceneLayout& layout) {
  const scene::OrientedBox box = scene::world_box(obj);
  const double bottom = box.min_y();
  if (const scene::Region* r = layout.find_region(obj.region);
      r && std::abs(bottom - r->floor_y) <= kSnapTolerance) {
    return Surface{r->floor_y, true};
  }
  const Polygon2 fp = box.footprint();
  const double area = std::abs(signed_area(fp));
  std::optional<Surface> best;
  double best_gap = 0.0;
  for (const auto& other : layout.objects) {
    if (other.id == obj.id) continue;
    const scene::OrientedBox ob = scene::world_box(other);
    const double gap = std::abs(bottom - ob.max_y());
    if (gap > kSnapTolerance) continue;
    if (scene::footprint_overlap(fp, ob.footprint()) < scene::kSupportOverlapFraction * area - 1e-9) continue;
    if (!best || gap < best_gap) {
      best = Surface{ob.max_y(), false};
      best_gap = gap;
    }
  }
  return best;
}

SnapResult snap_filtered(const scene::SceneLayout& layout, const constraints::ConstraintSet& cs,
                         const std::function<bool(const scene::SceneObject&)>& include) {
  SnapResult out;
  out.layout = layout;
  constraints::EvalContext ctx;
  ctx.layout = out.layout;
  std::vector<bool> current = constraints::verdicts(cs, ctx);

  // Lower objects first so a snapped support carries its load along.
  std::vector<std::size_t> order(out.layout.objects.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scene::world_box(out.layout.objects[a]).min_y() < scene::world_box(out.layout.objects[b]).min_y();
  });

  for (std::size_t i : order) {
    scene::SceneObject& obj = out.layout.objects[i];
    if (!include(obj)) continue;
    const auto surface = support_surface(obj, out.layout);
    if (!surface) continue;
    const double delta = surface->y - scene::world_box(obj).min_y();
    if (delta == 0.0) continue;
    const double before = obj.transform.pos.y;
    obj.transform.pos.y = before + delta;
    ctx.layout = out.layout;
    const std::vector<bool> after = constraints::verdicts(cs, ctx);
    std::vector<std::size_t> broken;
    for (std::size_t k = 0; k < after.size(); ++k) {
      if (current[k] && !after[k]) broken.push_back(k);
    }
    if (broken.empty()) {
      current = after;
      out.snapped.push_back(obj.id);
      continue;
    }
    obj.transform.pos.y = before;
    out.reverted.push_back(obj.id);
    std::string what;
    for (std::size_t k : broken) {
      what += (what.empty() ? "" : "; ") + constraints::print(cs.constraints[k]);
    }
    out.notes.push_back("snap reverted for " + obj.id + ": would violate " + what);
  }
  return out;
}

/// Verdicts, physics flags and lights from the package's current layout.
void refresh(ScenePackage& pkg, const scene::SceneLayout& layout, const constraints::ConstraintSet& cs) {
  constraints::EvalContext ctx;
  ctx.layout = layout;
  const std::vector<bool> v = constraints::verdicts(cs, ctx);
  pkg.metadata.verdicts.clear();
  for (std::size_t k = 0; k < cs.constraints.size(); ++k) {
    const auto& c = cs.constraints[k];
    pkg.metadata.verdicts.push_back(ConstraintVerdict{c.id, std::string(constraints::to_string(c.provenance)),
                                                      constraints::print(c), c.involved_objects, v[k]});
  }
  for (ObjectEntry& e : pkg.objects) {
    const scene::SceneObject* o = layout.find_object(e.id);
    const auto surface = o ? support_surface(*o, layout) : std::nullopt;
    e.physics.collider = "box";
    e.physics.is_static = !surface || surface->floor;
  }
  pkg.lights.clear();
  for (const auto& r : layout.regions) {
    const Vec2 c = r.centroid();
    pkg.lights.push_back(LightEntry{r.id + "_ceiling", "ceiling", r.id,
                                    Vec3{c.x, r.ceiling_y() - kCeilingLightDrop, c.z}, kCeilingLightIntensity});
  }
  for (const auto& o : layout.objects) {
    const auto toks = text::tokens(o.category);
    if (std::find(toks.begin(), toks.end(), "lamp") == toks.end() &&
        std::find(toks.begin(), toks.end(), "light") == toks.end()) {
      continue;
    }
    const scene::OrientedBox box = scene::world_box(o);
    pkg.lights.push_back(LightEntry{o.id + "_light", "lamp", o.region,
                                    Vec3{o.transform.pos.x, box.max_y(), o.transform.pos.z}, kLampLightIntensity});
  }
}

std::string canonical_program(const std::string& text) {
  try {
    return dsl::print(dsl::parse(text));
  } catch (const std::exception& e) {
    throw PackageError(std::string("embedded program does not parse: ") + e.what());
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Solve output and decisions

SolveSummary summarize(const solver::SolveReport& report, const constraints::ConstraintSet& cs) {
  SolveSummary s;
  s.layout = report.best_layout;
  s.best_ratio = report.best_ratio;
  s.best_iteration = report.best_iteration;
  s.terminated = std::string(solver::to_string(report.terminated));
  s.verdicts = report.best_verdicts;
  for (const auto& r : report.iterations) s.ratios.push_back(r.ratio);
  s.report = solver::format_report(report, cs);
  return s;
}

std::string write_solve_output(const SolveOutput& out) {
  json verdicts = json::array();
  for (bool b : out.summary.verdicts) verdicts.push_back(b);
  json j{{"schemaVersion", kSchemaVersion},
         {"seed", out.seed},
         {"config", config_json(out.config)},
         {"program", out.program},
         {"bestIteration", out.summary.best_iteration},
         {"bestRatio", out.summary.best_ratio},
         {"terminated", out.summary.terminated},
         {"ratios", out.summary.ratios},
         {"verdicts", verdicts},
         {"objects", transforms_json(out.summary.layout)},
         {"report", out.summary.report}};
  return j.dump(2) + "\n";
}

SolveOutput read_solve_output(std::string_view text, std::string_view file) {
  const json j = parse_json(text, file);
  const Reader r{text, std::string(file)};
  if (r.number(j, "schemaVersion", "schemaVersion") != kSchemaVersion) r.fail("schemaVersion", "unsupported schema");
  SolveOutput out;
  const json& seed = r.field(j, "seed", "\"seed\"");
  if (!seed.is_number_unsigned()) r.fail("\"seed\"", "seed must be a non-negative integer");
  out.seed = seed.get<std::uint64_t>();
  out.config = config_from(r.field(j, "config", "\"config\""), r);
  out.program = r.str(j, "program", "\"program\"");
  constraints::CompiledProgram cp;
  try {
    cp = constraints::compile_source(out.program, out.seed);
  } catch (const std::exception& e) {
    r.fail("\"program\"", std::string("program does not compile: ") + e.what());
  }
  out.summary.layout = cp.layout;
  overlay_transforms(out.summary.layout, r.array(j, "objects", "\"objects\""), r);
  out.summary.best_iteration = static_cast<std::size_t>(r.number(j, "bestIteration", "bestIteration"));
  out.summary.best_ratio = r.number(j, "bestRatio", "bestRatio");
  out.summary.terminated = r.str(j, "terminated", "terminated");
  for (const json& v : r.array(j, "ratios", "\"ratios\"")) out.summary.ratios.push_back(v.get<double>());
  for (const json& v : r.array(j, "verdicts", "\"verdicts\"")) {
    if (!v.is_boolean()) r.fail("\"verdicts\"", "verdicts must be booleans");
    out.summary.verdicts.push_back(v.get<bool>());
  }
  if (out.summary.verdicts.size() != cp.constraints.size()) {
    r.fail("\"verdicts\"", "expected " + std::to_string(cp.constraints.size()) + " verdicts");
  }
  out.summary.report = r.str(j, "report", "\"report\"");
  return out;
}

std::string write_decisions(const std::vector<assets::ObjectDecision>& decisions) {
  json arr = json::array();
  for (const auto& d : decisions) {
    const auto& a = d.decision;
    json entry{{"object", d.object},
               {"query", a.query.text},
               {"color", a.query.color},
               {"category", a.query.category},
               {"material", a.query.material},
               {"features", a.query.features},
               {"bestCandidate", a.best_id},
               {"bestScore", a.best_score},
               {"verdict", std::string(assets::to_string(a.verdict))},
               {"belowThreshold", a.below_threshold},
               {"assetRef", a.asset.ref},
               {"nativeExtents", a.asset.native_extents ? vec3(*a.asset.native_extents) : json(nullptr)}};
    arr.push_back(std::move(entry));
  }
  return arr.dump(2) + "\n";
}

std::vector<assets::ObjectDecision> read_decisions(std::string_view text, std::string_view file) {
  const json j = parse_json(text, file);
  const Reader r{text, std::string(file)};
  if (!j.is_array()) r.fail("[", "expected an array of decisions");
  std::vector<assets::ObjectDecision> out;
  for (const json& e : j) {
    const std::string id = r.str(e, "object", "\"object\"");
    const std::string anchor = anchor_for(id);
    assets::ObjectDecision d;
    d.object = id;
    auto& a = d.decision;
    a.query.kind = assets::QueryKind::Object;
    a.query.text = r.str(e, "query", anchor);
    a.query.color = r.str(e, "color", anchor);
    a.query.category = r.str(e, "category", anchor);
    a.query.material = r.str(e, "material", anchor);
    a.query.features = r.str(e, "features", anchor);
    a.best_id = r.str(e, "bestCandidate", anchor);
    a.best_score = r.number(e, "bestScore", anchor);
    const std::string verdict = r.str(e, "verdict", anchor);
    if (verdict != "retrieved" && verdict != "generated") r.fail(anchor, "unknown verdict '" + verdict + "'");
    a.verdict = verdict == "retrieved" ? assets::Verdict::Retrieved : assets::Verdict::Generated;
    a.below_threshold = r.boolean(e, "belowThreshold", anchor);
    a.asset.ref = r.str(e, "assetRef", anchor);
    if (!r.field(e, "nativeExtents", anchor).is_null()) a.asset.native_extents = r.v3(e, "nativeExtents", anchor);
    out.push_back(std::move(d));
  }
  return out;
}

std::string write_layout(const scene::SceneLayout& layout) {
  return json{{"objects", transforms_json(layout)}}.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Assembly

const ObjectEntry* ScenePackage::find_object(std::string_view id) const {
  for (const auto& o : objects) {
    if (o.id == id) return &o;
  }
  return nullptr;
}

SnapResult snap_to_supports(const scene::SceneLayout& layout, const constraints::ConstraintSet& cs) {
  return snap_filtered(layout, cs, [](const scene::SceneObject&) { return true; });
}

ScenePackage assemble(const dsl::Program& program, const constraints::CompiledProgram& compiled,
                      const SolveSummary& solved, const solver::SolverConfig& config, std::uint64_t seed,
                      const std::vector<assets::ObjectDecision>& decisions) {
  ScenePackage pkg;
  pkg.metadata.program = dsl::print(program);
  pkg.metadata.seed = seed;
  pkg.metadata.config = config;
  pkg.metadata.best_iteration = solved.best_iteration;
  pkg.metadata.terminated = solved.terminated;

  const SnapResult snap = snap_to_supports(solved.layout, compiled.constraints);
  const scene::SceneLayout& layout = snap.layout;

  for (const auto& r : layout.regions) {
    RegionEntry e;
    e.id = r.id;
    e.vertices = r.vertices;
    e.floor_y = r.floor_y;
    e.height = r.height;
    e.wall_thickness = r.wall_thickness;
    e.floor_texture = r.floor_texture;
    e.wall_texture = r.wall_texture;
    e.walls = scene::thicken_walls(r, r.wall_thickness).walls;
    pkg.regions.push_back(std::move(e));
  }

  for (const auto& o : layout.objects) {
    const auto d = std::find_if(decisions.begin(), decisions.end(), [&](const auto& x) { return x.object == o.id; });
    if (d == decisions.end()) throw AssetMismatch("no asset decision for object '" + o.id + "'");
    const auto& asset = d->decision.asset;
    if (!asset.native_extents) throw AssetMismatch("asset '" + asset.ref + "' of '" + o.id + "' has no native extents");
    const Vec3 native = *asset.native_extents;
    if (native.x <= 0.0 || native.y <= 0.0 || native.z <= 0.0) {
      throw AssetMismatch("asset '" + asset.ref + "' of '" + o.id + "' has non-positive extents");
    }
    ObjectEntry e;
    e.id = o.id;
    e.category = o.category;
    e.region = o.region;
    e.asset_ref = asset.ref;
    e.verdict = std::string(assets::to_string(d->decision.verdict));
    e.candidate = d->decision.best_id;
    e.score = d->decision.best_score;
    e.below_threshold = d->decision.below_threshold;
    e.native_extents = native;
    e.dimensions = o.extents();
    e.position = o.transform.pos;
    e.rotation = o.transform.rot;
    e.scale = Vec3{e.dimensions.x / native.x, e.dimensions.y / native.y, e.dimensions.z / native.z};
    e.color = o.color;
    e.material = o.material;
    e.features = o.features;
    pkg.objects.push_back(std::move(e));
  }

  refresh(pkg, layout, compiled.constraints);
  std::size_t satisfied = 0;
  for (const auto& v : pkg.metadata.verdicts) satisfied += v.satisfied ? 1 : 0;
  pkg.metadata.best_ratio = pkg.metadata.verdicts.empty()
                                ? 1.0
                                : static_cast<double>(satisfied) / static_cast<double>(pkg.metadata.verdicts.size());
  pkg.notes = snap.notes;
  pkg.report = solved.report;
  for (const auto& n : snap.notes) pkg.report += "note " + n + "\n";
  return pkg;
}

// ---------------------------------------------------------------------------
// Files

std::string scene_json(const ScenePackage& pkg) {
  json regions = json::array();
  for (const auto& r : pkg.regions) {
    json verts = json::array();
    for (Vec2 v : r.vertices) verts.push_back(vec2(v));
    json walls = json::array();
    for (const auto& w : r.walls) {
      walls.push_back(json{{"edge", w.edge},
                           {"inner", json::array({vec2(w.inner[0]), vec2(w.inner[1])})},
                           {"outer", json::array({vec2(w.outer[0]), vec2(w.outer[1])})},
                           {"baseY", w.base_y},
                           {"height", w.height},
                           {"thickness", w.thickness}});
    }
    regions.push_back(json{{"id", r.id},
                           {"vertices", verts},
                           {"floorY", r.floor_y},
                           {"height", r.height},
                           {"wallThickness", r.wall_thickness},
                           {"floorTexture", r.floor_texture},
                           {"wallTexture", r.wall_texture},
                           {"walls", walls}});
  }
  json objects = json::array();
  for (const auto& o : pkg.objects) {
    objects.push_back(json{{"id", o.id},
                           {"category", o.category},
                           {"assetRef", o.asset_ref},
                           {"position", vec3(o.position)},
                           {"rotationXZY", vec3(o.rotation)},
                           {"scale", vec3(o.scale)},
                           {"region", o.region},
                           {"dimensions", vec3(o.dimensions)},
                           {"nativeExtents", vec3(o.native_extents)},
                           {"material", json{{"color", o.color}, {"material", o.material}, {"features", o.features}}},
                           {"physics", json{{"collider", o.physics.collider}, {"static", o.physics.is_static}}},
                           {"asset", json{{"verdict", o.verdict},
                                          {"candidate", o.candidate},
                                          {"score", o.score},
                                          {"belowThreshold", o.below_threshold}}}});
  }
  json lights = json::array();
  for (const auto& l : pkg.lights) {
    lights.push_back(json{{"id", l.id},
                          {"kind", l.kind},
                          {"region", l.region},
                          {"position", vec3(l.position)},
                          {"intensity", l.intensity}});
  }
  json verdicts = json::array();
  for (const auto& v : pkg.metadata.verdicts) {
    verdicts.push_back(json{{"id", v.id},
                            {"provenance", v.provenance},
                            {"satisfied", v.satisfied},
                            {"objects", v.objects},
                            {"text", v.text}});
  }
  json doc{{"schemaVersion", pkg.schema_version},
           {"coordinates",
            json{{"handedness", "left"},
                 {"up", "y"},
                 {"forward", "z"},
                 {"units", "meters"},
                 {"angles", "degrees"},
                 {"rotationOrder", "XZY"}}},
           {"regions", regions},
           {"objects", objects},
           {"lights", lights},
           {"metadata",
            json{{"program", "metadata.sthl"},
                 {"seed", pkg.metadata.seed},
                 {"solver", config_json(pkg.metadata.config)},
                 {"bestRatio", pkg.metadata.best_ratio},
                 {"bestIteration", pkg.metadata.best_iteration},
                 {"terminated", pkg.metadata.terminated},
                 {"verdicts", verdicts}}},
           {"notes", pkg.notes}};
  return doc.dump(2) + "\n";
}

std::string manifest_tsv(const ScenePackage& pkg) {
  std::string out = "# object\tasset\tverdict\tcandidate\tscore\n";
  for (const auto& o : pkg.objects) {
    out += o.id + "\t" + o.asset_ref + "\t" + o.verdict + "\t" + o.candidate + "\t" + dsl::format_number(o.score) + "\n";
  }
  return out;
}

std::string metadata_sthl(const ScenePackage& pkg) {
  const auto& m = pkg.metadata;
  std::string out = "// scene metadata (schema " + std::to_string(pkg.schema_version) + ")\n";
  out += "// seed " + std::to_string(m.seed) + "\n";
  out += "// solver " + config_line(m.config) + "\n";
  out += "// best iteration " + std::to_string(m.best_iteration) + " ratio " + dsl::format_number(m.best_ratio) +
         " terminated " + m.terminated + "\n";
  for (const auto& v : m.verdicts) {
    out += "// constraint " + std::to_string(v.id) + " " + v.provenance + " " +
           (v.satisfied ? "satisfied" : "violated") + " " + v.text + "\n";
  }
  out += "\n";
  out += m.program;
  return out;
}

void write_package(const ScenePackage& pkg, const std::string& dir) {
  if (canonical_program(pkg.metadata.program) != pkg.metadata.program) {
    throw PackageError("embedded program is not in canonical form");
  }
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir + ": " + ec.message());
  const fs::path root(dir);
  write_text(root / "scene.json", scene_json(pkg));
  write_text(root / "manifest.tsv", manifest_tsv(pkg));
  write_text(root / "metadata.sthl", metadata_sthl(pkg));
  write_text(root / "report.txt", pkg.report);
}

ScenePackage read_package(const std::string& dir) {
  const fs::path root(dir);
  const std::string scene_path = (root / "scene.json").string();
  const std::string scene_text = read_text(scene_path);
  const json doc = parse_json(scene_text, scene_path);
  const Reader r{scene_text, scene_path};

  ScenePackage pkg;
  pkg.schema_version = static_cast<int>(r.number(doc, "schemaVersion", "schemaVersion"));
  if (pkg.schema_version != kSchemaVersion) {
    r.fail("schemaVersion", "unsupported schemaVersion " + std::to_string(pkg.schema_version));
  }

  for (const json& j : r.array(doc, "regions", "\"regions\"")) {
    RegionEntry e;
    e.id = r.str(j, "id", "\"regions\"");
    const std::string a = anchor_for(e.id);
    for (const json& v : r.array(j, "vertices", a)) e.vertices.push_back(r.v2(v, a));
    e.floor_y = r.number(j, "floorY", a);
    e.height = r.number(j, "height", a);
    e.wall_thickness = r.number(j, "wallThickness", a);
    e.floor_texture = r.str(j, "floorTexture", a);
    e.wall_texture = r.str(j, "wallTexture", a);
    for (const json& w : r.array(j, "walls", a)) {
      scene::WallSlab s;
      s.edge = static_cast<std::size_t>(r.number(w, "edge", a));
      const json& inner = r.array(w, "inner", a);
      const json& outer = r.array(w, "outer", a);
      if (inner.size() != 2 || outer.size() != 2) r.fail(a, "wall edges need two points");
      s.inner = {r.v2(inner[0], a), r.v2(inner[1], a)};
      s.outer = {r.v2(outer[0], a), r.v2(outer[1], a)};
      s.base_y = r.number(w, "baseY", a);
      s.height = r.number(w, "height", a);
      s.thickness = r.number(w, "thickness", a);
      e.walls.push_back(s);
    }
    pkg.regions.push_back(std::move(e));
  }

  for (const json& j : r.array(doc, "objects", "\"objects\"")) {
    ObjectEntry e;
    e.id = r.str(j, "id", "\"objects\"");
    const std::string a = anchor_for(e.id);
    e.category = r.str(j, "category", a);
    e.asset_ref = r.str(j, "assetRef", a);
    e.position = r.v3(j, "position", a);
    e.rotation = r.v3(j, "rotationXZY", a);
    e.scale = r.v3(j, "scale", a);
    e.region = r.str(j, "region", a);
    e.dimensions = r.v3(j, "dimensions", a);
    e.native_extents = r.v3(j, "nativeExtents", a);
    const json& mat = r.field(j, "material", a);
    e.color = r.str(mat, "color", a);
    e.material = r.str(mat, "material", a);
    e.features = r.str(mat, "features", a);
    const json& phys = r.field(j, "physics", a);
    e.physics.collider = r.str(phys, "collider", a);
    e.physics.is_static = r.boolean(phys, "static", a);
    const json& asset = r.field(j, "asset", a);
    e.verdict = r.str(asset, "verdict", a);
    e.candidate = r.str(asset, "candidate", a);
    e.score = r.number(asset, "score", a);
    e.below_threshold = r.boolean(asset, "belowThreshold", a);
    if (pkg.find_object(e.id)) r.fail(a, "duplicate object '" + e.id + "'");
    pkg.objects.push_back(std::move(e));
  }

  for (const json& j : r.array(doc, "lights", "\"lights\"")) {
    LightEntry l;
    l.id = r.str(j, "id", "\"lights\"");
    const std::string a = anchor_for(l.id);
    l.kind = r.str(j, "kind", a);
    l.region = r.str(j, "region", a);
    l.position = r.v3(j, "position", a);
    l.intensity = r.number(j, "intensity", a);
    pkg.lights.push_back(l);
  }

  const json& meta = r.field(doc, "metadata", "\"metadata\"");
  const json& seed = r.field(meta, "seed", "\"seed\"");
  if (!seed.is_number_unsigned()) r.fail("\"seed\"", "seed must be a non-negative integer");
  pkg.metadata.seed = seed.get<std::uint64_t>();
  pkg.metadata.config = config_from(r.field(meta, "solver", "\"solver\""), r);
  pkg.metadata.best_ratio = r.number(meta, "bestRatio", "bestRatio");
  pkg.metadata.best_iteration = static_cast<std::size_t>(r.number(meta, "bestIteration", "bestIteration"));
  pkg.metadata.terminated = r.str(meta, "terminated", "terminated");
  for (const json& v : r.array(meta, "verdicts", "\"verdicts\"")) {
    ConstraintVerdict cv;
    cv.id = static_cast<std::size_t>(r.number(v, "id", "\"verdicts\""));
    cv.provenance = r.str(v, "provenance", "\"verdicts\"");
    cv.satisfied = r.boolean(v, "satisfied", "\"verdicts\"");
    for (const json& o : r.array(v, "objects", "\"verdicts\"")) cv.objects.push_back(o.get<std::string>());
    cv.text = r.str(v, "text", "\"verdicts\"");
    pkg.metadata.verdicts.push_back(std::move(cv));
  }
  for (const json& n : r.array(doc, "notes", "\"notes\"")) pkg.notes.push_back(n.get<std::string>());

  // Manifest: every row names an object of the scene and vice versa.
  const std::string manifest_path = (root / "manifest.tsv").string();
  const std::string manifest = read_text(manifest_path);
  std::set<std::string> listed;
  std::istringstream lines(manifest);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const std::size_t tab = line.find('\t');
    const std::string id = line.substr(0, tab);
    if (tab == std::string::npos || std::count(line.begin(), line.end(), '\t') != 4) {
      throw FormatError(manifest_path, line_no, "expected 5 tab-separated fields");
    }
    const ObjectEntry* o = pkg.find_object(id);
    if (o == nullptr) {
      throw FormatError(scene_path, line_of(scene_text, "\"objects\""),
                        "object '" + id + "' listed in manifest.tsv line " + std::to_string(line_no) +
                            " is missing from scene.json");
    }
    const std::size_t tab2 = line.find('\t', tab + 1);
    if (line.substr(tab + 1, tab2 - tab - 1) != o->asset_ref) {
      throw FormatError(manifest_path, line_no, "asset of '" + id + "' differs from scene.json");
    }
    listed.insert(id);
  }
  for (const auto& o : pkg.objects) {
    if (!listed.count(o.id)) {
      throw FormatError(manifest_path, line_no + 1, "object '" + o.id + "' of scene.json is not in the manifest");
    }
  }

  // Metadata: header comments, one blank line, then the canonical program.
  const std::string meta_path = (root / "metadata.sthl").string();
  const std::string meta_text = read_text(meta_path);
  std::size_t pos = 0;
  std::size_t meta_line = 1;
  while (pos < meta_text.size() && meta_text.compare(pos, 2, "//") == 0) {
    const std::size_t nl = meta_text.find('\n', pos);
    pos = nl == std::string::npos ? meta_text.size() : nl + 1;
    ++meta_line;
  }
  if (pos < meta_text.size() && meta_text[pos] == '\n') {
    ++pos;
    ++meta_line;
  }
  pkg.metadata.program = meta_text.substr(pos);
  try {
    dsl::type_check(dsl::parse(pkg.metadata.program));
  } catch (const std::exception& e) {
    throw FormatError(meta_path, meta_line, std::string("embedded program is invalid: ") + e.what());
  }

  pkg.report = read_text(root / "report.txt");
  return pkg;
}

// ---------------------------------------------------------------------------
// Round-trip engineering

std::vector<ConstraintVerdict> verdicts_for(const ScenePackage& pkg, std::string_view object) {
  std::vector<ConstraintVerdict> out;
  for (const auto& v : pkg.metadata.verdicts) {
    if (std::find(v.objects.begin(), v.objects.end(), object) != v.objects.end()) out.push_back(v);
  }
  return out;
}

constraints::CompiledProgram package_scene(const ScenePackage& pkg) {
  constraints::CompiledProgram cp = constraints::compile_source(pkg.metadata.program, pkg.metadata.seed);
  for (auto& o : cp.layout.objects) {
    const ObjectEntry* e = pkg.find_object(o.id);
    if (e == nullptr) throw PackageError("package has no entry for object '" + o.id + "'");
    o.transform.pos = e->position;
    o.transform.rot = e->rotation;
    o.transform.scale = Vec3{e->dimensions.x / o.dimensions.x, e->dimensions.y / o.dimensions.y,
                             e->dimensions.z / o.dimensions.z};
  }
  return cp;
}

void remove_object(ScenePackage& pkg, std::string_view object) {
  if (pkg.find_object(object) == nullptr) throw PackageError("no object '" + std::string(object) + "' in package");
  dsl::Program program = dsl::parse(pkg.metadata.program);
  std::set<std::string> gone{std::string(object)};
  // Variables computed from a removed name go too, transitively.
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& st : program.statements) {
      const auto* a = std::get_if<dsl::Assignment>(&st.node);
      if (a && !gone.count(a->target) && expr_mentions(*a->value, gone)) {
        const auto* decl = [&]() -> const dsl::Declaration* {
          for (const auto& s : program.statements) {
            const auto* d = std::get_if<dsl::Declaration>(&s.node);
            if (d && d->id == a->target) return d;
          }
          return nullptr;
        }();
        if (decl && decl->kind == dsl::DeclKind::Variable) {
          gone.insert(a->target);
          changed = true;
        }
      }
    }
  }
  std::vector<dsl::Statement> kept;
  for (const auto& st : program.statements) {
    bool drop = false;
    if (const auto* d = std::get_if<dsl::Declaration>(&st.node)) {
      drop = gone.count(d->id) > 0;
    } else if (const auto* a = std::get_if<dsl::Assignment>(&st.node)) {
      drop = gone.count(a->target) > 0 || expr_mentions(*a->value, gone);
    } else if (const auto* c = std::get_if<dsl::ConstraintStmt>(&st.node)) {
      drop = c->assertion ? assertion_mentions(*c->assertion, gone)
                          : std::any_of(c->subjects.begin(), c->subjects.end(),
                                        [&](const std::string& s) { return gone.count(s) > 0; });
    }
    if (!drop) kept.push_back(st);
  }
  program.statements = std::move(kept);
  dsl::type_check(program);
  pkg.metadata.program = dsl::print(program);
  pkg.objects.erase(std::remove_if(pkg.objects.begin(), pkg.objects.end(),
                                   [&](const ObjectEntry& e) { return e.id == object; }),
                    pkg.objects.end());
  const auto cp = package_scene(pkg);
  refresh(pkg, cp.layout, cp.constraints);
}

void resolve_region(ScenePackage& pkg, std::string_view region, const solver::SolverConfig& config) {
  constraints::CompiledProgram cp = package_scene(pkg);
  const scene::Region* target = cp.layout.find_region(region);
  if (target == nullptr) throw PackageError("no region '" + std::string(region) + "' in package");

  scene::SceneLayout sub;
  sub.regions.push_back(*target);
  std::set<std::string> members;
  for (const auto& o : cp.layout.objects) {
    if (o.region == region) {
      sub.objects.push_back(o);
      members.insert(o.id);
    }
  }
  constraints::ConstraintSet local;
  local.allow_collide = cp.constraints.allow_collide;
  local.allow_outside = cp.constraints.allow_outside;
  for (const auto& c : cp.constraints.constraints) {
    const bool objects_local = std::all_of(c.involved_objects.begin(), c.involved_objects.end(),
                                           [&](const std::string& id) { return members.count(id) > 0; });
    const bool regions_local = std::all_of(c.involved_regions.begin(), c.involved_regions.end(),
                                           [&](const std::string& id) { return id == region; });
    if (objects_local && regions_local && !c.involved_objects.empty()) local.constraints.push_back(c);
  }

  const solver::SolveReport report = solver::solve(sub, local, config);
  for (auto& o : cp.layout.objects) {
    if (!members.count(o.id)) continue;
    o.transform = report.best_layout.find_object(o.id)->transform;
  }
  const SnapResult snap = snap_filtered(cp.layout, cp.constraints,
                                        [&](const scene::SceneObject& o) { return members.count(o.id) > 0; });
  for (auto& e : pkg.objects) {
    if (!members.count(e.id)) continue;
    const scene::SceneObject* o = snap.layout.find_object(e.id);
    e.position = o->transform.pos;
    e.rotation = o->transform.rot;
  }
  refresh(pkg, snap.layout, cp.constraints);
  std::size_t satisfied = 0;
  for (const auto& v : pkg.metadata.verdicts) satisfied += v.satisfied ? 1 : 0;
  pkg.metadata.best_ratio = pkg.metadata.verdicts.empty()
                                ? 1.0
                                : static_cast<double>(satisfied) / static_cast<double>(pkg.metadata.verdicts.size());
  for (const auto& n : snap.notes) pkg.notes.push_back(n);
  pkg.report += "resolved region " + std::string(region) + " ratio " + dsl::format_number(pkg.metadata.best_ratio) + "\n";
}

}  // namespace sthl::package
