#include "sthl/solver.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <map>

namespace sthl::solver {

using constraints::ConstraintSet;
using constraints::Evaluator;
using scene::OrientedBox;
using scene::Region;
using scene::SceneLayout;
using scene::SceneObject;
using scene::Transform;

void SolverConfig::validate() const {
  if (batch_size < 1) throw std::invalid_argument("batch size k must be at least 1");
  if (max_iterations < 0) throw std::invalid_argument("iteration limit T must not be negative");
  if (moves_per_proposal < 0) throw std::invalid_argument("movesPerProposal must not be negative");
  if (candidate_samples < 0) throw std::invalid_argument("candidateSamples must not be negative");
  if (!(translation_step > 0.0)) throw std::invalid_argument("translationStep must be positive");
  if (relaxation_sweeps < 0) throw std::invalid_argument("relaxation sweep limit must not be negative");
}

std::string_view to_string(Termination t) {
  return t == Termination::AllSatisfied ? "allSatisfied" : "iterationLimit";
}

namespace {

constexpr double kEps = 1e-9;
constexpr double kSideGap = 1e-3;     // clearance when placing objects side by side
constexpr double kLiftMargin = 1e-6;  // vertical separation, well inside the support tolerance
constexpr double kPushMargin = 1e-4;
constexpr std::size_t kMaxSweepPoints = 120;
constexpr int kPlacementPasses = 2;
constexpr int kPlacementRestarts = 8;

OrientedBox box_for(const SceneObject& o, const Transform& t) {
  return scene::make_box(t.pos, hadamard(o.dimensions, t.scale), t.rot);
}

/// Transform with the given rotation whose box bottom sits at `level` above (x, z).
Transform rest_at(const SceneObject& o, Vec3 rot, double x, double z, double level) {
  Transform t = o.transform;
  t.rot = rot;
  t.pos = {x, 0.0, z};
  t.pos.y = level - box_for(o, t).min_y();
  return t;
}

/// Half sizes of the footprint's axis-aligned bounds for a rotation.
Vec2 half_footprint(const SceneObject& o, Vec3 rot) {
  Transform t = o.transform;
  t.rot = rot;
  t.pos = {};
  Vec2 h;
  for (const Vec3& c : box_for(o, t).corners()) {
    h.x = std::max(h.x, std::abs(c.x));
    h.z = std::max(h.z, std::abs(c.z));
  }
  return h;
}

Vec2 flat(Vec3 v) { return {v.x, v.z}; }

double angle_change(const Vec3& a, const Vec3& b) {
  double total = 0.0;
  for (int i = 0; i < 3; ++i) {
    double d = std::fmod(std::abs(a[i] - b[i]), 360.0);
    total += std::min(d, 360.0 - d);
  }
  return total;
}

std::map<std::size_t, std::size_t> index_by_id(const ConstraintSet& cs) {
  std::map<std::size_t, std::size_t> out;
  for (std::size_t k = 0; k < cs.constraints.size(); ++k) out[cs.constraints[k].id] = k;
  return out;
}

std::vector<std::size_t> unsatisfied_ids(const Evaluator& ev) {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < ev.size(); ++k) {
    if (!ev.satisfied(k)) out.push_back(ev.constraints().constraints[k].id);
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool is_convex(const Polygon2& p) {
  const std::size_t n = p.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (cross(p[(i + 1) % n] - p[i], p[(i + 2) % n] - p[(i + 1) % n]) < -kEps) return false;
  }
  return true;
}

Vec2 closest_on_boundary(Vec2 q, const Polygon2& poly) {
  Vec2 best = poly.front();
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2 a = poly[i], b = poly[(i + 1) % poly.size()];
    const Vec2 ab = b - a;
    const double len2 = dot(ab, ab);
    const double s = len2 > 0.0 ? std::clamp(dot(q - a, ab) / len2, 0.0, 1.0) : 0.0;
    const Vec2 p = a + ab * s;
    const double d = length(q - p);
    if (d < best_d) {
      best_d = d;
      best = p;
    }
  }
  return best;
}

Vec2 polygon_mean(const Polygon2& p) {
  Vec2 m;
  for (const Vec2& v : p) m = m + v;
  return m * (1.0 / static_cast<double>(p.size()));
}

// ---------------------------------------------------------------------------
// Candidate moves

struct CandidateOptions {
  bool local = true;                  // small steps around the current position
  const std::vector<bool>* others;    // objects to stack on or stand beside
  bool samples_first = false;         // random jumps ahead of the structured moves
};

std::vector<Transform> candidates(const Evaluator& ev, std::size_t i, const SolverConfig& cfg, Rng& rng,
                                  const CandidateOptions& opts) {
  const SceneLayout& layout = ev.layout();
  const SceneObject& obj = layout.objects[i];
  const Transform cur = obj.transform;
  const Region* region = layout.find_region(obj.region);
  const OrientedBox& box = ev.box(i);
  const double level = box.min_y();
  const double floor = region ? region->floor_y : level;

  std::vector<Vec3> rots{cur.rot};
  for (double s : cfg.rotation_steps) {
    const Vec3 r{cur.rot.x, s, cur.rot.z};
    if (std::find(rots.begin(), rots.end(), r) == rots.end()) rots.push_back(r);
  }

  std::vector<Transform> out;
  for (std::size_t r = 1; r < rots.size(); ++r) out.push_back(rest_at(obj, rots[r], cur.pos.x, cur.pos.z, level));
  for (const Vec3& r : rots) out.push_back(rest_at(obj, r, cur.pos.x, cur.pos.z, floor));

  if (opts.local) {
    static constexpr int kScales[] = {1, 2, 4, 8, 16};
    static constexpr double kDirs[8][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {1, -1}, {-1, 1}, {-1, -1}};
    for (int s : kScales) {
      for (const auto& d : kDirs) {
        Transform t = cur;
        t.pos.x += d[0] * s * cfg.translation_step;
        t.pos.z += d[1] * s * cfg.translation_step;
        out.push_back(t);
      }
      Transform up = cur, down = cur;
      up.pos.y += s * cfg.translation_step;
      down.pos.y -= s * cfg.translation_step;
      out.push_back(up);
      out.push_back(down);
    }
  }

  Vec2 lo{cur.pos.x, cur.pos.z}, hi = lo;
  if (region) {
    const auto [bmin, bmax] = region->bounds();
    lo = bmin;
    hi = bmax;
  }
  auto span = [](double a, double b, double h) {
    return a + h <= b - h ? std::pair{a + h, b - h} : std::pair{(a + b) / 2, (a + b) / 2};
  };

  if (region) {
    const Vec2 h = half_footprint(obj, cur.rot);
    const auto [x0, x1] = span(lo.x, hi.x, h.x);
    const auto [z0, z1] = span(lo.z, hi.z, h.z);
    auto sweep = [&](double a, double b, auto&& emit) {
      const double step = std::max(cfg.translation_step, (b - a) / static_cast<double>(kMaxSweepPoints));
      for (double v = a; v <= b + kEps; v += step) emit(v);
    };
    sweep(x0, x1, [&](double x) { out.push_back(rest_at(obj, cur.rot, x, cur.pos.z, level)); });
    sweep(z0, z1, [&](double z) { out.push_back(rest_at(obj, cur.rot, cur.pos.x, z, level)); });
  }

  std::vector<std::size_t> others;
  for (std::size_t j = 0; j < layout.objects.size(); ++j) {
    if (j != i && (*opts.others)[j]) others.push_back(j);
  }

  std::vector<Transform> jumps;
  for (int s = 0; s < cfg.candidate_samples; ++s) {
    const Vec3 rot = rots[rng.index(rots.size())];
    const bool stack = !others.empty() && rng.uniform() < 0.25;
    if (stack) {
      const std::size_t j = others[rng.index(others.size())];
      const OrientedBox& b = ev.box(j);
      const Vec2 hj = half_footprint(layout.objects[j], layout.objects[j].transform.rot);
      const double x = b.center.x + rng.uniform(-hj.x, hj.x) * 0.5;
      const double z = b.center.z + rng.uniform(-hj.z, hj.z) * 0.5;
      jumps.push_back(rest_at(obj, rot, x, z, b.max_y()));
    } else {
      const Vec2 h = half_footprint(obj, rot);
      const auto [x0, x1] = span(lo.x, hi.x, h.x);
      const auto [z0, z1] = span(lo.z, hi.z, h.z);
      const double x = rng.uniform(x0, x1);
      const double z = rng.uniform(z0, z1);
      jumps.push_back(rest_at(obj, rot, x, z, floor));
    }
  }

  const Vec2 hi_own = half_footprint(obj, cur.rot);
  for (std::size_t j : others) {
    const OrientedBox& b = ev.box(j);
    const Vec2 hj = half_footprint(layout.objects[j], layout.objects[j].transform.rot);
    // Resting spots spread over the top face.
    const double sx = std::max(0.0, hj.x - hi_own.x), sz = std::max(0.0, hj.z - hi_own.z);
    for (int gx = -1; gx <= 1; ++gx) {
      for (int gz = -1; gz <= 1; ++gz) {
        out.push_back(rest_at(obj, cur.rot, b.center.x + gx * sx, b.center.z + gz * sz, b.max_y()));
      }
    }
    const double dx = hj.x + hi_own.x + kSideGap, dz = hj.z + hi_own.z + kSideGap;
    out.push_back(rest_at(obj, cur.rot, b.center.x + dx, b.center.z, b.min_y()));
    out.push_back(rest_at(obj, cur.rot, b.center.x - dx, b.center.z, b.min_y()));
    out.push_back(rest_at(obj, cur.rot, b.center.x, b.center.z + dz, b.min_y()));
    out.push_back(rest_at(obj, cur.rot, b.center.x, b.center.z - dz, b.min_y()));
  }
  if (opts.samples_first) {
    jumps.insert(jumps.end(), out.begin(), out.end());
    return jumps;
  }
  out.insert(out.end(), jumps.begin(), jumps.end());
  return out;
}

/// Objects resting, directly or through others, on object `base`.
std::vector<std::size_t> riders(const Evaluator& ev, std::size_t base, const std::vector<bool>& movable) {
  const std::size_t n = ev.layout().objects.size();
  std::vector<std::size_t> out;
  std::vector<bool> taken(n, false);
  taken[base] = true;
  std::vector<std::size_t> todo{base};
  while (!todo.empty()) {
    const std::size_t b = todo.back();
    todo.pop_back();
    const OrientedBox& bb = ev.box(b);
    for (std::size_t j = 0; j < n; ++j) {
      if (taken[j] || !movable[j]) continue;
      const OrientedBox& bj = ev.box(j);
      if (std::abs(bj.min_y() - bb.max_y()) > scene::kSupportTolerance) continue;
      if (scene::footprint_overlap(bj.footprint(), bb.footprint()) <= kEps) continue;
      taken[j] = true;
      out.push_back(j);
      todo.push_back(j);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

using Move = std::vector<std::pair<std::size_t, Transform>>;

/// Moves `base` to `t`, taking its riders along rigidly (translation plus yaw).
Move carry(const Evaluator& ev, std::size_t base, const Transform& t, const std::vector<std::size_t>& along) {
  Move move{{base, t}};
  if (along.empty()) return move;
  const Transform& from = ev.layout().objects[base].transform;
  const double yaw = t.rot.y - from.rot.y;
  const Mat3 turn = rotation_matrix({0.0, yaw, 0.0});
  for (std::size_t j : along) {
    Transform r = ev.layout().objects[j].transform;
    r.pos = t.pos + turn * (r.pos - from.pos);
    r.rot.y += yaw;
    move.emplace_back(j, r);
  }
  return move;
}

std::size_t score(Evaluator& ev, const Move& move) {
  if (move.size() == 1) return ev.score_move(move[0].first, move[0].second);
  Move undo;
  for (const auto& [i, t] : move) {
    undo.emplace_back(i, ev.layout().objects[i].transform);
    ev.set_transform(i, t);
  }
  const std::size_t s = ev.satisfied_count();
  for (auto it = undo.rbegin(); it != undo.rend(); ++it) ev.set_transform(it->first, it->second);
  return s;
}

void apply_move(Evaluator& ev, const Move& move) {
  for (const auto& [i, t] : move) ev.set_transform(i, t);
}

}  // namespace

// ---------------------------------------------------------------------------
// Initial placement

namespace {

Evaluator greedy_placement(const ConstraintSet& cs, const SceneLayout& layout, const std::vector<std::size_t>& order,
                           const SolverConfig& cfg, Rng& rng) {
  Evaluator ev(cs, layout);
  const std::size_t n = layout.objects.size();

  for (std::size_t i = 0; i < n; ++i) ev.set_active(i, false);
  std::vector<bool> placed(n, false);
  for (std::size_t i : order) {
    ev.set_active(i, true);
    std::vector<Transform> cands{layout.objects[i].transform};
    auto more = candidates(ev, i, cfg, rng, {false, &placed, true});
    cands.insert(cands.end(), more.begin(), more.end());
    std::size_t best = 0, best_v = std::numeric_limits<std::size_t>::max();
    for (std::size_t c = 0; c < cands.size(); ++c) {
      ev.set_transform(i, cands[c]);
      const std::size_t v = ev.active_violations();
      if (v < best_v) {
        best_v = v;
        best = c;
      }
    }
    ev.set_transform(i, cands[best]);
    placed[i] = true;
  }

  // With everything placed, revisit each object once more against the full
  // set, carrying whatever rests on it.
  const std::vector<bool> everyone(n, true);
  for (int pass = 0; pass < kPlacementPasses && ev.satisfied_count() < ev.size(); ++pass) {
    for (std::size_t i : order) {
      const auto along = riders(ev, i, everyone);
      std::size_t best_s = ev.satisfied_count();
      std::optional<Move> best;
      for (const Transform& t : candidates(ev, i, cfg, rng, {true, &everyone, true})) {
        Move m = carry(ev, i, t, along);
        const std::size_t sc = score(ev, m);
        if (sc > best_s) {
          best_s = sc;
          best = std::move(m);
        }
      }
      if (best) apply_move(ev, *best);
    }
  }
  return ev;
}

}  // namespace

scene::SceneLayout initial_placement(const SceneLayout& layout, const ConstraintSet& cs, const SolverConfig& cfg,
                                     Rng& rng) {
  cfg.validate();
  for (const SceneObject& o : layout.objects) {
    const Region* r = layout.find_region(o.region);
    if (!r) throw PlacementError("object '" + o.id + "' has no region");
    const auto [lo, hi] = r->bounds();
    const double w = hi.x - lo.x, d = hi.z - lo.z;
    bool fits = false;
    for (double yaw : {o.transform.rot.y, o.transform.rot.y + 90.0}) {
      const Vec2 h = half_footprint(o, {o.transform.rot.x, yaw, o.transform.rot.z});
      fits = fits || (2 * h.x <= w + kEps && 2 * h.z <= d + kEps);
    }
    if (!fits) {
      const Vec3 e = o.extents();
      char buf[160];
      std::snprintf(buf, sizeof buf, "object '%s' (%g x %g) does not fit region '%s' (%g x %g)", o.id.c_str(), e.x,
                    e.z, r->id.c_str(), w, d);
      throw PlacementError(buf);
    }
  }

  const std::size_t n = layout.objects.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  auto area = [&](std::size_t i) {
    const Vec3 e = layout.objects[i].extents();
    return e.x * e.z;
  };
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return area(a) > area(b); });

  std::optional<Evaluator> best;
  for (int attempt = 0; attempt < kPlacementRestarts; ++attempt) {
    Rng stream(rng.next());
    Evaluator ev = greedy_placement(cs, layout, order, cfg, stream);
    if (!best || ev.satisfied_count() > best->satisfied_count()) best = std::move(ev);
    if (best->satisfied_count() == best->size()) break;
  }
  return best->layout();
}

// ---------------------------------------------------------------------------
// Physics relaxation

scene::SceneLayout physics_relaxation(const SceneLayout& layout, const ConstraintSet& cs, const SolverConfig& cfg) {
  SceneLayout out = layout;
  const std::size_t n = out.objects.size();
  std::vector<OrientedBox> boxes(n);
  auto refresh = [&](std::size_t i) { boxes[i] = scene::world_box(out.objects[i]); };
  for (std::size_t i = 0; i < n; ++i) refresh(i);

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return boxes[a].min_y() < boxes[b].min_y(); });
  for (std::size_t i : order) {
    SceneObject& o = out.objects[i];
    if (scene::supported(o, out)) continue;
    const Region* r = out.find_region(o.region);
    const double bottom = boxes[i].min_y();
    double target = r ? r->floor_y : bottom;
    const Polygon2 fp = boxes[i].footprint();
    for (std::size_t j = 0; j < n; ++j) {
      // Surfaces below the object's middle catch it; a slightly embedded
      // object is lifted onto them rather than pushed through.
      if (j == i || boxes[j].max_y() > boxes[i].center.y + kEps) continue;
      if (scene::footprint_overlap(fp, boxes[j].footprint()) > kEps) target = std::max(target, boxes[j].max_y());
    }
    o.transform.pos.y += target - bottom;
    refresh(i);
  }

  for (int sweep = 0; sweep < cfg.relaxation_sweeps; ++sweep) {
    bool moved = false;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (cs.collision_allowed(out.objects[i].id, out.objects[j].id)) continue;
        const auto pen = scene::penetration(boxes[i], boxes[j]);
        if (!pen) continue;
        moved = true;
        if (std::abs(pen->axis.y) >= 0.7) {
          const std::size_t upper = boxes[j].center.y >= boxes[i].center.y ? j : i;
          out.objects[upper].transform.pos.y += pen->depth / std::abs(pen->axis.y) + kLiftMargin;
          refresh(upper);
          continue;
        }
        Vec3 h{pen->axis.x, 0.0, pen->axis.z};
        const double len = length(h);
        h = len > kEps ? h / len : Vec3{1.0, 0.0, 0.0};
        const double push = pen->depth / std::max(len, kEps) / 2.0 + kPushMargin;
        out.objects[i].transform.pos = out.objects[i].transform.pos - h * push;
        out.objects[j].transform.pos = out.objects[j].transform.pos + h * push;
        refresh(i);
        refresh(j);
      }
    }
    out = enforce_bounds(out, cs);
    for (std::size_t i = 0; i < n; ++i) refresh(i);
    if (!moved) break;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Batches

void BatchHistory::record(const std::vector<std::size_t>& unsatisfied, const std::vector<std::size_t>& batch) {
  std::map<std::size_t, int> next;
  for (std::size_t id : unsatisfied) {
    if (std::find(batch.begin(), batch.end(), id) != batch.end()) continue;
    auto it = waiting.find(id);
    next[id] = (it == waiting.end() ? 0 : it->second) + 1;
  }
  waiting = std::move(next);
}

std::vector<std::size_t> select_batch(const std::vector<std::size_t>& unsatisfied, std::size_t k,
                                      const ConstraintSet& cs, const BatchHistory& history) {
  struct Key {
    int fresh;
    std::size_t objects;
    std::size_t id;
    auto operator<=>(const Key&) const = default;
  };
  std::vector<Key> keys;
  for (std::size_t id : unsatisfied) {
    const auto* c = cs.find(id);
    const auto it = history.waiting.find(id);
    const bool stale = it != history.waiting.end() && it->second >= kStalenessLimit;
    keys.push_back({stale ? 0 : 1, c ? c->involved_objects.size() : 0, id});
  }
  std::sort(keys.begin(), keys.end());
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < keys.size() && out.size() < k; ++i) out.push_back(keys[i].id);
  return out;
}

std::vector<std::size_t> batch_objects(const Evaluator& ev, const std::vector<std::size_t>& batch) {
  const auto index = index_by_id(ev.constraints());
  std::vector<std::size_t> objs;
  for (std::size_t id : batch) {
    const auto it = index.find(id);
    if (it == index.end()) continue;
    for (std::size_t o : ev.objects_of(it->second)) objs.push_back(o);
  }
  std::sort(objs.begin(), objs.end());
  objs.erase(std::unique(objs.begin(), objs.end()), objs.end());
  return objs;
}

// ---------------------------------------------------------------------------
// Local search

void local_search(Evaluator& ev, const std::vector<std::size_t>& batch, const SolverConfig& cfg, Rng& rng) {
  const auto index = index_by_id(ev.constraints());
  bool all_ok = true;
  for (std::size_t id : batch) {
    const auto it = index.find(id);
    all_ok = all_ok && (it == index.end() || ev.satisfied(it->second));
  }
  if (all_ok) return;

  std::vector<std::size_t> objs = batch_objects(ev, batch);
  const auto& objects = ev.layout().objects;
  std::stable_sort(objs.begin(), objs.end(), [&](std::size_t a, std::size_t b) { return objects[a].id < objects[b].id; });
  const std::vector<bool> everyone(objects.size(), true);
  std::vector<bool> movable(objects.size(), false);
  for (std::size_t i : objs) movable[i] = true;

  for (int step = 0; step < cfg.moves_per_proposal; ++step) {
    const std::size_t current = ev.satisfied_count();
    struct Best {
      std::size_t score = 0;
      double shift = 0.0;
      double turn = 0.0;
      Move move;
    } best;
    for (std::size_t i : objs) {
      const Transform from = ev.layout().objects[i].transform;
      const auto along = riders(ev, i, movable);
      for (const Transform& t : candidates(ev, i, cfg, rng, {true, &everyone})) {
        Move m = carry(ev, i, t, along);
        const std::size_t s = score(ev, m);
        if (s <= current) continue;
        const double shift = length(t.pos - from.pos), turn = angle_change(t.rot, from.rot);
        // Objects are visited in id order and candidates in generation order,
        // so strict comparisons leave the earlier one on a full tie.
        const bool better = best.move.empty() || s > best.score ||
                            (s == best.score && (shift < best.shift - kEps ||
                                                 (std::abs(shift - best.shift) <= kEps && turn < best.turn - kEps)));
        if (better) best = {s, shift, turn, std::move(m)};
      }
    }
    if (best.move.empty()) break;
    apply_move(ev, best.move);
  }
}

scene::SceneLayout local_search_batch_solve(const SceneLayout& layout, const std::vector<std::size_t>& batch,
                                            const ConstraintSet& cs, const SolverConfig& cfg, Rng& rng) {
  Evaluator ev(cs, layout);
  local_search(ev, batch, cfg, rng);
  return ev.layout();
}

scene::SceneLayout LocalSearchSolver::propose(const SceneLayout& layout, const std::vector<std::size_t>& batch,
                                              const ConstraintSet& cs) {
  return local_search_batch_solve(layout, batch, cs, cfg_, rng_);
}

// ---------------------------------------------------------------------------
// Bounds

std::optional<Transform> clamp_into_region(const SceneObject& obj, const Region& region) {
  Transform t = obj.transform;
  OrientedBox box = box_for(obj, t);
  const double bottom = box.min_y(), top = box.max_y();
  double dy = 0.0;
  if (top - bottom > region.height || bottom < region.floor_y) {
    dy = region.floor_y - bottom;
  } else if (top > region.ceiling_y()) {
    dy = region.ceiling_y() - top;
  }
  t.pos.y += dy;
  box.center.y += dy;

  if (!scene::inside(box, region)) {
    const Vec2 center = flat(box.center);
    Polygon2 rel = box.footprint();
    for (Vec2& v : rel) v = v - center;
    std::optional<Vec2> target;
    if (is_convex(region.vertices)) {
      // Centers that keep every footprint vertex in the room.
      Polygon2 feasible;
      for (std::size_t k = 0; k < rel.size(); ++k) {
        Polygon2 shifted = region.vertices;
        for (Vec2& v : shifted) v = v - rel[k];
        feasible = k == 0 ? shifted : clip_convex(feasible, shifted);
        if (feasible.size() < 3) break;
      }
      if (feasible.size() >= 3) {
        target = point_in_polygon(center, feasible) ? center : closest_on_boundary(center, feasible);
        OrientedBox probe = box;
        probe.center.x = target->x;
        probe.center.z = target->z;
        if (!scene::inside(probe, region)) {
          const Vec2 m = polygon_mean(feasible);
          *target = *target + (m - *target) * 1e-6;
        }
      }
    } else {
      const auto [lo, hi] = region.bounds();
      const double reach = length(hi - lo);
      constexpr int kDirections = 36;
      for (double r = 0.01; r <= reach && !target; r += 0.01) {
        for (int d = 0; d < kDirections && !target; ++d) {
          const double a = 2.0 * std::numbers::pi * d / kDirections;
          OrientedBox probe = box;
          probe.center.x = center.x + r * std::cos(a);
          probe.center.z = center.z + r * std::sin(a);
          if (scene::inside(probe, region)) target = flat(probe.center);
        }
      }
    }
    if (!target) target = region.centroid();
    t.pos.x += target->x - center.x;
    t.pos.z += target->z - center.z;
  }
  if (t == obj.transform) return std::nullopt;
  return t;
}

scene::SceneLayout enforce_bounds(const SceneLayout& layout, const ConstraintSet& cs) {
  SceneLayout out = layout;
  for (SceneObject& o : out.objects) {
    if (cs.allow_outside.count(o.id)) continue;
    const Region* r = out.find_region(o.region);
    if (!r) continue;
    if (auto t = clamp_into_region(o, *r)) o.transform = *t;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Loop

SolveReport solve(const SceneLayout& layout, const ConstraintSet& cs, const SolverConfig& cfg, BatchSolver* slot) {
  cfg.validate();
  Rng rng(cfg.seed);
  SceneLayout start = initial_placement(layout, cs, cfg, rng);
  start = physics_relaxation(start, cs, cfg);
  Evaluator ev(cs, start);
  const auto index = index_by_id(cs);

  SolveReport report;
  auto record = [&](IterationRecord rec) {
    rec.layout = ev.layout();
    rec.unsatisfied = unsatisfied_ids(ev);
    rec.ratio = ev.ratio();
    if (report.iterations.empty() || rec.ratio > report.best_ratio) {
      report.best_ratio = rec.ratio;
      report.best_iteration = static_cast<std::size_t>(rec.index);
      report.best_layout = rec.layout;
    }
    rec.best_ratio = report.best_ratio;
    report.iterations.push_back(std::move(rec));
  };
  record({});

  BatchHistory history;
  for (int t = 1; t <= cfg.max_iterations; ++t) {
    const std::vector<std::size_t> unsatisfied = report.iterations.back().unsatisfied;
    if (unsatisfied.empty()) break;
    IterationRecord rec;
    rec.index = t;
    rec.batch = select_batch(unsatisfied, static_cast<std::size_t>(cfg.batch_size), cs, history);
    history.record(unsatisfied, rec.batch);
    const std::vector<std::size_t> involved = batch_objects(ev, rec.batch);
    const std::vector<scene::SceneObject> before = ev.layout().objects;

    if (slot) {
      const SceneLayout proposal = slot->propose(ev.layout(), rec.batch, cs);
      for (std::size_t i : involved) {
        const SceneObject* p = proposal.find_object(before[i].id);
        if (p && !(p->transform == before[i].transform)) ev.set_transform(i, p->transform);
      }
    } else {
      local_search(ev, rec.batch, cfg, rng);
    }

    for (std::size_t i : involved) {
      const SceneObject& o = ev.layout().objects[i];
      if (cs.allow_outside.count(o.id)) continue;
      const Region* r = ev.layout().find_region(o.region);
      if (!r) continue;
      if (auto clamped = clamp_into_region(o, *r)) ev.set_transform(i, *clamped);
    }

    for (std::size_t i : involved) rec.involved.push_back(before[i].id);
    for (std::size_t i = 0; i < before.size(); ++i) {
      if (!(ev.layout().objects[i].transform == before[i].transform)) rec.moved.push_back(before[i].id);
    }
    record(std::move(rec));
  }

  report.terminated = report.iterations.back().unsatisfied.empty() ? Termination::AllSatisfied
                                                                   : Termination::IterationLimit;
  report.best_verdicts = Evaluator(cs, report.best_layout).verdicts();
  return report;
}

// ---------------------------------------------------------------------------

std::string format_report(const SolveReport& report, const ConstraintSet& cs) {
  auto join_ids = [](const std::vector<std::size_t>& v) {
    std::string s;
    for (std::size_t id : v) s += (s.empty() ? "" : ",") + std::to_string(id);
    return s.empty() ? std::string("-") : s;
  };
  auto join_names = [](const std::vector<std::string>& v) {
    std::string s;
    for (const auto& id : v) s += (s.empty() ? "" : ",") + id;
    return s.empty() ? std::string("-") : s;
  };
  auto fixed = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return std::string(buf);
  };

  std::string out;
  for (const IterationRecord& r : report.iterations) {
    out += "iteration " + std::to_string(r.index) + " ratio " + fixed(r.ratio) + " best " + fixed(r.best_ratio);
    if (r.index > 0) {
      out += " batch " + join_ids(r.batch) + " involved " + join_names(r.involved) + " moved " + join_names(r.moved);
    }
    out += " unsatisfied " + join_ids(r.unsatisfied) + "\n";
  }
  out += "best iteration " + std::to_string(report.best_iteration) + " ratio " + fixed(report.best_ratio) + "\n";
  out += "terminated " + std::string(to_string(report.terminated)) + "\n";
  out += constraints::report(cs, report.best_verdicts);
  return out;
}

}  // namespace sthl::solver
