#include "sthl/scene.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sthl::scene {

namespace {

constexpr double kEps = 1e-9;

Vec2 flat(Vec3 v) { return {v.x, v.z}; }

}  // namespace

std::pair<Vec2, Vec2> Region::bounds() const {
  Vec2 lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  Vec2 hi{-lo.x, -lo.z};
  for (const Vec2& v : vertices) {
    lo = {std::min(lo.x, v.x), std::min(lo.z, v.z)};
    hi = {std::max(hi.x, v.x), std::max(hi.z, v.z)};
  }
  return {lo, hi};
}

Vec2 Region::centroid() const {
  const double a = signed_area(vertices);
  if (std::abs(a) < kEps) {
    const auto [lo, hi] = bounds();
    return (lo + hi) * 0.5;
  }
  double cx = 0.0, cz = 0.0;
  const std::size_t n = vertices.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 p = vertices[i];
    const Vec2 q = vertices[(i + 1) % n];
    const double c = cross(p, q);
    cx += (p.x + q.x) * c;
    cz += (p.z + q.z) * c;
  }
  return {cx / (6.0 * a), cz / (6.0 * a)};
}

const SceneObject* SceneLayout::find_object(std::string_view id) const {
  for (const auto& o : objects) {
    if (o.id == id) return &o;
  }
  return nullptr;
}

SceneObject* SceneLayout::find_object(std::string_view id) {
  for (auto& o : objects) {
    if (o.id == id) return &o;
  }
  return nullptr;
}

const Region* SceneLayout::find_region(std::string_view id) const {
  for (const auto& r : regions) {
    if (r.id == id) return &r;
  }
  return nullptr;
}

void validate(const Region& region) {
  if (region.vertices.size() < 3) throw DegenerateRegion("region '" + region.id + "' needs at least 3 vertices");
  if (signed_area(region.vertices) <= 0.0) {
    throw DegenerateRegion("region '" + region.id + "' polygon must have positive counterclockwise area");
  }
  if (!is_simple(region.vertices)) throw SceneError("region '" + region.id + "' polygon self-intersects");
  if (region.wall_thickness < 0.0) throw SceneError("region '" + region.id + "' has negative wall thickness");
  if (region.height <= 0.0) throw SceneError("region '" + region.id + "' has non-positive height");
}

// ---------------------------------------------------------------------------
// Boxes

std::array<Vec3, 8> OrientedBox::corners() const {
  std::array<Vec3, 8> out;
  for (int i = 0; i < 8; ++i) {
    const double sx = (i & 1) ? 1.0 : -1.0;
    const double sy = (i & 2) ? 1.0 : -1.0;
    const double sz = (i & 4) ? 1.0 : -1.0;
    out[static_cast<std::size_t>(i)] =
        center + axes[0] * (sx * half.x) + axes[1] * (sy * half.y) + axes[2] * (sz * half.z);
  }
  return out;
}

double OrientedBox::min_y() const {
  const double r = std::abs(axes[0].y) * half.x + std::abs(axes[1].y) * half.y + std::abs(axes[2].y) * half.z;
  return center.y - r;
}

double OrientedBox::max_y() const {
  const double r = std::abs(axes[0].y) * half.x + std::abs(axes[1].y) * half.y + std::abs(axes[2].y) * half.z;
  return center.y + r;
}

Polygon2 OrientedBox::footprint() const {
  std::vector<Vec2> pts;
  pts.reserve(8);
  for (const Vec3& c : corners()) pts.push_back(flat(c));
  return convex_hull(std::move(pts));
}

bool OrientedBox::contains(Vec3 p, double eps) const {
  const Vec3 d = p - center;
  for (int i = 0; i < 3; ++i) {
    if (std::abs(dot(d, axes[static_cast<std::size_t>(i)])) > half[i] + eps) return false;
  }
  return true;
}

OrientedBox make_box(Vec3 center, Vec3 extents, Vec3 euler_degrees) {
  const Mat3 r = rotation_matrix(euler_degrees);
  return {center, {r.column(0), r.column(1), r.column(2)}, extents * 0.5};
}

OrientedBox world_box(const SceneObject& obj) {
  return make_box(obj.transform.pos, obj.extents(), obj.transform.rot);
}

namespace {

// Overlap of the two boxes' projections on `axis` (need not be unit length;
// result is scaled by |axis|). Negative or zero means separated.
double projected_overlap(const OrientedBox& a, const OrientedBox& b, Vec3 axis, double& signed_dist) {
  double ra = 0.0, rb = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    ra += a.half[static_cast<int>(i)] * std::abs(dot(a.axes[i], axis));
    rb += b.half[static_cast<int>(i)] * std::abs(dot(b.axes[i], axis));
  }
  signed_dist = dot(b.center - a.center, axis);
  return ra + rb - std::abs(signed_dist);
}

template <typename Fn>
void for_each_sat_axis(const OrientedBox& a, const OrientedBox& b, Fn&& fn) {
  for (const Vec3& ax : a.axes) {
    if (!fn(ax)) return;
  }
  for (const Vec3& ax : b.axes) {
    if (!fn(ax)) return;
  }
  for (const Vec3& u : a.axes) {
    for (const Vec3& v : b.axes) {
      const Vec3 c = cross(u, v);
      const double len = length(c);
      if (len < 1e-9) continue;  // parallel edges; covered by face axes
      if (!fn(c / len)) return;
    }
  }
}

}  // namespace

bool collides(const OrientedBox& a, const OrientedBox& b) {
  bool separated = false;
  for_each_sat_axis(a, b, [&](Vec3 axis) {
    double d;
    if (projected_overlap(a, b, axis, d) <= kEps) {
      separated = true;
      return false;
    }
    return true;
  });
  return !separated;
}

bool collides(const SceneObject& a, const SceneObject& b) { return collides(world_box(a), world_box(b)); }

std::optional<Penetration> penetration(const OrientedBox& a, const OrientedBox& b) {
  Penetration best{{}, std::numeric_limits<double>::infinity()};
  bool separated = false;
  for_each_sat_axis(a, b, [&](Vec3 axis) {
    double d;
    const double overlap = projected_overlap(a, b, axis, d);
    if (overlap <= kEps) {
      separated = true;
      return false;
    }
    if (overlap < best.depth) {
      best.depth = overlap;
      best.axis = d >= 0 ? axis : -axis;
    }
    return true;
  });
  if (separated) return std::nullopt;
  return best;
}

// ---------------------------------------------------------------------------
// Containment and support

bool inside(const OrientedBox& box, const Region& region) {
  if (box.min_y() < region.floor_y - kEps || box.max_y() > region.ceiling_y() + kEps) return false;
  const Polygon2 fp = box.footprint();
  const Polygon2& poly = region.vertices;
  for (const Vec2& c : fp) {
    if (!point_in_polygon(c, poly, kEps)) return false;
  }
  // Corners inside is not enough for non-convex rooms: no wall may cut through
  // the footprint and no reflex vertex may poke into it.
  const std::size_t n = poly.size(), m = fp.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a = poly[i], b = poly[(i + 1) % n];
    for (std::size_t j = 0; j < m; ++j) {
      if (segments_cross(a, b, fp[j], fp[(j + 1) % m], kEps)) return false;
    }
  }
  if (m >= 3) {
    for (const Vec2& v : poly) {
      bool strictly_inside = true;
      for (std::size_t j = 0; j < m && strictly_inside; ++j) {
        const Vec2 e = fp[(j + 1) % m] - fp[j];
        const double len = length(e);
        if (len <= 0.0 || cross(e, v - fp[j]) / len <= kEps) strictly_inside = false;
      }
      if (strictly_inside) return false;
    }
  }
  return true;
}

bool inside(const SceneObject& obj, const Region& region) { return inside(world_box(obj), region); }

double footprint_overlap(const Polygon2& a, const Polygon2& b) {
  if (a.size() < 3 || b.size() < 3) return 0.0;
  const Polygon2 clipped = clip_convex(a, b);
  return clipped.size() < 3 ? 0.0 : std::abs(signed_area(clipped));
}

bool supported(const SceneObject& obj, const SceneLayout& layout, double tolerance) {
  const OrientedBox box = world_box(obj);
  const double bottom = box.min_y();
  if (const Region* r = layout.find_region(obj.region); r && std::abs(bottom - r->floor_y) <= tolerance) {
    return true;
  }
  Polygon2 fp;
  double fp_area = 0.0;
  for (const SceneObject& other : layout.objects) {
    if (other.id == obj.id) continue;
    const OrientedBox ob = world_box(other);
    if (std::abs(bottom - ob.max_y()) > tolerance) continue;
    if (fp.empty()) {
      fp = box.footprint();
      fp_area = std::abs(signed_area(fp));
    }
    if (footprint_overlap(fp, ob.footprint()) >= kSupportOverlapFraction * fp_area - kEps) return true;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Walls

RegionMeshSpec thicken_walls(const Region& region, double thickness) {
  const Polygon2& poly = region.vertices;
  if (poly.size() < 3 || signed_area(poly) <= 0.0) {
    throw DegenerateRegion("region '" + region.id + "' has non-positive area");
  }
  if (thickness < 0.0) throw SceneError("wall thickness must be non-negative");

  const std::size_t n = poly.size();
  std::vector<Vec2> normals(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 d = poly[(i + 1) % n] - poly[i];
    const double len = length(d);
    normals[i] = Vec2{d.z, -d.x} * (1.0 / len);
  }
  // Outer corner at vertex i joins the offset lines of edges i-1 and i.
  std::vector<Vec2> outer(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 n1 = normals[(i + n - 1) % n];
    const Vec2 n2 = normals[i];
    const double denom = 1.0 + dot(n1, n2);
    outer[i] = denom > 1e-12 ? poly[i] + (n1 + n2) * (thickness / denom) : poly[i] + n2 * thickness;
  }

  RegionMeshSpec spec;
  spec.region = region.id;
  spec.floor = {poly, region.floor_y};
  for (std::size_t i = 0; i < n; ++i) {
    WallSlab w;
    w.edge = i;
    w.inner = {poly[i], poly[(i + 1) % n]};
    w.outer = {outer[i], outer[(i + 1) % n]};
    w.base_y = region.floor_y;
    w.height = region.height;
    w.thickness = thickness;
    spec.walls.push_back(w);
  }
  return spec;
}

Polygon2 rectangle(Vec2 center, double width, double depth, double yaw_degrees) {
  const double a = deg_to_rad(yaw_degrees);
  const double c = std::cos(a), s = std::sin(a);
  const double hw = width / 2.0, hd = depth / 2.0;
  const std::array<Vec2, 4> local{Vec2{-hw, -hd}, Vec2{hw, -hd}, Vec2{hw, hd}, Vec2{-hw, hd}};
  Polygon2 out;
  for (const Vec2& p : local) {
    // Same rotation as rotation_matrix about y, restricted to the floor plane.
    out.push_back({center.x + c * p.x + s * p.z, center.z - s * p.x + c * p.z});
  }
  return out;
}

}  // namespace sthl::scene
