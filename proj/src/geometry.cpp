#include "sthl/geometry.hpp"

#include <algorithm>

namespace sthl {

Mat3 rotation_matrix(Vec3 euler_degrees) {
  const double ax = deg_to_rad(euler_degrees.x);
  const double ay = deg_to_rad(euler_degrees.y);
  const double az = deg_to_rad(euler_degrees.z);
  const double cx = std::cos(ax), sx = std::sin(ax);
  const double cy = std::cos(ay), sy = std::sin(ay);
  const double cz = std::cos(az), sz = std::sin(az);

  Mat3 rx{{1, 0, 0, 0, cx, -sx, 0, sx, cx}};
  Mat3 ry{{cy, 0, sy, 0, 1, 0, -sy, 0, cy}};
  Mat3 rz{{cz, -sz, 0, sz, cz, 0, 0, 0, 1}};
  return ry * (rz * rx);
}

double signed_area(const Polygon2& poly) {
  double twice = 0.0;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % n];
    twice += a.x * b.z - b.x * a.z;
  }
  return 0.5 * twice;
}

Polygon2 convex_hull(std::vector<Vec2> pts) {
  std::sort(pts.begin(), pts.end(), [](Vec2 a, Vec2 b) { return a.x < b.x || (a.x == b.x && a.z < b.z); });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;

  Polygon2 hull(2 * pts.size());
  std::size_t k = 0;
  for (const Vec2& p : pts) {
    while (k >= 2 && cross(hull[k - 1] - hull[k - 2], p - hull[k - 2]) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    const Vec2& p = pts[i];
    while (k >= lower && cross(hull[k - 1] - hull[k - 2], p - hull[k - 2]) <= 0) --k;
    hull[k++] = p;
  }
  hull.resize(k - 1);
  return hull;
}

Polygon2 clip_convex(const Polygon2& subject, const Polygon2& clip) {
  Polygon2 out = subject;
  const std::size_t n = clip.size();
  for (std::size_t i = 0; i < n && !out.empty(); ++i) {
    const Vec2 a = clip[i];
    const Vec2 b = clip[(i + 1) % n];
    const Vec2 edge = b - a;
    Polygon2 input;
    input.swap(out);
    for (std::size_t j = 0; j < input.size(); ++j) {
      const Vec2 p = input[j];
      const Vec2 q = input[(j + 1) % input.size()];
      const double dp = cross(edge, p - a);
      const double dq = cross(edge, q - a);
      if (dp >= 0) out.push_back(p);
      if ((dp >= 0) != (dq >= 0)) {
        const double t = dp / (dp - dq);
        out.push_back(p + (q - p) * t);
      }
    }
  }
  return out;
}

double distance_to_segment(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double len2 = dot(ab, ab);
  double t = len2 > 0 ? dot(p - a, ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return length(p - (a + ab * t));
}

bool point_in_polygon(Vec2 p, const Polygon2& poly, double eps) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  bool in = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2 a = poly[i];
    const Vec2 b = poly[j];
    if (distance_to_segment(p, a, b) <= eps) return true;
    if ((a.z > p.z) != (b.z > p.z)) {
      const double x_at = a.x + (p.z - a.z) * (b.x - a.x) / (b.z - a.z);
      if (p.x < x_at) in = !in;
    }
  }
  return in;
}

bool segments_cross(Vec2 a, Vec2 b, Vec2 c, Vec2 d, double eps) {
  const double d1 = cross(b - a, c - a);
  const double d2 = cross(b - a, d - a);
  const double d3 = cross(d - c, a - c);
  const double d4 = cross(d - c, b - c);
  const double scale_ab = std::max(length(b - a), 1e-300);
  const double scale_cd = std::max(length(d - c), 1e-300);
  return ((d1 > eps * scale_ab && d2 < -eps * scale_ab) || (d1 < -eps * scale_ab && d2 > eps * scale_ab)) &&
         ((d3 > eps * scale_cd && d4 < -eps * scale_cd) || (d3 < -eps * scale_cd && d4 > eps * scale_cd));
}

bool is_simple(const Polygon2& poly) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (j == i + 1 || (i == 0 && j == n - 1)) continue;
      if (segments_cross(poly[i], poly[(i + 1) % n], poly[j], poly[(j + 1) % n], 0.0)) return false;
    }
  }
  return true;
}

}  // namespace sthl
