#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

namespace sthl {

struct Vec2 {
  double x = 0.0;
  double z = 0.0;

  friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.z + b.z}; }
  friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.z - b.z}; }
  friend constexpr Vec2 operator*(Vec2 a, double s) { return {a.x * s, a.z * s}; }
  friend constexpr bool operator==(Vec2, Vec2) = default;
};

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.z * b.z; }
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.z - a.z * b.x; }
inline double length(Vec2 a) { return std::sqrt(dot(a, a)); }

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
  constexpr double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }

  friend constexpr Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend constexpr Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend constexpr Vec3 operator-(Vec3 a) { return {-a.x, -a.y, -a.z}; }
  friend constexpr Vec3 operator*(Vec3 a, double s) { return {a.x * s, a.y * s, a.z * s}; }
  friend constexpr Vec3 operator*(double s, Vec3 a) { return a * s; }
  friend constexpr Vec3 operator/(Vec3 a, double s) { return {a.x / s, a.y / s, a.z / s}; }
  friend constexpr bool operator==(Vec3, Vec3) = default;
};

constexpr double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
constexpr Vec3 cross(Vec3 a, Vec3 b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
constexpr Vec3 hadamard(Vec3 a, Vec3 b) { return {a.x * b.x, a.y * b.y, a.z * b.z}; }
inline double length(Vec3 a) { return std::sqrt(dot(a, a)); }

/// Row-major 3x3 matrix; columns of a rotation matrix are the rotated basis axes.
struct Mat3 {
  std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

  constexpr double operator()(int r, int c) const { return m[static_cast<std::size_t>(r * 3 + c)]; }
  constexpr double& operator()(int r, int c) { return m[static_cast<std::size_t>(r * 3 + c)]; }

  constexpr Vec3 column(int c) const { return {(*this)(0, c), (*this)(1, c), (*this)(2, c)}; }

  friend constexpr Mat3 operator*(const Mat3& a, const Mat3& b) {
    Mat3 out;
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) {
        double s = 0.0;
        for (int k = 0; k < 3; ++k) s += a(r, k) * b(k, c);
        out(r, c) = s;
      }
    }
    return out;
  }
  friend constexpr Vec3 operator*(const Mat3& a, Vec3 v) {
    return {a(0, 0) * v.x + a(0, 1) * v.y + a(0, 2) * v.z,
            a(1, 0) * v.x + a(1, 1) * v.y + a(1, 2) * v.z,
            a(2, 0) * v.x + a(2, 1) * v.y + a(2, 2) * v.z};
  }
};

inline double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }

/// Euler rotation in degrees, applied about x first, then z, then y
/// (R = Ry * Rz * Rx acting on column vectors). Axes are left-handed:
/// x is width, y is height, z is depth, and an unrotated front faces +z.
Mat3 rotation_matrix(Vec3 euler_degrees);

using Polygon2 = std::vector<Vec2>;

/// Shoelace area in the (x, z) plane; positive for counterclockwise order.
double signed_area(const Polygon2& poly);

Polygon2 convex_hull(std::vector<Vec2> points);

/// Intersection of two convex counterclockwise polygons.
Polygon2 clip_convex(const Polygon2& subject, const Polygon2& clip);

/// Boundary-inclusive point-in-polygon test (tolerance `eps` on edges).
bool point_in_polygon(Vec2 p, const Polygon2& poly, double eps = 1e-9);

double distance_to_segment(Vec2 p, Vec2 a, Vec2 b);

/// True if open segments ab and cd cross at a single interior point of both.
bool segments_cross(Vec2 a, Vec2 b, Vec2 c, Vec2 d, double eps = 1e-9);

bool is_simple(const Polygon2& poly);

}  // namespace sthl
