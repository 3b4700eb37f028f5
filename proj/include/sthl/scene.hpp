#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sthl/geometry.hpp"

namespace sthl::scene {

/// Default tolerance of the support predicate, in meters.
inline constexpr double kSupportTolerance = 0.005;
/// Fraction of an object's footprint that must rest on a supporting top face.
inline constexpr double kSupportOverlapFraction = 0.5;
/// Wall thickness used when none is given.
inline constexpr double kDefaultWallThickness = 0.03;

class SceneError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegenerateRegion : public SceneError {
 public:
  using SceneError::SceneError;
};

/// Position and scale in meters; rotation in degrees about x, y and z,
/// composed in the order x, then z, then y.
struct Transform {
  Vec3 pos;
  Vec3 rot;
  Vec3 scale{1.0, 1.0, 1.0};

  friend bool operator==(const Transform&, const Transform&) = default;
};

struct SceneObject {
  std::string id;
  std::string category;
  Vec3 dimensions{1.0, 1.0, 1.0};  // unscaled base extents
  std::string color;
  std::string material;
  std::string features;
  Transform transform;
  std::string region;

  Vec3 extents() const { return hadamard(dimensions, transform.scale); }
};

/// A prism room: counterclockwise footprint polygon in the (x, z) plane,
/// extruded from floor_y by height.
struct Region {
  std::string id;
  Polygon2 vertices;
  double floor_y = 0.0;
  double height = 3.0;
  double wall_thickness = kDefaultWallThickness;
  std::string floor_texture;
  std::string wall_texture;
  /// pos/rot/scale the footprint was derived from (what `room.pos` etc. read).
  Transform frame;

  double ceiling_y() const { return floor_y + height; }
  /// Axis-aligned bounds of the footprint: {min, max}.
  std::pair<Vec2, Vec2> bounds() const;
  Vec2 centroid() const;
};

struct Connection {
  std::string region_a;
  std::string region_b;
  std::string category;
  Vec3 dimensions;
};

struct SceneLayout {
  std::vector<Region> regions;
  std::vector<SceneObject> objects;
  std::vector<Connection> connections;

  const SceneObject* find_object(std::string_view id) const;
  SceneObject* find_object(std::string_view id);
  const Region* find_region(std::string_view id) const;
};

/// Checks the region invariants: simple, counterclockwise, wall thickness >= 0.
void validate(const Region& region);

struct OrientedBox {
  Vec3 center;
  std::array<Vec3, 3> axes;  // unit vectors (rotated x, y, z)
  Vec3 half;                 // half extents along axes

  std::array<Vec3, 8> corners() const;
  double volume() const { return 8.0 * half.x * half.y * half.z; }
  double min_y() const;
  double max_y() const;
  /// Convex hull of the corners projected onto the floor plane (counterclockwise).
  Polygon2 footprint() const;
  bool contains(Vec3 p, double eps = 0.0) const;
};

OrientedBox make_box(Vec3 center, Vec3 extents, Vec3 euler_degrees);

/// World-space box of an object: scale, rotate x -> z -> y, translate.
OrientedBox world_box(const SceneObject& obj);

/// Positive-volume overlap of two boxes (separating-axis test over 15 axes).
/// Touching faces do not collide.
bool collides(const OrientedBox& a, const OrientedBox& b);
bool collides(const SceneObject& a, const SceneObject& b);

/// Minimum translation that separates two boxes: unit axis (pointing from a
/// towards b) and overlap depth. nullopt if they do not overlap.
struct Penetration {
  Vec3 axis;
  double depth = 0.0;
};
std::optional<Penetration> penetration(const OrientedBox& a, const OrientedBox& b);

/// Full containment: every point of the box lies within the region prism.
bool inside(const OrientedBox& box, const Region& region);
bool inside(const SceneObject& obj, const Region& region);

/// Overlap area of two convex footprints.
double footprint_overlap(const Polygon2& a, const Polygon2& b);

/// Rests on the floor of its region, or on the top face of another object in
/// `layout` covering at least half its footprint, within `tolerance`.
bool supported(const SceneObject& obj, const SceneLayout& layout, double tolerance = kSupportTolerance);

struct WallSlab {
  std::size_t edge = 0;
  std::array<Vec2, 2> inner;  // polygon edge
  std::array<Vec2, 2> outer;  // inner edge offset outward by the thickness, mitred at corners
  double base_y = 0.0;
  double height = 0.0;
  double thickness = 0.0;
};

struct FloorSlab {
  Polygon2 outline;
  double y = 0.0;
};

struct RegionMeshSpec {
  std::string region;
  FloorSlab floor;
  std::vector<WallSlab> walls;
};

/// Wall slabs extruded outward by `thickness` from every polygon edge.
/// Throws DegenerateRegion if the polygon area is not positive.
RegionMeshSpec thicken_walls(const Region& region, double thickness);

/// Rectangle footprint (counterclockwise) centered at `center` with the given
/// width (x) and depth (z), rotated by `yaw_degrees` about y.
Polygon2 rectangle(Vec2 center, double width, double depth, double yaw_degrees = 0.0);

}  // namespace sthl::scene
