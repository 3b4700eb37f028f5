#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sthl/geometry.hpp"
#include "sthl/scene.hpp"

namespace sthl::assets {

class AssetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class WeightError : public AssetError {
 public:
  using AssetError::AssetError;
};
class NoAssetError : public AssetError {
 public:
  using AssetError::AssetError;
};
class IndexFormatError : public AssetError {
 public:
  using AssetError::AssetError;
};

inline constexpr double kDefaultTau = 0.652;
inline constexpr double kDefaultVisualWeight = 100.0;
inline constexpr double kDefaultSemanticWeight = 1.0;

// ---------------------------------------------------------------------------
// Queries

enum class QueryKind { Object, Floor, Wall };

struct AssetQuery {
  QueryKind kind = QueryKind::Object;
  std::string text;
  std::string color;
  std::string category;
  std::string material;
  std::string features;
};

/// `a 3D model of a <color> <category> made with <material> that is <features>`,
/// empty fields left out.
AssetQuery object_query(std::string_view color, std::string_view category, std::string_view material,
                        std::string_view features);
AssetQuery object_query(const scene::SceneObject& obj);

/// `a <color> floor made of <material> that is <features>` (or wall).
AssetQuery texture_query(QueryKind surface, std::string_view color, std::string_view material,
                         std::string_view features);

// ---------------------------------------------------------------------------
// Database and providers

struct Candidate {
  std::string id;
  std::string model_path;
  std::string thumbnail_path;
  std::string description;
  std::optional<Vec3> native_extents;  // model bounding box, when known
};

/// Tab-separated `id model_path thumbnail_path description [x,y,z]`.
/// Blank lines and lines starting with '#' are skipped.
std::vector<Candidate> parse_index(std::string_view text, std::string_view source = "index");
std::vector<Candidate> load_index(const std::string& path);

/// Similarity of a candidate to a query, both scores in [0, 1].
class SimilarityProvider {
 public:
  virtual ~SimilarityProvider() = default;
  virtual double visual(const Candidate& c, const AssetQuery& q) = 0;
  virtual double semantic(const Candidate& c, const AssetQuery& q) = 0;
};

/// Pseudo-scores from a hash of (channel, candidate id, query text).
class HashSimilarityProvider : public SimilarityProvider {
 public:
  explicit HashSimilarityProvider(std::uint64_t salt = 0) : salt_(salt) {}
  double visual(const Candidate& c, const AssetQuery& q) override;
  double semantic(const Candidate& c, const AssetQuery& q) override;

 private:
  double score(std::string_view channel, const Candidate& c, const AssetQuery& q) const;
  std::uint64_t salt_;
};

/// Trigram cosine of the query against the description (semantic) and the
/// thumbnail file name (visual), clamped to [0, 1].
class TrigramSimilarityProvider : public SimilarityProvider {
 public:
  double visual(const Candidate& c, const AssetQuery& q) override;
  double semantic(const Candidate& c, const AssetQuery& q) override;
};

struct AssetHandle {
  std::string ref;
  std::optional<Vec3> native_extents;
};

class AssetGenerator {
 public:
  virtual ~AssetGenerator() = default;
  virtual AssetHandle generate(const AssetQuery& q) = 0;
};

/// Stand-in for a text-to-3D model: names a unit-cube asset after the query.
class PlaceholderGenerator : public AssetGenerator {
 public:
  AssetHandle generate(const AssetQuery& q) override;
};

// ---------------------------------------------------------------------------
// Decisions

struct Weights {
  double visual = kDefaultVisualWeight;
  double semantic = kDefaultSemanticWeight;
};

/// (λv·visual + λt·semantic) / (λv + λt). WeightError when a weight is
/// negative or both are zero.
double score_retrieval(const Candidate& c, const AssetQuery& q, const Weights& w, SimilarityProvider& provider);

enum class Verdict { Retrieved, Generated };
std::string_view to_string(Verdict v);

struct AssetDecision {
  AssetQuery query;
  std::string best_id;      // empty when the database is empty
  double best_score = 0.0;
  Verdict verdict = Verdict::Retrieved;
  AssetHandle asset;
  bool below_threshold = false;  // retrieved although best_score < tau (no generator)
};

/// Best candidate by score (first on ties). Retrieved when its score is at
/// least tau, else generated; without a generator the best candidate is kept
/// and flagged. NoAssetError when there is nothing to return.
AssetDecision decide(const AssetQuery& q, const std::vector<Candidate>& db, double tau, const Weights& w,
                     SimilarityProvider& provider, AssetGenerator* generator);

struct ObjectDecision {
  std::string object;
  AssetDecision decision;
};

/// One decision per object, in layout order.
std::vector<ObjectDecision> decide_all(const scene::SceneLayout& layout, const std::vector<Candidate>& db, double tau,
                                       const Weights& w, SimilarityProvider& provider, AssetGenerator* generator);

// ---------------------------------------------------------------------------
// Canonical orientation

inline constexpr std::array<double, 4> kOrientationAngles{0.0, 90.0, 180.0, 270.0};

struct AxisCheck {
  char axis = 'x';
  std::array<double, 4> angles = kOrientationAngles;
  int grid_rows = 2;
  int grid_cols = 2;
  double chosen = 0.0;
};

struct OrientationPlan {
  std::string asset;
  std::vector<AxisCheck> checks;  // x, then z, then y
  Vec3 correction;                // degrees about x, y, z
};

/// Picks one of the four renders of an axis, given the corrections so far.
class OrientationProvider {
 public:
  virtual ~OrientationProvider() = default;
  virtual double choose(const AssetHandle& asset, char axis, const std::array<double, 4>& angles,
                        const Vec3& correction_so_far) = 0;
};

OrientationPlan orientation_check_plan(const AssetHandle& asset, OrientationProvider* provider = nullptr);

}  // namespace sthl::assets
