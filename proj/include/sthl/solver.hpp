#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "sthl/constraints.hpp"
#include "sthl/rng.hpp"
#include "sthl/scene.hpp"

namespace sthl::solver {

class PlacementError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SolverConfig {
  int batch_size = 3;      // k
  int max_iterations = 5;  // T
  std::uint64_t seed = 0;
  int moves_per_proposal = 8;
  int candidate_samples = 64;
  double translation_step = 0.1;
  std::vector<double> rotation_steps{0.0, 90.0, 180.0, 270.0};
  int relaxation_sweeps = 32;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

enum class Termination { AllSatisfied, IterationLimit };
std::string_view to_string(Termination t);

struct IterationRecord {
  int index = 0;                           // 0 is the relaxed initial layout
  std::vector<std::size_t> batch;          // constraint ids selected (empty for 0)
  std::vector<std::string> involved;       // objects the batch may move
  std::vector<std::string> moved;          // objects whose transform changed
  scene::SceneLayout layout;               // snapshot after the iteration
  std::vector<std::size_t> unsatisfied;    // constraint ids violated in `layout`
  double ratio = 1.0;
  double best_ratio = 1.0;                 // running maximum up to this record
};

struct SolveReport {
  std::vector<IterationRecord> iterations;
  std::size_t best_iteration = 0;  // earliest record with the maximum ratio
  scene::SceneLayout best_layout;
  double best_ratio = 1.0;
  std::vector<bool> best_verdicts;
  Termination terminated = Termination::IterationLimit;
};

/// Per-iteration ratios, batches, termination and the verdict table of the
/// best layout. Stable text; equal reports print identically.
std::string format_report(const SolveReport& report, const constraints::ConstraintSet& cs);

// ---------------------------------------------------------------------------
// Algorithm steps

/// Greedy seeded placement, largest footprint first. Each object tries its
/// declared transform plus `candidate_samples` random positions in its region
/// (and resting spots on already placed objects) and keeps the one with the
/// fewest violations among constraints whose objects are all placed.
scene::SceneLayout initial_placement(const scene::SceneLayout& layout, const constraints::ConstraintSet& cs,
                                     const SolverConfig& cfg, Rng& rng);

/// Drops unsupported objects onto the nearest surface below, then separates
/// colliding pairs along the minimum-translation axis (even split; a vertical
/// push lifts only the upper object) for up to `relaxation_sweeps` sweeps.
/// Objects are kept within their regions after every sweep.
scene::SceneLayout physics_relaxation(const scene::SceneLayout& layout, const constraints::ConstraintSet& cs,
                                      const SolverConfig& cfg);

/// Consecutive-iteration bookkeeping for staleness promotion.
struct BatchHistory {
  /// constraint id -> iterations it has been unsatisfied without being batched
  std::map<std::size_t, int> waiting;
  void record(const std::vector<std::size_t>& unsatisfied, const std::vector<std::size_t>& batch);
};

inline constexpr int kStalenessLimit = 2;

/// min(k, |unsatisfied|) constraint ids: stale ones first, then by
/// (number of involved objects, id).
std::vector<std::size_t> select_batch(const std::vector<std::size_t>& unsatisfied, std::size_t k,
                                      const constraints::ConstraintSet& cs, const BatchHistory& history);

/// Objects named by the batch constraints, in declaration order.
std::vector<std::size_t> batch_objects(const constraints::Evaluator& ev, const std::vector<std::size_t>& batch);

/// Greedy single-object moves over the batch's objects, scored by the global
/// satisfied count. Never lowers that count; moves only batch objects.
void local_search(constraints::Evaluator& ev, const std::vector<std::size_t>& batch, const SolverConfig& cfg,
                  Rng& rng);

scene::SceneLayout local_search_batch_solve(const scene::SceneLayout& layout, const std::vector<std::size_t>& batch,
                                            const constraints::ConstraintSet& cs, const SolverConfig& cfg, Rng& rng);

/// Smallest translation bringing the object's footprint into its region and
/// its vertical span between floor and ceiling. nullopt when already inside.
std::optional<scene::Transform> clamp_into_region(const scene::SceneObject& obj, const scene::Region& region);

/// Applies clamp_into_region to every object without allowOutside.
scene::SceneLayout enforce_bounds(const scene::SceneLayout& layout, const constraints::ConstraintSet& cs);

// ---------------------------------------------------------------------------
// Batch solver slot

class BatchSolver {
 public:
  virtual ~BatchSolver() = default;
  /// Adjusted layout for the batch (constraint ids). Changes to objects the
  /// batch does not name are discarded by the caller.
  virtual scene::SceneLayout propose(const scene::SceneLayout& layout, const std::vector<std::size_t>& batch,
                                     const constraints::ConstraintSet& cs) = 0;
};

class LocalSearchSolver : public BatchSolver {
 public:
  LocalSearchSolver(SolverConfig cfg, std::uint64_t seed) : cfg_(std::move(cfg)), rng_(seed) {}
  scene::SceneLayout propose(const scene::SceneLayout& layout, const std::vector<std::size_t>& batch,
                             const constraints::ConstraintSet& cs) override;

 private:
  SolverConfig cfg_;
  Rng rng_;
};

/// The full loop. `slot` defaults to seeded local search.
SolveReport solve(const scene::SceneLayout& layout, const constraints::ConstraintSet& cs, const SolverConfig& cfg,
                  BatchSolver* slot = nullptr);

}  // namespace sthl::solver
