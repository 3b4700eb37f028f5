#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sthl/constraints.hpp"
#include "sthl/scene.hpp"

namespace sthl::metrics {

class MetricError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class DimensionError : public MetricError {
 public:
  using MetricError::MetricError;
};

using Matrix = std::vector<std::vector<double>>;

/// Rows are generated items, columns ground-truth items.
struct ConfidenceMatrix {
  Matrix values;
  bool thresholded = false;
  std::size_t rows() const { return values.size(); }
  std::size_t cols() const { return values.empty() ? 0 : values.front().size(); }
};

/// Zeroes every entry below tau and marks the matrix as thresholded.
void apply_threshold(ConfidenceMatrix& m, double tau);

struct MatchScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
};

/// P = TP/(TP+FP), R = TP/(TP+FN), F1 = 2PR/(P+R); each 0 when its
/// denominator is 0.
MatchScores scores_from_counts(std::size_t tp, std::size_t fp, std::size_t fn);

/// 2ab/(a+b); 0 when a+b is 0.
double harmonic_mean(double a, double b);

// ---------------------------------------------------------------------------
// Assignment

using Assignment = std::vector<std::pair<std::size_t, std::size_t>>;  // (row, col), sorted by row

/// Maximum-total one-to-one assignment of a rectangular non-negative matrix.
/// Zero entries are never part of the result.
Assignment hungarian_assign(const Matrix& m);

double assignment_total(const Matrix& m, const Assignment& a);

// ---------------------------------------------------------------------------
// Embeddings

class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::vector<double> embed(std::string_view text) = 0;
};

/// Hashed character trigrams, unit-normalized.
class TrigramEmbedder : public Embedder {
 public:
  explicit TrigramEmbedder(std::size_t dims = 256) : dims_(dims) {}
  std::vector<double> embed(std::string_view text) override;

 private:
  std::size_t dims_;
};

/// Precomputed vectors keyed by text, from lines `key<TAB>v1,v2,...`.
/// Unknown keys go to `fallback` when given, else raise MetricError.
class TableEmbedder : public Embedder {
 public:
  explicit TableEmbedder(std::map<std::string, std::vector<double>> table, std::shared_ptr<Embedder> fallback = nullptr)
      : table_(std::move(table)), fallback_(std::move(fallback)) {}
  static TableEmbedder parse(std::string_view tsv, std::shared_ptr<Embedder> fallback = nullptr,
                             std::string_view source = "embeddings");
  static TableEmbedder load(const std::string& path, std::shared_ptr<Embedder> fallback = nullptr);
  std::vector<double> embed(std::string_view text) override;

 private:
  std::map<std::string, std::vector<double>> table_;
  std::shared_ptr<Embedder> fallback_;
};

/// (cosine + 1) / 2. DimensionError when the lengths differ.
double scaled_dot(const std::vector<double>& a, const std::vector<double>& b);

// ---------------------------------------------------------------------------
// Resemblance

struct ObjectItem {
  std::string name;
  std::string description;
};

struct LayoutItem {
  std::string text;                  // natural-language rendering
  std::vector<std::string> objects;  // object names the constraint mentions
};

struct ObjectMatch {
  ConfidenceMatrix confidence;  // after thresholding
  Assignment assignment;
  MatchScores scores;
};

/// Confidence = harmonic mean of the scaled name and description dot
/// products; entries below tau_o zeroed; one-to-one assignment. TP counts
/// assigned generated objects, FP unassigned generated, FN unassigned truth.
ObjectMatch object_resemblance(const std::vector<ObjectItem>& generated, const std::vector<ObjectItem>& truth,
                               Embedder& embedder, double tau_o);

struct LayoutMatch {
  ConfidenceMatrix confidence;  // after both zeroing rules
  MatchScores scores;
};

/// Case-insensitive whole-token occurrence of `name` in `text` (multi-word
/// names must appear as a contiguous token run).
bool mentions(std::string_view text, std::string_view name);

/// Scaled dot products; an entry is zeroed when no object of the truth
/// constraint is mentioned by the generated text, or when it is below tau_l.
/// TP counts truth constraints with a nonzero entry, FP generated ones
/// without, FN truth ones without.
LayoutMatch layout_resemblance(const std::vector<LayoutItem>& generated, const std::vector<LayoutItem>& truth,
                               Embedder& embedder, double tau_l);

/// Pairwise harmonic means of precision, recall and F1. Counts are the sums
/// of both inputs.
MatchScores overall_resemblance(const MatchScores& objects, const MatchScores& layout);

// ---------------------------------------------------------------------------
// Programs

/// Objects of a compiled program: name is the category, description its
/// color, material and features followed by the category.
std::vector<ObjectItem> object_items(const constraints::CompiledProgram& p);

/// Explicit constraints of a compiled program as printed assertions, naming
/// the categories of their objects.
std::vector<LayoutItem> layout_items(const constraints::CompiledProgram& p);

struct ProgramComparison {
  ObjectMatch objects;
  LayoutMatch layout;
  MatchScores overall;
};

/// Object resemblance at tau_o, layout resemblance at tau_l.
ProgramComparison compare_programs(const constraints::CompiledProgram& generated,
                                   const constraints::CompiledProgram& truth, Embedder& embedder, double tau_o,
                                   double tau_l);
inline ProgramComparison compare_programs(const constraints::CompiledProgram& generated,
                                          const constraints::CompiledProgram& truth, Embedder& embedder, double tau) {
  return compare_programs(generated, truth, embedder, tau, tau);
}

/// Satisfied / total constraints of `program_source` (hidden ones included)
/// in `layout`; 1.0 when there are none.
double solution_correctness(std::string_view program_source, const scene::SceneLayout& layout,
                            std::uint64_t seed = 0);
double solution_correctness(const constraints::ConstraintSet& cs, const scene::SceneLayout& layout);

std::string format_scores(std::string_view label, const MatchScores& s);

}  // namespace sthl::metrics
