#include "sthl/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "sthl/text.hpp"

namespace sthl::metrics {
namespace {

void check_rectangular(const Matrix& m) {
  for (const auto& row : m) {
    if (row.size() != m.front().size()) throw DimensionError("confidence matrix rows differ in length");
  }
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

void apply_threshold(ConfidenceMatrix& m, double tau) {
  for (auto& row : m.values) {
    for (double& v : row) {
      if (v < tau) v = 0.0;
    }
  }
  m.thresholded = true;
}

MatchScores scores_from_counts(std::size_t tp, std::size_t fp, std::size_t fn) {
  MatchScores s;
  s.tp = tp;
  s.fp = fp;
  s.fn = fn;
  const auto t = static_cast<double>(tp);
  s.precision = tp + fp == 0 ? 0.0 : t / static_cast<double>(tp + fp);
  s.recall = tp + fn == 0 ? 0.0 : t / static_cast<double>(tp + fn);
  s.f1 = harmonic_mean(s.precision, s.recall);
  return s;
}

double harmonic_mean(double a, double b) { return a + b == 0.0 ? 0.0 : 2.0 * a * b / (a + b); }

Assignment hungarian_assign(const Matrix& input) {
  if (input.empty() || input.front().empty()) return {};
  check_rectangular(input);
  for (const auto& row : input) {
    for (double v : row) {
      if (!(v >= 0.0)) throw MetricError("assignment matrix must be non-negative");
    }
  }
  // Work on a matrix with no more rows than columns.
  const bool transposed = input.size() > input.front().size();
  Matrix m = input;
  if (transposed) {
    m.assign(input.front().size(), std::vector<double>(input.size()));
    for (std::size_t i = 0; i < input.size(); ++i)
      for (std::size_t j = 0; j < input[i].size(); ++j) m[j][i] = input[i][j];
  }
  const std::size_t n = m.size(), k = m.front().size();
  // Shortest augmenting paths with potentials, minimizing -weight.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(k + 1, 0.0);
  std::vector<std::size_t> match(k + 1, 0), way(k + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    match[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(k + 1, inf);
    std::vector<bool> used(k + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = match[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= k; ++j) {
        if (used[j]) continue;
        const double cur = -m[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= k; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  Assignment out;
  for (std::size_t j = 1; j <= k; ++j) {
    if (match[j] == 0) continue;
    const std::size_t r = match[j] - 1, c = j - 1;
    if (m[r][c] <= 0.0) continue;
    out.emplace_back(transposed ? c : r, transposed ? r : c);
  }
  std::sort(out.begin(), out.end());
  return out;
}

double assignment_total(const Matrix& m, const Assignment& a) {
  double total = 0.0;
  for (const auto& [r, c] : a) total += m.at(r).at(c);
  return total;
}

std::vector<double> TrigramEmbedder::embed(std::string_view s) { return text::trigram_embedding(s, dims_); }

TableEmbedder TableEmbedder::parse(std::string_view tsv, std::shared_ptr<Embedder> fallback, std::string_view source) {
  std::map<std::string, std::vector<double>> table;
  std::size_t line_no = 0;
  std::size_t dims = 0;
  std::istringstream in{std::string(tsv)};
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::normalize_space(line).empty() || line.front() == '#') continue;
    auto fail = [&](const std::string& why) {
      return MetricError(std::string(source) + ":" + std::to_string(line_no) + ": " + why);
    };
    const std::size_t tab = line.rfind('\t');
    if (tab == std::string::npos) throw fail("expected key<TAB>vector");
    std::vector<double> vec;
    std::string_view rest = std::string_view(line).substr(tab + 1);
    while (true) {
      const std::size_t comma = rest.find(',');
      std::string_view part = rest.substr(0, comma);
      while (!part.empty() && part.front() == ' ') part.remove_prefix(1);
      while (!part.empty() && part.back() == ' ') part.remove_suffix(1);
      double x = 0.0;
      const auto res = std::from_chars(part.data(), part.data() + part.size(), x);
      if (part.empty() || res.ec != std::errc() || res.ptr != part.data() + part.size()) {
        throw fail("bad vector component '" + std::string(part) + "'");
      }
      vec.push_back(x);
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (dims == 0) dims = vec.size();
    if (vec.size() != dims) throw DimensionError(std::string(source) + ":" + std::to_string(line_no) +
                                                 ": vector length " + std::to_string(vec.size()) + ", expected " +
                                                 std::to_string(dims));
    table[line.substr(0, tab)] = std::move(vec);
  }
  return TableEmbedder(std::move(table), std::move(fallback));
}

TableEmbedder TableEmbedder::load(const std::string& path, std::shared_ptr<Embedder> fallback) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MetricError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), std::move(fallback), path);
}

std::vector<double> TableEmbedder::embed(std::string_view s) {
  const auto it = table_.find(std::string(s));
  if (it != table_.end()) return it->second;
  if (fallback_) return fallback_->embed(s);
  throw MetricError("no embedding for '" + std::string(s) + "'");
}

double scaled_dot(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) {
    throw DimensionError("embedding lengths differ: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
  return (text::cosine(a, b) + 1.0) / 2.0;
}

ObjectMatch object_resemblance(const std::vector<ObjectItem>& generated, const std::vector<ObjectItem>& truth,
                               Embedder& embedder, double tau_o) {
  std::vector<std::vector<double>> gn, gd, tn, td;
  for (const auto& o : generated) {
    gn.push_back(embedder.embed(o.name));
    gd.push_back(embedder.embed(o.description));
  }
  for (const auto& o : truth) {
    tn.push_back(embedder.embed(o.name));
    td.push_back(embedder.embed(o.description));
  }
  ObjectMatch out;
  out.confidence.values.assign(generated.size(), std::vector<double>(truth.size(), 0.0));
  for (std::size_t i = 0; i < generated.size(); ++i) {
    for (std::size_t j = 0; j < truth.size(); ++j) {
      out.confidence.values[i][j] = harmonic_mean(scaled_dot(gn[i], tn[j]), scaled_dot(gd[i], td[j]));
    }
  }
  apply_threshold(out.confidence, tau_o);
  out.assignment = hungarian_assign(out.confidence.values);
  const std::size_t tp = out.assignment.size();
  out.scores = scores_from_counts(tp, generated.size() - tp, truth.size() - tp);
  return out;
}

bool mentions(std::string_view haystack, std::string_view name) {
  const auto hay = text::tokens(haystack);
  const auto needle = text::tokens(name);
  if (needle.empty() || needle.size() > hay.size()) return false;
  for (std::size_t i = 0; i + needle.size() <= hay.size(); ++i) {
    if (std::equal(needle.begin(), needle.end(), hay.begin() + static_cast<std::ptrdiff_t>(i))) return true;
  }
  return false;
}

LayoutMatch layout_resemblance(const std::vector<LayoutItem>& generated, const std::vector<LayoutItem>& truth,
                               Embedder& embedder, double tau_l) {
  std::vector<std::vector<double>> ge, te;
  for (const auto& c : generated) ge.push_back(embedder.embed(c.text));
  for (const auto& c : truth) te.push_back(embedder.embed(c.text));
  LayoutMatch out;
  out.confidence.values.assign(generated.size(), std::vector<double>(truth.size(), 0.0));
  for (std::size_t i = 0; i < generated.size(); ++i) {
    for (std::size_t j = 0; j < truth.size(); ++j) {
      const bool named = std::any_of(truth[j].objects.begin(), truth[j].objects.end(),
                                     [&](const std::string& n) { return mentions(generated[i].text, n); });
      const double s = scaled_dot(ge[i], te[j]);
      out.confidence.values[i][j] = named ? s : 0.0;
    }
  }
  apply_threshold(out.confidence, tau_l);
  std::size_t tp = 0, fp = 0;
  for (std::size_t j = 0; j < truth.size(); ++j) {
    bool hit = false;
    for (std::size_t i = 0; i < generated.size(); ++i) hit = hit || out.confidence.values[i][j] > 0.0;
    tp += hit ? 1 : 0;
  }
  for (std::size_t i = 0; i < generated.size(); ++i) {
    const auto& row = out.confidence.values[i];
    fp += std::all_of(row.begin(), row.end(), [](double v) { return v == 0.0; }) ? 1 : 0;
  }
  out.scores = scores_from_counts(tp, fp, truth.size() - tp);
  return out;
}

MatchScores overall_resemblance(const MatchScores& objects, const MatchScores& layout) {
  MatchScores s;
  s.precision = harmonic_mean(objects.precision, layout.precision);
  s.recall = harmonic_mean(objects.recall, layout.recall);
  s.f1 = harmonic_mean(objects.f1, layout.f1);
  s.tp = objects.tp + layout.tp;
  s.fp = objects.fp + layout.fp;
  s.fn = objects.fn + layout.fn;
  return s;
}

std::vector<ObjectItem> object_items(const constraints::CompiledProgram& p) {
  std::vector<ObjectItem> out;
  for (const auto& o : p.layout.objects) {
    out.push_back({o.category, text::normalize_space(o.color + " " + o.material + " " + o.features + " " + o.category)});
  }
  return out;
}

std::vector<LayoutItem> layout_items(const constraints::CompiledProgram& p) {
  std::vector<LayoutItem> out;
  for (const auto& c : p.constraints.constraints) {
    if (c.provenance != constraints::Provenance::Explicit) continue;
    LayoutItem item{constraints::print(c), {}};
    for (const auto& id : c.involved_objects) {
      const scene::SceneObject* o = p.layout.find_object(id);
      const std::string name = o != nullptr ? o->category : constraints::category_from_id(id);
      if (std::find(item.objects.begin(), item.objects.end(), name) == item.objects.end()) item.objects.push_back(name);
    }
    out.push_back(std::move(item));
  }
  return out;
}

ProgramComparison compare_programs(const constraints::CompiledProgram& generated,
                                   const constraints::CompiledProgram& truth, Embedder& embedder, double tau_o,
                                   double tau_l) {
  ProgramComparison out;
  out.objects = object_resemblance(object_items(generated), object_items(truth), embedder, tau_o);
  out.layout = layout_resemblance(layout_items(generated), layout_items(truth), embedder, tau_l);
  out.overall = overall_resemblance(out.objects.scores, out.layout.scores);
  return out;
}

double solution_correctness(const constraints::ConstraintSet& cs, const scene::SceneLayout& layout) {
  constraints::EvalContext ctx;
  ctx.layout = layout;
  return constraints::satisfaction_ratio(cs, ctx);
}

double solution_correctness(std::string_view program_source, const scene::SceneLayout& layout, std::uint64_t seed) {
  return solution_correctness(constraints::compile_source(program_source, seed).constraints, layout);
}

std::string format_scores(std::string_view label, const MatchScores& s) {
  return std::string(label) + " precision " + fmt(s.precision) + " recall " + fmt(s.recall) + " f1 " + fmt(s.f1) +
         " tp " + std::to_string(s.tp) + " fp " + std::to_string(s.fp) + " fn " + std::to_string(s.fn) + "\n";
}

}  // namespace sthl::metrics
