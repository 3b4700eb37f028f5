#include "sthl/assets.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "sthl/text.hpp"

namespace sthl::assets {
namespace {

std::string join_words(std::initializer_list<std::string_view> parts) {
  std::string out;
  for (std::string_view p : parts) {
    out += ' ';
    out += p;
  }
  return text::normalize_space(out);
}

std::string clause(std::string_view lead, std::string_view value) {
  if (text::normalize_space(value).empty()) return {};
  return std::string(lead) + " " + std::string(value);
}

double unit_interval(std::uint64_t h) { return static_cast<double>(h >> 11) * 0x1.0p-53; }

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t at = s.find(sep, start);
    out.emplace_back(s.substr(start, at == std::string_view::npos ? std::string_view::npos : at - start));
    if (at == std::string_view::npos) break;
    start = at + 1;
  }
  return out;
}

bool parse_double(std::string_view s, double& out) {
  s = s.substr(0, s.find_last_not_of(" \r") + 1);
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  if (s.empty()) return false;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

std::string base_name(std::string_view path) {
  const std::size_t slash = path.find_last_of("/\\");
  if (slash != std::string_view::npos) path.remove_prefix(slash + 1);
  const std::size_t dot = path.find_last_of('.');
  if (dot != std::string_view::npos && dot > 0) path = path.substr(0, dot);
  return std::string(path);
}

}  // namespace

AssetQuery object_query(std::string_view color, std::string_view category, std::string_view material,
                        std::string_view features) {
  AssetQuery q;
  q.kind = QueryKind::Object;
  q.color = color;
  q.category = category;
  q.material = material;
  q.features = features;
  q.text = join_words({"a 3D model of a", color, category, clause("made with", material), clause("that is", features)});
  return q;
}

AssetQuery object_query(const scene::SceneObject& obj) {
  return object_query(obj.color, obj.category, obj.material, obj.features);
}

AssetQuery texture_query(QueryKind surface, std::string_view color, std::string_view material,
                         std::string_view features) {
  if (surface == QueryKind::Object) throw std::invalid_argument("texture query needs floor or wall");
  AssetQuery q;
  q.kind = surface;
  q.color = color;
  q.category = surface == QueryKind::Floor ? "floor" : "wall";
  q.material = material;
  q.features = features;
  q.text = join_words({"a", color, q.category, clause("made of", material), clause("that is", features)});
  return q;
}

std::vector<Candidate> parse_index(std::string_view text, std::string_view source) {
  std::vector<Candidate> out;
  std::size_t line_no = 0;
  for (const std::string& raw : split(text, '\n')) {
    ++line_no;
    std::string line = raw;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::normalize_space(line).empty() || line.front() == '#') continue;
    const auto fields = split(line, '\t');
    auto fail = [&](const std::string& why) {
      return IndexFormatError(std::string(source) + ":" + std::to_string(line_no) + ": " + why);
    };
    if (fields.size() < 4 || fields.size() > 5) {
      throw fail("expected 4 or 5 tab-separated fields, got " + std::to_string(fields.size()));
    }
    if (fields[0].empty()) throw fail("empty asset id");
    Candidate c{fields[0], fields[1], fields[2], fields[3], std::nullopt};
    if (fields.size() == 5 && !text::normalize_space(fields[4]).empty()) {
      const auto parts = split(fields[4], ',');
      Vec3 e;
      if (parts.size() != 3 || !parse_double(parts[0], e.x) || !parse_double(parts[1], e.y) ||
          !parse_double(parts[2], e.z)) {
        throw fail("extents must be x,y,z");
      }
      if (e.x <= 0.0 || e.y <= 0.0 || e.z <= 0.0) throw fail("extents must be positive");
      c.native_extents = e;
    }
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<Candidate> load_index(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IndexFormatError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_index(ss.str(), path);
}

double HashSimilarityProvider::score(std::string_view channel, const Candidate& c, const AssetQuery& q) const {
  std::uint64_t h = text::fnv1a(channel);
  h = text::fnv1a(std::to_string(salt_), h);
  h = text::fnv1a("\x1f" + c.id, h);
  h = text::fnv1a("\x1f" + q.text, h);
  // final avalanche so nearby inputs spread over [0, 1)
  h ^= h >> 33;
  h *= 0xff51afd7ed558ccdull;
  h ^= h >> 33;
  return unit_interval(h);
}

double HashSimilarityProvider::visual(const Candidate& c, const AssetQuery& q) { return score("visual", c, q); }
double HashSimilarityProvider::semantic(const Candidate& c, const AssetQuery& q) { return score("semantic", c, q); }

double TrigramSimilarityProvider::visual(const Candidate& c, const AssetQuery& q) {
  return clamp01(text::cosine(text::trigram_embedding(base_name(c.thumbnail_path)), text::trigram_embedding(q.text)));
}

double TrigramSimilarityProvider::semantic(const Candidate& c, const AssetQuery& q) {
  return clamp01(text::cosine(text::trigram_embedding(c.description), text::trigram_embedding(q.text)));
}

AssetHandle PlaceholderGenerator::generate(const AssetQuery& q) {
  std::string slug;
  for (const std::string& t : text::tokens(q.text)) {
    if (!slug.empty()) slug += '_';
    slug += t;
  }
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(text::fnv1a(q.text)));
  return AssetHandle{"generated/" + std::string(hex, 8) + "_" + slug.substr(0, 48) + ".glb", Vec3{1.0, 1.0, 1.0}};
}

double score_retrieval(const Candidate& c, const AssetQuery& q, const Weights& w, SimilarityProvider& provider) {
  if (w.visual < 0.0 || w.semantic < 0.0) throw WeightError("similarity weights must be non-negative");
  const double total = w.visual + w.semantic;
  if (!(total > 0.0)) throw WeightError("similarity weights sum to zero");
  const double sv = provider.visual(c, q);
  const double st = provider.semantic(c, q);
  if (sv < 0.0 || sv > 1.0 || st < 0.0 || st > 1.0) {
    throw AssetError("provider score outside [0, 1] for candidate " + c.id);
  }
  return (w.visual * sv + w.semantic * st) / total;
}

std::string_view to_string(Verdict v) { return v == Verdict::Retrieved ? "retrieved" : "generated"; }

AssetDecision decide(const AssetQuery& q, const std::vector<Candidate>& db, double tau, const Weights& w,
                     SimilarityProvider& provider, AssetGenerator* generator) {
  if (db.empty() && generator == nullptr) throw NoAssetError("no candidates and no generator for: " + q.text);
  AssetDecision d;
  d.query = q;
  const Candidate* best = nullptr;
  for (const Candidate& c : db) {
    const double s = score_retrieval(c, q, w, provider);
    if (best == nullptr || s > d.best_score) {
      best = &c;
      d.best_score = s;
    }
  }
  if (best != nullptr) d.best_id = best->id;
  if (best != nullptr && d.best_score >= tau) {
    d.verdict = Verdict::Retrieved;
    d.asset = AssetHandle{best->model_path, best->native_extents};
  } else if (generator != nullptr) {
    d.verdict = Verdict::Generated;
    d.asset = generator->generate(q);
  } else {
    d.verdict = Verdict::Retrieved;
    d.below_threshold = true;
    d.asset = AssetHandle{best->model_path, best->native_extents};
  }
  return d;
}

std::vector<ObjectDecision> decide_all(const scene::SceneLayout& layout, const std::vector<Candidate>& db, double tau,
                                       const Weights& w, SimilarityProvider& provider, AssetGenerator* generator) {
  std::vector<ObjectDecision> out;
  out.reserve(layout.objects.size());
  for (const scene::SceneObject& obj : layout.objects) {
    out.push_back({obj.id, decide(object_query(obj), db, tau, w, provider, generator)});
  }
  return out;
}

OrientationPlan orientation_check_plan(const AssetHandle& asset, OrientationProvider* provider) {
  OrientationPlan plan;
  plan.asset = asset.ref;
  for (char axis : {'x', 'z', 'y'}) {
    AxisCheck check;
    check.axis = axis;
    if (provider != nullptr) {
      check.chosen = provider->choose(asset, axis, check.angles, plan.correction);
      if (std::find(check.angles.begin(), check.angles.end(), check.chosen) == check.angles.end()) {
        throw AssetError(std::string("orientation provider chose an angle outside the plan for axis ") + axis);
      }
    }
    switch (axis) {
      case 'x': plan.correction.x = check.chosen; break;
      case 'y': plan.correction.y = check.chosen; break;
      default: plan.correction.z = check.chosen; break;
    }
    plan.checks.push_back(check);
  }
  return plan;
}

}  // namespace sthl::assets
