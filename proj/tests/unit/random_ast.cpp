#include "random_ast.hpp"

#include <cmath>
#include <random>
#include <string>
#include <vector>

namespace sthl::testing {

using namespace sthl::dsl;

namespace {

enum class Want { Number, Degree, Bool, Vector3, Rotation, Color, Material, String };

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  Program run(int n) {
    Program p;
    const int objects = pick(1, 4);
    const int regions = pick(1, 2);
    for (int i = 0; i < regions; ++i) declare(p, DeclKind::Region, "room" + std::to_string(i), std::nullopt);
    for (int i = 0; i < objects; ++i) declare(p, DeclKind::Object, "obj" + std::to_string(i), std::nullopt);
    static const ValueType kTypes[] = {ValueType::Number, ValueType::Degree, ValueType::Bool, ValueType::Vector3,
                                       ValueType::Rotation, ValueType::Color, ValueType::Material};
    for (ValueType t : kTypes) {
      if (coin()) declare(p, DeclKind::Variable, "v_" + std::string(to_string(t)), t);
    }
    for (int i = 0; i < n; ++i) p.statements.push_back(statement());
    return p;
  }

 private:
  int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(rng_); }

  template <typename T>
  const T& choose(const std::vector<T>& v) {
    return v[static_cast<std::size_t>(pick(0, static_cast<int>(v.size()) - 1))];
  }

  void declare(Program& p, DeclKind kind, std::string id, std::optional<ValueType> t) {
    p.statements.push_back({Declaration{kind, id, t}, {}});
    if (kind == DeclKind::Object) objects_.push_back(id);
    if (kind == DeclKind::Region) regions_.push_back(id);
    if (kind == DeclKind::Variable) vars_.emplace_back(id, *t);
  }

  std::optional<std::string> var_of(ValueType t) {
    for (const auto& [id, vt] : vars_) {
      if (vt == t) return id;
    }
    return std::nullopt;
  }

  double number() {
    switch (pick(0, 3)) {
      case 0: return pick(-20, 20);
      case 1: return pick(-2000, 2000) / 100.0;
      case 2: return std::uniform_real_distribution<double>(-1e3, 1e3)(rng_);
      default: return std::ldexp(std::uniform_real_distribution<double>(0.5, 1.0)(rng_), pick(-30, 30));
    }
  }

  std::string text() {
    static const std::vector<std::string> words{"red", "oak", "plush and modern", "a \"quoted\" word",
                                                "back\\slash", "tab\there", "", "matte white"};
    return choose(words);
  }

  ExprPtr expr(Want w, int depth) {
    const bool leaf = depth <= 0 || coin(0.35);
    switch (w) {
      case Want::Number: {
        if (leaf) {
          switch (pick(0, 2)) {
            case 0: return make_number(number());
            case 1:
              if (auto v = var_of(ValueType::Number)) return make_ident(*v);
              return make_number(number());
            default:
              return make_property(choose(objects_), {coin() ? "pos" : "scale", choose(comps())});
          }
        }
        switch (pick(0, 2)) {
          case 0: return make_binary(static_cast<BinaryOp>(pick(0, 3)), expr(Want::Number, depth - 1), expr(Want::Number, depth - 1));
          case 1: return make_call(Builtin::Rand, {const_number(depth - 1), const_number(depth - 1)});
          default: return make_call(Builtin::Dot, {expr(Want::Vector3, depth - 1), expr(Want::Vector3, depth - 1)});
        }
      }
      case Want::Degree: {
        if (leaf) {
          if (auto v = var_of(ValueType::Degree); v && coin()) return make_ident(*v);
          return make_property(coin() ? choose(objects_) : choose(regions_), {"rot", choose(comps())});
        }
        return make_binary(coin() ? BinaryOp::Add : BinaryOp::Sub, expr(Want::Degree, depth - 1), expr(Want::Number, depth - 1));
      }
      case Want::Vector3: {
        if (leaf) {
          switch (pick(0, 2)) {
            case 0:
              if (auto v = var_of(ValueType::Vector3)) return make_ident(*v);
              [[fallthrough]];
            case 1: return make_property(coin() ? choose(objects_) : choose(regions_), {coin() ? "pos" : "scale"});
            default: return make_call(Builtin::Vec3, {make_number(number()), make_number(number()), make_number(number())});
          }
        }
        switch (pick(0, 4)) {
          case 0: return make_binary(coin() ? BinaryOp::Add : BinaryOp::Sub, expr(Want::Vector3, depth - 1), expr(Want::Vector3, depth - 1));
          case 1: return make_binary(BinaryOp::Mul, expr(Want::Vector3, depth - 1), expr(Want::Number, depth - 1));
          case 2: return make_binary(BinaryOp::Mul, expr(Want::Number, depth - 1), expr(Want::Vector3, depth - 1));
          case 3: return make_binary(BinaryOp::Div, expr(Want::Vector3, depth - 1), expr(Want::Number, depth - 1));
          default:
            return make_call(Builtin::Vec3, {expr(Want::Number, depth - 1), expr(Want::Number, depth - 1), expr(Want::Degree, depth - 1)});
        }
      }
      case Want::Rotation: {
        if (auto v = var_of(ValueType::Rotation); v && coin(0.3)) return make_ident(*v);
        if (coin(0.3)) return make_property(choose(objects_), {"rot"});
        return make_call(Builtin::Rot, {expr(Want::Degree, depth - 1), make_number(pick(0, 3) * 90), expr(Want::Number, depth - 1)});
      }
      case Want::Color:
        if (auto v = var_of(ValueType::Color); v && coin()) return make_ident(*v);
        if (coin()) return make_property(choose(objects_), {"color"});
        return make_string(text());
      case Want::Material:
        if (auto v = var_of(ValueType::Material); v && coin()) return make_ident(*v);
        if (coin()) return make_property(choose(objects_), {"material"});
        return make_string(text());
      case Want::String:
        if (coin()) return make_property(choose(objects_), {"features"});
        return make_string(text());
      case Want::Bool:
        return make_ident(*var_of(ValueType::Bool));
    }
    return make_number(0);
  }

  ExprPtr const_number(int depth) {
    if (depth <= 0 || coin(0.6)) return make_number(number());
    return make_binary(static_cast<BinaryOp>(pick(0, 3)), const_number(depth - 1), const_number(depth - 1));
  }

  static const std::vector<std::string>& comps() {
    static const std::vector<std::string> c{"x", "y", "z"};
    return c;
  }

  AssertionPtr assertion(int depth) {
    if (depth <= 0 || coin(0.4)) {
      switch (pick(0, 4)) {
        case 0: return make_inside(choose(objects_), choose(regions_));
        case 1:
          if (var_of(ValueType::Bool)) return make_compare(coin() ? CompareOp::Eq : CompareOp::Ne, expr(Want::Bool, 0), expr(Want::Bool, 0));
          [[fallthrough]];
        case 2: {
          const Want l = coin() ? Want::Color : Want::String;
          return make_compare(coin() ? CompareOp::Eq : CompareOp::Ne, expr(l, 1), expr(coin() ? Want::Material : Want::String, 1));
        }
        default:
          return make_compare(static_cast<CompareOp>(pick(0, 5)), expr(coin() ? Want::Number : Want::Degree, 3),
                              expr(Want::Number, 3));
      }
    }
    switch (pick(0, 2)) {
      case 0: return make_and(assertion(depth - 1), assertion(depth - 1));
      case 1: return make_or(assertion(depth - 1), assertion(depth - 1));
      default: return make_not(assertion(depth - 1));
    }
  }

  Statement statement() {
    switch (pick(0, 5)) {
      case 0:
      case 1:
      case 2: return {ConstraintStmt{ConstraintKind::Assert, assertion(3), {}}, {}};
      case 3:
        if (objects_.size() >= 2) {
          return {ConstraintStmt{ConstraintKind::AllowCollide, nullptr, {objects_[0], objects_[1]}}, {}};
        }
        return {ConstraintStmt{ConstraintKind::AllowOutside, nullptr, {choose(objects_)}}, {}};
      case 4: {
        static const std::vector<std::pair<Property, Want>> props{
            {Property::Color, Want::Color}, {Property::Material, Want::Material}, {Property::Features, Want::String},
            {Property::Pos, Want::Vector3}, {Property::Rot, Want::Rotation},    {Property::Scale, Want::Vector3}};
        auto [prop, want] = choose(props);
        if (is_transform_property(prop) && coin(0.3)) {
          return {Assignment{choose(regions_), prop, expr(want, 2)}, {}};
        }
        return {Assignment{choose(objects_), prop, expr(want, 2)}, {}};
      }
      default: {
        if (vars_.empty()) return {ConstraintStmt{ConstraintKind::AllowOutside, nullptr, {choose(objects_)}}, {}};
        const auto& [id, t] = choose(vars_);
        Want w = static_cast<Want>(static_cast<int>(t));
        if (t == ValueType::Bool) w = Want::Number;
        return {Assignment{id, std::nullopt, expr(w, 2)}, {}};
      }
    }
  }

  std::mt19937_64 rng_;
  std::vector<std::string> objects_;
  std::vector<std::string> regions_;
  std::vector<std::pair<std::string, ValueType>> vars_;
};

}  // namespace

Program random_program(std::uint64_t seed, int statements) { return Gen(seed).run(statements); }

}  // namespace sthl::testing
