#include <algorithm>
#include <cmath>
#include <deque>

#include "sthl/constraints.hpp"

namespace sthl::constraints {

using namespace sthl::dsl;

namespace {

struct Val {
  enum class Kind { Number, Vector, Text } kind = Kind::Number;
  double n = 0.0;
  Vec3 v;
  const std::string* s = nullptr;
};

struct Node {
  enum class Op { Const, ObjProp, RegProp, Add, Sub, Mul, Div, Vec, Dot };
  Op op = Op::Const;
  Val konst;
  std::size_t index = 0;
  Property prop = Property::Pos;
  int comp = -1;
  int a = -1, b = -1, c = -1;
};

struct ANode {
  enum class Op { Cmp, Inside, And, Or, Not, NoCollide, Supported };
  Op op = Op::Cmp;
  CompareOp cmp = CompareOp::Eq;
  int lhs = -1, rhs = -1;  // expression nodes for Cmp, assertion nodes otherwise
  std::size_t object = 0, other = 0, region = 0;
};

int component_of(const std::string& c) { return c == "x" ? 0 : (c == "y" ? 1 : 2); }

}  // namespace

struct Evaluator::Impl {
  ConstraintSet cs;
  scene::SceneLayout layout;
  double tolerance = scene::kSupportTolerance;

  std::vector<scene::OrientedBox> boxes;
  std::vector<double> radius;
  std::vector<std::optional<std::size_t>> object_region;
  std::vector<bool> active;
  std::vector<Polygon2> footprints;  // lazily filled
  std::vector<bool> footprint_valid;

  std::vector<Node> nodes;
  std::vector<ANode> anodes;
  std::vector<int> roots;
  std::vector<std::vector<std::size_t>> objects_of;
  std::vector<std::vector<std::size_t>> affected;
  std::vector<std::size_t> gravity;
  std::vector<bool> verdict;
  std::size_t satisfied = 0;

  std::deque<std::string> text_store;  // stable addresses for constant text

  std::size_t object_index(const std::string& id, std::size_t constraint) const {
    for (std::size_t i = 0; i < layout.objects.size(); ++i) {
      if (layout.objects[i].id == id) return i;
    }
    throw EvalError("constraint " + std::to_string(constraint) + " names object '" + id +
                    "' which is not in the layout");
  }

  std::optional<std::size_t> region_index(const std::string& id) const {
    for (std::size_t i = 0; i < layout.regions.size(); ++i) {
      if (layout.regions[i].id == id) return i;
    }
    return std::nullopt;
  }

  int push(Node n) {
    nodes.push_back(std::move(n));
    return static_cast<int>(nodes.size()) - 1;
  }

  int push(ANode n) {
    anodes.push_back(n);
    return static_cast<int>(anodes.size()) - 1;
  }

  int constant(const Value& v) {
    Node n;
    n.op = Node::Op::Const;
    switch (v.kind) {
      case Value::Kind::Number: n.konst.n = v.number; break;
      case Value::Kind::Vector:
        n.konst.kind = Val::Kind::Vector;
        n.konst.v = v.vector;
        break;
      case Value::Kind::Text:
        text_store.push_back(v.text);
        n.konst.kind = Val::Kind::Text;
        n.konst.s = &text_store.back();
        break;
    }
    return push(std::move(n));
  }

  int bind(const Expr& e, const Bindings& bindings, std::size_t cid) {
    return std::visit(
        [&](const auto& x) -> int {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, NumberLit>) {
            return constant(Value::of(x.value));
          } else if constexpr (std::is_same_v<T, StringLit>) {
            return constant(Value::of(x.value));
          } else if constexpr (std::is_same_v<T, IdentRef>) {
            auto it = bindings.find(x.name);
            if (it == bindings.end()) throw EvalError("variable '" + x.name + "' has no value");
            return constant(it->second);
          } else if constexpr (std::is_same_v<T, BinaryExpr>) {
            Node n;
            n.op = x.op == BinaryOp::Add   ? Node::Op::Add
                   : x.op == BinaryOp::Sub ? Node::Op::Sub
                   : x.op == BinaryOp::Mul ? Node::Op::Mul
                                           : Node::Op::Div;
            n.a = bind(*x.lhs, bindings, cid);
            n.b = bind(*x.rhs, bindings, cid);
            return push(std::move(n));
          } else if constexpr (std::is_same_v<T, CallExpr>) {
            Node n;
            if (x.fn == Builtin::Rand) throw EvalError("rand must be frozen before evaluation");
            if (x.fn == Builtin::Dot) {
              n.op = Node::Op::Dot;
              n.a = bind(*x.args[0], bindings, cid);
              n.b = bind(*x.args[1], bindings, cid);
            } else {
              n.op = Node::Op::Vec;
              n.a = bind(*x.args[0], bindings, cid);
              n.b = bind(*x.args[1], bindings, cid);
              n.c = bind(*x.args[2], bindings, cid);
            }
            return push(std::move(n));
          } else {
            return bind_property(x, bindings, cid);
          }
        },
        e.node);
  }

  int bind_property(const PropertyRef& p, const Bindings& bindings, std::size_t cid) {
    const auto prop = property_from(p.path.at(0));
    const bool is_object = std::any_of(layout.objects.begin(), layout.objects.end(),
                                       [&](const auto& o) { return o.id == p.id; });
    const auto region = region_index(p.id);
    if (!is_object && !region) {
      // A component of a Vector3/Rotation variable.
      auto it = bindings.find(p.id);
      if (it == bindings.end()) throw EvalError("'" + p.id + "' is neither in the layout nor a bound variable");
      if (it->second.kind != Value::Kind::Vector || p.path.size() != 1) {
        throw EvalError("'" + p.id + "." + p.path[0] + "' is not a vector component");
      }
      return constant(Value::of(it->second.vector[component_of(p.path[0])]));
    }
    if (!prop) throw EvalError("'" + p.id + "' has no property " + p.path[0]);
    if (p.path.size() > 2) throw EvalError("property path too deep: " + p.id);
    Node n;
    n.prop = *prop;
    if (p.path.size() == 2) {
      if (!is_transform_property(*prop)) throw EvalError("'" + p.path[0] + "' has no components");
      n.comp = component_of(p.path[1]);
    }
    if (is_object) {
      n.op = Node::Op::ObjProp;
      n.index = object_index(p.id, cid);
    } else {
      if (!is_transform_property(*prop)) throw EvalError("region '" + p.id + "' has no property " + p.path[0]);
      n.op = Node::Op::RegProp;
      n.index = *region;
    }
    return push(std::move(n));
  }

  int bind(const Assertion& a, const Bindings& bindings, std::size_t cid) {
    return std::visit(
        [&](const auto& x) -> int {
          using T = std::decay_t<decltype(x)>;
          ANode n;
          if constexpr (std::is_same_v<T, Comparison>) {
            n.op = ANode::Op::Cmp;
            n.cmp = x.op;
            n.lhs = bind(*x.lhs, bindings, cid);
            n.rhs = bind(*x.rhs, bindings, cid);
          } else if constexpr (std::is_same_v<T, InsidePred>) {
            n.op = ANode::Op::Inside;
            n.object = object_index(x.object, cid);
            auto r = region_index(x.region);
            if (!r) throw EvalError("constraint " + std::to_string(cid) + " names region '" + x.region + "' which is not in the layout");
            n.region = *r;
          } else if constexpr (std::is_same_v<T, NotAssert>) {
            n.op = ANode::Op::Not;
            n.lhs = bind(*x.operand, bindings, cid);
          } else {
            n.op = std::is_same_v<T, AndAssert> ? ANode::Op::And : ANode::Op::Or;
            n.lhs = bind(*x.lhs, bindings, cid);
            n.rhs = bind(*x.rhs, bindings, cid);
          }
          return push(n);
        },
        a.node);
  }

  // -------------------------------------------------------------------------

  Val eval(int idx) const {
    const Node& n = nodes[static_cast<std::size_t>(idx)];
    switch (n.op) {
      case Node::Op::Const: return n.konst;
      case Node::Op::ObjProp: {
        const scene::SceneObject& o = layout.objects[n.index];
        return property(n, o.transform, &o);
      }
      case Node::Op::RegProp: return property(n, layout.regions[n.index].frame, nullptr);
      case Node::Op::Add:
      case Node::Op::Sub: {
        const Val l = eval(n.a), r = eval(n.b);
        const double sign = n.op == Node::Op::Add ? 1.0 : -1.0;
        Val out;
        if (l.kind == Val::Kind::Vector) {
          out.kind = Val::Kind::Vector;
          out.v = l.v + r.v * sign;
        } else {
          out.n = l.n + sign * r.n;
        }
        return out;
      }
      case Node::Op::Mul: {
        const Val l = eval(n.a), r = eval(n.b);
        Val out;
        if (l.kind == Val::Kind::Vector) {
          out.kind = Val::Kind::Vector;
          out.v = l.v * r.n;
        } else if (r.kind == Val::Kind::Vector) {
          out.kind = Val::Kind::Vector;
          out.v = r.v * l.n;
        } else {
          out.n = l.n * r.n;
        }
        return out;
      }
      case Node::Op::Div: {
        const Val l = eval(n.a), r = eval(n.b);
        Val out;
        if (l.kind == Val::Kind::Vector) {
          out.kind = Val::Kind::Vector;
          out.v = l.v / r.n;
        } else {
          out.n = l.n / r.n;
        }
        return out;
      }
      case Node::Op::Vec: {
        Val out;
        out.kind = Val::Kind::Vector;
        out.v = {eval(n.a).n, eval(n.b).n, eval(n.c).n};
        return out;
      }
      case Node::Op::Dot: {
        Val out;
        out.n = dot(eval(n.a).v, eval(n.b).v);
        return out;
      }
    }
    return {};
  }

  static Val property(const Node& n, const scene::Transform& t, const scene::SceneObject* o) {
    Val out;
    switch (n.prop) {
      case Property::Color:
      case Property::Material:
      case Property::Features:
        out.kind = Val::Kind::Text;
        out.s = n.prop == Property::Color ? &o->color : n.prop == Property::Material ? &o->material : &o->features;
        return out;
      default: break;
    }
    const Vec3 v = n.prop == Property::Pos ? t.pos : n.prop == Property::Rot ? t.rot : t.scale;
    if (n.comp >= 0) {
      out.n = v[n.comp];
    } else {
      out.kind = Val::Kind::Vector;
      out.v = v;
    }
    return out;
  }

  bool compare(CompareOp op, const Val& l, const Val& r) const {
    if (l.kind == Val::Kind::Text || r.kind == Val::Kind::Text) {
      if (l.kind != r.kind) throw EvalError("text compared with a non-text value");
      const bool eq = *l.s == *r.s;
      if (op == CompareOp::Eq) return eq;
      if (op == CompareOp::Ne) return !eq;
      throw EvalError("text values only support = and !=");
    }
    if (l.kind == Val::Kind::Vector || r.kind == Val::Kind::Vector) throw EvalError("vectors cannot be compared");
    switch (op) {
      case CompareOp::Eq: return std::abs(l.n - r.n) <= kEqualityTolerance;
      case CompareOp::Ne: return !(std::abs(l.n - r.n) <= kEqualityTolerance);
      case CompareOp::Lt: return l.n < r.n;
      case CompareOp::Le: return l.n <= r.n;
      case CompareOp::Gt: return l.n > r.n;
      case CompareOp::Ge: return l.n >= r.n;
    }
    return false;
  }

  const Polygon2& footprint(std::size_t i) {
    if (!footprint_valid[i]) {
      footprints[i] = boxes[i].footprint();
      footprint_valid[i] = true;
    }
    return footprints[i];
  }

  bool supported(std::size_t i) {
    const double bottom = boxes[i].min_y();
    if (object_region[i] && std::abs(bottom - layout.regions[*object_region[i]].floor_y) <= tolerance) return true;
    double area = -1.0;
    for (std::size_t j = 0; j < boxes.size(); ++j) {
      if (j == i || !active[j]) continue;
      if (std::abs(bottom - boxes[j].max_y()) > tolerance) continue;
      const Vec3 d = boxes[j].center - boxes[i].center;
      if (d.x * d.x + d.z * d.z > (radius[i] + radius[j]) * (radius[i] + radius[j])) continue;
      const Polygon2& fp = footprint(i);
      if (area < 0) area = std::abs(signed_area(fp));
      if (scene::footprint_overlap(fp, footprint(j)) >= scene::kSupportOverlapFraction * area - 1e-9) return true;
    }
    return false;
  }

  bool holds(int idx) {
    const ANode& n = anodes[static_cast<std::size_t>(idx)];
    switch (n.op) {
      case ANode::Op::Cmp: return compare(n.cmp, eval(n.lhs), eval(n.rhs));
      case ANode::Op::Inside: return scene::inside(boxes[n.object], layout.regions[n.region]);
      case ANode::Op::And: return holds(n.lhs) && holds(n.rhs);
      case ANode::Op::Or: return holds(n.lhs) || holds(n.rhs);
      case ANode::Op::Not: return !holds(n.lhs);
      case ANode::Op::NoCollide: {
        const Vec3 d = boxes[n.object].center - boxes[n.other].center;
        const double reach = radius[n.object] + radius[n.other];
        if (dot(d, d) >= reach * reach) return true;
        return !scene::collides(boxes[n.object], boxes[n.other]);
      }
      case ANode::Op::Supported: return supported(n.object);
    }
    return false;
  }

  void refresh_box(std::size_t i) {
    boxes[i] = scene::world_box(layout.objects[i]);
    radius[i] = length(boxes[i].half);
    footprint_valid[i] = false;
  }

  void recompute(std::size_t k) {
    const bool v = holds(roots[k]);
    if (v != verdict[k]) {
      verdict[k] = v;
      if (v) {
        ++satisfied;
      } else {
        --satisfied;
      }
    }
  }

  void recompute_all() {
    satisfied = 0;
    for (std::size_t k = 0; k < roots.size(); ++k) {
      verdict[k] = holds(roots[k]);
      satisfied += verdict[k];
    }
  }
};

Evaluator::Evaluator(const ConstraintSet& cs, scene::SceneLayout layout, const Bindings& bindings,
                     double support_tolerance)
    : impl_(std::make_unique<Impl>()) {
  Impl& m = *impl_;
  m.cs = cs;
  m.layout = std::move(layout);
  m.tolerance = support_tolerance;
  const std::size_t n = m.layout.objects.size();
  m.boxes.resize(n);
  m.radius.resize(n);
  m.active.assign(n, true);
  m.footprints.resize(n);
  m.footprint_valid.assign(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    m.refresh_box(i);
    m.object_region.push_back(m.region_index(m.layout.objects[i].region));
  }
  m.affected.resize(n);
  for (std::size_t k = 0; k < m.cs.constraints.size(); ++k) {
    const CompiledConstraint& c = m.cs.constraints[k];
    std::vector<std::size_t> objs;
    for (const auto& id : c.involved_objects) objs.push_back(m.object_index(id, c.id));
    if (auto a = std::get_if<AssertionPtr>(&c.body)) {
      m.roots.push_back(m.bind(**a, bindings, c.id));
    } else if (auto nc = std::get_if<NoCollide>(&c.body)) {
      ANode node;
      node.op = ANode::Op::NoCollide;
      node.object = m.object_index(nc->a, c.id);
      node.other = m.object_index(nc->b, c.id);
      m.roots.push_back(m.push(node));
    } else {
      ANode node;
      node.op = ANode::Op::Supported;
      node.object = m.object_index(std::get<Supported>(c.body).object, c.id);
      m.roots.push_back(m.push(node));
      m.gravity.push_back(k);
    }
    if (!std::holds_alternative<Supported>(c.body)) {
      for (std::size_t o : objs) m.affected[o].push_back(k);
    }
    m.objects_of.push_back(std::move(objs));
  }
  for (auto& list : m.affected) {
    list.insert(list.end(), m.gravity.begin(), m.gravity.end());
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
  m.verdict.assign(m.roots.size(), false);
  m.recompute_all();
}

Evaluator::~Evaluator() = default;
Evaluator::Evaluator(Evaluator&&) noexcept = default;
Evaluator& Evaluator::operator=(Evaluator&&) noexcept = default;

const scene::SceneLayout& Evaluator::layout() const { return impl_->layout; }
const ConstraintSet& Evaluator::constraints() const { return impl_->cs; }
std::size_t Evaluator::size() const { return impl_->roots.size(); }
bool Evaluator::satisfied(std::size_t index) const { return impl_->verdict.at(index); }
std::size_t Evaluator::satisfied_count() const { return impl_->satisfied; }
std::vector<bool> Evaluator::verdicts() const { return impl_->verdict; }

double Evaluator::ratio() const {
  if (impl_->roots.empty()) return 1.0;
  return static_cast<double>(impl_->satisfied) / static_cast<double>(impl_->roots.size());
}

std::optional<std::size_t> Evaluator::object_index(std::string_view id) const {
  const auto& objs = impl_->layout.objects;
  for (std::size_t i = 0; i < objs.size(); ++i) {
    if (objs[i].id == id) return i;
  }
  return std::nullopt;
}

const scene::OrientedBox& Evaluator::box(std::size_t object) const { return impl_->boxes.at(object); }
const std::vector<std::size_t>& Evaluator::affected_by(std::size_t object) const { return impl_->affected.at(object); }
const std::vector<std::size_t>& Evaluator::objects_of(std::size_t index) const { return impl_->objects_of.at(index); }

void Evaluator::set_transform(std::size_t object, const scene::Transform& t) {
  Impl& m = *impl_;
  m.layout.objects.at(object).transform = t;
  m.refresh_box(object);
  for (std::size_t k : m.affected[object]) m.recompute(k);
}

std::size_t Evaluator::score_move(std::size_t object, const scene::Transform& t) {
  const scene::Transform old = impl_->layout.objects.at(object).transform;
  set_transform(object, t);
  const std::size_t score = impl_->satisfied;
  set_transform(object, old);
  return score;
}

void Evaluator::set_active(std::size_t object, bool on) {
  Impl& m = *impl_;
  if (m.active.at(object) == on) return;
  m.active[object] = on;
  for (std::size_t k : m.gravity) m.recompute(k);
}

bool Evaluator::active(std::size_t object) const { return impl_->active.at(object); }

std::size_t Evaluator::active_violations() const {
  const Impl& m = *impl_;
  std::size_t count = 0;
  for (std::size_t k = 0; k < m.roots.size(); ++k) {
    if (m.verdict[k]) continue;
    bool all = true;
    for (std::size_t o : m.objects_of[k]) all = all && m.active[o];
    count += all;
  }
  return count;
}

// ---------------------------------------------------------------------------

Value evaluate(const Expr& expr, const EvalContext& ctx) {
  Evaluator::Impl m;
  m.layout = ctx.layout;
  const int root = m.bind(expr, ctx.bindings, 0);
  const Val v = m.eval(root);
  switch (v.kind) {
    case Val::Kind::Number: return Value::of(v.n);
    case Val::Kind::Vector: return Value::of(v.v);
    case Val::Kind::Text: return Value::of(*v.s);
  }
  return {};
}

bool evaluate(const CompiledConstraint& c, const EvalContext& ctx) {
  ConstraintSet one;
  one.constraints.push_back(c);
  return Evaluator(one, ctx.layout, ctx.bindings, ctx.support_tolerance).satisfied(0);
}

std::vector<bool> verdicts(const ConstraintSet& cs, const EvalContext& ctx) {
  return Evaluator(cs, ctx.layout, ctx.bindings, ctx.support_tolerance).verdicts();
}

double satisfaction_ratio(const ConstraintSet& cs, const EvalContext& ctx) {
  return Evaluator(cs, ctx.layout, ctx.bindings, ctx.support_tolerance).ratio();
}

}  // namespace sthl::constraints
