#include <algorithm>
#include <cctype>
#include <cmath>

#include "sthl/constraints.hpp"
#include "sthl/dsl/parser.hpp"
#include "sthl/dsl/printer.hpp"
#include "sthl/rng.hpp"

namespace sthl::constraints {

using namespace sthl::dsl;

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::Explicit: return "explicit";
    case Provenance::HiddenCollision: return "hidden-collision";
    case Provenance::HiddenGravity: return "hidden-gravity";
    case Provenance::HiddenBoundary: return "hidden-boundary";
  }
  return "?";
}

const Assertion* CompiledConstraint::assertion() const {
  if (auto a = std::get_if<AssertionPtr>(&body)) return a->get();
  return nullptr;
}

std::string print(const CompiledConstraint& c) {
  if (auto a = c.assertion()) return dsl::print(*a);
  if (auto n = std::get_if<NoCollide>(&c.body)) return "!collides(" + n->a + ", " + n->b + ")";
  return "supported(" + std::get<Supported>(c.body).object + ")";
}

bool ConstraintSet::collision_allowed(std::string_view a, std::string_view b) const {
  std::pair<std::string, std::string> key{std::string(std::min(a, b)), std::string(std::max(a, b))};
  return allow_collide.count(key) > 0;
}

std::size_t ConstraintSet::count(Provenance p) const {
  return static_cast<std::size_t>(
      std::count_if(constraints.begin(), constraints.end(), [p](const auto& c) { return c.provenance == p; }));
}

const CompiledConstraint* ConstraintSet::find(std::size_t id) const {
  for (const auto& c : constraints) {
    if (c.id == id) return &c;
  }
  return nullptr;
}

// ---------------------------------------------------------------------------
// rand freezing

namespace {

std::optional<double> fold_constant(const Expr& e) {
  if (auto n = std::get_if<NumberLit>(&e.node)) return n->value;
  if (auto b = std::get_if<BinaryExpr>(&e.node)) {
    auto l = fold_constant(*b->lhs), r = fold_constant(*b->rhs);
    if (!l || !r) return std::nullopt;
    switch (b->op) {
      case BinaryOp::Add: return *l + *r;
      case BinaryOp::Sub: return *l - *r;
      case BinaryOp::Mul: return *l * *r;
      case BinaryOp::Div: return *l / *r;
    }
  }
  return std::nullopt;
}

class Freezer {
 public:
  explicit Freezer(std::uint64_t seed) : rng_(seed) {}

  ExprPtr expr(const ExprPtr& e) {
    return std::visit(
        [&](const auto& n) -> ExprPtr {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, BinaryExpr>) {
            auto l = expr(n.lhs);
            auto r = expr(n.rhs);
            if (l == n.lhs && r == n.rhs) return e;
            return make_binary(n.op, l, r, e->span);
          } else if constexpr (std::is_same_v<T, CallExpr>) {
            std::vector<ExprPtr> args;
            bool changed = false;
            for (const auto& a : n.args) {
              args.push_back(expr(a));
              changed |= args.back() != a;
            }
            if (n.fn == Builtin::Rand) {
              const auto lo = fold_constant(*args[0]);
              const auto hi = fold_constant(*args[1]);
              if (!lo || !hi) throw EvalError("rand bounds must be constant");
              return make_number(rng_.uniform(std::min(*lo, *hi), std::max(*lo, *hi)), e->span);
            }
            return changed ? make_call(n.fn, std::move(args), e->span) : e;
          } else {
            return e;
          }
        },
        e->node);
  }

  AssertionPtr assertion(const AssertionPtr& a) {
    return std::visit(
        [&](const auto& n) -> AssertionPtr {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, Comparison>) {
            return make_compare(n.op, expr(n.lhs), expr(n.rhs), a->span);
          } else if constexpr (std::is_same_v<T, InsidePred>) {
            return a;
          } else if constexpr (std::is_same_v<T, AndAssert>) {
            auto l = assertion(n.lhs);
            return make_and(l, assertion(n.rhs), a->span);
          } else if constexpr (std::is_same_v<T, OrAssert>) {
            auto l = assertion(n.lhs);
            return make_or(l, assertion(n.rhs), a->span);
          } else {
            return make_not(assertion(n.operand), a->span);
          }
        },
        a->node);
  }

 private:
  Rng rng_;
};

}  // namespace

TypedProgram freeze_random(const TypedProgram& program, std::uint64_t seed) {
  Freezer f(seed);
  Program out;
  for (const Statement& s : program.program.statements) {
    Statement copy = s;
    if (auto c = std::get_if<ConstraintStmt>(&copy.node); c && c->assertion) {
      c->assertion = f.assertion(c->assertion);
    } else if (auto a = std::get_if<Assignment>(&copy.node)) {
      a->value = f.expr(a->value);
    }
    out.statements.push_back(std::move(copy));
  }
  return type_check(out);
}

// ---------------------------------------------------------------------------
// Variable substitution

namespace {

int component_index(const std::string& c) { return c == "x" ? 0 : (c == "y" ? 1 : 2); }

class Substitution {
 public:
  explicit Substitution(const TypedProgram& tp) : tp_(tp) {}

  void bind(const std::string& var, const ExprPtr& value) {
    ExprPtr v = expr(value);
    const Symbol* sym = tp_.find(var);
    if (sym && sym->type == ValueType::Bool) {
      if (auto c = fold_constant(*v)) v = make_number(*c != 0.0 ? 1.0 : 0.0, value->span);
    }
    env_[var] = v;
  }

  ExprPtr expr(const ExprPtr& e) const {
    return std::visit(
        [&](const auto& n) -> ExprPtr {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, IdentRef>) {
            auto it = env_.find(n.name);
            return it == env_.end() ? e : it->second;
          } else if constexpr (std::is_same_v<T, PropertyRef>) {
            if (!is_variable(n.id)) return e;
            auto it = env_.find(n.id);
            if (it == env_.end()) return e;
            return project(it->second, component_index(n.path[0]));
          } else if constexpr (std::is_same_v<T, BinaryExpr>) {
            return make_binary(n.op, expr(n.lhs), expr(n.rhs), e->span);
          } else if constexpr (std::is_same_v<T, CallExpr>) {
            std::vector<ExprPtr> args;
            for (const auto& a : n.args) args.push_back(expr(a));
            return make_call(n.fn, std::move(args), e->span);
          } else {
            return e;
          }
        },
        e->node);
  }

  AssertionPtr assertion(const AssertionPtr& a) const {
    return std::visit(
        [&](const auto& n) -> AssertionPtr {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, Comparison>) {
            return make_compare(n.op, expr(n.lhs), expr(n.rhs), a->span);
          } else if constexpr (std::is_same_v<T, InsidePred>) {
            return a;
          } else if constexpr (std::is_same_v<T, AndAssert>) {
            return make_and(assertion(n.lhs), assertion(n.rhs), a->span);
          } else if constexpr (std::is_same_v<T, OrAssert>) {
            return make_or(assertion(n.lhs), assertion(n.rhs), a->span);
          } else {
            return make_not(assertion(n.operand), a->span);
          }
        },
        a->node);
  }

 private:
  bool is_variable(const std::string& id) const {
    const Symbol* s = tp_.find(id);
    return s && s->kind == SymbolKind::Variable;
  }

  bool is_vector(const Expr& e) const {
    return std::visit(
        [&](const auto& n) -> bool {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, CallExpr>) {
            return n.fn == Builtin::Vec3 || n.fn == Builtin::Rot;
          } else if constexpr (std::is_same_v<T, PropertyRef>) {
            if (is_variable(n.id)) return false;
            return n.path.size() == 1 && is_transform_property(*property_from(n.path[0]));
          } else if constexpr (std::is_same_v<T, IdentRef>) {
            const Symbol* s = tp_.find(n.name);
            return s && (s->type == ValueType::Vector3 || s->type == ValueType::Rotation);
          } else if constexpr (std::is_same_v<T, BinaryExpr>) {
            if (n.op == BinaryOp::Mul) return is_vector(*n.lhs) || is_vector(*n.rhs);
            return is_vector(*n.lhs);
          } else {
            return false;
          }
        },
        e.node);
  }

  // Component `c` of a Vector3/Rotation-valued expression.
  ExprPtr project(const ExprPtr& e, int c) const {
    static const char* kNames[] = {"x", "y", "z"};
    return std::visit(
        [&](const auto& n) -> ExprPtr {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, CallExpr>) {
            return n.args[static_cast<std::size_t>(c)];
          } else if constexpr (std::is_same_v<T, PropertyRef>) {
            return make_property(n.id, {n.path[0], kNames[c]}, e->span);
          } else if constexpr (std::is_same_v<T, IdentRef>) {
            return make_property(n.name, {kNames[c]}, e->span);
          } else if constexpr (std::is_same_v<T, BinaryExpr>) {
            switch (n.op) {
              case BinaryOp::Add:
              case BinaryOp::Sub: return make_binary(n.op, project(n.lhs, c), project(n.rhs, c), e->span);
              case BinaryOp::Mul:
                if (is_vector(*n.lhs)) return make_binary(n.op, project(n.lhs, c), n.rhs, e->span);
                return make_binary(n.op, n.lhs, project(n.rhs, c), e->span);
              case BinaryOp::Div: return make_binary(n.op, project(n.lhs, c), n.rhs, e->span);
            }
          }
          throw EvalError("cannot take a component of a non-vector expression");
        },
        e->node);
  }

  const TypedProgram& tp_;
  std::map<std::string, ExprPtr> env_;
};

void collect_ids(const Expr& e, const TypedProgram& tp, std::set<std::string>& objects, std::set<std::string>& regions) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, PropertyRef>) {
          if (const Symbol* s = tp.find(n.id)) {
            if (s->kind == SymbolKind::Object) objects.insert(n.id);
            if (s->kind == SymbolKind::Region) regions.insert(n.id);
          }
        } else if constexpr (std::is_same_v<T, BinaryExpr>) {
          collect_ids(*n.lhs, tp, objects, regions);
          collect_ids(*n.rhs, tp, objects, regions);
        } else if constexpr (std::is_same_v<T, CallExpr>) {
          for (const auto& a : n.args) collect_ids(*a, tp, objects, regions);
        }
      },
      e.node);
}

void collect_ids(const Assertion& a, const TypedProgram& tp, std::set<std::string>& objects,
                 std::set<std::string>& regions) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Comparison>) {
          collect_ids(*n.lhs, tp, objects, regions);
          collect_ids(*n.rhs, tp, objects, regions);
        } else if constexpr (std::is_same_v<T, InsidePred>) {
          objects.insert(n.object);
          regions.insert(n.region);
        } else if constexpr (std::is_same_v<T, NotAssert>) {
          collect_ids(*n.operand, tp, objects, regions);
        } else {
          collect_ids(*n.lhs, tp, objects, regions);
          collect_ids(*n.rhs, tp, objects, regions);
        }
      },
      a.node);
}

std::vector<std::string> declared(const TypedProgram& tp, DeclKind kind) {
  std::vector<std::string> out;
  for (const auto& s : tp.program.statements) {
    if (auto d = std::get_if<Declaration>(&s.node); d && d->kind == kind) out.push_back(d->id);
  }
  return out;
}

// Id of the implicit region used when a program declares none.
std::string default_region_id(const TypedProgram& tp) {
  std::string id = "_room";
  for (int i = 1; tp.find(id); ++i) id = "_room" + std::to_string(i);
  return id;
}

void top_level_insides(const Assertion& a, std::vector<const InsidePred*>& out) {
  if (auto p = std::get_if<InsidePred>(&a.node)) {
    out.push_back(p);
  } else if (auto conj = std::get_if<AndAssert>(&a.node)) {
    top_level_insides(*conj->lhs, out);
    top_level_insides(*conj->rhs, out);
  }
}

}  // namespace

std::string category_from_id(std::string_view id) {
  std::size_t end = id.size();
  while (end > 0 && (std::isdigit(static_cast<unsigned char>(id[end - 1])) || id[end - 1] == '_')) --end;
  if (end == 0) return std::string(id);
  std::string out;
  for (std::size_t i = 0; i < end; ++i) {
    if (id[i] == '_') {
      if (!out.empty() && out.back() != ' ') out += ' ';
    } else {
      out += id[i];
    }
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out.empty() ? std::string(id) : out;
}

std::map<std::string, std::string> region_assignment(const TypedProgram& tp) {
  std::map<std::string, std::string> out;
  const auto regions = declared(tp, DeclKind::Region);
  const std::string fallback = regions.empty() ? default_region_id(tp) : regions.front();
  std::string current;
  for (const auto& s : tp.program.statements) {
    if (auto d = std::get_if<Declaration>(&s.node)) {
      if (d->kind == DeclKind::Region) current = d->id;
      if (d->kind == DeclKind::Object) out[d->id] = current.empty() ? fallback : current;
    }
  }
  std::set<std::string> pinned;
  for (const auto& s : tp.program.statements) {
    auto c = std::get_if<ConstraintStmt>(&s.node);
    if (!c || c->kind != ConstraintKind::Assert) continue;
    std::vector<const InsidePred*> preds;
    top_level_insides(*c->assertion, preds);
    for (const InsidePred* p : preds) {
      if (pinned.insert(p->object).second) out[p->object] = p->region;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Scene

namespace {

constexpr Vec3 kDefaultRegionScale{5.0, 3.0, 5.0};

void apply_region_frame(scene::Region& r) {
  const scene::Transform& f = r.frame;
  r.vertices = scene::rectangle({f.pos.x, f.pos.z}, f.scale.x, f.scale.z, f.rot.y);
  r.floor_y = f.pos.y;
  r.height = f.scale.y;
}

Vec3 as_vector(const Value& v, const std::string& what) {
  if (v.kind != Value::Kind::Vector) throw EvalError(what + " must be a vector");
  return v.vector;
}

std::string as_text(const Value& v, const std::string& what) {
  if (v.kind != Value::Kind::Text) throw EvalError(what + " must be text");
  return v.text;
}

}  // namespace

scene::SceneLayout build_scene(const TypedProgram& tp) {
  EvalContext ctx;
  scene::SceneLayout& layout = ctx.layout;
  const auto assignment = region_assignment(tp);
  std::set<std::string> positioned;

  for (const auto& id : declared(tp, DeclKind::Region)) {
    scene::Region r;
    r.id = id;
    r.frame.scale = kDefaultRegionScale;
    apply_region_frame(r);
    layout.regions.push_back(std::move(r));
  }
  if (layout.regions.empty() && !declared(tp, DeclKind::Object).empty()) {
    scene::Region r;
    r.id = default_region_id(tp);
    r.frame.scale = kDefaultRegionScale;
    apply_region_frame(r);
    layout.regions.push_back(std::move(r));
  }
  for (const auto& id : declared(tp, DeclKind::Object)) {
    scene::SceneObject o;
    o.id = id;
    o.category = category_from_id(id);
    o.region = assignment.at(id);
    layout.objects.push_back(std::move(o));
  }
  auto rest_on_floor = [&](scene::SceneObject& o) {
    const scene::Region* r = layout.find_region(o.region);
    const Vec2 c = r->centroid();
    o.transform.pos = {c.x, r->floor_y + o.extents().y / 2.0, c.z};
  };
  for (auto& o : layout.objects) rest_on_floor(o);

  Substitution subst(tp);
  for (const auto& s : tp.program.statements) {
    auto a = std::get_if<Assignment>(&s.node);
    if (!a) continue;
    if (!a->property) {
      subst.bind(a->target, a->value);
      continue;
    }
    const std::string what = a->target + "." + std::string(to_string(*a->property));
    const Value v = evaluate(*subst.expr(a->value), ctx);
    if (scene::Region* r = [&]() -> scene::Region* {
          for (auto& reg : layout.regions) {
            if (reg.id == a->target) return &reg;
          }
          return nullptr;
        }()) {
      switch (*a->property) {
        case Property::Pos: r->frame.pos = as_vector(v, what); break;
        case Property::Rot: r->frame.rot = as_vector(v, what); break;
        case Property::Scale: r->frame.scale = as_vector(v, what); break;
        default: break;
      }
      if (r->frame.scale.x <= 0 || r->frame.scale.y <= 0 || r->frame.scale.z <= 0) {
        throw scene::DegenerateRegion("region '" + r->id + "' needs a positive scale");
      }
      apply_region_frame(*r);
      for (auto& o : layout.objects) {
        if (o.region == r->id && !positioned.count(o.id)) rest_on_floor(o);
      }
      continue;
    }
    scene::SceneObject* o = layout.find_object(a->target);
    switch (*a->property) {
      case Property::Color: o->color = as_text(v, what); break;
      case Property::Material: o->material = as_text(v, what); break;
      case Property::Features: o->features = as_text(v, what); break;
      case Property::Pos:
        o->transform.pos = as_vector(v, what);
        positioned.insert(o->id);
        break;
      case Property::Rot: o->transform.rot = as_vector(v, what); break;
      case Property::Scale: {
        const Vec3 sc = as_vector(v, what);
        if (sc.x <= 0 || sc.y <= 0 || sc.z <= 0) throw scene::SceneError(what + " components must be positive");
        o->transform.scale = sc;
        if (!positioned.count(o->id)) rest_on_floor(*o);
        break;
      }
    }
  }
  for (const auto& r : layout.regions) scene::validate(r);
  return layout;
}

// ---------------------------------------------------------------------------
// Compile

ConstraintSet compile(const TypedProgram& tp) {
  ConstraintSet cs;
  Substitution subst(tp);
  for (const auto& s : tp.program.statements) {
    if (auto a = std::get_if<Assignment>(&s.node); a && !a->property) {
      subst.bind(a->target, a->value);
      continue;
    }
    auto c = std::get_if<ConstraintStmt>(&s.node);
    if (!c) continue;
    switch (c->kind) {
      case ConstraintKind::Assert: {
        CompiledConstraint cc;
        cc.id = cs.constraints.size();
        cc.provenance = Provenance::Explicit;
        AssertionPtr resolved = subst.assertion(c->assertion);
        std::set<std::string> objects, regions;
        collect_ids(*resolved, tp, objects, regions);
        cc.body = std::move(resolved);
        cc.involved_objects.assign(objects.begin(), objects.end());
        cc.involved_regions.assign(regions.begin(), regions.end());
        cs.constraints.push_back(std::move(cc));
        break;
      }
      case ConstraintKind::AllowCollide:
        cs.allow_collide.insert({std::min(c->subjects[0], c->subjects[1]), std::max(c->subjects[0], c->subjects[1])});
        break;
      case ConstraintKind::AllowOutside: cs.allow_outside.insert(c->subjects[0]); break;
    }
  }

  const auto objects = declared(tp, DeclKind::Object);
  auto add = [&](Provenance p, ConstraintBody body, std::vector<std::string> objs, std::vector<std::string> regs) {
    std::sort(objs.begin(), objs.end());
    cs.constraints.push_back({cs.constraints.size(), p, std::move(body), std::move(objs), std::move(regs)});
  };
  for (std::size_t i = 0; i < objects.size(); ++i) {
    for (std::size_t j = i + 1; j < objects.size(); ++j) {
      if (cs.collision_allowed(objects[i], objects[j])) continue;
      add(Provenance::HiddenCollision, NoCollide{objects[i], objects[j]}, {objects[i], objects[j]}, {});
    }
  }
  for (const auto& o : objects) add(Provenance::HiddenGravity, Supported{o}, {o}, {});
  const auto assignment = region_assignment(tp);
  for (const auto& o : objects) {
    if (cs.allow_outside.count(o)) continue;
    const std::string& r = assignment.at(o);
    add(Provenance::HiddenBoundary, make_inside(o, r), {o}, {r});
  }
  return cs;
}

CompiledProgram compile_program(const TypedProgram& program, std::uint64_t seed) {
  CompiledProgram out;
  out.program = freeze_random(program, seed);
  out.layout = build_scene(out.program);
  out.constraints = compile(out.program);
  return out;
}

CompiledProgram compile_source(std::string_view source, std::uint64_t seed) {
  return compile_program(type_check(parse(source)), seed);
}

std::string report(const ConstraintSet& cs, const std::vector<bool>& verdicts) {
  std::string out;
  for (std::size_t i = 0; i < cs.constraints.size(); ++i) {
    const auto& c = cs.constraints[i];
    out += std::to_string(c.id) + " " + std::string(to_string(c.provenance)) + " " +
           (verdicts.at(i) ? "satisfied" : "violated") + " " + print(c) + "\n";
  }
  return out;
}

}  // namespace sthl::constraints
