#include <doctest.h>

#include <set>
#include <string>

#include "coverage.hpp"
#include "fixtures.hpp"
#include "random_ast.hpp"
#include "sthl/dsl/json_ast.hpp"
#include "sthl/dsl/parser.hpp"
#include "sthl/dsl/printer.hpp"
#include "sthl/dsl/typecheck.hpp"

using namespace sthl::dsl;

namespace {

DiagnosticKind error_kind(const std::string& src) {
  try {
    type_check(parse(src));
  } catch (const DslError& e) {
    return e.kind();
  }
  FAIL("expected an error for: " << src);
  return DiagnosticKind::Note;
}

std::string first_message(const std::string& src) {
  try {
    type_check(parse(src));
  } catch (const DslError& e) {
    return e.diagnostics().front().message;
  }
  return {};
}

const Assertion& first_assert(const Program& p) {
  for (const auto& s : p.statements) {
    if (auto c = std::get_if<ConstraintStmt>(&s.node); c && c->assertion) return *c->assertion;
  }
  throw std::runtime_error("no assert");
}

}  // namespace

TEST_CASE("parse: lamp above table") {
  const Program p = parse("object lamp; object table; assert lamp.pos.y > table.pos.y + table.scale.y;");
  REQUIRE(p.statements.size() == 3);
  CHECK(std::get<Declaration>(p.statements[0].node).kind == DeclKind::Object);
  CHECK(std::get<Declaration>(p.statements[1].node).id == "table");
  const auto& cmp = std::get<Comparison>(first_assert(p).node);
  CHECK(cmp.op == CompareOp::Gt);
  const auto& lhs = std::get<PropertyRef>(cmp.lhs->node);
  CHECK(lhs.id == "lamp");
  CHECK(lhs.path == std::vector<std::string>{"pos", "y"});
  CHECK(std::get<BinaryExpr>(cmp.rhs->node).op == BinaryOp::Add);
}

TEST_CASE("parse: empty input is a ParseError") {
  CHECK(error_kind("") == DiagnosticKind::ParseError);
  CHECK(error_kind("  // only a comment\n") == DiagnosticKind::ParseError);
}

TEST_CASE("parse: undeclared identifier is a ResolveError naming it") {
  CHECK(error_kind("assert x > 1;") == DiagnosticKind::ResolveError);
  CHECK(first_message("assert x > 1;").find("'x'") != std::string::npos);
}

TEST_CASE("parse: declaration must precede use and be unique") {
  CHECK(error_kind("assert a.pos.x > 0; object a;") == DiagnosticKind::ResolveError);
  CHECK(error_kind("object a; region a;") == DiagnosticKind::ResolveError);
}

TEST_CASE("parse: lexical errors") {
  CHECK(error_kind("object a @;") == DiagnosticKind::LexError);
  CHECK(error_kind("object a; a.color <- \"red;") == DiagnosticKind::LexError);
  CHECK(error_kind("object a; /* never closed") == DiagnosticKind::LexError);
  CHECK(error_kind("Number n; n <- 12abc;") == DiagnosticKind::LexError);
}

TEST_CASE("parse: grammar violations") {
  CHECK(error_kind("object a") == DiagnosticKind::ParseError);
  CHECK(error_kind("object a; assert a.pos.x;") == DiagnosticKind::ParseError);
  CHECK(error_kind("object a; a.size <- vec3(1, 1, 1);") == DiagnosticKind::ParseError);
  CHECK(error_kind("object a; a.pos.x <- 1;") == DiagnosticKind::ParseError);
  CHECK(error_kind("object a; assert a.pos.x.y.z > 1;") == DiagnosticKind::ParseError);
  CHECK(error_kind("object object;") == DiagnosticKind::ParseError);
  CHECK(error_kind("Number n; n <- rand(1);") == DiagnosticKind::ParseError);
  CHECK(error_kind("object a; assert a.pos.x<-1;") == DiagnosticKind::ParseError);
  CHECK(error_kind("Number n; n <- -n;") == DiagnosticKind::ParseError);
}

TEST_CASE("parse: recovers at ';' and reports every bad statement") {
  try {
    parse("object a; assert ; object b; b <- ; object c;");
    FAIL("expected errors");
  } catch (const DslError& e) {
    CHECK(e.diagnostics().size() == 2);
  }
}

TEST_CASE("parse: diagnostics carry spans inside the input") {
  const std::string src = "object a;\nobject b;\nassert a.pos.x >> 2;\n";
  try {
    parse(src);
    FAIL("expected error");
  } catch (const DslError& e) {
    for (const auto& d : e.diagnostics()) {
      CHECK(d.span.offset < src.size());
      CHECK(d.span.line == 3);
      CHECK(d.span.column > 1);
    }
  }
}

TEST_CASE("parse: entity is accepted as object with a note") {
  std::vector<Diagnostic> notes;
  const Program p = parse("entity sofa; sofa.color <- \"grey\";", &notes);
  CHECK(std::get<Declaration>(p.statements[0].node).kind == DeclKind::Object);
  REQUIRE(notes.size() == 1);
  CHECK(notes[0].kind == DiagnosticKind::Note);
  CHECK(print(p) == "object sofa;\nsofa.color <- \"grey\";\n");
}

TEST_CASE("parse: comments and number forms") {
  const Program p = parse(
      "// lead\nNumber n; /* block\n comment */ n <- -1.25e2 + 3;\nNumber m; m <- 0.5;");
  const auto& a = std::get<Assignment>(p.statements[1].node);
  const auto& bin = std::get<BinaryExpr>(a.value->node);
  CHECK(std::get<NumberLit>(bin.lhs->node).value == -125.0);
}

TEST_CASE("precedence: disambiguation table") {
  struct Case {
    const char* src;
    const char* canonical;
  };
  const Case cases[] = {
      {"assert a.pos.x + 1 * 2 > 0;", "assert a.pos.x + 1 * 2 > 0;"},
      {"assert (a.pos.x + 1) * 2 > 0;", "assert (a.pos.x + 1) * 2 > 0;"},
      {"assert a.pos.x - (1 - 2) > 0;", "assert a.pos.x - (1 - 2) > 0;"},
      {"assert a.pos.x - 1 - 2 > 0;", "assert a.pos.x - 1 - 2 > 0;"},
      {"assert a.pos.x / (2 * 3) > 0;", "assert a.pos.x / (2 * 3) > 0;"},
      {"assert a.pos.x > 0 || a.pos.y > 0 && a.pos.z > 0;", "assert a.pos.x > 0 || a.pos.y > 0 && a.pos.z > 0;"},
      {"assert (a.pos.x > 0 || a.pos.y > 0) && a.pos.z > 0;", "assert (a.pos.x > 0 || a.pos.y > 0) && a.pos.z > 0;"},
      {"assert !a.pos.x > 0 && a.pos.y > 0;", "assert !(a.pos.x > 0) && a.pos.y > 0;"},
      {"assert !(a.pos.x > 0 && a.pos.y > 0);", "assert !(a.pos.x > 0 && a.pos.y > 0);"},
      {"assert ((a.pos.x)) > (0);", "assert a.pos.x > 0;"},
      {"assert a.pos.x > 0 || (a.pos.y > 0 || a.pos.z > 0);", "assert a.pos.x > 0 || (a.pos.y > 0 || a.pos.z > 0);"},
      {"assert !!inside(a, r);", "assert !!inside(a, r);"},
  };
  for (const auto& c : cases) {
    CAPTURE(c.src);
    const Program p = parse(std::string("object a; region r; ") + c.src);
    CHECK(print(p.statements.back()) == c.canonical);
  }

  // Shape checks for the two interesting cases.
  const Program p1 = parse("object a; assert a.pos.x > 0 || a.pos.y > 0 && a.pos.z > 0;");
  const auto& top = first_assert(p1);
  REQUIRE(std::holds_alternative<OrAssert>(top.node));
  CHECK(std::holds_alternative<AndAssert>(std::get<OrAssert>(top.node).rhs->node));

  const Program p2 = parse("object a; assert !a.pos.x > 0 && a.pos.y > 0;");
  const auto& top2 = first_assert(p2);
  REQUIRE(std::holds_alternative<AndAssert>(top2.node));
  const auto& neg = std::get<AndAssert>(top2.node).lhs;
  REQUIRE(std::holds_alternative<NotAssert>(neg->node));
  CHECK(std::holds_alternative<Comparison>(std::get<NotAssert>(neg->node).operand->node));
}

TEST_CASE("print: fixed point and parentheses") {
  const Program p = parse("object a; assert a.pos.x = 0;");
  CHECK(print(p.statements[1]) == "assert a.pos.x = 0;");

  const ExprPtr e = make_binary(BinaryOp::Mul, make_binary(BinaryOp::Add, make_number(1), make_number(2)), make_number(3));
  CHECK(print(*e) == "(1 + 2) * 3");
  CHECK(print(*make_binary(BinaryOp::Sub, make_number(1), make_number(-2))) == "1 - -2");
}

TEST_CASE("print: strings are escaped") {
  const Program p = parse(R"(object a; a.features <- "say \"hi\"\\n";)");
  CHECK(print(p.statements[1]) == R"(a.features <- "say \"hi\"\\n";)");
}

TEST_CASE("round-trip: 100 random well-typed ASTs") {
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    CAPTURE(seed);
    const Program p = sthl::testing::random_program(seed);
    REQUIRE_NOTHROW(type_check(p));
    const std::string text = print(p);
    CAPTURE(text);
    const Program q = parse(text);
    CHECK(structurally_equal(p, q));
    CHECK(print(q) == text);
  }
}

TEST_CASE("fixture corpus: round-trip and production coverage") {
  const auto files = sthl::testing::program_fixtures();
  CHECK(files.size() >= 30);
  std::set<std::string> seen;
  for (const auto& f : files) {
    CAPTURE(f);
    std::vector<Diagnostic> notes;
    const Program p = parse(sthl::testing::read_file(f), &notes);
    REQUIRE_NOTHROW(type_check(p));
    const Program q = parse(print(p));
    CHECK(structurally_equal(p, q));
    const auto used = sthl::testing::productions(p, !notes.empty());
    seen.insert(used.begin(), used.end());
  }
  for (const auto& name : sthl::testing::all_productions()) {
    CAPTURE(name);
    CHECK(seen.count(name) == 1);
  }
}

TEST_CASE("parse is deterministic") {
  const std::string src = sthl::dsl::print(sthl::testing::random_program(7));
  CHECK(to_json(parse(src)).dump() == to_json(parse(src)).dump());
}

// ---------------------------------------------------------------------------

TEST_CASE("typecheck: dot of orthogonal vectors is Number") {
  const TypedProgram tp = type_check(parse("Number d; d <- dot(vec3(1, 0, 0), vec3(0, 1, 0));"));
  const auto& a = std::get<Assignment>(tp.program.statements[1].node);
  CHECK(tp.type_of(*a.value) == ExprType::Number);
}

TEST_CASE("typecheck: rejects mismatches") {
  CHECK(error_kind("assert vec3(1, 2, 3) > 4;") == DiagnosticKind::TypeError);
  CHECK(error_kind("object lamp; lamp.color <- vec3(1, 1, 1);") == DiagnosticKind::TypeError);
  CHECK(error_kind("object a; assert a.color < \"red\";") == DiagnosticKind::TypeError);
  CHECK(error_kind("object a; assert a > 1;") == DiagnosticKind::TypeError);
  CHECK(error_kind("object a; region r; assert inside(r, a);") == DiagnosticKind::TypeError);
  CHECK(error_kind("object a; allowCollide(a, a);") == DiagnosticKind::TypeError);
  CHECK(error_kind("region r; allowOutside(r);") == DiagnosticKind::TypeError);
  CHECK(error_kind("region r; r.color <- \"red\";") == DiagnosticKind::TypeError);
  CHECK(error_kind("object a; assert a.rot.w > 1;") == DiagnosticKind::TypeError);
  CHECK(error_kind("object a; assert a.color.x > 1;") == DiagnosticKind::TypeError);
  CHECK(error_kind("object a; Number n; n <- rand(0, a.pos.x);") == DiagnosticKind::TypeError);
  CHECK(error_kind("Number n; n <- dot(vec3(1, 0, 0), 2);") == DiagnosticKind::TypeError);
  CHECK(error_kind("Vector3 v; v <- vec3(1, 2, 3) * vec3(1, 1, 1);") == DiagnosticKind::TypeError);
  CHECK(error_kind("object a; a <- 3;") == DiagnosticKind::TypeError);
}

TEST_CASE("typecheck: accepts the valid forms") {
  CHECK_NOTHROW(type_check(parse(R"(
    object a; object b; region r;
    Degree d; d <- 45;
    Vector3 v; v <- (a.pos - b.pos) / 2;
    Rotation q; q <- rot(0, d, 0);
    Color c; c <- "red";
    Bool flag; flag <- 1;
    a.rot <- q; a.color <- c; b.features <- "plush";
    r.pos <- vec3(0, 0, 0); r.scale <- vec3(4, 3, 4);
    assert a.rot.y = d && v.x > 0 && flag = flag;
    assert a.color = "red" || a.material != b.material;
    assert dot(v, v) < 4 && !inside(a, r);
    allowCollide(a, b); allowOutside(b);
  )")));
}

TEST_CASE("typecheck: property x ValueType assignment table") {
  // Independent oracle: the legal (property, declared type) cells.
  struct Legal {
    const char* prop;
    ValueType type;
  };
  const Legal legal[] = {{"color", ValueType::Color},
                         {"material", ValueType::Material},
                         {"pos", ValueType::Vector3},
                         {"rot", ValueType::Rotation},
                         {"scale", ValueType::Vector3}};
  const char* props[] = {"color", "material", "features", "pos", "rot", "scale"};
  const ValueType types[] = {ValueType::Number, ValueType::Degree, ValueType::Bool, ValueType::Vector3,
                             ValueType::Rotation, ValueType::Color, ValueType::Material};
  int passing = 0;
  for (const char* prop : props) {
    for (ValueType t : types) {
      bool expected = false;
      for (const auto& l : legal) expected |= std::string(l.prop) == prop && l.type == t;
      const std::string src =
          "object o; " + std::string(to_string(t)) + " v; o." + prop + " <- v;";
      CAPTURE(src);
      bool ok = true;
      try {
        type_check(parse(src));
      } catch (const DslError& e) {
        ok = false;
        CHECK(e.kind() == DiagnosticKind::TypeError);
      }
      CHECK(ok == expected);
      passing += ok;

      // Region targets accept exactly the transform cells.
      const std::string region_src = "region g; " + std::string(to_string(t)) + " v; g." + prop + " <- v;";
      bool region_ok = true;
      try {
        type_check(parse(region_src));
      } catch (const DslError&) {
        region_ok = false;
      }
      CHECK(region_ok == (expected && std::string(prop) != "color" && std::string(prop) != "material"));
    }
  }
  CHECK(passing == 5);
  // String literals are accepted for the text properties.
  CHECK_NOTHROW(type_check(parse("object o; o.features <- \"x\"; o.color <- \"y\"; o.material <- \"z\";")));
}

TEST_CASE("json ast has statements with spans") {
  const auto j = to_json(parse("object a; assert a.pos.x > 1;"));
  REQUIRE(j["statements"].size() == 2);
  CHECK(j["statements"][1]["assertion"]["lhs"]["kind"] == "property");
  CHECK(j["statements"][1]["span"]["line"] == 1);
}
