#include "costlam/testgen.hpp"
#include "costlam/transform.hpp"
#include "support.hpp"

using namespace costlam;
using namespace costlam::test;

TEST_CASE("alpha equivalence renames binders only") {
  CHECK(src::alpha_eq(S("\\x. x"), S("\\y. y")));
  CHECK_FALSE(src::alpha_eq(S("\\x. y"), S("\\x. z")));
  CHECK_FALSE(src::alpha_eq(S("\\x. l0> x"), S("\\x. l1> x")));
  CHECK(src::alpha_eq(S("let a = f @ (x) in (a, x)"), S("let b = f @ (x) in (b, x)")));
  CHECK_FALSE(src::alpha_eq(S("\\x y. x"), S("\\x y. y")));
}

TEST_CASE("substitution avoids capture") {
  auto v = S("\\z. z");
  CHECK(src::alpha_eq(src::subst(S("x"), {{Ident("x"), v}}), v));
  auto r = src::subst(S("\\y. x"), {{Ident("x"), S("y")}});
  CHECK(src::alpha_eq(r, S("\\w. y")));
  CHECK_FALSE(src::alpha_eq(r, S("\\y. y")));
  CHECK(src::alpha_eq(src::subst(S("x @ (x @ (x))"), {{Ident("x"), v}}),
                      S("(\\z. z) @ ((\\z. z) @ (\\z. z))")));
}

TEST_CASE("free variables") {
  CHECK(src::free_vars(S("\\x. y")) == std::set<Ident>{Ident("y")});
  auto v = S("(a, \\b. c)");
  CHECK(src::free_vars(S("let x = (a, \\b. c) in x")) == src::free_vars(v));
  CHECK(cps::free_vars(C("f @ (\\x k. k @ (y, x))")) == std::set<Ident>{Ident("f"), Ident("y")});
  CHECK(vn::free_vars(V("let z = (a,) in f @ (z)")) == std::set<Ident>{Ident("a"), Ident("f")});
}

TEST_CASE("printing then parsing is the identity on generated terms") {
  GenConfig cfg;
  cfg.seed = 11;
  for (const auto& g : gen_corpus(cfg, 200)) {
    auto l = label_init(g.term);
    CHECK(src::alpha_eq(S(print(l).c_str()), l));
    auto a = compile_stages(l);
    CHECK(cps::alpha_eq(C(print(a.cps).c_str()), a.cps));
    CHECK(vn::alpha_eq(V(print(a.vn).c_str()), a.vn));
    CHECK(vn::alpha_eq(V(print(a.cc).c_str()), a.cc));
    CHECK(alpha_eq(parse_hoist(print(a.hoisted), reserved_ok()), a.hoisted));
  }
}

TEST_CASE("typed terms and types round-trip") {
  GenConfig cfg;
  cfg.seed = 12;
  for (const auto& g : gen_corpus(cfg, 50)) {
    CompileOptions o;
    o.typed = true;
    o.ctx = g.ctx;
    auto a = compile_stages(g.term, o);
    CHECK(vn::alpha_eq(V(print(a.cc).c_str()), a.cc));
    CHECK(type_eq(T(print(g.type).c_str()), g.type));
  }
}

TEST_CASE("parse errors carry line and column") {
  try {
    parse_source("let x = y in\n  (x, ");
    FAIL("no error");
  } catch (const ParseError& e) {
    CHECK(e.line == 2);
    CHECK(e.column >= 3);
  }
  CHECK_THROWS_AS(parse_source("\\x. $"), ParseError);
  // '_' names come only from the name supply
  CHECK_THROWS_AS(parse_source("\\_k1. x"), ParseError);
  CHECK_NOTHROW(parse_source("\\_k1. x", reserved_ok()));
}

TEST_CASE("assumptions open an input file") {
  auto in = parse_source_input("assume g1 : t1; assume f : (t1) -> t2; f @ (g1)");
  REQUIRE(in.ctx.size() == 2);
  CHECK(in.ctx[0].first == Ident("g1"));
  CHECK(type_eq(in.ctx[1].second, T("(t1) -> t2")));
  CHECK(src::alpha_eq(in.term, S("f @ (g1)")));
}
