#include "costlam/semantics.hpp"
#include "costlam/transform.hpp"
#include "support.hpp"

using namespace costlam;
using namespace costlam::test;

TEST_CASE("labelling marks lambda bodies and non-tail applications") {
  CHECK(src::alpha_eq(label_init(S("\\x. x @ (x @ (x, x))")),
                      S("\\x. _l0> x @ (x @ (x, x) >_l1)")));
  CHECK(src::alpha_eq(label_init(S("x")), S("x")));
  CHECK(src::alpha_eq(label_init(S("let y = f @ (z) in y")),
                      S("let y = f @ (z) >_l0 in y")));
  CHECK_THROWS_AS(label_init(S("\\x. l> x")), std::invalid_argument);
}

TEST_CASE("erasure drops labels and keeps everything else") {
  auto m = S("\\x. a> x @ (x) >b");
  CHECK(src::alpha_eq(erase(m), S("\\x. x @ (x)")));
  auto v = S("(x, \\y. y)");
  CHECK(src::alpha_eq(erase(v), v));
  auto plain = S("let p = (a, b) in proj 2 p @ (f @ (a))");
  CHECK(src::alpha_eq(erase(label_init(plain)), plain));
}

TEST_CASE("well-labelledness classes") {
  CHECK(well_labelled(S("x")) == WellLabelClass::W1);
  CHECK(well_labelled(S("\\x. (x @ (x) >l)")) == WellLabelClass::NotWellLabelled);
  CHECK(well_labelled(S("x @ (x) >l")) == WellLabelClass::W0);
  CHECK(well_labelled(S("\\x. l> (x @ (x) >m)")) == WellLabelClass::NotWellLabelled);
  auto m = S("\\f. f @ (f @ (x), (f @ (y), x))");
  NameSupply ls;
  CHECK(well_labelled(label_with(m, 1, ls)) == WellLabelClass::W1);
  CHECK(in_w0(label_with(m, 0, ls)));
}

TEST_CASE("cps of the eta example differs from cps of its erasure") {
  auto m = S("\\x. (x @ (x) >l)");
  auto lhs = erase(to_cps(m));
  auto rhs = to_cps(erase(m));
  CHECK(cps::alpha_eq(lhs, C("halt @ (\\x k. x @ (x, \\x. k @ (x)))")));
  CHECK(cps::alpha_eq(rhs, C("halt @ (\\x k. x @ (x, k))")));
  CHECK_FALSE(cps::alpha_eq(lhs, rhs));
  CHECK(cps::alpha_eq(to_cps(m), C("halt @ (\\x k. x @ (x, \\v. l> k @ (v)))")));
}

TEST_CASE("cps of a self-application") {
  auto m = S("(\\x. x @ (x @ (x))) @ (\\x. x)");
  auto expected = C(
      "(\\x k. x @ (x, \\y. x @ (y, k))) @ (\\x k. k @ (x), \\x. halt @ (x))");
  auto got = to_cps(m);
  CHECK(cps::alpha_eq(got, expected));
  CHECK(cps::alpha_eq(to_cps(S("x")), C("halt @ (x)")));

  // Each source step is matched by weak steps of the translation.
  const char* sources[] = {"(\\x. x) @ ((\\x. x) @ (\\x. x))", "(\\x. x) @ (\\x. x)",
                           "\\x. x"};
  const char* targets[] = {
      "(\\x k. k @ (x)) @ (\\x k. k @ (x), \\y. (\\x k. k @ (x)) @ (y, \\x. halt @ (x)))",
      "(\\x k. k @ (x)) @ (\\x k. k @ (x), \\x. halt @ (x))",
      "halt @ (\\x k. k @ (x))"};
  src::Term cur = m;
  cps::Term ccur = got;
  for (int i = 0; i < 3; ++i) {
    auto s = step_source(cur);
    REQUIRE(s.stepped);
    CHECK(src::alpha_eq(s.next, S(sources[i])));
    CHECK(cps::alpha_eq(to_cps(s.next), C(targets[i])));
    CHECK(weak_reaches(
        ccur, {}, to_cps(s.next), [](const cps::Term& t) { return step_cps(t); },
        [](const cps::Term& a, const cps::Term& b) { return cps::alpha_eq(a, b); }));
    cur = s.next;
    ccur = to_cps(cur);
  }
}

TEST_CASE("value tuples use the value clause and agree with the general one") {
  auto m = S("(x, \\y. y)");
  auto got = to_cps(m);
  CHECK(cps::alpha_eq(got, C("halt @ ((x, \\y k. k @ (y)))")));
  // The general clause M1 : λx1 ... (x1..xn):K reduces to the same term.
  CHECK(cps::alpha_eq(got, to_cps(S("let a = x in let b = \\y. y in (a, b)"))));
}

TEST_CASE("value naming and readback") {
  auto n = C("(\\x k. x @ (x, \\y. x @ (y, k))) @ (\\x k. k @ (x), \\x. halt @ (x))");
  auto expected = V(
      "let z1 = \\x k. let z11 = \\y. x @ (y, k) in x @ (x, z11) in "
      "let z2 = \\x k. k @ (x) in "
      "let z3 = \\x. halt @ (x) in z1 @ (z2, z3)");
  auto got = to_value_named(n);
  CHECK(vn::alpha_eq(got, expected));
  CHECK(cps::alpha_eq(readback(got), n));
  CHECK(vn::alpha_eq(to_value_named(C("x @ (y)")), V("x @ (y)")));
  auto nested = C("f @ ((a, (b, \\x. x @ (x))))");
  CHECK(cps::alpha_eq(readback(to_value_named(nested)), nested));
  CHECK(vn::alpha_eq(to_value_named(nested),
                     V("let w = \\x. x @ (x) in let z = (b, w) in let y = (a, z) in f @ (y)")));
}

TEST_CASE("closure conversion of a constant function") {
  auto m = V("let z1 = \\x k. k @ (y) in halt @ (z1)");
  auto expected = V(
      "let c = \\e x k. let y = proj 1 e in let c = proj 1 k in let e = proj 2 k in "
      "c @ (e, y) in "
      "let e = (y,) in let z1 = (c, e) in let c = proj 1 halt in let e = proj 2 halt in "
      "c @ (e, z1)");
  CHECK(vn::alpha_eq(closure_convert(m), expected));
  CHECK(vn::alpha_eq(closure_convert(V("x @ (y)")),
                     V("let c = proj 1 x in let e = proj 2 x in c @ (e, y)")));
}

TEST_CASE("hoisting moves definitions out and stops at the program grammar") {
  auto m = V("let x1 = \\y1. let x2 = \\y2. w @ (y2) in x2 @ (y1) in x1 @ (z)");
  auto hoisted = hoist(m);
  CHECK(alpha_eq(hoisted, to_program(V("let x2 = \\y2. w @ (y2) in "
                                        "let x1 = \\y1. x2 @ (y1) in x1 @ (z)"))));

  // Reducing first copies the inner definition, which hoisting then duplicates.
  auto s = step_vn(m);
  REQUIRE(s.stepped);
  auto reduced = hoist(s.next);
  CHECK(alpha_eq(reduced,
                 to_program(V("let x2 = \\y2. w @ (y2) in let x1 = \\y1. x2 @ (y1) in "
                              "let x2 = \\y2. w @ (y2) in x2 @ (z)"))));

  // Hoisting first and then reducing gives the smaller program.
  auto h = to_term(hoisted);
  auto s2 = step_vn(h);
  REQUIRE(s2.stepped);
  CHECK(vn::alpha_eq(s2.next, V("let x2 = \\y2. w @ (y2) in "
                                "let x1 = \\y1. x2 @ (y1) in x2 @ (z)")));

  auto p = V("let f = \\a. a @ (a) in let g = \\b. f @ (b) in g @ (g)");
  CHECK(vn::alpha_eq(to_term(hoist(p)), p));
  CHECK(hoist_redexes(p).empty());

  auto labelled = V("l> let y = \\z. z @ (z) in y @ (y)");
  auto r = find_redex(labelled, HoistStrategy::LeftmostOutermost);
  REQUIRE(r);
  CHECK(r->rule == HoistRule::H3);
  NameSupply names;
  CHECK(vn::alpha_eq(apply_redex(labelled, *r, names),
                     V("let y = \\z. z @ (z) in l> y @ (y)")));
}

TEST_CASE("hoisting renames a definition that would capture") {
  auto m = V("let x = (y,) in let y = \\z. z @ (z) in y @ (x)");
  auto got = to_term(hoist(m));
  CHECK(vn::alpha_eq(got, V("let f = \\z. z @ (z) in let x = (y,) in f @ (x)")));
}

TEST_CASE("hoist measure strictly decreases") {
  auto m = V(
      "let a = (u,) in l> let f = \\p. let g = \\q. q @ (q) in g @ (p) in "
      "let h = \\r. r @ (r) in f @ (a)");
  HoistOptions o;
  o.check_measure = true;
  HoistStats st;
  auto p = hoist(m, o, &st);
  CHECK(st.steps > 0);
  CHECK(st.measure_decreased);
  CHECK(hoist_redexes(to_term(p)).empty());
  CHECK(hoist_measure(V("f @ (x)")) == 1);
  CHECK(hoist_measure(V("let x = (y,) in f @ (x)")) == 2);
  CHECK(hoist_measure(V("let f = \\x. x @ (x) in f @ (f)")) == 3);
}

TEST_CASE("compile keeps every stage") {
  auto m = S("\\x. y");
  auto a = compile_stages(m);
  CHECK(cps::alpha_eq(a.cps, C("halt @ (\\x k. k @ (y))")));
  CHECK(vn::alpha_eq(a.vn, V("let z1 = \\x k. k @ (y) in halt @ (z1)")));
  CHECK(alpha_eq(a.hoisted, to_program(a.cc)));
}
