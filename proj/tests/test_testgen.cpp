#include "costlam/harness.hpp"
#include "costlam/testgen.hpp"
#include "costlam/transform.hpp"
#include "costlam/typing.hpp"
#include "support.hpp"

using namespace costlam;
using namespace costlam::test;

TEST_CASE("size one gives the only inhabitant") {
  Generator gen(GenConfig{});
  TypeCtx ctx{{Ident("x"), T("t")}};
  for (int i = 0; i < 20; ++i) CHECK(src::alpha_eq(gen.gen_typed_term(T("t"), ctx, 1), S("x")));
  CHECK_THROWS_AS(gen.gen_typed_term(T("s"), ctx, 1), GiveUp);
}

TEST_CASE("generated terms are typed and their labellings are well labelled") {
  GenConfig cfg;
  cfg.seed = 61;
  for (const auto& g : gen_corpus(cfg, 300)) {
    CHECK(src::size(g.term) <= 30);
    CHECK(type_eq(typecheck_source(g.ctx, g.term), g.type));
    CHECK(in_w0(label_init(g.term)));
  }
}

TEST_CASE("generation is deterministic per seed") {
  GenConfig a, b;
  a.seed = b.seed = 62;
  auto x = gen_corpus(a, 50), y = gen_corpus(b, 50);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(print(x[i].term) == print(y[i].term));
  b.seed = 63;
  auto z = gen_corpus(b, 50);
  bool differ = false;
  for (std::size_t i = 0; i < x.size(); ++i) differ |= print(x[i].term) != print(z[i].term);
  CHECK(differ);
}

TEST_CASE("shrinking") {
  TypeCtx ctx{{Ident("y"), T("t")}};
  auto cands = shrink(ctx, S("(\\(x:t). x) @ (y)"));
  bool has_y = false;
  for (const auto& c : cands) has_y |= src::alpha_eq(c, S("y"));
  CHECK(has_y);
  CHECK(shrink(ctx, S("y")).empty());

  GenConfig cfg;
  cfg.seed = 64;
  for (const auto& g : gen_corpus(cfg, 40))
    for (const auto& c : shrink(g.ctx, g.term)) {
      CHECK(src::size(c) < src::size(g.term));
      CHECK(type_eq(typecheck_source(g.ctx, c), g.type));
    }
}

TEST_CASE("greedy shrinking keeps the failure") {
  TypeCtx ctx{{Ident("y"), T("t")}};
  // "fails" whenever the term mentions y
  auto fails = [](const src::Term& t) { return src::free_vars(t).count(Ident("y")) > 0; };
  auto r = shrink_failing(ctx, S("(\\(x:t). (\\(z:t). z) @ (x)) @ (y)"), fails);
  CHECK(src::alpha_eq(r, S("y")));
}

TEST_CASE("harness reports are deterministic") {
  CheckOptions o;
  o.gen.seed = 65;
  o.count = 40;
  o.jobs = 2;
  for (Property p : all_properties()) {
    auto a = run_property(p, o), b = run_property(p, o);
    CHECK(a.outcome == Outcome::Pass);
    a.seconds = b.seconds = 0;
    CHECK(report_json(a) == report_json(b));
  }
  GenConfig cfg;
  cfg.seed = 66;
  for (const auto& g : gen_corpus(cfg, 20))
    for (Property p : {Property::Commutation, Property::Simulation, Property::Cost})
      CHECK(check_term(p, g, 100000).empty());
}
