#include "costlam/testgen.hpp"
#include "costlam/transform.hpp"
#include "costlam/typing.hpp"
#include "support.hpp"

using namespace costlam;
using namespace costlam::test;

namespace {
TypeCtx ctx_of(std::initializer_list<std::pair<const char*, const char*>> xs) {
  TypeCtx c;
  for (auto [x, a] : xs) c.emplace_back(Ident(x), T(a));
  return c;
}
}  // namespace

TEST_CASE("source typing") {
  CHECK(type_eq(typecheck_source(ctx_of({{"y", "t1"}}), S("\\(x:t2). y")), T("(t2) -> t1")));
  CHECK(type_eq(typecheck_source({}, S("()")), product({})));
  CHECK_THROWS_AS(typecheck_source(ctx_of({{"x", "*(t1, t2)"}}), S("proj 3 x")), TypeError);
  CHECK_THROWS_AS(typecheck_source(ctx_of({{"x", "t1"}}), S("x @ (x)")), TypeError);
  CHECK_THROWS_AS(typecheck_source({}, S("\\x. x")), TypeError);  // unannotated
}

TEST_CASE("type translations") {
  CHECK(type_eq(cps_type(T("t")), T("t")));
  CHECK(type_eq(cps_type(T("(t2) -> t1")), T("(t2, (t1) -> R) -> R")));
  CHECK(type_eq(cps_type(T("*()")), T("*()")));
  CHECK(type_eq(cc_type(T("t")), T("t")));
  CHECK(type_eq(cc_type(T("(t1) -> R")), T("exists t. *((t, t1) -> R, t)")));
  CHECK(type_eq(cps_halt_type(T("t1")), T("(t1) -> R")));
  CHECK(type_eq(compiled_halt_type(T("t1"), false), T("exists t. *((t, t1) -> R, t)")));
  CHECK(type_eq(compiled_halt_type(T("t1"), true), T("(t1) -> R")));
  // the bound variable's name does not matter
  CHECK(type_eq(T("exists s. *((s, t1) -> R, s)"), T("exists t. *((t, t1) -> R, t)")));
}

TEST_CASE("an opened package cannot escape") {
  auto ctx = ctx_of({{"y", "exists t. t"}, {"f", "(t) -> R"}});
  CHECK_THROWS_AS(typecheck_vn(ctx, V("let z = proj 1 y in f @ (z)")), EscapeError);
  auto ok = ctx_of({{"y", "exists t. *((t) -> R, t)"}});
  CHECK_NOTHROW(typecheck_vn(ok, V("let p = proj 1 y in let c = proj 1 p in let e = proj 2 p in c @ (e)")));
}

TEST_CASE("subject reduction on small terms") {
  auto ctx = ctx_of({{"g", "t"}});
  auto m = S("(\\(x:(t) -> t). x) @ (\\(y:t). y)");
  Type a = typecheck_source(ctx, m);
  auto s = step_source(m);
  REQUIRE(s.stepped);
  CHECK(type_eq(typecheck_source(ctx, s.next), a));
  auto r = check_subject_reduction(ctx, src::app(m, {S("g")}), 50);
  CHECK(r.ok);
  CHECK(r.status == RunStatus::Value);
}

TEST_CASE("the identity checks at every stage in both halt configurations") {
  for (bool opt : {false, true}) {
    auto r = check_type_preservation(ctx_of({{"g", "t"}}), label_init(S("\\(x:t). x")), opt);
    CHECK(r.ok);
    CHECK(r.stages.size() == 5);
  }
}

TEST_CASE("compiled programs keep their types while running") {
  GenConfig cfg;
  cfg.seed = 31;
  for (const auto& g : gen_corpus(cfg, 60)) {
    auto l = label_init(g.term);
    CompileOptions o;
    o.typed = true;
    o.ctx = g.ctx;
    auto a = compile_stages(l, o);
    TypeCtx kctx = cps_ctx(g.ctx);
    kctx.emplace_back(kHalt, cps_halt_type(g.type));
    CHECK(check_subject_reduction(kctx, a.cps, 10000).ok);
    CHECK(check_subject_reduction(kctx, a.vn, 10000).ok);
    TypeCtx hctx = compile_ctx(g.ctx);
    hctx.emplace_back(kHalt, compiled_halt_type(g.type, false));
    CHECK(check_subject_reduction(hctx, to_term(a.hoisted), 10000).ok);
  }
}
