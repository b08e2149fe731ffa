#include <limits>
#include <random>

#include "costlam/cost.hpp"
#include "costlam/testgen.hpp"
#include "costlam/transform.hpp"
#include "support.hpp"

using namespace costlam;
using namespace costlam::test;

namespace {

RtlInstr emit(const char* l) { return {RtlInstr::Kind::EmitLabel, {}, {}, 0, Label(l)}; }
RtlInstr proj(const char* dst, int i, const char* src) {
  return {RtlInstr::Kind::Proj, Ident(dst), {Ident(src)}, i, {}};
}
RtlRoutine routine(const char* name, std::vector<const char*> params, std::vector<RtlInstr> body,
                   const char* fn, std::vector<const char*> args) {
  RtlRoutine r;
  r.name = Ident(name);
  for (auto p : params) r.params.emplace_back(p);
  r.body = std::move(body);
  r.call_fn = Ident(fn);
  for (auto a : args) r.call_args.emplace_back(a);
  return r;
}

}  // namespace

TEST_CASE("natural costs form a monoid and overflow is an error") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 1000; ++i) {
    std::uint64_t a = rng() >> 3, b = rng() >> 3, c = rng() >> 3;
    CHECK(NatCost::plus(NatCost::plus(a, b), c) == NatCost::plus(a, NatCost::plus(b, c)));
    CHECK(NatCost::plus(a, NatCost::zero()) == a);
    CHECK(NatCost::plus(NatCost::zero(), a) == a);
  }
  CHECK_THROWS_AS(NatCost::plus(std::numeric_limits<std::uint64_t>::max(), 1), std::overflow_error);
}

TEST_CASE("costof is additive over traces") {
  CostTable t{{Label("a"), 2}, {Label("b"), 5}};
  std::vector<Label> x{Label("a"), Label("b")}, y{Label("b"), Label("b"), Label("a")};
  std::vector<Label> xy = x;
  xy.insert(xy.end(), y.begin(), y.end());
  CHECK(costof(t, xy) == costof(t, x) + costof(t, y));
  CHECK(costof(t, {}) == 0);
  CHECK_THROWS_AS(costof(t, {Label("c")}), MissingCost);
}

TEST_CASE("instrumented values and labels") {
  CostTable t{{Label("l"), 4}};
  auto v = S("\\x. x");
  auto r = eval_instrumented(instrument(v, t));
  CHECK(r.cost == 0);
  NameSupply names;
  CHECK(src::alpha_eq(r.value, instrument_value(v, t, names)));
  auto r2 = eval_instrumented(instrument(S("l> (a, b)"), t));
  CHECK(r2.cost == 4);
  CHECK(src::alpha_eq(r2.value, S("(a, b)")));
  CHECK_THROWS_AS(instrument(S("m> a"), t), MissingCost);
}

TEST_CASE("the instrumented self-application costs its trace") {
  auto m = src::app(label_init(S("\\x. x @ (x @ (x))")), {S("\\y. i> y")});
  CostTable t{{Label("_l0"), 3}, {Label("_l1"), 10}, {Label("i"), 100}};
  auto run = eval_trace(m);
  auto r = eval_instrumented(instrument(m, t));
  CHECK(r.cost == costof(t, run.labels));
  CHECK(r.cost == 3 + 100 + 10 + 100);
  NameSupply names;
  CHECK(src::alpha_eq(r.value, instrument_value(run.final, t, names)));
}

TEST_CASE("instrumentation matches the trace cost on generated terms") {
  GenConfig cfg;
  cfg.seed = 41;
  std::mt19937_64 rng(41);
  for (const auto& g : gen_corpus(cfg, 100)) {
    auto l = label_init(g.term);
    CostTable t;
    for (const auto& lb : src::labels(l)) t[lb] = rng() % 1000;
    auto run = eval_trace(l);
    auto r = eval_instrumented(instrument(l, t));
    CHECK(r.cost == costof(t, run.labels));
    NameSupply names;
    CHECK(src::alpha_eq(r.value, instrument_value(run.final, t, names)));
  }
}

TEST_CASE("emitting a routine") {
  auto p = parse_hoist("let g = \\k x. l> let a = proj 1 k in let b = (a, x) in f @ (b) in halt @ (z)",
                       reserved_ok());
  auto rtl = emit_rtl(p);
  REQUIRE(rtl.routines.size() == 2);
  const auto& g = rtl.routines[0];
  REQUIRE(g.body.size() == 3);
  CHECK(g.body[0].kind == RtlInstr::Kind::EmitLabel);
  CHECK(g.body[0].label == Label("l"));
  CHECK(g.body[1].kind == RtlInstr::Kind::Proj);
  CHECK(g.body[1].dst == Ident("a"));
  CHECK(g.body[1].index == 1);
  CHECK(g.body[2].kind == RtlInstr::Kind::MakeTuple);
  CHECK(g.body[2].srcs == std::vector<Ident>{Ident("a"), Ident("x")});
  CHECK(g.call_fn == Ident("f"));
  // two instructions and the call
  CHECK(costof_table(rtl).at(Label("l")) == 3);

  auto only = emit_rtl(parse_hoist("halt @ (x)"));
  REQUIRE(only.routines.size() == 1);
  CHECK(only.routines[0].body.empty());
  CHECK(only.routines[0].call_fn == kHalt);
  CHECK(run_rtl(only).status == RunStatus::Halt);
}

TEST_CASE("compiled programs have one label per routine, at the head") {
  CompileOptions o;
  o.opt_halt = true;
  auto rtl = emit_rtl(compile(label_init(S("\\x. y")), o));
  for (std::size_t i = 0; i + 1 < rtl.routines.size(); ++i) {
    const auto& r = rtl.routines[i];
    std::size_t labels = 0;
    for (const auto& in : r.body) labels += in.kind == RtlInstr::Kind::EmitLabel;
    CHECK(labels == 1);
    REQUIRE(!r.body.empty());
    CHECK(r.body[0].kind == RtlInstr::Kind::EmitLabel);
    // straight line: the cost is the body after the label plus the call
    CHECK(costof_table(rtl).at(r.body[0].label) == r.body.size());
  }
}

TEST_CASE("a label-free loop is unsound") {
  RtlProgram r;
  r.routines.push_back(routine("f", {}, {}, "f", {}));
  r.routines.push_back(routine("main", {}, {}, "f", {}));
  auto s = check_sound(r);
  CHECK_FALSE(s.sound);
  CHECK_FALSE(s.cycle.empty());
  CHECK_THROWS_AS(costof_table(r), UnsoundLabelling);

  RtlProgram ok;
  ok.routines.push_back(routine("f", {}, {emit("l")}, "f", {}));
  ok.routines.push_back(routine("main", {}, {}, "f", {}));
  CHECK(check_sound(ok).sound);
}

TEST_CASE("two label-free paths of different length are imprecise") {
  // k is a register, so the call may reach either one-parameter routine
  RtlProgram r;
  r.routines.push_back(routine("h", {"k"}, {emit("l")}, "k", {"k"}));
  r.routines.push_back(routine("p", {"u"}, {proj("a", 1, "u"), emit("m")}, "halt", {"a"}));
  r.routines.push_back(routine("q", {"u"}, {proj("a", 1, "u"), proj("b", 1, "a"), emit("n")}, "halt", {"b"}));
  r.routines.push_back(routine("main", {}, {}, "halt", {}));
  CHECK(check_sound(r).sound);
  auto p = check_precise(r);
  CHECK_FALSE(p.precise);
  REQUIRE(p.label);
  CHECK(*p.label == Label("l"));
  CHECK(p.shortest < p.longest);
}

TEST_CASE("certification on small programs") {
  auto r = certify_cost(S("(\\x. x @ (x @ (x))) @ (\\x. x)"));
  CHECK(r.outcome == CertifyReport::Outcome::Agree);
  CHECK(r.instrumented == r.source_trace);
  CHECK(r.source_trace == r.compiled_trace);
  CHECK(r.sound);
  CHECK(r.precise);

  auto v = certify_cost(S("\\x. x"));
  CHECK(v.outcome == CertifyReport::Outcome::Agree);
  CHECK(v.source_trace == 0);
  CHECK(v.compiled_trace == 0);
}
