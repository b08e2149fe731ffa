#include "costlam/regions.hpp"
#include "costlam/testgen.hpp"
#include "costlam/transform.hpp"
#include "costlam/typing.hpp"
#include "support.hpp"

using namespace costlam;
using namespace costlam::test;

namespace {

const char* kAssume = "assume v1 : t1; assume v2 : t2; assume halt : (t1) -{}-> R;\n";
const char* kLate =
    "let prj1 = \\[r] (x: *(t1, t2)@r). let z = proj 1 x in dispose r in halt @ (z) in "
    "let pair = \\(x1: t1) (x2: t2). newreg r in let y = (x1, x2)@r in prj1 @ [r] (y) in "
    "pair @ (v1, v2)";
const char* kEarly =
    "let prj1 = \\(x: *(t1, t2)@r). let z = proj 1 x in halt @ (z) in "
    "let pair = \\(x1: t1) (x2: t2). newreg r in let y = (x1, x2)@r in dispose r in prj1 @ (y) in "
    "pair @ (v1, v2)";

RegionInput R(const std::string& text) { return parse_region_input(text, reserved_ok()); }
rgn::Type RT(const char* t) { return parse_region_type(t, reserved_ok()); }

rgn::TupleAt pair_at(const char* r) { return rgn::TupleAt{{Ident("v1"), Ident("v2")}, RegionId(r), {}}; }

}  // namespace

TEST_CASE("heap coherence") {
  using namespace rgn;
  RegionId r("r");
  CHECK(coh({}, {}));
  CHECK(coh({}, {r}));
  CHECK_FALSE(coh({BindTupleAt{Ident("y"), TupleAt{{Ident("x")}, r, {}}}}, {}));
  CHECK(coh({BindTupleAt{Ident("y"), TupleAt{{Ident("x")}, r, {}}}}, {r}));
  // newreg r; let y = (v1,v2)@r; dispose r
  HeapCtx h{NewRegionEntry{r}, BindTupleAt{Ident("y"), pair_at("r")}, DisposedEntry{r}};
  CHECK(coh(h, {}));
  // disposing twice
  HeapCtx twice{NewRegionEntry{r}, DisposedEntry{r}, DisposedEntry{r}};
  CHECK_FALSE(coh(twice, {}));
}

TEST_CASE("not-disposed predicate") {
  using namespace rgn;
  RegionId r("r"), s("s");
  CHECK(ndis(r, {}));
  CHECK_FALSE(ndis(r, {DisposedEntry{r}}));
  CHECK(ndis(r, {NewRegionEntry{r}, DisposedEntry{s}}));
  CHECK(ndis(r, {DisposedEntry{s}}));
}

TEST_CASE("decomposition and plugging are inverse") {
  auto p = R(std::string(kAssume) + "newreg r in let y = (v1, v2)@r in dispose r in let z = proj 1 y in halt @ (z)");
  auto d = rgn::decompose(p.program.main);
  CHECK(d.heap.size() == 3);
  CHECK(rgn::alpha_eq(rgn::plug(d.heap, d.redex), p.program.main));
}

TEST_CASE("disposing before the projection is a memory error") {
  auto p1 = R(std::string(kAssume) + kEarly);
  auto run = rgn::run_region(p1.program);
  REQUIRE(run.error);
  CHECK(run.error->kind == rgn::MemoryError::Kind::AccessDisposed);
  // the region allocated by pair, disposed at heap position 2
  CHECK(run.error->heap_index == 2);
  auto d = rgn::decompose(run.final.main);
  REQUIRE(d.heap.size() == 3);
  const auto* nr = std::get_if<rgn::NewRegionEntry>(&d.heap[0]);
  REQUIRE(nr);
  CHECK(run.error->region == nr->region);
  CHECK_THROWS_AS(rgn::step_region(run.final), rgn::MemoryError);
}

TEST_CASE("passing the region to the projection terminates") {
  auto p2 = R(std::string(kAssume) + kLate);
  auto run = rgn::run_region(p2.program);
  CHECK_FALSE(run.error);
  CHECK(run.status == RunStatus::Halt);
  CHECK(rgn::alpha_eq(run.final.main, parse_region("newreg s in let y = (v1, v2)@s in dispose s in halt @ (v1)",
                                                   reserved_ok())
                                          .main));
  auto rep = rgn::check_region_progress_and_sr(p2.program, p2.ctx);
  CHECK(rep.ok);
  CHECK(rep.effect.empty());
  CHECK(rep.status == RunStatus::Halt);
}

TEST_CASE("disposing twice fails the next coherence check") {
  auto p = R("assume x : t1; assume halt : (t1) -{}-> R;\nnewreg r in dispose r in dispose r in l> halt @ (x)");
  try {
    rgn::step_region(p.program);
    FAIL("no memory error");
  } catch (const rgn::MemoryError& e) {
    CHECK(e.kind == rgn::MemoryError::Kind::IncoherentHeap);
  }
}

TEST_CASE("effect checking") {
  auto p2 = R(std::string(kAssume) + kLate);
  CHECK(rgn::effect_check(p2.ctx, p2.program).empty());
  auto p1 = R(std::string(kAssume) + kEarly);
  CHECK_THROWS_AS(rgn::effect_check(p1.ctx, p1.program), rgn::EffectError);

  // the same region passed twice
  auto twice = R("assume x : forall r1 r2. (*()) -{r1, r2}-> R;\nnewreg r in let y = () in x @ [r, r] (y)");
  CHECK_THROWS_AS(rgn::effect_check(twice.ctx, twice.program), rgn::EffectError);
  auto distinct = R(
      "assume x : forall r1 r2. (*()) -{r1, r2}-> R;\n"
      "newreg r in newreg s in let y = () in x @ [r, s] (y)");
  CHECK(rgn::effect_check(distinct.ctx, distinct.program).empty());

  // the displayed type of prj1 is region-closed
  CHECK(rgn::free_regions(RT("forall r. (*(t1, t2)@r) -{r}-> R")).empty());
}

TEST_CASE("region erasure") {
  auto p = parse_region("newreg r in let y = (a, b)@r in f @ [r] (y)", reserved_ok());
  CHECK(alpha_eq(rgn::region_erase(p), to_program(V("let y = (a, b) in f @ (y)"))));
  CHECK(type_eq(rgn::region_erase_type(RT("forall r. (*(t1, t2)@r) -{r}-> R")), T("(*(t1, t2)) -> R")));
}

TEST_CASE("region enrichment") {
  auto e = rgn::region_enrich(to_program(V("x @ (y)")), RegionId("r"));
  CHECK(rgn::alpha_eq(e, parse_region("newreg r in x @ [r] (y)", reserved_ok())));
  auto plain = rgn::region_enrich(to_program(V("let z = (y,) in halt @ (z)")), RegionId("r"));
  CHECK(rgn::alpha_eq(plain, parse_region("newreg r in let z = (y)@r in halt @ [r] (z)", reserved_ok())));
  CHECK(type_eq(rgn::region_enrich_type(T("(*(t1, t2)) -> R"), RegionId("r")),
                RT("forall r. (*(t1, t2)@r) -{r}-> R")));
  CHECK_THROWS_AS(rgn::region_enrich_ctx({{Ident("p"), T("*(t1)")}}, RegionId("r")), rgn::EnrichError);
}

TEST_CASE("enriched compiled programs are safe") {
  GenConfig cfg;
  cfg.seed = 51;
  for (const auto& g : gen_corpus(cfg, 60)) {
    CompileOptions o;
    o.typed = true;
    o.opt_halt = true;
    o.ctx = g.ctx;
    auto p = compile(label_init(g.term), o);
    auto e = rgn::region_enrich(p);
    CHECK(alpha_eq(rgn::region_erase(e), p));
    TypeCtx c = compile_ctx(g.ctx);
    c.emplace_back(kHalt, compiled_halt_type(g.type, true));
    auto rep = rgn::check_region_progress_and_sr(e, rgn::region_enrich_ctx(c, RegionId("r")));
    CHECK_MESSAGE(rep.ok, rep.violation);
    CHECK(rep.status == RunStatus::Halt);
    CHECK(rep.labels == eval_trace(to_term(p)).labels);
  }
}
