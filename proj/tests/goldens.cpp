#include "goldens.hpp"

#include <functional>

#include "costlam/regions.hpp"
#include "costlam/semantics.hpp"
#include "costlam/syntax.hpp"
#include "costlam/transform.hpp"
#include "costlam/typing.hpp"

namespace costlam::test {

namespace {

ParseOptions reserved() {
  ParseOptions o;
  o.allow_reserved = true;
  return o;
}
src::Term S(const char* t) { return parse_source(t, reserved()); }
cps::Term C(const char* t) { return parse_cps(t, reserved()); }
vn::Term V(const char* t) { return parse_vn(t, reserved()); }
Type T(const char* t) { return parse_type(t, reserved()); }

using Fails = std::vector<std::string>;

void expect(Fails& f, bool ok, const std::string& what) {
  if (!ok) f.push_back(what);
}

template <class F>
void guarded(Fails& f, F&& body) {
  try {
    body();
  } catch (const std::exception& e) {
    f.push_back(std::string("exception: ") + e.what());
  }
}

// λx.(@(x,x)>l): the two erasures differ by an eta-expansion.
Fails eta_discrepancy() {
  Fails f;
  guarded(f, [&] {
    auto m = S("\\x. (x @ (x) >l)");
    auto lhs = erase(to_cps(m));
    auto rhs = to_cps(erase(m));
    expect(f, !in_w0(m), "term should fall outside W0");
    expect(f, cps::alpha_eq(lhs, C("halt @ (\\x k. x @ (x, \\x. k @ (x)))")), "er(cps(M)) " + print(lhs));
    expect(f, cps::alpha_eq(rhs, C("halt @ (\\x k. x @ (x, k))")), "cps(er(M)) " + print(rhs));
    expect(f, !cps::alpha_eq(lhs, rhs), "erasures should differ");
  });
  return f;
}

const char* kSelfApp = "(\\x. x @ (x @ (x))) @ (\\x. x)";
const char* kSelfAppCps = "(\\x k. x @ (x, \\y. x @ (y, k))) @ (\\x k. k @ (x), \\x. halt @ (x))";

Fails cps_and_simulation() {
  Fails f;
  guarded(f, [&] {
    auto m = S(kSelfApp);
    auto c = to_cps(m);
    expect(f, cps::alpha_eq(c, C(kSelfAppCps)), "cps(M) " + print(c));
    const char* src_steps[] = {"(\\x. x) @ ((\\x. x) @ (\\x. x))", "(\\x. x) @ (\\x. x)", "\\x. x"};
    const char* cps_steps[] = {
        "(\\x k. k @ (x)) @ (\\x k. k @ (x), \\y. (\\x k. k @ (x)) @ (y, \\x. halt @ (x)))",
        "(\\x k. k @ (x)) @ (\\x k. k @ (x), \\x. halt @ (x))", "halt @ (\\x k. k @ (x))"};
    // The first source step is matched by exactly one step, the others by
    // one or more.
    src::Term cur = m;
    cps::Term ccur = c;
    for (int i = 0; i < 3; ++i) {
      auto s = step_source(cur);
      if (!s.stepped) {
        f.push_back("source stopped early");
        return;
      }
      expect(f, src::alpha_eq(s.next, S(src_steps[i])), "source step " + std::to_string(i + 1));
      cps::Term target = C(cps_steps[i]);
      std::size_t n = 0;
      bool hit = false;
      for (cps::Term t = ccur; n < 20; ++n) {
        if (n > 0 && cps::alpha_eq(t, target)) {
          hit = true;
          break;
        }
        auto cs = step_cps(t);
        if (!cs.stepped) break;
        t = cs.next;
      }
      expect(f, hit && (i != 0 || n == 1), "cps step " + std::to_string(i + 1));
      cur = s.next;
      ccur = target;
    }
  });
  return f;
}

Fails value_named() {
  Fails f;
  guarded(f, [&] {
    auto n = to_value_named(C(kSelfAppCps));
    auto want = V(
        "let z1 = \\x k. let z11 = \\y. x @ (y, k) in x @ (x, z11) in "
        "let z2 = \\x k. k @ (x) in let z3 = \\x. halt @ (x) in z1 @ (z2, z3)");
    expect(f, vn::alpha_eq(n, want), "vn(N) " + print(n));
    expect(f, cps::alpha_eq(readback(n), C(kSelfAppCps)), "readback");
  });
  return f;
}

Fails closure_conversion() {
  Fails f;
  guarded(f, [&] {
    auto m = to_value_named(to_cps(S("\\x. y")));
    expect(f, vn::alpha_eq(m, V("let z1 = \\x k. k @ (y) in halt @ (z1)")), "vn(cps(\\x.y)) " + print(m));
    auto k = closure_convert(m);
    auto want = V(
        "let c = \\e x k. let y = proj 1 e in let c = proj 1 k in let e = proj 2 k in c @ (e, y) in "
        "let e = (y,) in let z1 = (c, e) in let c = proj 1 halt in let e = proj 2 halt in "
        "c @ (e, z1)");
    expect(f, vn::alpha_eq(k, want), "cc(M) " + print(k));
  });
  return f;
}

// M = let x1 = λy1.N in @(x1,z), N = let x2 = λy2.T2 in T1, with T2 = @(w,y2)
// and T1 = @(x2,y1).
Fails hoist_orderings() {
  Fails f;
  guarded(f, [&] {
    auto m = V("let x1 = \\y1. let x2 = \\y2. w @ (y2) in x2 @ (y1) in x1 @ (z)");
    // reduce, then hoist: the definition of x2 is duplicated
    auto s = step_vn(m);
    expect(f, s.stepped && !s.label, "first reduction");
    expect(f, vn::alpha_eq(s.next, V("let x1 = \\y1. let x2 = \\y2. w @ (y2) in x2 @ (y1) in "
                                     "let x2 = \\y2. w @ (y2) in x2 @ (z)")),
           "reduct " + print(s.next));
    auto dup = hoist(s.next);
    expect(f, alpha_eq(dup, to_program(V("let x2 = \\y2. w @ (y2) in let x1 = \\y1. x2 @ (y1) in "
                                         "let x2 = \\y2. w @ (y2) in x2 @ (z)"))),
           "reduce-then-hoist " + print(dup));
    expect(f, hoist_redexes(to_term(dup)).empty(), "reduce-then-hoist is not normal");
    // hoist, then reduce
    auto h = hoist(m);
    expect(f, alpha_eq(h, to_program(V("let x2 = \\y2. w @ (y2) in let x1 = \\y1. x2 @ (y1) in x1 @ (z)"))),
           "hoist " + print(h));
    auto s2 = step_vn(to_term(h));
    expect(f, s2.stepped && vn::alpha_eq(s2.next, V("let x2 = \\y2. w @ (y2) in let x1 = \\y1. x2 @ (y1) in "
                                                    "x2 @ (z)")),
           "hoist-then-reduce");
    expect(f, s2.stepped && hoist_redexes(s2.next).empty(), "hoist-then-reduce is not normal");
  });
  return f;
}

Fails labelling() {
  Fails f;
  guarded(f, [&] {
    auto l = label_init(S("\\x. x @ (x @ (x))"));
    expect(f, src::alpha_eq(l, S("\\x. _l0> x @ (x @ (x) >_l1)")), "L(M) " + print(l));
  });
  return f;
}

// The compilation of λx.y typed at y:t1 ⊢ λx.y : t2 → t1.
Fails typing_compiled_code() {
  Fails f;
  guarded(f, [&] {
    TypeCtx ctx{{Ident("y"), T("t1")}};
    auto m = S("\\(x:t2). y");
    expect(f, type_eq(typecheck_source(ctx, m), T("(t2) -> t1")), "source type");

    Type neg = T("((t2, (t1) -> R) -> R) -> R");  // ¬cps(t2 → t1)
    TypeCtx kctx{{Ident("y"), T("t1")}, {kHalt, neg}};
    auto c = C("halt @ (\\(x:t2) (k:(t1) -> R). k @ (y))");
    typecheck_cps(kctx, c);
    auto n = V("let z1 = \\(x:t2) (k:(t1) -> R). k @ (y) in halt @ (z1)");
    typecheck_vn(kctx, n);

    const char* code =
        "let c = \\(e:*(t1)) (x:t2) (k:exists t. *((t, t1) -> R, t)). "
        "let y = proj 1 e in let k = proj 1 k in let c = proj 1 k in let e = proj 2 k in c @ (e, y) in "
        "let e = (y,) in let z1 = (c, e) in "
        "let z1 = pack[exists t. *((t, t2, exists t. *((t, t1) -> R, t)) -> R, t)] (z1) in ";
    auto mm = V((std::string(code) +
                 "let h = proj 1 halt in let c = proj 1 h in let e = proj 2 h in c @ (e, z1)")
                    .c_str());
    auto mp = V((std::string(code) + "halt @ (z1)").c_str());
    TypeCtx hctx{{Ident("y"), T("t1")},
                 {kHalt, T("exists t. *((t, exists t. *((t, t2, exists t. *((t, t1) -> R, t)) -> R, t)) -> R, t)")}};
    TypeCtx octx{{Ident("y"), T("t1")},
                 {kHalt, T("(exists t. *((t, t2, exists t. *((t, t1) -> R, t)) -> R, t)) -> R")}};
    typecheck_vn(hctx, mm);
    typecheck_vn(octx, mp);

    for (bool opt : {false, true}) {
      CompileOptions o;
      o.typed = true;
      o.opt_halt = opt;
      o.ctx = ctx;
      auto a = compile_stages(m, o);
      std::string tag = opt ? " (opt-halt)" : "";
      expect(f, cps::alpha_eq(a.cps, c), "typed cps" + tag + " " + print(a.cps));
      expect(f, vn::alpha_eq(a.vn, n), "typed vn" + tag + " " + print(a.vn));
      expect(f, vn::alpha_eq(a.cc, opt ? mp : mm), "typed cc" + tag + " " + print(a.cc));
      expect(f, hoist_redexes(a.cc).empty(), "hoisting applies" + tag);
      auto rep = check_type_preservation(ctx, m, opt);
      expect(f, rep.ok, "preservation" + tag);
      for (const auto& st : rep.stages) {
        if (st.stage != "cps" && st.stage != "vn" && st.stage != "cc") continue;
        const Type* h = ctx_lookup(st.ctx, kHalt);
        const Type& want = st.stage == "cc" ? (opt ? octx : hctx)[1].second : neg;
        expect(f, h && type_eq(*h, want), "halt type at " + st.stage + tag);
      }
    }
  });
  return f;
}

const char* kAssume = "assume v1 : t1; assume v2 : t2; assume halt : (t1) -{}-> R;\n";
const char* kDisposeEarly =
    "let prj1 = \\(x: *(t1, t2)@r). let z = proj 1 x in halt @ (z) in "
    "let pair = \\(x1: t1) (x2: t2). newreg r in let y = (x1, x2)@r in dispose r in prj1 @ (y) in "
    "pair @ (v1, v2)";
const char* kDisposeLate =
    "let prj1 = \\[r] (x: *(t1, t2)@r). let z = proj 1 x in dispose r in halt @ (z) in "
    "let pair = \\(x1: t1) (x2: t2). newreg r in let y = (x1, x2)@r in prj1 @ [r] (y) in "
    "pair @ (v1, v2)";

Fails memory_errors() {
  Fails f;
  guarded(f, [&] {
    auto p1 = parse_region_input(std::string(kAssume) + kDisposeEarly, reserved());
    auto r1 = rgn::run_region(p1.program);
    expect(f, r1.error && r1.error->kind == rgn::MemoryError::Kind::AccessDisposed, "P1 must fail AccessDisposed");
    auto stuck_at = parse_region(
        "let prj1 = \\(x: *(t1, t2)@r). let z = proj 1 x in halt @ (z) in "
        "let pair = \\(x1: t1) (x2: t2). newreg r in let y = (x1, x2)@r in dispose r in prj1 @ (y) in "
        "newreg s in let y = (v1, v2)@s in dispose s in let z = proj 1 y in halt @ (z)",
        reserved());
    expect(f, rgn::alpha_eq(r1.final, stuck_at), "P1 stops at " + print(r1.final));

    auto p2 = parse_region_input(std::string(kAssume) + kDisposeLate, reserved());
    auto r2 = rgn::run_region(p2.program);
    expect(f, !r2.error && r2.status == RunStatus::Halt, "P2 must halt");
    auto done = parse_region(
        "let prj1 = \\[r] (x: *(t1, t2)@r). let z = proj 1 x in dispose r in halt @ (z) in "
        "let pair = \\(x1: t1) (x2: t2). newreg r in let y = (x1, x2)@r in prj1 @ [r] (y) in "
        "newreg s in let y = (v1, v2)@s in dispose s in halt @ (v1)",
        reserved());
    expect(f, rgn::alpha_eq(r2.final, done), "P2 ends at " + print(r2.final));
  });
  return f;
}

Fails types_and_effects() {
  Fails f;
  guarded(f, [&] {
    // P2 with the displayed function types as declared latent effects.
    auto p2 = parse_region_input(
        std::string(kAssume) +
            "let prj1 = \\[r] (x: *(t1, t2)@r) !{r}. let z = proj 1 x in dispose r in halt @ (z) in "
            "let pair = \\(x1: t1) (x2: t2) !{}. newreg r in let y = (x1, x2)@r in prj1 @ [r] (y) in "
            "pair @ (v1, v2)",
        reserved());
    expect(f, rgn::effect_check(p2.ctx, p2.program).empty(), "P2 effect is not empty");
    // main alone, under pair : t1,t2 -∅-> R and prj1 : ∀r.×(t1,t2)@r -{r}-> R
    auto use = parse_region_input(
        std::string(kAssume) +
            "assume prj1 : forall r. (*(t1, t2)@r) -{r}-> R; assume pair : (t1, t2) -{}-> R;\n"
            "pair @ (v1, v2)",
        reserved());
    expect(f, rgn::effect_check(use.ctx, use.program).empty(), "pair @ (v1, v2) under the displayed types");
    auto body = parse_region_input(
        std::string(kAssume) +
            "assume prj1 : forall r. (*(t1, t2)@r) -{r}-> R;\n"
            "newreg r in let y = (v1, v2)@r in prj1 @ [r] (y)",
        reserved());
    expect(f, rgn::effect_check(body.ctx, body.program).empty(), "pair's body under prj1's type");

    auto p1 = parse_region_input(std::string(kAssume) + kDisposeEarly, reserved());
    bool rejected = false;
    try {
      rgn::effect_check(p1.ctx, p1.program);
    } catch (const rgn::EffectError&) {
      rejected = true;
    }
    expect(f, rejected, "P1 must be rejected");

    // abstracting prj1 over r still fails, now on the dispose rule
    auto fixed = parse_region_input(
        std::string(kAssume) +
            "let prj1 = \\[r] (x: *(t1, t2)@r). let z = proj 1 x in halt @ (z) in "
            "let pair = \\(x1: t1) (x2: t2). newreg r in let y = (x1, x2)@r in dispose r in prj1 @ [r] (y) in "
            "pair @ (v1, v2)",
        reserved());
    std::string rule;
    try {
      rgn::effect_check(fixed.ctx, fixed.program);
    } catch (const rgn::EffectError& e) {
      rule = e.rule;
    }
    expect(f, rule == "dispose", "region-abstracted P1 must fail on dispose, got '" + rule + "'");
  });
  return f;
}

}  // namespace

std::vector<GoldenResult> run_goldens() {
  std::vector<std::pair<std::string, std::function<Fails()>>> all{
      {"eta discrepancy", eta_discrepancy},
      {"cps and its simulation", cps_and_simulation},
      {"value-named form", value_named},
      {"closure conversion", closure_conversion},
      {"hoist versus reduce", hoist_orderings},
      {"labelling", labelling},
      {"typing the compiled code", typing_compiled_code},
      {"memory errors", memory_errors},
      {"types and effects", types_and_effects},
  };
  std::vector<GoldenResult> out;
  for (auto& [name, run] : all) out.push_back({name, run()});
  return out;
}

}  // namespace costlam::test
