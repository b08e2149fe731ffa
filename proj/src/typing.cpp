#include "costlam/typing.hpp"

#include "costlam/overloaded.hpp"
#include "costlam/syntax.hpp"
#include "costlam/transform.hpp"

namespace costlam {

namespace {

std::string show(const Type& t) { return t ? print_type(t) : "<none>"; }

Type lookup(const TypeCtx& ctx, const Ident& x, const std::string& where) {
  const Type* a = ctx_lookup(ctx, x);
  if (!a) throw TypeError(where, "a bound variable", "free " + x.text);
  return *a;
}

void expect_eq(const Type& want, const Type& got, const std::string& where) {
  if (!type_eq(want, got)) throw TypeError(where, show(want), show(got));
}

Type component(const Type& a, int i, const std::string& where) {
  const auto* p = std::get_if<ty::Product>(&a->v);
  if (!p) throw TypeError(where, "a product", show(a));
  if (i < 1 || i > static_cast<int>(p->items.size()))
    throw TypeError(where, "index within 1.." + std::to_string(p->items.size()),
                    std::to_string(i));
  return p->items[i - 1];
}

const ty::Arrow& arrow_of(const Type& a, std::size_t arity, const std::string& where) {
  const auto* f = std::get_if<ty::Arrow>(&a->v);
  if (!f) throw TypeError(where, "a function", show(a));
  if (f->domain.size() != arity)
    throw TypeError(where, std::to_string(f->domain.size()) + " arguments",
                    std::to_string(arity));
  return *f;
}

bool is_result(const Type& a) { return std::holds_alternative<ty::Result>(a->v); }

Type param_type(const Param& p, const std::string& where) {
  if (!p.type) throw TypeError(where, "an annotated binder", p.name.text);
  return p.type;
}

// ---- source ----

Type src_type(TypeCtx& ctx, const src::Term& m) {
  return std::visit(
      overloaded{
          [&](const src::Var& x) { return lookup(ctx, x.name, "variable"); },
          [&](const src::Lam& x) {
            if (x.params.empty()) throw TypeError("lambda", "parameters", "none");
            std::vector<Type> dom;
            for (const auto& p : x.params) {
              Type a = param_type(p, "lambda");
              if (!is_source_type(a)) throw TypeError("lambda", "a source type", show(a));
              dom.push_back(a);
              ctx.emplace_back(p.name, a);
            }
            Type b = src_type(ctx, x.body);
            ctx.resize(ctx.size() - x.params.size());
            return arrow(std::move(dom), b);
          },
          [&](const src::App& x) {
            Type f = src_type(ctx, x.fn);
            const auto& arr = arrow_of(f, x.args.size(), "application");
            for (std::size_t i = 0; i < x.args.size(); ++i)
              expect_eq(arr.domain[i], src_type(ctx, x.args[i]),
                        "application argument " + std::to_string(i + 1));
            return arr.codomain;
          },
          [&](const src::Let& x) {
            Type a = src_type(ctx, x.bound);
            ctx.emplace_back(x.name, a);
            Type b = src_type(ctx, x.body);
            ctx.pop_back();
            return b;
          },
          [&](const src::Tuple& x) {
            std::vector<Type> items;
            for (const auto& i : x.items) items.push_back(src_type(ctx, i));
            return product(std::move(items));
          },
          [&](const src::Proj& x) {
            return component(src_type(ctx, x.tuple), x.index, "projection");
          },
          [&](const src::PreLabel& x) { return src_type(ctx, x.body); },
          [&](const src::PostLabel& x) { return src_type(ctx, x.body); },
          [&](const src::CostLit&) -> Type {
            throw TypeError("cost literal", "a core term", "cost literal");
          },
          [&](const src::CostAdd&) -> Type {
            throw TypeError("cost sum", "a core term", "cost sum");
          },
      },
      m->v);
}

// ---- CPS ----

void cps_check(TypeCtx& ctx, const cps::Term& m);

Type cps_val(TypeCtx& ctx, const cps::Value& v) {
  return std::visit(
      overloaded{
          [&](const cps::Var& x) { return lookup(ctx, x.name, "variable"); },
          [&](const cps::Lam& x) {
            if (x.params.empty()) throw TypeError("lambda", "parameters", "none");
            std::vector<Type> dom;
            for (const auto& p : x.params) {
              dom.push_back(param_type(p, "lambda"));
              ctx.emplace_back(p.name, dom.back());
            }
            cps_check(ctx, x.body);
            ctx.resize(ctx.size() - x.params.size());
            return arrow(std::move(dom), result_type());
          },
          [&](const cps::Tuple& x) {
            std::vector<Type> items;
            for (const auto& i : x.items) items.push_back(cps_val(ctx, i));
            return product(std::move(items));
          },
      },
      v->v);
}

void cps_check(TypeCtx& ctx, const cps::Term& m) {
  std::visit(overloaded{
                 [&](const cps::App& x) {
                   Type f = cps_val(ctx, x.fn);
                   const auto& arr = arrow_of(f, x.args.size(), "application");
                   if (!is_result(arr.codomain))
                     throw TypeError("application", "R", show(arr.codomain));
                   for (std::size_t i = 0; i < x.args.size(); ++i)
                     expect_eq(arr.domain[i], cps_val(ctx, x.args[i]),
                               "application argument " + std::to_string(i + 1));
                 },
                 [&](const cps::LetProj& x) {
                   Type a = component(cps_val(ctx, x.tuple), x.index, "projection");
                   ctx.emplace_back(x.name, a);
                   cps_check(ctx, x.body);
                   ctx.pop_back();
                 },
                 [&](const cps::PreLabel& x) { cps_check(ctx, x.body); },
             },
             m->v);
}

// ---- value named ----

bool mentions_skolem(const Type& t) {
  for (const auto& v : free_tyvars(t))
    if (is_reserved_name(v.text)) return true;
  return false;
}

struct VnChecker {
  NameSupply skolems;

  void expect(const Type& want, const Type& got, const std::string& where) {
    if (type_eq(want, got)) return;
    if (mentions_skolem(got) || mentions_skolem(want))
      throw EscapeError(where, show(want), show(got));
    throw TypeError(where, show(want), show(got));
  }

  void check(TypeCtx& ctx, const vn::Term& m) {
    std::visit(
        overloaded{
            [&](const vn::App& x) {
              Type f = lookup(ctx, x.fn, "application");
              const auto& arr = arrow_of(f, x.args.size(), "application of " + x.fn.text);
              if (!is_result(arr.codomain))
                throw TypeError("application", "R", show(arr.codomain));
              for (std::size_t i = 0; i < x.args.size(); ++i)
                expect(arr.domain[i], lookup(ctx, x.args[i], "argument"),
                       "argument " + std::to_string(i + 1) + " of " + x.fn.text);
            },
            [&](const vn::Let& x) {
              Type a = bindable(ctx, x.bound, x.name);
              ctx.emplace_back(x.name, a);
              check(ctx, x.body);
              ctx.pop_back();
            },
            [&](const vn::PreLabel& x) { check(ctx, x.body); },
        },
        m->v);
  }

  Type bindable(TypeCtx& ctx, const vn::Bindable& b, const Ident& x) {
    std::string where = "binding of " + x.text;
    return std::visit(
        overloaded{
            [&](const vn::Lam& l) {
              if (l.params.empty()) throw TypeError(where, "parameters", "none");
              std::vector<Type> dom;
              for (const auto& p : l.params) {
                dom.push_back(param_type(p, where));
                ctx.emplace_back(p.name, dom.back());
              }
              check(ctx, l.body);
              ctx.resize(ctx.size() - l.params.size());
              return arrow(std::move(dom), result_type());
            },
            [&](const vn::Tuple& t) {
              if (t.pack) {
                const auto* ex = std::get_if<ty::Exists>(&t.pack->v);
                if (!ex || t.items.size() != 1)
                  throw TypeError(where, "a pack of one identifier at an existential type",
                                  show(t.pack));
                Type got = lookup(ctx, t.items[0], where);
                std::optional<Type> witness;
                if (!match_type(ex->body, ex->var, got, witness))
                  throw TypeError(where, "an instance of " + show(ex->body), show(got));
                return t.pack;
              }
              std::vector<Type> items;
              for (const auto& i : t.items) items.push_back(lookup(ctx, i, where));
              return product(std::move(items));
            },
            [&](const vn::Proj& p) {
              Type a = lookup(ctx, p.tuple, where);
              if (const auto* ex = std::get_if<ty::Exists>(&a->v)) {
                if (p.index != 1) throw TypeError(where, "proj 1 of a package", show(a));
                // The opened type variable is a fresh skolem, so t ∉ ftv(Γ).
                TyVar s = skolems.fresh_tyvar();
                return subst_type(ex->body, ex->var, type_var(s));
              }
              return component(a, p.index, where);
            },
        },
        b);
  }
};

template <class T, class StepFn, class CheckFn>
SubjectReductionReport reduce_checking(T t, std::size_t steps, StepFn&& step,
                                       CheckFn&& check) {
  SubjectReductionReport r;
  try {
    check(t);
  } catch (const TypeError& e) {
    r.ok = false;
    r.violation = std::string("initial term: ") + e.what();
    return r;
  }
  while (true) {
    auto s = step(t);
    if (!s.stepped) {
      r.status = final_status(t);
      return r;
    }
    if (r.steps >= steps) {
      r.status = RunStatus::Fuel;
      return r;
    }
    ++r.steps;
    t = std::move(s.next);
    try {
      check(t);
    } catch (const TypeError& e) {
      r.ok = false;
      r.violation = "after step " + std::to_string(r.steps) + ": " + e.what() +
                    "\n" + print(t);
      return r;
    }
  }
}

}  // namespace

Type typecheck_source(const TypeCtx& ctx, const src::Term& m) {
  TypeCtx c = ctx;
  return src_type(c, m);
}

Type typecheck_cps_value(const TypeCtx& ctx, const cps::Value& v) {
  TypeCtx c = ctx;
  return cps_val(c, v);
}

void typecheck_cps(const TypeCtx& ctx, const cps::Term& m) {
  TypeCtx c = ctx;
  cps_check(c, m);
}

void typecheck_vn(const TypeCtx& ctx, const vn::Term& m) {
  TypeCtx c = ctx;
  VnChecker k;
  for (const auto& [x, a] : ctx)
    for (const auto& v : free_tyvars(a)) k.skolems.avoid(v.text);
  k.check(c, m);
}

void typecheck_hoist(const TypeCtx& ctx, const HoistProgram& p) {
  typecheck_vn(ctx, to_term(p));
}

Type cps_halt_type(const Type& a) { return negate(cps_type(a)); }

Type compiled_halt_type(const Type& a, bool opt_halt) {
  if (opt_halt) return negate(compile_type(a));
  return cc_type(negate(cps_type(a)));
}

TypeCtx compile_ctx(const TypeCtx& ctx) { return cc_ctx(cps_ctx(ctx)); }

SubjectReductionReport check_subject_reduction(const TypeCtx& ctx, const src::Term& m,
                                               std::size_t steps) {
  NameSupply names = supply_for(m);
  Type want;
  return reduce_checking(
      m, steps, [&](const src::Term& t) { return step_source(t, names); },
      [&](const src::Term& t) {
        Type a = typecheck_source(ctx, t);
        if (!want)
          want = a;
        else
          expect_eq(want, a, "type after reduction");
      });
}

SubjectReductionReport check_subject_reduction(const TypeCtx& ctx, const cps::Term& m,
                                               std::size_t steps) {
  NameSupply names = supply_for(m);
  return reduce_checking(
      m, steps, [&](const cps::Term& t) { return step_cps(t, names); },
      [&](const cps::Term& t) { typecheck_cps(ctx, t); });
}

SubjectReductionReport check_subject_reduction(const TypeCtx& ctx, const vn::Term& m,
                                               std::size_t steps) {
  NameSupply names = supply_for(m);
  vn::Term start = m;
  if (has_shadowing(m)) start = vn::rename_fresh(m, {}, names);
  return reduce_checking(
      start, steps, [&](const vn::Term& t) { return step_vn(t, names); },
      [&](const vn::Term& t) { typecheck_vn(ctx, t); });
}

PreservationReport check_type_preservation(const TypeCtx& ctx, const src::Term& m,
                                           bool opt_halt) {
  PreservationReport rep;
  auto judge = [&](std::string stage, TypeCtx c, std::string text, auto&& f) {
    StageJudgement j{std::move(stage), std::move(c), std::move(text), false, ""};
    try {
      f(j.ctx);
      j.ok = true;
    } catch (const TypeError& e) {
      j.error = e.what();
    } catch (const std::exception& e) {
      j.error = e.what();
    }
    rep.stages.push_back(std::move(j));
    return rep.stages.back().ok;
  };

  Type a;
  if (!judge("source", ctx, print(m), [&](const TypeCtx& c) { a = typecheck_source(c, m); }))
    return rep;
  rep.source_type = a;

  CompileArtifacts art;
  CompileOptions opts;
  opts.typed = true;
  opts.opt_halt = opt_halt;
  opts.ctx = ctx;
  try {
    art = compile_stages(m, opts);
  } catch (const std::exception& e) {
    rep.stages.push_back({"compile", ctx, print(m), false, e.what()});
    return rep;
  }

  TypeCtx cps_c = cps_ctx(ctx);
  cps_c.emplace_back(kHalt, cps_halt_type(a));
  TypeCtx cc_c = compile_ctx(ctx);
  cc_c.emplace_back(kHalt, compiled_halt_type(a, opt_halt));

  bool ok = judge("cps", cps_c, print(art.cps),
                  [&](const TypeCtx& c) { typecheck_cps(c, art.cps); });
  ok = judge("vn", cps_c, print(art.vn), [&](const TypeCtx& c) { typecheck_vn(c, art.vn); }) &&
       ok;
  ok = judge("cc", cc_c, print(art.cc), [&](const TypeCtx& c) { typecheck_vn(c, art.cc); }) &&
       ok;
  ok = judge("hoist", cc_c, print(art.hoisted),
             [&](const TypeCtx& c) { typecheck_hoist(c, art.hoisted); }) &&
       ok;
  rep.ok = ok;
  return rep;
}

}  // namespace costlam
