#include "costlam/regions.hpp"

#include <algorithm>
#include <sstream>

#include "costlam/overloaded.hpp"
#include "costlam/syntax.hpp"

namespace costlam::rgn {

// ---- heap contexts ----

namespace {

// Index of the first entry breaking coherence, if any.
std::optional<std::size_t> incoherent_at(const HeapCtx& h, Effect live) {
  for (std::size_t i = 0; i < h.size(); ++i) {
    bool ok = std::visit(overloaded{
                             [&](const BindUnit&) { return true; },
                             [&](const BindTupleAt& b) { return live.count(b.tuple.region) > 0; },
                             [&](const NewRegionEntry& n) {
                               live.insert(n.region);
                               return true;
                             },
                             [&](const DisposedEntry& d) { return live.erase(d.region) > 0; },
                         },
                         h[i]);
    if (!ok) return i;
  }
  return std::nullopt;
}

// Index of the disposal that makes ndis fail, scanning from `from`.
std::optional<std::size_t> disposed_at(const RegionId& r, const HeapCtx& h, std::size_t from) {
  for (std::size_t i = from; i < h.size(); ++i) {
    if (const auto* n = std::get_if<NewRegionEntry>(&h[i]); n && n->region == r) return std::nullopt;
    if (const auto* d = std::get_if<DisposedEntry>(&h[i]); d && d->region == r) return i;
  }
  return std::nullopt;
}

}  // namespace

bool coh(const HeapCtx& h, const Effect& live) { return !incoherent_at(h, live); }

bool ndis(const RegionId& r, const HeapCtx& h) { return !disposed_at(r, h, 0); }

Decomposed decompose(const Term& main) {
  Decomposed d;
  Term cur = main;
  while (true) {
    if (const auto* l = std::get_if<Let>(&cur->v)) {
      if (std::holds_alternative<UnitTuple>(l->bound)) {
        d.heap.push_back(BindUnit{l->name});
      } else if (const auto* t = std::get_if<TupleAt>(&l->bound)) {
        d.heap.push_back(BindTupleAt{l->name, *t});
      } else {
        break;
      }
      cur = l->body;
    } else if (const auto* n = std::get_if<NewRegion>(&cur->v)) {
      d.heap.push_back(NewRegionEntry{n->region});
      cur = n->body;
    } else if (const auto* x = std::get_if<Dispose>(&cur->v)) {
      d.heap.push_back(DisposedEntry{x->region});
      cur = x->body;
    } else {
      break;
    }
  }
  d.redex = cur;
  return d;
}

Term plug(const HeapCtx& h, Term hole) {
  for (std::size_t i = h.size(); i-- > 0;) {
    hole = std::visit(overloaded{
                          [&](const BindUnit& b) { return let(b.name, UnitTuple{}, hole); },
                          [&](const BindTupleAt& b) { return let(b.name, b.tuple, hole); },
                          [&](const NewRegionEntry& n) { return newreg(n.region, hole); },
                          [&](const DisposedEntry& d) { return dispose(d.region, hole); },
                      },
                      h[i]);
  }
  return hole;
}

// ---- semantics ----

std::string kind_name(MemoryError::Kind k) {
  return k == MemoryError::Kind::AccessDisposed ? "AccessDisposed" : "IncoherentHeap";
}

namespace {

struct Found {
  const Def* def = nullptr;
  const TupleAt* tuple = nullptr;
  bool unit = false;
  std::size_t after = 0;  // the explored part of the heap starts here
};

std::optional<Found> lookup(const Program& p, const HeapCtx& h, const Ident& x) {
  for (std::size_t i = h.size(); i-- > 0;) {
    if (const auto* u = std::get_if<BindUnit>(&h[i]); u && u->name == x)
      return Found{nullptr, nullptr, true, i + 1};
    if (const auto* t = std::get_if<BindTupleAt>(&h[i]); t && t->name == x)
      return Found{nullptr, &t->tuple, false, i + 1};
  }
  for (std::size_t i = p.defs.size(); i-- > 0;)
    if (p.defs[i].name == x) return Found{&p.defs[i], nullptr, false, 0};
  return std::nullopt;
}

void require_coherent(const HeapCtx& h) {
  if (auto i = incoherent_at(h, {})) {
    RegionId r = std::visit(overloaded{
                                [](const BindTupleAt& b) { return b.tuple.region; },
                                [](const DisposedEntry& d) { return d.region; },
                                [](const auto&) { return RegionId(); },
                            },
                            h[*i]);
    throw MemoryError(MemoryError::Kind::IncoherentHeap, r, *i,
                      "incoherent heap at entry " + std::to_string(*i) + " on region " + r.text);
  }
}

}  // namespace

RegionStep step_region(const Program& p, NameSupply& names) {
  RegionStep s;
  s.next = p;
  Decomposed d = decompose(p.main);
  auto done = [&](Term tail) {
    s.stepped = true;
    s.next.main = plug(d.heap, std::move(tail));
    return s;
  };
  if (const auto* a = std::get_if<App>(&d.redex->v)) {
    auto f = lookup(p, d.heap, a->fn);
    if (!f || !f->def || f->def->regions.size() != a->regions.size() ||
        f->def->params.size() != a->args.size())
      return s;
    require_coherent(d.heap);
    Renaming vars;
    for (std::size_t i = 0; i < a->args.size(); ++i) vars[f->def->params[i].name] = a->args[i];
    RegionRenaming regs;
    for (std::size_t i = 0; i < a->regions.size(); ++i) regs[f->def->regions[i]] = a->regions[i];
    return done(rename_fresh(f->def->body, vars, regs, names));
  }
  if (const auto* l = std::get_if<Let>(&d.redex->v)) {
    const auto& pr = std::get<Proj>(l->bound);
    auto f = lookup(p, d.heap, pr.tuple);
    if (!f || !f->tuple || pr.index < 1 || pr.index > static_cast<int>(f->tuple->items.size()))
      return s;
    require_coherent(d.heap);
    const RegionId& r = f->tuple->region;
    if (auto at = disposed_at(r, d.heap, f->after))
      throw MemoryError(MemoryError::Kind::AccessDisposed, r, *at,
                        "projection from " + pr.tuple.text + " in disposed region " + r.text);
    return done(rename_fresh(l->body, {{l->name, f->tuple->items[pr.index - 1]}}, {}, names));
  }
  const auto& lb = std::get<PreLabel>(d.redex->v);
  require_coherent(d.heap);
  s.label = lb.label;
  return done(lb.body);
}

RegionStep step_region(const Program& p) {
  NameSupply names;
  avoid_names(names, p);
  return step_region(p, names);
}

RunStatus final_status(const Program& p) {
  Decomposed d = decompose(p.main);
  if (const auto* a = std::get_if<App>(&d.redex->v))
    if (a->fn == kHalt && !lookup(p, d.heap, a->fn)) return RunStatus::Halt;
  return RunStatus::Stuck;
}

RegionRun run_region(const Program& p, std::size_t fuel) {
  RegionRun run;
  NameSupply names;
  avoid_names(names, p);
  run.final = p;
  while (true) {
    RegionStep s;
    try {
      s = step_region(run.final, names);
    } catch (const MemoryError& e) {
      run.error = e;
      run.status = RunStatus::Stuck;
      return run;
    }
    if (!s.stepped) {
      run.status = final_status(run.final);
      return run;
    }
    if (run.steps >= fuel) {
      run.status = RunStatus::Fuel;
      return run;
    }
    ++run.steps;
    if (s.label) run.labels.push_back(*s.label);
    run.final = std::move(s.next);
  }
}

// ---- type and effect system ----

std::set<RegionId> free_regions(const Program& p) {
  std::set<RegionId> out;
  for (const auto& d : p.defs)
    for (const auto& r : free_regions(d)) out.insert(r);
  for (const auto& r : free_regions(p.main)) out.insert(r);
  return out;
}

std::set<RegionId> free_regions(const TypeCtx& ctx) {
  std::set<RegionId> out;
  for (const auto& [x, t] : ctx)
    if (t)
      for (const auto& r : free_regions(t)) out.insert(r);
  return out;
}

namespace {

std::string show(const Effect& e) {
  std::string s = "{";
  for (const auto& r : e) s += (s.size() > 1 ? ", " : "") + r.text;
  return s + "}";
}

class EffectChecker {
 public:
  explicit EffectChecker(TypeCtx ctx) : ctx_(std::move(ctx)) {
    for (const auto& [x, t] : ctx_) {
      names_.avoid(x.text);
      if (t)
        for (const auto& v : free_tyvars(t)) names_.avoid(v.text);
    }
  }

  Effect program(const Program& p) {
    std::size_t pushed = 0;
    for (const auto& d : p.defs) {
      ctx_.emplace_back(d.name, def_type(d));
      ++pushed;
    }
    Effect e = term(p.main);
    ctx_.resize(ctx_.size() - pushed);
    return e;
  }

  Effect term(const Term& t) {
    return std::visit(
        overloaded{
            [&](const App& a) { return app(a); },
            [&](const Let& l) {
              Effect extra;
              Type bound = std::visit(
                  overloaded{
                      [&](const UnitTuple&) { return unit_type(); },
                      [&](const TupleAt& tup) {
                        extra.insert(tup.region);
                        return tuple(tup);
                      },
                      [&](const Proj& pr) { return proj(pr, extra); },
                  },
                  l.bound);
              ctx_.emplace_back(l.name, bound);
              Effect e = term(l.body);
              ctx_.pop_back();
              e.insert(extra.begin(), extra.end());
              return e;
            },
            [&](const PreLabel& l) { return term(l.body); },
            [&](const NewRegion& n) {
              if (free_regions(ctx_).count(n.region))
                fail("newreg", "allocated region " + n.region.text + " is free in the context");
              Effect e = term(n.body);
              e.erase(n.region);
              return e;
            },
            [&](const Dispose& d) {
              Effect e = term(d.body);
              if (e.count(d.region))
                fail("dispose", "region " + d.region.text +
                                    " is disposed but used by the continuation, effect " + show(e));
              e.insert(d.region);
              return e;
            },
        },
        t->v);
  }

 private:
  [[noreturn]] void fail(const std::string& rule, const std::string& what) {
    throw EffectError(rule, rule + ": " + what);
  }

  Type lookup(const Ident& x) {
    for (auto it = ctx_.rbegin(); it != ctx_.rend(); ++it)
      if (it->first == x) {
        if (!it->second) fail("annotation", "no type for " + x.text);
        return it->second;
      }
    fail("variable", "unbound variable " + x.text);
  }

  Type def_type(const Def& d) {
    if (!free_regions(d).empty())
      fail("abstraction", "function " + d.name.text + " is not region-closed");
    std::set<RegionId> open = free_regions(ctx_);
    for (const auto& r : d.regions)
      if (open.count(r))
        fail("abstraction", "region parameter " + r.text + " is free in the context");
    std::vector<Type> dom;
    for (const auto& p : d.params) {
      if (!p.type) fail("annotation", "parameter " + p.name.text + " of " + d.name.text + " is unannotated");
      dom.push_back(p.type);
    }
    std::size_t mark = ctx_.size();
    for (const auto& p : d.params) ctx_.emplace_back(p.name, p.type);
    Effect e = term(d.body);
    ctx_.resize(mark);
    if (d.latent) {
      for (const auto& r : e)
        if (!d.latent->count(r))
          fail("subeffect", "effect " + show(e) + " of " + d.name.text + " exceeds " + show(*d.latent));
      e = *d.latent;
    }
    return forall(d.regions, std::move(dom), std::move(e));
  }

  Effect app(const App& a) {
    Type b = lookup(a.fn);
    const auto* f = std::get_if<Forall>(&b->v);
    if (!f) fail("application", a.fn.text + " is not a function: " + print_type(b));
    if (!free_regions(b).empty())
      fail("application", "type of " + a.fn.text + " is not region-closed");
    std::set<RegionId> seen(a.regions.begin(), a.regions.end());
    if (seen.size() != a.regions.size()) fail("application", "region arguments are not distinct");
    if (a.regions.size() != f->regions.size() || a.args.size() != f->domain.size())
      fail("application", "arity mismatch calling " + a.fn.text);
    std::map<RegionId, RegionId> m;
    for (std::size_t i = 0; i < a.regions.size(); ++i) m[f->regions[i]] = a.regions[i];
    for (std::size_t i = 0; i < a.args.size(); ++i) {
      Type want = subst_regions(f->domain[i], m);
      Type got = lookup(a.args[i]);
      if (!type_eq(want, got))
        fail("application", "argument " + a.args[i].text + " has type " + print_type(got) +
                                ", expected " + print_type(want));
    }
    Effect e;
    for (const auto& r : f->effect) {
      auto it = m.find(r);
      e.insert(it == m.end() ? r : it->second);
    }
    return e;
  }

  Type tuple(const TupleAt& t) {
    if (t.pack) {
      if (t.items.size() != 1) fail("pack", "a packed tuple has one component");
      std::optional<Type> witness;
      Type got = lookup(t.items[0]);
      if (!match_type(t.pack->second, t.pack->first, got, witness))
        fail("pack", print_type(got) + " is not an instance of " + print_type(t.pack->second));
      return exists_at(t.pack->first, t.pack->second, t.region);
    }
    std::vector<Type> items;
    for (const auto& x : t.items) items.push_back(lookup(x));
    return product_at(std::move(items), t.region);
  }

  Type proj(const Proj& pr, Effect& extra) {
    Type t = lookup(pr.tuple);
    if (const auto* p = std::get_if<ProductAt>(&t->v)) {
      if (pr.index < 1 || pr.index > static_cast<int>(p->items.size()))
        fail("projection", "index " + std::to_string(pr.index) + " out of range");
      extra.insert(p->region);
      return p->items[pr.index - 1];
    }
    if (const auto* x = std::get_if<ExistsAt>(&t->v)) {
      if (pr.index != 1) fail("unpack", "an existential is opened with proj 1");
      extra.insert(x->region);
      bool clash = false;
      for (const auto& [y, a] : ctx_)
        if (a && free_tyvars(a).count(x->var)) clash = true;
      if (!clash) return x->body;
      return subst_tyvar(x->body, x->var, rgn::type_var(names_.fresh_tyvar()));
    }
    fail("projection", pr.tuple.text + " is not a tuple: " + print_type(t));
  }

  TypeCtx ctx_;
  NameSupply names_;
};

}  // namespace

Effect effect_check(const TypeCtx& ctx, const Program& p) { return EffectChecker(ctx).program(p); }

Effect effect_check(const TypeCtx& ctx, const Term& t) { return EffectChecker(ctx).term(t); }

// ---- erasure ----

costlam::Type region_erase_type(const Type& t) {
  return std::visit(
      overloaded{
          [](const TVar& x) { return costlam::type_var(x.name); },
          [](const Forall& x) {
            std::vector<costlam::Type> dom;
            for (const auto& d : x.domain) dom.push_back(region_erase_type(d));
            return costlam::arrow(std::move(dom), costlam::result_type());
          },
          [](const Unit&) { return costlam::product({}); },
          [](const ProductAt& x) {
            std::vector<costlam::Type> items;
            for (const auto& d : x.items) items.push_back(region_erase_type(d));
            return costlam::product(std::move(items));
          },
          [](const ExistsAt& x) { return costlam::exists(x.var, region_erase_type(x.body)); },
      },
      t->v);
}

costlam::TypeCtx region_erase_ctx(const TypeCtx& ctx) {
  costlam::TypeCtx out;
  for (const auto& [x, t] : ctx) out.emplace_back(x, t ? region_erase_type(t) : nullptr);
  return out;
}

namespace {

vn::Term erase_term(const Term& t) {
  return std::visit(
      overloaded{
          [](const App& a) { return vn::app(a.fn, a.args); },
          [](const Let& l) {
            vn::Bindable b = std::visit(
                overloaded{
                    [](const UnitTuple&) { return vn::tuple({}); },
                    [](const TupleAt& x) {
                      if (x.pack)
                        return vn::pack(x.items[0], costlam::exists(x.pack->first,
                                                                    region_erase_type(x.pack->second)));
                      return vn::tuple(x.items);
                    },
                    [](const Proj& p) { return vn::proj(p.index, p.tuple); },
                },
                l.bound);
            return vn::let(l.name, std::move(b), erase_term(l.body));
          },
          [](const PreLabel& l) { return vn::pre(l.label, erase_term(l.body)); },
          [](const NewRegion& n) { return erase_term(n.body); },
          [](const Dispose& d) { return erase_term(d.body); },
      },
      t->v);
}

}  // namespace

HoistProgram region_erase(const Program& p) {
  HoistProgram out;
  for (const auto& d : p.defs) {
    std::vector<costlam::Param> params;
    for (const auto& q : d.params) params.push_back({q.name, q.type ? region_erase_type(q.type) : nullptr});
    out.defs.push_back({d.name, std::move(params), erase_term(d.body)});
  }
  out.main = erase_term(p.main);
  return out;
}

// ---- enrichment ----

Type region_enrich_type(const costlam::Type& t, const RegionId& r) {
  return std::visit(
      overloaded{
          [&](const ty::Var& x) { return rgn::type_var(x.name); },
          [&](const ty::Arrow& x) {
            if (!std::holds_alternative<ty::Result>(x.codomain->v))
              throw EnrichError("arrow type without result codomain: " + costlam::print_type(t));
            std::vector<Type> dom;
            for (const auto& d : x.domain) dom.push_back(region_enrich_type(d, r));
            return forall({r}, std::move(dom), {r});
          },
          [&](const ty::Product& x) {
            if (x.items.empty()) return unit_type();
            std::vector<Type> items;
            for (const auto& d : x.items) items.push_back(region_enrich_type(d, r));
            return product_at(std::move(items), r);
          },
          [&](const ty::Exists& x) { return exists_at(x.var, region_enrich_type(x.body, r), r); },
          [&](const ty::Result&) -> Type { throw EnrichError("result type outside an arrow"); },
      },
      t->v);
}

TypeCtx region_enrich_ctx(const costlam::TypeCtx& ctx, const RegionId& r) {
  TypeCtx out;
  for (const auto& [x, t] : ctx) {
    if (t && (std::holds_alternative<ty::Product>(t->v) || std::holds_alternative<ty::Exists>(t->v)))
      throw EnrichError("context entry " + x.text + " has a tuple or existential type " +
                        costlam::print_type(t));
    out.emplace_back(x, t ? region_enrich_type(t, r) : nullptr);
  }
  return out;
}

namespace {

Term enrich_term(const vn::Term& t, const RegionId& r) {
  return std::visit(
      overloaded{
          [&](const vn::App& a) { return app(a.fn, {r}, a.args); },
          [&](const vn::Let& l) {
            Bindable b = std::visit(
                overloaded{
                    [&](const vn::Lam&) -> Bindable {
                      throw EnrichError("lambda inside a hoisted routine body");
                    },
                    [&](const vn::Tuple& x) -> Bindable {
                      if (x.items.empty()) return UnitTuple{};
                      TupleAt out{x.items, r, std::nullopt};
                      if (x.pack) {
                        const auto& e = std::get<ty::Exists>(x.pack->v);
                        out.pack = std::make_pair(e.var, region_enrich_type(e.body, r));
                      }
                      return out;
                    },
                    [&](const vn::Proj& p) -> Bindable { return Proj{p.index, p.tuple}; },
                },
                l.bound);
            return let(l.name, std::move(b), enrich_term(l.body, r));
          },
          [&](const vn::PreLabel& l) { return pre(l.label, enrich_term(l.body, r)); },
      },
      t->v);
}

}  // namespace

Program region_enrich(const HoistProgram& p, const RegionId& r) {
  Program out;
  for (const auto& d : p.defs) {
    std::vector<Param> params;
    for (const auto& q : d.params)
      params.push_back({q.name, q.type ? region_enrich_type(q.type, r) : nullptr});
    out.defs.push_back({d.name, {r}, std::move(params), std::nullopt, enrich_term(d.body, r)});
  }
  out.main = newreg(r, enrich_term(p.main, r));
  return out;
}

Program region_enrich(const HoistProgram& p) { return region_enrich(p, RegionId("r")); }

// ---- progress, subject reduction and simulation ----

RegionReport check_region_progress_and_sr(const Program& p, const TypeCtx& ctx, std::size_t fuel) {
  RegionReport rep;
  auto violate = [&](std::string what) {
    rep.ok = false;
    rep.violation = "step " + std::to_string(rep.steps) + ": " + std::move(what);
    return rep;
  };
  try {
    rep.effect = effect_check(ctx, p);
  } catch (const EffectError& e) {
    return violate(e.what());
  }
  if (!free_regions(p).empty()) return violate("program has free regions");

  NameSupply pnames;
  avoid_names(pnames, p);
  vn::Term q = to_term(region_erase(p));
  NameSupply qnames = supply_for(q);
  if (has_shadowing(q)) q = vn::rename_fresh(q, {}, qnames);

  Program cur = p;
  while (true) {
    RegionStep s;
    try {
      s = step_region(cur, pnames);
    } catch (const MemoryError& e) {
      return violate(std::string("memory error ") + kind_name(e.kind) + ": " + e.what());
    }
    auto qs = step_vn(q, qnames);
    if (!s.stepped) {
      if (qs.stepped) return violate("erased program steps but the enriched one does not");
      rep.status = final_status(cur);
      return rep;
    }
    if (rep.steps >= fuel) {
      rep.status = RunStatus::Fuel;
      return rep;
    }
    if (!qs.stepped) return violate("enriched program steps but the erased one does not");
    if (s.label != qs.label) return violate("step labels differ");
    ++rep.steps;
    if (s.label) rep.labels.push_back(*s.label);
    cur = std::move(s.next);
    q = std::move(qs.next);
    if (!alpha_eq(region_erase(cur), to_program(q)))
      return violate("erased residual differs from the erased program's step");
    try {
      Effect e = effect_check(ctx, cur);
      for (const auto& r : e)
        if (!rep.effect.count(r)) return violate("effect grew to " + show(e));
    } catch (const EffectError& e) {
      return violate(std::string("effect judgement lost: ") + e.what());
    }
  }
}

}  // namespace costlam::rgn
