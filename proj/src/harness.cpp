#include "costlam/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <random>
#include <thread>

#include "costlam/cost.hpp"
#include "costlam/overloaded.hpp"
#include "costlam/regions.hpp"
#include "costlam/semantics.hpp"
#include "costlam/syntax.hpp"
#include "costlam/transform.hpp"
#include "costlam/typing.hpp"
#include "json.hpp"

namespace costlam {

std::string property_name(Property p) {
  switch (p) {
    case Property::Commutation: return "commutation";
    case Property::Simulation: return "simulation";
    case Property::Cost: return "cost";
    case Property::Types: return "types";
    case Property::Regions: return "regions";
    case Property::Structural: return "structural";
    case Property::Monoid: return "monoid";
  }
  return "?";
}

const std::vector<Property>& all_properties() {
  static const std::vector<Property> ps{Property::Commutation, Property::Simulation,
                                        Property::Cost,        Property::Types,
                                        Property::Regions,     Property::Structural,
                                        Property::Monoid};
  return ps;
}

std::optional<Property> property_from_name(const std::string& s) {
  for (auto p : all_properties())
    if (property_name(p) == s) return p;
  return std::nullopt;
}

std::string outcome_name(Outcome o) {
  switch (o) {
    case Outcome::Pass: return "PASS";
    case Outcome::Fail: return "FAIL";
    case Outcome::Inconclusive: return "INCONCLUSIVE";
  }
  return "?";
}

int exit_code(Outcome o) {
  switch (o) {
    case Outcome::Pass: return 0;
    case Outcome::Fail: return 1;
    case Outcome::Inconclusive: return 3;
  }
  return 1;
}

bool labelled_routine_grammar(const HoistProgram& p, std::string* why) {
  auto bad = [&](std::string s) {
    if (why) *why = std::move(s);
    return false;
  };
  for (const auto& d : p.defs) {
    const vn::Node* cur = d.body.get();
    while (const auto* l = std::get_if<vn::Let>(&cur->v)) {
      if (std::holds_alternative<vn::Lam>(l->bound)) return bad("lambda inside " + d.name.text);
      cur = l->body.get();
    }
    const auto* lb = std::get_if<vn::PreLabel>(&cur->v);
    if (!lb) return bad("routine " + d.name.text + " has no label");
    if (!vn::labels(lb->body).empty()) return bad("routine " + d.name.text + " has two labels");
    if (vn::contains_lambda(lb->body)) return bad("lambda inside " + d.name.text);
  }
  if (!vn::labels(p.main).empty()) return bad("label in main");
  return true;
}

namespace {

using Failures = std::vector<std::pair<std::string, std::string>>;

template <class T>
T freshened(const T& t, NameSupply& names) {
  return has_shadowing(t) ? vn::rename_fresh(t, {}, names) : t;
}

// ---- commutation ----

Failures commutation(const GeneratedTerm& g) {
  Failures f;
  src::Term l = label_init(g.term);
  if (!in_w0(l)) f.emplace_back("labelling", "labelled term is not in W0");
  if (!src::alpha_eq(erase(l), g.term)) f.emplace_back("labelling", "erase(L(M)) differs from M");

  cps::Term c = to_cps(l);
  if (!cps::alpha_eq(erase(c), to_cps(erase(l)))) f.emplace_back("cps", "erase after cps differs");

  vn::Term n = to_value_named(c);
  if (!cps::alpha_eq(readback(n), c)) f.emplace_back("readback", "readback(vn(C)) differs from C");
  if (!vn::alpha_eq(erase(n), to_value_named(erase(c))))
    f.emplace_back("vn", "erase after vn differs");

  vn::Term k = closure_convert(n);
  if (!vn::alpha_eq(erase(k), closure_convert(erase(n)))) f.emplace_back("cc", "erase after cc differs");

  if (!alpha_eq(erase(hoist(k)), hoist(erase(k)))) f.emplace_back("hoist", "erase after hoist differs");

  if (!alpha_eq(erase(compile(l)), compile(g.term)))
    f.emplace_back("compile", "erase(compile(L(M))) differs from compile(M)");
  return f;
}

// ---- simulation ----

// Contracts every application of a one-parameter lambda (a continuation)
// to a value, anywhere in the term. Source lambdas always take at least
// two parameters after CPS, so only continuation redexes are touched.
struct AdminNorm {
  NameSupply& names;
  std::size_t budget;

  cps::Value value(const cps::Value& v) {
    return std::visit(
        overloaded{
            [&](const cps::Var&) { return v; },
            [&](const cps::Lam& l) { return cps::lam(l.params, term(l.body)); },
            [&](const cps::Tuple& t) {
              std::vector<cps::Value> items;
              for (const auto& i : t.items) items.push_back(value(i));
              return cps::tuple(std::move(items));
            }},
        v->v);
  }

  cps::Term term(const cps::Term& t) {
    if (budget == 0) throw std::runtime_error("administrative normalisation diverges");
    --budget;
    return std::visit(
        overloaded{
            [&](const cps::App& a) -> cps::Term {
              auto fn = value(a.fn);
              std::vector<cps::Value> args;
              for (const auto& x : a.args) args.push_back(value(x));
              if (const auto* l = std::get_if<cps::Lam>(&fn->v);
                  l && l->params.size() == 1 && args.size() == 1)
                return term(cps::subst(l->body, {{l->params[0].name, args[0]}}, names));
              return cps::app(fn, std::move(args));
            },
            [&](const cps::LetProj& p) {
              return cps::let_proj(p.name, p.index, value(p.tuple), term(p.body));
            },
            [&](const cps::PreLabel& p) { return cps::pre(p.label, term(p.body)); }},
        t->v);
  }
};

bool admin_eq(const cps::Term& a, const cps::Term& b) {
  NameSupply names = supply_for(a);
  cps::avoid_names(names, b);
  try {
    AdminNorm n{names, 100000};
    return cps::alpha_eq(n.term(a), n.term(b));
  } catch (const std::runtime_error&) {
    return false;
  }
}

std::optional<std::string> cps_lockstep(const src::Term& l, std::size_t fuel) {
  NameSupply sn = supply_for(l);
  src::Term m = l;
  for (std::size_t i = 0; i < fuel; ++i) {
    auto s = step_source(m, sn);
    if (!s.stepped) return std::nullopt;
    std::vector<Label> expect;
    if (s.label) expect.push_back(*s.label);
    cps::Term from = to_cps(m);
    cps::Term target = to_cps(s.next);
    NameSupply cn = supply_for(from);
    bool ok = weak_reaches(
        from, expect, target, [&](const cps::Term& t) { return step_cps(t, cn); },
        [](const cps::Term& a, const cps::Term& b) {
          return cps::alpha_eq(a, b) || admin_eq(a, b);
        },
        fuel);
    if (!ok) return "source step " + std::to_string(i + 1) + " not matched by weak cps steps";
    m = s.next;
  }
  return std::nullopt;
}

std::optional<std::string> vn_lockstep(const src::Term& l, std::size_t fuel) {
  cps::Term c = to_cps(l);
  vn::Term n = to_value_named(c);
  NameSupply cn = supply_for(c);
  NameSupply nn = supply_for(n);
  n = freshened(n, nn);
  for (std::size_t i = 0; i < fuel; ++i) {
    auto cs = step_cps(readback(n), cn);
    auto ns = step_vn(n, nn);
    if (!cs.stepped) {
      if (ns.stepped) return "vn steps where its readback does not, step " + std::to_string(i + 1);
      return std::nullopt;
    }
    if (!ns.stepped) return "readback steps but vn does not, step " + std::to_string(i + 1);
    if (cs.label != ns.label) return "labels differ at step " + std::to_string(i + 1);
    if (!cps::alpha_eq(readback(ns.next), cs.next))
      return "readback mismatch after step " + std::to_string(i + 1);
    n = ns.next;
  }
  return std::nullopt;
}

// Closure conversion does not commute with a substitution that identifies
// two captured names: the stepped code keeps a duplicated environment slot
// that converting the reduct would not create. Merge repeated slots (keeping
// the first) in every code/environment pair so both sides compare.
struct EnvCanon {
  NameSupply& names;

  vn::Term term(const vn::Term& t) {
    return std::visit(
        overloaded{
            [&](const vn::App&) { return t; },
            [&](const vn::PreLabel& p) { return vn::pre(p.label, term(p.body)); },
            [&](const vn::Let& l) -> vn::Term {
              if (auto r = closure(l)) return *r;
              vn::Bindable b = l.bound;
              if (const auto* f = std::get_if<vn::Lam>(&l.bound)) b = vn::Lam{f->params, term(f->body)};
              return vn::let(l.name, b, term(l.body));
            }},
        t->v);
  }

  // let c = λe.. in let env = (w*) in let x = (c, env) in rest
  std::optional<vn::Term> closure(const vn::Let& l) {
    const auto* code = std::get_if<vn::Lam>(&l.bound);
    if (!code || code->params.empty()) return std::nullopt;
    const auto* envl = std::get_if<vn::Let>(&l.body->v);
    if (!envl) return std::nullopt;
    const auto* env = std::get_if<vn::Tuple>(&envl->bound);
    if (!env || env->pack) return std::nullopt;
    const auto* pairl = std::get_if<vn::Let>(&envl->body->v);
    if (!pairl) return std::nullopt;
    const auto* pair = std::get_if<vn::Tuple>(&pairl->bound);
    if (!pair || pair->items.size() != 2 || !(pair->items[0] == l.name) ||
        !(pair->items[1] == envl->name))
      return std::nullopt;

    const Ident& e = code->params[0].name;
    std::vector<Ident> slots;
    vn::Term body = code->body;
    for (std::size_t i = 0; i < env->items.size(); ++i) {
      const auto* pl = std::get_if<vn::Let>(&body->v);
      const auto* pr = pl ? std::get_if<vn::Proj>(&pl->bound) : nullptr;
      if (!pr || !(pr->tuple == e) || pr->index != static_cast<int>(i + 1)) return std::nullopt;
      slots.push_back(pl->name);
      body = pl->body;
    }
    std::vector<Ident> items;
    std::vector<Ident> kept;
    vn::Renaming merge;
    for (std::size_t i = 0; i < slots.size(); ++i) {
      auto it = std::find(items.begin(), items.end(), env->items[i]);
      if (it == items.end()) {
        items.push_back(env->items[i]);
        kept.push_back(slots[i]);
      } else {
        merge[slots[i]] = kept[static_cast<std::size_t>(it - items.begin())];
      }
    }
    if (!merge.empty()) body = vn::rename(body, merge, names);
    body = term(body);
    for (std::size_t i = kept.size(); i-- > 0;)
      body = vn::let(kept[i], vn::proj(static_cast<int>(i + 1), e), body);
    return vn::let(l.name, vn::Lam{code->params, body},
                   vn::let(envl->name, vn::tuple(items),
                           vn::let(pairl->name, pairl->bound, term(pairl->body))));
  }
};

bool env_canon_eq(const vn::Term& a, const vn::Term& b) {
  NameSupply names = supply_for(a);
  vn::avoid_names(names, b);
  EnvCanon c{names};
  return vn::alpha_eq(c.term(a), c.term(b));
}

std::optional<std::string> cc_lockstep(const src::Term& l, std::size_t fuel) {
  vn::Term n = to_value_named(to_cps(l));
  NameSupply nn = supply_for(n);
  n = freshened(n, nn);
  for (std::size_t i = 0; i < fuel; ++i) {
    auto ns = step_vn(n, nn);
    if (!ns.stepped) return std::nullopt;
    std::vector<Label> expect;
    if (ns.label) expect.push_back(*ns.label);
    vn::Term from = closure_convert(n);
    vn::Term target = closure_convert(ns.next);
    NameSupply kn = supply_for(from);
    from = freshened(from, kn);
    bool ok = weak_reaches(
        from, expect, target, [&](const vn::Term& t) { return step_vn(t, kn); },
        [](const vn::Term& a, const vn::Term& b) {
          return vn::alpha_eq(a, b) || env_canon_eq(a, b);
        },
        fuel);
    if (!ok) return "vn step " + std::to_string(i + 1) + " not matched by weak cc steps";
    n = ns.next;
  }
  return std::nullopt;
}

Failures simulation(const GeneratedTerm& g, std::size_t fuel) {
  Failures f;
  src::Term l = label_init(g.term);
  if (auto e = cps_lockstep(l, fuel)) f.emplace_back("cps", *e);
  if (auto e = vn_lockstep(l, fuel)) f.emplace_back("vn", *e);
  if (auto e = cc_lockstep(l, fuel)) f.emplace_back("cc", *e);
  // The default compile calls halt as a closure (proj 1 halt), so its run
  // stops STUCK right at the end; opt-halt calls it directly and must HALT.
  CompileOptions direct;
  direct.opt_halt = true;
  auto src_run = eval_trace(l, fuel);
  auto vn_run = eval_trace(to_term(compile(l)), fuel);
  auto opt_run = eval_trace(to_term(compile(l, direct)), fuel);
  if (src_run.status == RunStatus::Fuel || vn_run.status == RunStatus::Fuel ||
      opt_run.status == RunStatus::Fuel)
    f.emplace_back("inconclusive", "fuel exhausted");
  else if (src_run.labels != vn_run.labels || src_run.labels != opt_run.labels)
    f.emplace_back("trace", "source trace has " + std::to_string(src_run.labels.size()) +
                                " labels, compiled traces " + std::to_string(vn_run.labels.size()) +
                                " and " + std::to_string(opt_run.labels.size()));
  else if (src_run.status == RunStatus::Value && opt_run.status != RunStatus::Halt)
    f.emplace_back("trace", "opt-halt compiled run ended " + status_name(opt_run.status));
  return f;
}

// ---- cost ----

Failures cost(const GeneratedTerm& g, std::size_t fuel) {
  Failures f;
  auto r = certify_cost(g.term, fuel);
  if (!r.sound) f.emplace_back("sound", "emitted RTL has a label-free cycle");
  if (!r.precise && r.sound) f.emplace_back("precise", "emitted RTL is not precise");
  if (r.outcome == CertifyReport::Outcome::Inconclusive) f.emplace_back("inconclusive", r.detail);
  else if (r.outcome == CertifyReport::Outcome::Disagree) f.emplace_back("agree", r.detail);
  return f;
}

// ---- types ----

Failures types(const GeneratedTerm& g, std::size_t fuel) {
  Failures f;
  src::Term l = label_init(g.term);
  auto sr = check_subject_reduction(g.ctx, l, fuel);
  if (!sr.ok) f.emplace_back("subject reduction source", sr.violation);
  for (bool opt : {false, true}) {
    std::string tag = opt ? " opt-halt" : " existential-halt";
    auto rep = check_type_preservation(g.ctx, l, opt);
    if (!rep.ok) {
      for (const auto& s : rep.stages)
        if (!s.ok) f.emplace_back("judgement " + s.stage + tag, s.error);
      continue;
    }
    CompileOptions o;
    o.typed = true;
    o.opt_halt = opt;
    o.ctx = g.ctx;
    auto a = compile_stages(l, o);
    TypeCtx cctx = cps_ctx(g.ctx);
    cctx.emplace_back(kHalt, cps_halt_type(g.type));
    TypeCtx kctx = compile_ctx(g.ctx);
    kctx.emplace_back(kHalt, compiled_halt_type(g.type, opt));
    auto one = [&](const std::string& stage, const SubjectReductionReport& r) {
      if (!r.ok) f.emplace_back("subject reduction " + stage + tag, r.violation);
    };
    if (!opt) {
      one("cps", check_subject_reduction(cctx, a.cps, fuel));
      one("vn", check_subject_reduction(cctx, a.vn, fuel));
    }
    one("cc", check_subject_reduction(kctx, a.cc, fuel));
    one("hoist", check_subject_reduction(kctx, to_term(a.hoisted), fuel));
  }
  return f;
}

// ---- regions ----

Failures regions(const GeneratedTerm& g, std::size_t fuel) {
  Failures f;
  src::Term l = label_init(g.term);
  CompileOptions o;
  o.typed = true;
  o.opt_halt = true;
  o.ctx = g.ctx;
  HoistProgram p = compile(l, o);
  RegionId r("r");
  rgn::Program e = rgn::region_enrich(p, r);
  if (!alpha_eq(rgn::region_erase(e), p)) f.emplace_back("erase", "region_erase(ren(P)) differs from P");
  TypeCtx k = compile_ctx(g.ctx);
  k.emplace_back(kHalt, compiled_halt_type(g.type, true));
  rgn::TypeCtx rctx = rgn::region_enrich_ctx(k, r);
  auto rep = rgn::check_region_progress_and_sr(e, rctx, fuel);
  if (!rep.ok) {
    f.emplace_back("region run", rep.violation);
    return f;
  }
  if (!rep.effect.empty()) f.emplace_back("effect", "program effect is not empty");
  if (rep.status == RunStatus::Fuel) {
    f.emplace_back("inconclusive", "fuel exhausted");
    return f;
  }
  if (rep.status != RunStatus::Halt) f.emplace_back("region run", "ended " + status_name(rep.status));
  auto plain = eval_trace(to_term(p), fuel);
  if (plain.labels != rep.labels) f.emplace_back("trace", "enriched trace differs from plain trace");
  return f;
}

// ---- structural ----

Failures structural(const GeneratedTerm& g) {
  Failures f;
  src::Term l = label_init(g.term);
  CompileOptions o;
  o.hoist.check_measure = true;
  auto a = compile_stages(l, o);
  if (!a.hoist_stats.measure_decreased) f.emplace_back("measure", "measure did not decrease on some step");
  if (!hoist_redexes(to_term(a.hoisted)).empty()) f.emplace_back("normal form", "hoisted program has a redex");
  HoistOptions other;
  other.strategy = HoistStrategy::RightmostInnermost;
  if (!alpha_eq(hoist(a.cc, other), a.hoisted))
    f.emplace_back("confluence", "the two redex strategies give different normal forms");
  std::string why;
  if (!labelled_routine_grammar(a.hoisted, &why)) f.emplace_back("grammar", why);
  return f;
}

// ---- monoid ----

PropertyReport monoid(const CheckOptions& opts) {
  PropertyReport rep;
  rep.property = Property::Monoid;
  std::mt19937_64 rng(opts.gen.seed);
  std::uniform_int_distribution<std::uint64_t> big(0, (std::uint64_t{1} << 62) - 1);
  std::uniform_int_distribution<std::uint64_t> small(0, (std::uint64_t{1} << 20) - 1);
  std::uniform_int_distribution<std::size_t> len(0, 20), pick(0, 7);
  CostTable table;
  std::vector<Label> ls;
  for (int i = 0; i < 8; ++i) {
    ls.emplace_back("l" + std::to_string(i));
    table[ls.back()] = small(rng);
  }
  using M = NatCost;
  auto fail = [&](const std::string& check, const std::string& detail) {
    if (rep.failures.size() < opts.max_reported) rep.failures.push_back({check, detail, "", "", ""});
    rep.outcome = Outcome::Fail;
  };
  for (std::size_t i = 0; i < opts.count; ++i) {
    auto a = big(rng), b = big(rng), c = big(rng);
    std::string at = " at " + std::to_string(a) + ", " + std::to_string(b) + ", " + std::to_string(c);
    if (M::plus(M::plus(a, b), c) != M::plus(a, M::plus(b, c))) fail("associativity", at);
    if (M::plus(M::zero(), a) != a || M::plus(a, M::zero()) != a) fail("identity", at);
    if (M::plus(a, b) != M::plus(b, a)) fail("commutativity", at);
    std::vector<Label> t1, t2;
    for (std::size_t n = len(rng); n-- > 0;) t1.push_back(ls[pick(rng)]);
    for (std::size_t n = len(rng); n-- > 0;) t2.push_back(ls[pick(rng)]);
    std::vector<Label> both = t1;
    both.insert(both.end(), t2.begin(), t2.end());
    if (costof(table, both) != M::plus(costof(table, t1), costof(table, t2)))
      fail("additivity", "traces of length " + std::to_string(t1.size()) + " and " +
                             std::to_string(t2.size()));
    ++rep.count;
  }
  return rep;
}

std::string show_ctx(const TypeCtx& ctx) { return print(ctx); }

}  // namespace

Failures check_term(Property p, const GeneratedTerm& g, std::size_t fuel) {
  try {
    switch (p) {
      case Property::Commutation: return commutation(g);
      case Property::Simulation: return simulation(g, fuel);
      case Property::Cost: return cost(g, fuel);
      case Property::Types: return types(g, fuel);
      case Property::Regions: return regions(g, fuel);
      case Property::Structural: return structural(g);
      case Property::Monoid: return {};
    }
  } catch (const std::exception& e) {
    return {{"exception", e.what()}};
  }
  return {};
}

PropertyReport run_property(Property p, const CheckOptions& opts) {
  auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };
  if (p == Property::Monoid) {
    auto rep = monoid(opts);
    rep.seconds = elapsed();
    return rep;
  }
  PropertyReport rep;
  rep.property = p;
  auto corpus = gen_corpus(opts.gen, opts.count);
  std::vector<Failures> results(corpus.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next++) < corpus.size();) results[i] = check_term(p, corpus[i], opts.fuel);
  };
  unsigned jobs = std::max(1u, opts.jobs);
  std::vector<std::thread> pool;
  for (unsigned j = 1; j < jobs; ++j) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  for (std::size_t i = 0; i < corpus.size(); ++i) {
    ++rep.count;
    bool failed = false;
    for (const auto& [check, detail] : results[i]) {
      if (check == "inconclusive") {
        ++rep.inconclusive;
        continue;
      }
      failed = true;
      ++rep.stats["failed " + check];
      if (rep.failures.size() >= opts.max_reported) continue;
      const auto& g = corpus[i];
      auto still_fails = [&](const src::Term& t) {
        GeneratedTerm h{g.ctx, g.type, t};
        for (const auto& [c, d] : check_term(p, h, opts.fuel))
          if (c == check) return true;
        return false;
      };
      src::Term small = shrink_failing(g.ctx, g.term, still_fails);
      rep.failures.push_back({check, detail, print(g.term), print(small), show_ctx(g.ctx)});
    }
    if (failed) rep.outcome = Outcome::Fail;
  }
  if (rep.outcome == Outcome::Pass && rep.inconclusive > 0) rep.outcome = Outcome::Inconclusive;
  std::size_t size = 0;
  for (const auto& g : corpus) size += src::size(g.term);
  rep.stats["total size"] = size;
  rep.seconds = elapsed();
  return rep;
}

std::string report_json(const PropertyReport& r) {
  nlohmann::json j;
  j["property"] = property_name(r.property);
  j["outcome"] = outcome_name(r.outcome);
  j["count"] = r.count;
  j["inconclusive"] = r.inconclusive;
  j["stats"] = r.stats;
  j["failures"] = nlohmann::json::array();
  for (const auto& f : r.failures)
    j["failures"].push_back(
        {{"check", f.check}, {"detail", f.detail}, {"term", f.term}, {"shrunk", f.shrunk}, {"ctx", f.ctx}});
  return j.dump();
}

}  // namespace costlam
