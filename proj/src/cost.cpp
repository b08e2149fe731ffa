#include "costlam/cost.hpp"

#include <functional>
#include <sstream>
#include <unordered_map>
#include <variant>

#include "costlam/overloaded.hpp"
#include "costlam/transform.hpp"

namespace costlam {

NatCost::value_type NatCost::plus(value_type a, value_type b) {
  if (a > UINT64_MAX - b) throw std::overflow_error("cost overflow");
  return a + b;
}

// ---- instrumentation ----

namespace {

class Instrumenter {
 public:
  Instrumenter(const CostTable& costs, NameSupply& names) : costs_(costs), names_(names) {}

  src::Term psi(const src::Term& v) {
    return std::visit(
        overloaded{
            [&](const src::Var&) { return v; },
            [&](const src::Lam& x) { return src::lam(x.params, sem(x.body)); },
            [&](const src::Tuple& x) {
              std::vector<src::Term> items;
              for (const auto& i : x.items) items.push_back(psi(i));
              return src::tuple(std::move(items));
            },
            [&](const auto&) -> src::Term { throw std::invalid_argument("psi: not a value"); },
        },
        v->v);
  }

  src::Term sem(const src::Term& t) {
    if (src::is_value(t)) return src::tuple({src::cost_lit(0), psi(t)});
    return std::visit(
        overloaded{
            [&](const src::App& x) {
              std::vector<src::Term> parts{x.fn};
              parts.insert(parts.end(), x.args.begin(), x.args.end());
              auto [ms, xs] = fresh_pairs(parts.size() + 1);
              std::vector<src::Term> args;
              for (std::size_t i = 1; i < parts.size(); ++i) args.push_back(src::var(xs[i]));
              src::Term body = src::tuple({sum(ms), src::var(xs.back())});
              body = let_pair(ms.back(), xs.back(), src::app(src::var(xs[0]), std::move(args)), body);
              return bind_all(parts, ms, xs, body);
            },
            [&](const src::Tuple& x) {
              auto [ms, xs] = fresh_pairs(x.items.size());
              std::vector<src::Term> items;
              for (const auto& i : xs) items.push_back(src::var(i));
              src::Term body = src::tuple({sum(ms), src::tuple(std::move(items))});
              return bind_all(x.items, ms, xs, body);
            },
            [&](const src::Proj& x) {
              Ident m = names_.fresh_ident(), y = names_.fresh_ident();
              return let_pair(m, y, sem(x.tuple),
                              src::tuple({src::var(m), src::proj(x.index, src::var(y))}));
            },
            [&](const src::Let& x) {
              Ident m1 = names_.fresh_ident(), m2 = names_.fresh_ident();
              Ident x2 = names_.fresh_ident();
              src::Term inner = let_pair(
                  m2, x2, sem(x.body),
                  src::tuple({src::cost_add(src::var(m1), src::var(m2)), src::var(x2)}));
              return let_pair(m1, x.name, sem(x.bound), inner);
            },
            [&](const src::PreLabel& x) {
              Ident m = names_.fresh_ident(), y = names_.fresh_ident();
              return let_pair(m, y, sem(x.body),
                              src::tuple({src::cost_add(cost(x.label), src::var(m)), src::var(y)}));
            },
            [&](const src::PostLabel& x) {
              Ident m = names_.fresh_ident(), y = names_.fresh_ident();
              return let_pair(m, y, sem(x.body),
                              src::tuple({src::cost_add(src::var(m), cost(x.label)), src::var(y)}));
            },
            [&](const auto&) -> src::Term {
              throw std::invalid_argument("instrument: cost expression in input");
            },
        },
        t->v);
  }

 private:
  src::Term cost(const Label& l) {
    auto it = costs_.find(l);
    if (it == costs_.end()) throw MissingCost(l);
    return src::cost_lit(it->second);
  }

  std::pair<std::vector<Ident>, std::vector<Ident>> fresh_pairs(std::size_t n) {
    std::vector<Ident> ms, xs;
    for (std::size_t i = 0; i < n; ++i) {
      ms.push_back(names_.fresh_ident());
      xs.push_back(names_.fresh_ident());
    }
    return {ms, xs};
  }

  static src::Term sum(const std::vector<Ident>& ms) {
    src::Term s = src::var(ms[0]);
    for (std::size_t i = 1; i < ms.size(); ++i) s = src::cost_add(s, src::var(ms[i]));
    return s;
  }

  // let (m, x) = n in body
  src::Term let_pair(const Ident& m, const Ident& x, src::Term n, src::Term body) {
    Ident p = names_.fresh_ident();
    return src::let(p, std::move(n),
                    src::let(m, src::proj(1, src::var(p)),
                             src::let(x, src::proj(2, src::var(p)), std::move(body))));
  }

  src::Term bind_all(const std::vector<src::Term>& parts, const std::vector<Ident>& ms,
                     const std::vector<Ident>& xs, src::Term body) {
    for (std::size_t i = parts.size(); i-- > 0;) body = let_pair(ms[i], xs[i], sem(parts[i]), body);
    return body;
  }

  const CostTable& costs_;
  NameSupply& names_;
};

}  // namespace

src::Term instrument(const src::Term& m, const CostTable& costs, NameSupply& names) {
  return Instrumenter(costs, names).sem(m);
}

src::Term instrument(const src::Term& m, const CostTable& costs) {
  NameSupply names = src::supply_avoiding(m);
  return instrument(m, costs, names);
}

src::Term instrument_value(const src::Term& v, const CostTable& costs, NameSupply& names) {
  return Instrumenter(costs, names).psi(v);
}

CostResult eval_instrumented(const src::Term& t, std::size_t fuel) {
  auto run = eval_trace(t, fuel);
  if (run.status == RunStatus::Fuel)
    throw FuelExhausted("instrumented run exceeded " + std::to_string(fuel) + " steps");
  const auto* pair = std::get_if<src::Tuple>(&run.final->v);
  if (run.status != RunStatus::Value || !pair || pair->items.size() != 2)
    throw StuckError("instrumented run did not reach a (cost, value) pair");
  const auto* c = std::get_if<src::CostLit>(&pair->items[0]->v);
  if (!c) throw StuckError("instrumented run returned a non-literal cost");
  return {c->value, pair->items[1], run.steps};
}

// ---- RTL emission ----

RtlProgram emit_rtl(const HoistProgram& p) {
  RtlProgram out;
  auto routine = [](Ident name, std::vector<Ident> params, const vn::Term& body) {
    RtlRoutine r{std::move(name), std::move(params), {}, Ident(), {}};
    const vn::Node* cur = body.get();
    while (true) {
      if (const auto* l = std::get_if<vn::Let>(&cur->v)) {
        std::visit(overloaded{
                       [&](const vn::Tuple& t) {
                         r.body.push_back({RtlInstr::Kind::MakeTuple, l->name, t.items, 0, {}});
                       },
                       [&](const vn::Proj& pr) {
                         r.body.push_back({RtlInstr::Kind::Proj, l->name, {pr.tuple}, pr.index, {}});
                       },
                       [&](const vn::Lam&) {
                         throw std::invalid_argument("emit_rtl: lambda inside a routine body");
                       },
                   },
                   l->bound);
        cur = l->body.get();
      } else if (const auto* pl = std::get_if<vn::PreLabel>(&cur->v)) {
        r.body.push_back({RtlInstr::Kind::EmitLabel, {}, {}, 0, pl->label});
        cur = pl->body.get();
      } else {
        const auto& a = std::get<vn::App>(cur->v);
        r.call_fn = a.fn;
        r.call_args = a.args;
        break;
      }
    }
    // The routine's unique label is emitted on entry.
    std::size_t labels = 0, at = 0;
    for (std::size_t i = 0; i < r.body.size(); ++i)
      if (r.body[i].kind == RtlInstr::Kind::EmitLabel) ++labels, at = i;
    if (labels == 1 && at > 0) {
      RtlInstr l = r.body[at];
      r.body.erase(r.body.begin() + static_cast<std::ptrdiff_t>(at));
      r.body.insert(r.body.begin(), l);
    }
    return r;
  };
  bool main_taken = false;
  for (const auto& d : p.defs) {
    std::vector<Ident> params;
    for (const auto& q : d.params) params.push_back(q.name);
    out.routines.push_back(routine(d.name, params, d.body));
    main_taken = main_taken || d.name.text == "main";
  }
  out.routines.push_back(routine(Ident(main_taken ? "_main" : "main"), {}, p.main));
  return out;
}

std::string print_rtl(const RtlProgram& r) {
  std::ostringstream os;
  auto list = [](const std::vector<Ident>& xs) {
    std::string s = "(";
    for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? ", " : "") + xs[i].text;
    return s + ")";
  };
  for (const auto& rt : r.routines) {
    os << "routine " << rt.name.text << " " << list(rt.params) << "\n";
    for (const auto& in : rt.body) {
      switch (in.kind) {
        case RtlInstr::Kind::EmitLabel: os << "  " << in.label.text << ":\n"; break;
        case RtlInstr::Kind::MakeTuple:
          os << "    " << in.dst.text << " <- make_tuple " << list(in.srcs) << " ;\n";
          break;
        case RtlInstr::Kind::Proj:
          os << "    " << in.dst.text << " <- proj " << in.index << " " << in.srcs[0].text
             << " ;\n";
          break;
      }
    }
    os << "    call " << rt.call_fn.text << " " << list(rt.call_args) << "\n";
  }
  return os.str();
}

// ---- RTL interpreter ----

namespace {

struct RtlValue;
using RtlTuple = std::shared_ptr<const std::vector<RtlValue>>;
struct Atom {
  std::string name;
};
struct Code {
  std::size_t routine;
};
struct RtlValue {
  std::variant<Atom, Code, RtlTuple> v;
};

std::unordered_map<std::string, std::size_t> routine_index(const RtlProgram& r) {
  std::unordered_map<std::string, std::size_t> idx;
  for (std::size_t i = 0; i + 1 < r.routines.size(); ++i) idx[r.routines[i].name.text] = i;
  return idx;
}

}  // namespace

RtlRun run_rtl(const RtlProgram& r, std::size_t fuel) {
  RtlRun run;
  if (r.routines.empty()) return run;
  auto globals = routine_index(r);
  std::size_t cur = r.routines.size() - 1;
  std::unordered_map<std::string, RtlValue> env;
  auto get = [&](const Ident& x) -> RtlValue {
    if (auto it = env.find(x.text); it != env.end()) return it->second;
    if (auto it = globals.find(x.text); it != globals.end()) return {Code{it->second}};
    return {Atom{x.text}};
  };
  while (true) {
    const RtlRoutine& rt = r.routines[cur];
    for (const auto& in : rt.body) {
      switch (in.kind) {
        case RtlInstr::Kind::EmitLabel: run.labels.push_back(in.label); break;
        case RtlInstr::Kind::MakeTuple: {
          std::vector<RtlValue> items;
          for (const auto& s : in.srcs) items.push_back(get(s));
          env[in.dst.text] = {std::make_shared<const std::vector<RtlValue>>(std::move(items))};
          ++run.instructions;
          break;
        }
        case RtlInstr::Kind::Proj: {
          RtlValue t = get(in.srcs[0]);
          const auto* tp = std::get_if<RtlTuple>(&t.v);
          if (!tp || in.index < 1 || in.index > static_cast<int>((*tp)->size())) {
            run.status = RunStatus::Stuck;
            return run;
          }
          env[in.dst.text] = (**tp)[in.index - 1];
          ++run.instructions;
          break;
        }
      }
    }
    ++run.instructions;
    RtlValue f = get(rt.call_fn);
    std::vector<RtlValue> args;
    for (const auto& a : rt.call_args) args.push_back(get(a));
    if (const auto* atom = std::get_if<Atom>(&f.v)) {
      run.status = atom->name == kHalt.text ? RunStatus::Halt : RunStatus::Stuck;
      return run;
    }
    const auto* code = std::get_if<Code>(&f.v);
    if (!code || r.routines[code->routine].params.size() != args.size()) {
      run.status = RunStatus::Stuck;
      return run;
    }
    if (run.calls >= fuel) {
      run.status = RunStatus::Fuel;
      return run;
    }
    ++run.calls;
    cur = code->routine;
    env.clear();
    const auto& ps = r.routines[cur].params;
    for (std::size_t i = 0; i < ps.size(); ++i) env[ps[i].text] = args[i];
  }
}

// ---- control-flow graph ----

namespace {

struct Cfg {
  const RtlProgram& prog;
  std::vector<std::size_t> base;  // node id of each routine's first instruction
  std::vector<std::vector<std::size_t>> succ;
  std::vector<CfgNode> nodes;

  explicit Cfg(const RtlProgram& r) : prog(r) {
    for (std::size_t i = 0; i < r.routines.size(); ++i) {
      base.push_back(nodes.size());
      for (std::size_t j = 0; j <= r.routines[i].body.size(); ++j) nodes.push_back({i, j});
    }
    succ.resize(nodes.size());
    auto globals = routine_index(r);
    for (std::size_t i = 0; i < r.routines.size(); ++i) {
      const auto& rt = r.routines[i];
      for (std::size_t j = 0; j < rt.body.size(); ++j) succ[base[i] + j].push_back(base[i] + j + 1);
      std::size_t call = base[i] + rt.body.size();
      bool local = false;
      for (const auto& p : rt.params) local = local || p == rt.call_fn;
      for (const auto& in : rt.body)
        local = local || (in.kind != RtlInstr::Kind::EmitLabel && in.dst == rt.call_fn);
      if (local) {
        // Register-indirect: every routine of matching arity.
        for (std::size_t k = 0; k < r.routines.size(); ++k)
          if (k + 1 < r.routines.size() && r.routines[k].params.size() == rt.call_args.size())
            succ[call].push_back(base[k]);
      } else if (auto it = globals.find(rt.call_fn.text); it != globals.end()) {
        succ[call].push_back(base[it->second]);
      }
    }
  }

  bool is_label(std::size_t n) const {
    const auto& nd = nodes[n];
    const auto& rt = prog.routines[nd.routine];
    return nd.index < rt.body.size() && rt.body[nd.index].kind == RtlInstr::Kind::EmitLabel;
  }
};

struct PathCost {
  std::uint64_t lo, hi;
};

// Label-free path costs from each non-label node; requires acyclicity.
std::vector<std::optional<PathCost>> path_costs(const Cfg& g) {
  std::vector<std::optional<PathCost>> memo(g.nodes.size());
  std::function<PathCost(std::size_t)> go = [&](std::size_t n) -> PathCost {
    if (memo[n]) return *memo[n];
    std::optional<PathCost> best;
    for (auto s : g.succ[n]) {
      PathCost c = g.is_label(s) ? PathCost{0, 0} : go(s);
      if (!best) best = c;
      else best = PathCost{std::min(best->lo, c.lo), std::max(best->hi, c.hi)};
    }
    PathCost here = best ? PathCost{best->lo + 1, best->hi + 1} : PathCost{1, 1};
    memo[n] = here;
    return here;
  };
  for (std::size_t n = 0; n < g.nodes.size(); ++n)
    if (!g.is_label(n)) go(n);
  return memo;
}

}  // namespace

SoundReport check_sound(const RtlProgram& r) {
  Cfg g(r);
  SoundReport rep;
  std::vector<int> color(g.nodes.size(), 0);
  std::vector<std::size_t> stack;
  std::function<bool(std::size_t)> dfs = [&](std::size_t n) -> bool {
    color[n] = 1;
    stack.push_back(n);
    for (auto s : g.succ[n]) {
      if (g.is_label(s)) continue;
      if (color[s] == 1) {
        auto it = std::find(stack.begin(), stack.end(), s);
        for (; it != stack.end(); ++it) rep.cycle.push_back(g.nodes[*it]);
        return true;
      }
      if (color[s] == 0 && dfs(s)) return true;
    }
    stack.pop_back();
    color[n] = 2;
    return false;
  };
  for (std::size_t n = 0; n < g.nodes.size(); ++n) {
    if (g.is_label(n) || color[n] != 0) continue;
    if (dfs(n)) {
      rep.sound = false;
      break;
    }
  }
  return rep;
}

PreciseReport check_precise(const RtlProgram& r) {
  PreciseReport rep;
  if (!check_sound(r).sound) {
    rep.precise = false;
    return rep;
  }
  Cfg g(r);
  auto costs = path_costs(g);
  std::map<Label, std::uint64_t> seen;
  for (std::size_t n = 0; n < g.nodes.size(); ++n) {
    if (!g.is_label(n)) continue;
    const Label& l = r.routines[g.nodes[n].routine].body[g.nodes[n].index].label;
    PathCost c = g.is_label(n + 1) ? PathCost{0, 0} : *costs[n + 1];
    auto it = seen.find(l);
    bool same_as_before = it == seen.end() || it->second == c.hi;
    if (c.lo != c.hi || !same_as_before) {
      rep.precise = false;
      rep.label = l;
      rep.shortest = std::min(c.lo, it == seen.end() ? c.lo : it->second);
      rep.longest = std::max(c.hi, it == seen.end() ? c.hi : it->second);
      return rep;
    }
    seen[l] = c.hi;
  }
  return rep;
}

CostTable costof_table(const RtlProgram& r) {
  auto s = check_sound(r);
  if (!s.sound) throw UnsoundLabelling("label-free cycle in the control-flow graph");
  Cfg g(r);
  auto costs = path_costs(g);
  CostTable table;
  for (std::size_t n = 0; n < g.nodes.size(); ++n) {
    if (!g.is_label(n)) continue;
    const Label& l = r.routines[g.nodes[n].routine].body[g.nodes[n].index].label;
    std::uint64_t c = g.is_label(n + 1) ? 0 : costs[n + 1]->hi;
    auto [it, fresh] = table.emplace(l, c);
    if (!fresh) it->second = std::max(it->second, c);
  }
  return table;
}

// ---- end-to-end certification ----

CertifyReport certify_cost(const src::Term& m, std::size_t fuel) {
  CertifyReport rep;
  src::Term labelled = src::has_labels(m) ? m : label_init(m);
  // halt stays a direct call so the RTL run ends on the free atom.
  CompileOptions opts;
  opts.opt_halt = true;
  HoistProgram p = compile(labelled, opts);
  RtlProgram rtl = emit_rtl(p);
  rep.sound = check_sound(rtl).sound;
  rep.precise = rep.sound && check_precise(rtl).precise;
  if (!rep.sound) {
    rep.outcome = CertifyReport::Outcome::Disagree;
    rep.detail = "emitted RTL is not sound";
    return rep;
  }
  rep.table = costof_table(rtl);
  // A label whose code was discarded during compilation never runs.
  for (const auto& l : src::labels(labelled)) rep.table.emplace(l, 0);

  auto src_run = eval_trace(labelled, fuel);
  auto rtl_run = run_rtl(rtl, fuel);
  if (src_run.status == RunStatus::Fuel || rtl_run.status == RunStatus::Fuel) {
    rep.detail = "fuel exhausted";
    return rep;
  }
  CostResult inst;
  try {
    inst = eval_instrumented(instrument(labelled, rep.table), fuel * 50);
  } catch (const FuelExhausted&) {
    rep.detail = "fuel exhausted in the instrumented run";
    return rep;
  }
  rep.instrumented = inst.cost;
  rep.source_trace = costof(rep.table, src_run.labels);
  rep.compiled_trace = costof(rep.table, rtl_run.labels);
  NameSupply names = src::supply_avoiding(src_run.final);
  rep.value_matches = src_run.status == RunStatus::Value &&
                      src::alpha_eq(instrument_value(src_run.final, rep.table, names), inst.value);
  bool agree = rep.instrumented == rep.source_trace && rep.source_trace == rep.compiled_trace;
  if (agree && rep.precise && rep.value_matches && rtl_run.status == RunStatus::Halt) {
    rep.outcome = CertifyReport::Outcome::Agree;
  } else {
    rep.outcome = CertifyReport::Outcome::Disagree;
    std::ostringstream os;
    os << "instrumented " << rep.instrumented << ", source trace " << rep.source_trace
       << ", compiled trace " << rep.compiled_trace << ", precise " << rep.precise
       << ", value " << rep.value_matches << ", rtl status " << status_name(rtl_run.status);
    rep.detail = os.str();
  }
  return rep;
}

}  // namespace costlam
