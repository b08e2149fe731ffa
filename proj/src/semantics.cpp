#include "costlam/semantics.hpp"

#include <map>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "alpha_env.hpp"
#include "costlam/overloaded.hpp"
#include "json.hpp"

namespace costlam {

namespace {

// ---- source: left-to-right call-by-value descent ----

using SrcStep = Step<src::Term>;

SrcStep src_step(const src::Term& t, NameSupply& names);

// Steps the first non-value in `items`; returns false if all are values.
bool step_first(const std::vector<src::Term>& items, NameSupply& names,
                std::vector<src::Term>& out, std::optional<Label>& label,
                bool& is_stuck) {
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (items[i]->is_value) continue;
    SrcStep s = src_step(items[i], names);
    if (!s.stepped) {
      is_stuck = true;
      return true;
    }
    out = items;
    out[i] = s.next;
    label = s.label;
    return true;
  }
  return false;
}

SrcStep src_step(const src::Term& t, NameSupply& names) {
  if (t->is_value) return stuck(t);
  return std::visit(
      overloaded{
          [&](const src::App& x) -> SrcStep {
            std::vector<src::Term> parts{x.fn};
            parts.insert(parts.end(), x.args.begin(), x.args.end());
            std::vector<src::Term> next;
            std::optional<Label> label;
            bool is_stuck = false;
            if (step_first(parts, names, next, label, is_stuck)) {
              if (is_stuck) return stuck(t);
              return {true, label,
                      src::app(next[0], std::vector<src::Term>(
                                            next.begin() + 1, next.end()))};
            }
            auto* f = std::get_if<src::Lam>(&x.fn->v);
            if (!f || f->params.size() != x.args.size()) return stuck(t);
            src::Subst m;
            for (std::size_t i = 0; i < x.args.size(); ++i)
              m[f->params[i].name] = x.args[i];
            return {true, std::nullopt, src::subst(f->body, m, names)};
          },
          [&](const src::Let& x) -> SrcStep {
            if (!x.bound->is_value) {
              SrcStep s = src_step(x.bound, names);
              if (!s.stepped) return stuck(t);
              return {true, s.label, src::let(x.name, s.next, x.body)};
            }
            return {true, std::nullopt,
                    src::subst(x.body, {{x.name, x.bound}}, names)};
          },
          [&](const src::Tuple& x) -> SrcStep {
            std::vector<src::Term> next;
            std::optional<Label> label;
            bool is_stuck = false;
            step_first(x.items, names, next, label, is_stuck);
            if (is_stuck || next.empty()) return stuck(t);
            return {true, label, src::tuple(std::move(next))};
          },
          [&](const src::Proj& x) -> SrcStep {
            if (!x.tuple->is_value) {
              SrcStep s = src_step(x.tuple, names);
              if (!s.stepped) return stuck(t);
              return {true, s.label, src::proj(x.index, s.next)};
            }
            auto* tup = std::get_if<src::Tuple>(&x.tuple->v);
            if (!tup || x.index > static_cast<int>(tup->items.size()))
              return stuck(t);
            return {true, std::nullopt, tup->items[x.index - 1]};
          },
          [&](const src::PreLabel& x) -> SrcStep {
            return {true, x.label, x.body};
          },
          [&](const src::PostLabel& x) -> SrcStep {
            if (!x.body->is_value) {
              SrcStep s = src_step(x.body, names);
              if (!s.stepped) return stuck(t);
              return {true, s.label, src::post(x.label, s.next)};
            }
            return {true, x.label, x.body};
          },
          [&](const src::CostAdd& x) -> SrcStep {
            std::vector<src::Term> next;
            std::optional<Label> label;
            bool is_stuck = false;
            if (step_first({x.lhs, x.rhs}, names, next, label, is_stuck)) {
              if (is_stuck) return stuck(t);
              return {true, label, src::cost_add(next[0], next[1])};
            }
            auto* a = std::get_if<src::CostLit>(&x.lhs->v);
            auto* b = std::get_if<src::CostLit>(&x.rhs->v);
            if (!a || !b) return stuck(t);
            if (a->value > UINT64_MAX - b->value)
              throw std::overflow_error("cost overflow");
            return {true, std::nullopt, src::cost_lit(a->value + b->value)};
          },
          [&](const auto&) -> SrcStep { return stuck(t); },
      },
      t->v);
}

// ---- value named: walk the let-prefix keeping an environment ----

struct Binding {
  const vn::Bindable* value;
  std::size_t position;  // index in the prefix
};

vn::Term rebuild(const std::vector<const vn::Let*>& prefix, vn::Term hole) {
  for (auto it = prefix.rbegin(); it != prefix.rend(); ++it)
    hole = vn::let((*it)->name, (*it)->bound, hole);
  return hole;
}

}  // namespace

std::string status_name(RunStatus s) {
  switch (s) {
    case RunStatus::Value: return "VALUE";
    case RunStatus::Halt: return "HALT";
    case RunStatus::Stuck: return "STUCK";
    case RunStatus::Fuel: return "FUEL";
  }
  return "?";
}

Step<src::Term> step_source(const src::Term& t, NameSupply& names) {
  return src_step(t, names);
}

Step<cps::Term> step_cps(const cps::Term& t, NameSupply& names) {
  return std::visit(
      overloaded{
          [&](const cps::App& x) -> Step<cps::Term> {
            auto* f = std::get_if<cps::Lam>(&x.fn->v);
            if (!f || f->params.size() != x.args.size()) return stuck(t);
            cps::Subst m;
            for (std::size_t i = 0; i < x.args.size(); ++i)
              m[f->params[i].name] = x.args[i];
            return {true, std::nullopt, cps::subst(f->body, m, names)};
          },
          [&](const cps::LetProj& x) -> Step<cps::Term> {
            auto* tup = std::get_if<cps::Tuple>(&x.tuple->v);
            if (!tup || x.index > static_cast<int>(tup->items.size()))
              return stuck(t);
            return {true, std::nullopt,
                    cps::subst(x.body, {{x.name, tup->items[x.index - 1]}},
                               names)};
          },
          [&](const cps::PreLabel& x) -> Step<cps::Term> {
            return {true, x.label, x.body};
          },
      },
      t->v);
}

Step<vn::Term> step_vn(const vn::Term& t, NameSupply& names) {
  std::vector<const vn::Let*> prefix;
  std::unordered_map<std::string, std::vector<Binding>> env;
  const vn::Node* cur = t.get();
  vn::Term cur_ptr = t;
  auto lookup = [&](const Ident& x) -> const Binding* {
    auto it = env.find(x.text);
    if (it == env.end() || it->second.empty()) return nullptr;
    return &it->second.back();
  };
  while (true) {
    if (auto* l = std::get_if<vn::Let>(&cur->v)) {
      if (auto* p = std::get_if<vn::Proj>(&l->bound)) {
        const Binding* b = lookup(p->tuple);
        if (!b) return stuck(t);
        auto* tup = std::get_if<vn::Tuple>(b->value);
        if (!tup || p->index > static_cast<int>(tup->items.size()))
          return stuck(t);
        const Ident& item = tup->items[p->index - 1];
        if (const Binding* ib = lookup(item); ib && ib->position > b->position)
          throw std::logic_error("projecting " + p->tuple.text +
                                 " would capture " + item.text);
        vn::Term body = vn::rename(l->body, {{l->name, item}}, names);
        return {true, std::nullopt, rebuild(prefix, body)};
      }
      env[l->name.text].push_back({&l->bound, prefix.size()});
      prefix.push_back(l);
      cur_ptr = l->body;
      cur = cur_ptr.get();
      continue;
    }
    if (auto* p = std::get_if<vn::PreLabel>(&cur->v))
      return {true, p->label, rebuild(prefix, p->body)};
    const auto& a = std::get<vn::App>(cur->v);
    const Binding* b = lookup(a.fn);
    if (!b) return stuck(t);
    auto* f = std::get_if<vn::Lam>(b->value);
    if (!f || f->params.size() != a.args.size()) return stuck(t);
    vn::Renaming m;
    for (std::size_t i = 0; i < a.args.size(); ++i)
      m[f->params[i].name] = a.args[i];
    // Free variables of the body must still resolve to the same binders at
    // the call site.
    std::set<Ident> params;
    for (const auto& p : f->params) params.insert(p.name);
    for (const auto& v : vn::free_vars(f->body)) {
      if (params.count(v)) continue;
      auto it = env.find(v.text);
      if (it == env.end()) continue;
      const auto& stack = it->second;
      if (!stack.empty() && stack.back().position >= b->position)
        throw std::logic_error("copying the body of " + a.fn.text +
                               " would capture " + v.text);
    }
    return {true, std::nullopt,
            rebuild(prefix, vn::rename_fresh(f->body, m, names))};
  }
}

NameSupply supply_for(const src::Term& t) { return src::supply_avoiding(t); }

NameSupply supply_for(const cps::Term& t) {
  NameSupply s;
  cps::avoid_names(s, t);
  return s;
}

NameSupply supply_for(const vn::Term& t) {
  NameSupply s;
  vn::avoid_names(s, t);
  return s;
}

Step<src::Term> step_source(const src::Term& t) {
  NameSupply s = supply_for(t);
  return step_source(t, s);
}
Step<cps::Term> step_cps(const cps::Term& t) {
  NameSupply s = supply_for(t);
  return step_cps(t, s);
}
Step<vn::Term> step_vn(const vn::Term& t) {
  NameSupply s = supply_for(t);
  return step_vn(t, s);
}

RunStatus final_status(const src::Term& t) {
  if (t->is_value) return RunStatus::Value;
  if (auto* a = std::get_if<src::App>(&t->v))
    if (auto* f = std::get_if<src::Var>(&a->fn->v);
        f && f->name == kHalt && a->args.size() == 1 && a->args[0]->is_value)
      return RunStatus::Halt;
  return RunStatus::Stuck;
}

RunStatus final_status(const cps::Term& t) {
  if (auto* a = std::get_if<cps::App>(&t->v))
    if (auto* f = std::get_if<cps::Var>(&a->fn->v); f && f->name == kHalt)
      return RunStatus::Halt;
  return RunStatus::Stuck;
}

RunStatus final_status(const vn::Term& t) {
  const vn::Node* cur = t.get();
  std::set<Ident> bound;
  while (true) {
    if (auto* l = std::get_if<vn::Let>(&cur->v)) {
      bound.insert(l->name);
      cur = l->body.get();
    } else if (auto* p = std::get_if<vn::PreLabel>(&cur->v)) {
      cur = p->body.get();
    } else {
      const auto& a = std::get<vn::App>(cur->v);
      return a.fn == kHalt && !bound.count(kHalt) ? RunStatus::Halt
                                                  : RunStatus::Stuck;
    }
  }
}

namespace {

bool shadow_rec(const vn::Term& t, detail::BoundSet<Ident>& bound);

bool shadow_bindable(const vn::Bindable& b, detail::BoundSet<Ident>& bound) {
  auto* f = std::get_if<vn::Lam>(&b);
  if (!f) return false;
  for (const auto& p : f->params)
    if (bound.has(p.name)) return true;
  for (const auto& p : f->params) bound.add(p.name);
  bool r = shadow_rec(f->body, bound);
  for (const auto& p : f->params) bound.remove(p.name);
  return r;
}

bool shadow_rec(const vn::Term& t, detail::BoundSet<Ident>& bound) {
  std::vector<Ident> opened;
  const vn::Node* cur = t.get();
  bool r = false;
  while (!r) {
    if (auto* l = std::get_if<vn::Let>(&cur->v)) {
      if (shadow_bindable(l->bound, bound) || bound.has(l->name)) {
        r = true;
        break;
      }
      bound.add(l->name);
      opened.push_back(l->name);
      cur = l->body.get();
    } else if (auto* p = std::get_if<vn::PreLabel>(&cur->v)) {
      cur = p->body.get();
    } else {
      break;
    }
  }
  for (const auto& x : opened) bound.remove(x);
  return r;
}

}  // namespace

bool has_shadowing(const vn::Term& t) {
  detail::BoundSet<Ident> bound;
  return shadow_rec(t, bound);
}

Run<src::Term> eval_trace(const src::Term& t, std::size_t fuel) {
  NameSupply names = supply_for(t);
  return run_with(
      t, fuel, [&](const src::Term& x) { return step_source(x, names); },
      [](const src::Term& x) { return final_status(x); });
}

Run<cps::Term> eval_trace(const cps::Term& t, std::size_t fuel) {
  NameSupply names = supply_for(t);
  return run_with(
      t, fuel, [&](const cps::Term& x) { return step_cps(x, names); },
      [](const cps::Term& x) { return final_status(x); });
}

Run<vn::Term> eval_trace(const vn::Term& t, std::size_t fuel) {
  NameSupply names = supply_for(t);
  vn::Term start = has_shadowing(t) ? vn::rename_fresh(t, {}, names) : t;
  return run_with(
      start, fuel, [&](const vn::Term& x) { return step_vn(x, names); },
      [](const vn::Term& x) { return final_status(x); });
}

std::string trace_lines(const std::vector<TraceEntry>& entries, RunStatus s) {
  std::ostringstream os;
  for (const auto& e : entries)
    os << e.step << " " << (e.label ? e.label->text : ".") << "\n";
  os << status_name(s) << "\n";
  return os.str();
}

std::string trace_json(const std::vector<Label>& labels, std::size_t steps,
                       RunStatus s) {
  nlohmann::json j;
  j["labels"] = nlohmann::json::array();
  for (const auto& l : labels) j["labels"].push_back(l.text);
  j["steps"] = steps;
  j["status"] = status_name(s);
  return j.dump();
}

}  // namespace costlam
