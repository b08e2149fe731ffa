#include "costlam/source.hpp"

#include <stdexcept>

#include "alpha_env.hpp"
#include "costlam/overloaded.hpp"

namespace costlam::src {

namespace {

Term make(Variant v, bool value) {
  return std::make_shared<Node>(Node{std::move(v), value});
}

void check_params(const std::vector<Param>& params) {
  if (params.empty()) throw std::invalid_argument("lambda without parameters");
  for (std::size_t i = 0; i < params.size(); ++i)
    for (std::size_t j = i + 1; j < params.size(); ++j)
      if (params[i].name == params[j].name)
        throw std::invalid_argument("repeated parameter " +
                                    params[i].name.text);
}

bool alpha_rec(const Term& a, const Term& b,
               detail::BinderPairs<Ident>& env) {
  if (a->v.index() != b->v.index()) return false;
  return std::visit(
      overloaded{
          [&](const Var& x) {
            return env.same(x.name, std::get<Var>(b->v).name);
          },
          [&](const Lam& x) {
            const auto& y = std::get<Lam>(b->v);
            if (x.params.size() != y.params.size()) return false;
            for (std::size_t i = 0; i < x.params.size(); ++i)
              env.push(x.params[i].name, y.params[i].name);
            bool r = alpha_rec(x.body, y.body, env);
            for (std::size_t i = x.params.size(); i-- > 0;)
              env.pop(x.params[i].name, y.params[i].name);
            return r;
          },
          [&](const App& x) {
            const auto& y = std::get<App>(b->v);
            if (x.args.size() != y.args.size()) return false;
            if (!alpha_rec(x.fn, y.fn, env)) return false;
            for (std::size_t i = 0; i < x.args.size(); ++i)
              if (!alpha_rec(x.args[i], y.args[i], env)) return false;
            return true;
          },
          [&](const Let& x) {
            const auto& y = std::get<Let>(b->v);
            if (!alpha_rec(x.bound, y.bound, env)) return false;
            env.push(x.name, y.name);
            bool r = alpha_rec(x.body, y.body, env);
            env.pop(x.name, y.name);
            return r;
          },
          [&](const Tuple& x) {
            const auto& y = std::get<Tuple>(b->v);
            if (x.items.size() != y.items.size()) return false;
            for (std::size_t i = 0; i < x.items.size(); ++i)
              if (!alpha_rec(x.items[i], y.items[i], env)) return false;
            return true;
          },
          [&](const Proj& x) {
            const auto& y = std::get<Proj>(b->v);
            return x.index == y.index && alpha_rec(x.tuple, y.tuple, env);
          },
          [&](const PreLabel& x) {
            const auto& y = std::get<PreLabel>(b->v);
            return x.label == y.label && alpha_rec(x.body, y.body, env);
          },
          [&](const PostLabel& x) {
            const auto& y = std::get<PostLabel>(b->v);
            return x.label == y.label && alpha_rec(x.body, y.body, env);
          },
          [&](const CostLit& x) {
            return x.value == std::get<CostLit>(b->v).value;
          },
          [&](const CostAdd& x) {
            const auto& y = std::get<CostAdd>(b->v);
            return alpha_rec(x.lhs, y.lhs, env) && alpha_rec(x.rhs, y.rhs, env);
          },
      },
      a->v);
}

void fv_rec(const Term& t, detail::BoundSet<Ident>& bound,
            std::set<Ident>& out) {
  std::visit(overloaded{
                 [&](const Var& x) {
                   if (!bound.has(x.name)) out.insert(x.name);
                 },
                 [&](const Lam& x) {
                   for (const auto& p : x.params) bound.add(p.name);
                   fv_rec(x.body, bound, out);
                   for (const auto& p : x.params) bound.remove(p.name);
                 },
                 [&](const App& x) {
                   fv_rec(x.fn, bound, out);
                   for (const auto& a : x.args) fv_rec(a, bound, out);
                 },
                 [&](const Let& x) {
                   fv_rec(x.bound, bound, out);
                   bound.add(x.name);
                   fv_rec(x.body, bound, out);
                   bound.remove(x.name);
                 },
                 [&](const Tuple& x) {
                   for (const auto& a : x.items) fv_rec(a, bound, out);
                 },
                 [&](const Proj& x) { fv_rec(x.tuple, bound, out); },
                 [&](const PreLabel& x) { fv_rec(x.body, bound, out); },
                 [&](const PostLabel& x) { fv_rec(x.body, bound, out); },
                 [&](const CostLit&) {},
                 [&](const CostAdd& x) {
                   fv_rec(x.lhs, bound, out);
                   fv_rec(x.rhs, bound, out);
                 },
             },
             t->v);
}

template <class F>
void for_children(const Term& t, F&& f) {
  std::visit(overloaded{
                 [&](const Var&) {},
                 [&](const Lam& x) { f(x.body); },
                 [&](const App& x) {
                   f(x.fn);
                   for (const auto& a : x.args) f(a);
                 },
                 [&](const Let& x) {
                   f(x.bound);
                   f(x.body);
                 },
                 [&](const Tuple& x) {
                   for (const auto& a : x.items) f(a);
                 },
                 [&](const Proj& x) { f(x.tuple); },
                 [&](const PreLabel& x) { f(x.body); },
                 [&](const PostLabel& x) { f(x.body); },
                 [&](const CostLit&) {},
                 [&](const CostAdd& x) {
                   f(x.lhs);
                   f(x.rhs);
                 },
             },
             t->v);
}

struct Substituter {
  NameSupply& names;
  std::set<Ident> range_fv;

  // Renames a binder when it could capture a free name of the range.
  Ident open(const Ident& x, Subst& inner) {
    inner.erase(x);
    if (!range_fv.count(x)) return x;
    Ident fresh = names.fresh_ident();
    inner[x] = var(fresh);
    return fresh;
  }

  Term go(const Term& t, const Subst& m) {
    if (m.empty()) return t;
    return std::visit(
        overloaded{
            [&](const Var& x) -> Term {
              auto it = m.find(x.name);
              return it == m.end() ? t : it->second;
            },
            [&](const Lam& x) -> Term {
              Subst inner = m;
              for (const auto& p : x.params) inner.erase(p.name);
              if (inner.empty()) return t;
              std::vector<Param> ps = x.params;
              for (auto& p : ps) p.name = open(p.name, inner);
              return lam(std::move(ps), go(x.body, inner));
            },
            [&](const App& x) -> Term {
              std::vector<Term> args;
              for (const auto& a : x.args) args.push_back(go(a, m));
              return app(go(x.fn, m), std::move(args));
            },
            [&](const Let& x) -> Term {
              Term bound = go(x.bound, m);
              Subst inner = m;
              Ident name = open(x.name, inner);
              return let(name, bound, go(x.body, inner));
            },
            [&](const Tuple& x) -> Term {
              std::vector<Term> items;
              for (const auto& a : x.items) items.push_back(go(a, m));
              return tuple(std::move(items));
            },
            [&](const Proj& x) -> Term { return proj(x.index, go(x.tuple, m)); },
            [&](const PreLabel& x) -> Term {
              return pre(x.label, go(x.body, m));
            },
            [&](const PostLabel& x) -> Term {
              return post(x.label, go(x.body, m));
            },
            [&](const CostLit&) -> Term { return t; },
            [&](const CostAdd& x) -> Term {
              return cost_add(go(x.lhs, m), go(x.rhs, m));
            },
        },
        t->v);
  }
};

}  // namespace

Term var(Ident x) { return make(Var{std::move(x)}, true); }
Term var(const char* x) { return var(Ident(x)); }

Term lam(std::vector<Param> params, Term body) {
  check_params(params);
  return make(Lam{std::move(params), std::move(body)}, true);
}

Term lam(std::vector<Ident> params, Term body) {
  std::vector<Param> ps;
  for (auto& p : params) ps.push_back(Param{std::move(p), nullptr});
  return lam(std::move(ps), std::move(body));
}

Term app(Term fn, std::vector<Term> args) {
  if (args.empty()) throw std::invalid_argument("application without arguments");
  return make(App{std::move(fn), std::move(args)}, false);
}

Term let(Ident x, Term bound, Term body) {
  return make(Let{std::move(x), std::move(bound), std::move(body)}, false);
}

Term tuple(std::vector<Term> items) {
  bool value = true;
  for (const auto& i : items) value = value && i->is_value;
  return make(Tuple{std::move(items)}, value);
}

Term proj(int index, Term t) {
  if (index < 1) throw std::invalid_argument("projection index below 1");
  return make(Proj{index, std::move(t)}, false);
}

Term pre(Label l, Term body) {
  return make(PreLabel{std::move(l), std::move(body)}, false);
}

Term post(Label l, Term body) {
  return make(PostLabel{std::move(l), std::move(body)}, false);
}

Term cost_lit(std::uint64_t value) { return make(CostLit{value}, true); }

Term cost_add(Term lhs, Term rhs) {
  return make(CostAdd{std::move(lhs), std::move(rhs)}, false);
}

bool alpha_eq(const Term& a, const Term& b) {
  detail::BinderPairs<Ident> env;
  return alpha_rec(a, b, env);
}

std::set<Ident> free_vars(const Term& t) {
  detail::BoundSet<Ident> bound;
  std::set<Ident> out;
  fv_rec(t, bound, out);
  return out;
}

std::set<Label> labels(const Term& t) {
  std::set<Label> out;
  std::vector<Term> stack{t};
  while (!stack.empty()) {
    Term cur = stack.back();
    stack.pop_back();
    if (auto* p = std::get_if<PreLabel>(&cur->v)) out.insert(p->label);
    if (auto* p = std::get_if<PostLabel>(&cur->v)) out.insert(p->label);
    for_children(cur, [&](const Term& c) { stack.push_back(c); });
  }
  return out;
}

bool has_labels(const Term& t) { return !labels(t).empty(); }

std::size_t size(const Term& t) {
  std::size_t n = 1;
  for_children(t, [&](const Term& c) { n += size(c); });
  return n;
}

void avoid_names(NameSupply& names, const Term& t) {
  std::visit(overloaded{
                 [&](const Var& x) { names.avoid(x.name.text); },
                 [&](const Lam& x) {
                   for (const auto& p : x.params) names.avoid(p.name.text);
                 },
                 [&](const Let& x) { names.avoid(x.name.text); },
                 [&](const PreLabel& x) { names.avoid(x.label.text); },
                 [&](const PostLabel& x) { names.avoid(x.label.text); },
                 [&](const auto&) {},
             },
             t->v);
  for_children(t, [&](const Term& c) { avoid_names(names, c); });
}

NameSupply supply_avoiding(const Term& t) {
  NameSupply names;
  avoid_names(names, t);
  return names;
}

Term subst(const Term& body, const Subst& bindings, NameSupply& names) {
  Substituter s{names, {}};
  for (const auto& [x, v] : bindings)
    for (const auto& y : free_vars(v)) s.range_fv.insert(y);
  return s.go(body, bindings);
}

Term subst(const Term& body, const Subst& bindings) {
  NameSupply names = supply_avoiding(body);
  for (const auto& [x, v] : bindings) avoid_names(names, v);
  return subst(body, bindings, names);
}

}  // namespace costlam::src
