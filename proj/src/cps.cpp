#include "costlam/cps.hpp"

#include <stdexcept>

#include "alpha_env.hpp"
#include "costlam/overloaded.hpp"

namespace costlam::cps {

namespace {

using Env = detail::BinderPairs<Ident>;

bool eq_term(const Term& a, const Term& b, Env& env);

bool eq_value(const Value& a, const Value& b, Env& env) {
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
            bool r = eq_term(x.body, y.body, env);
            for (std::size_t i = x.params.size(); i-- > 0;)
              env.pop(x.params[i].name, y.params[i].name);
            return r;
          },
          [&](const Tuple& x) {
            const auto& y = std::get<Tuple>(b->v);
            if (x.items.size() != y.items.size()) return false;
            for (std::size_t i = 0; i < x.items.size(); ++i)
              if (!eq_value(x.items[i], y.items[i], env)) return false;
            return true;
          },
      },
      a->v);
}

bool eq_term(const Term& a, const Term& b, Env& env) {
  if (a->v.index() != b->v.index()) return false;
  return std::visit(
      overloaded{
          [&](const App& x) {
            const auto& y = std::get<App>(b->v);
            if (x.args.size() != y.args.size()) return false;
            if (!eq_value(x.fn, y.fn, env)) return false;
            for (std::size_t i = 0; i < x.args.size(); ++i)
              if (!eq_value(x.args[i], y.args[i], env)) return false;
            return true;
          },
          [&](const LetProj& x) {
            const auto& y = std::get<LetProj>(b->v);
            if (x.index != y.index || !eq_value(x.tuple, y.tuple, env))
              return false;
            env.push(x.name, y.name);
            bool r = eq_term(x.body, y.body, env);
            env.pop(x.name, y.name);
            return r;
          },
          [&](const PreLabel& x) {
            const auto& y = std::get<PreLabel>(b->v);
            return x.label == y.label && eq_term(x.body, y.body, env);
          },
      },
      a->v);
}

using Bound = detail::BoundSet<Ident>;

void fv_term(const Term& t, Bound& bound, std::set<Ident>& out);

void fv_value(const Value& v, Bound& bound, std::set<Ident>& out) {
  std::visit(overloaded{
                 [&](const Var& x) {
                   if (!bound.has(x.name)) out.insert(x.name);
                 },
                 [&](const Lam& x) {
                   for (const auto& p : x.params) bound.add(p.name);
                   fv_term(x.body, bound, out);
                   for (const auto& p : x.params) bound.remove(p.name);
                 },
                 [&](const Tuple& x) {
                   for (const auto& i : x.items) fv_value(i, bound, out);
                 },
             },
             v->v);
}

void fv_term(const Term& t, Bound& bound, std::set<Ident>& out) {
  std::visit(overloaded{
                 [&](const App& x) {
                   fv_value(x.fn, bound, out);
                   for (const auto& a : x.args) fv_value(a, bound, out);
                 },
                 [&](const LetProj& x) {
                   fv_value(x.tuple, bound, out);
                   bound.add(x.name);
                   fv_term(x.body, bound, out);
                   bound.remove(x.name);
                 },
                 [&](const PreLabel& x) { fv_term(x.body, bound, out); },
             },
             t->v);
}

std::size_t size_value(const Value& v);

std::size_t size_term(const Term& t) {
  return std::visit(overloaded{
                        [&](const App& x) {
                          std::size_t n = 1 + size_value(x.fn);
                          for (const auto& a : x.args) n += size_value(a);
                          return n;
                        },
                        [&](const LetProj& x) {
                          return 1 + size_value(x.tuple) + size_term(x.body);
                        },
                        [&](const PreLabel& x) { return 1 + size_term(x.body); },
                    },
                    t->v);
}

std::size_t size_value(const Value& v) {
  return std::visit(overloaded{
                        [&](const Var&) -> std::size_t { return 1; },
                        [&](const Lam& x) { return 1 + size_term(x.body); },
                        [&](const Tuple& x) {
                          std::size_t n = 1;
                          for (const auto& i : x.items) n += size_value(i);
                          return n;
                        },
                    },
                    v->v);
}

struct Substituter {
  NameSupply& names;
  std::set<Ident> range_fv;

  Ident open(const Ident& x, Subst& inner) {
    inner.erase(x);
    if (!range_fv.count(x)) return x;
    Ident fresh = names.fresh_ident();
    inner[x] = var(fresh);
    return fresh;
  }

  Value value(const Value& v, const Subst& m) {
    if (m.empty()) return v;
    return std::visit(
        overloaded{
            [&](const Var& x) -> Value {
              auto it = m.find(x.name);
              return it == m.end() ? v : it->second;
            },
            [&](const Lam& x) -> Value {
              Subst inner = m;
              for (const auto& p : x.params) inner.erase(p.name);
              if (inner.empty()) return v;
              std::vector<Param> ps = x.params;
              for (auto& p : ps) p.name = open(p.name, inner);
              return lam(std::move(ps), term(x.body, inner));
            },
            [&](const Tuple& x) -> Value {
              std::vector<Value> items;
              for (const auto& i : x.items) items.push_back(value(i, m));
              return tuple(std::move(items));
            },
        },
        v->v);
  }

  Term term(const Term& t, const Subst& m) {
    if (m.empty()) return t;
    return std::visit(
        overloaded{
            [&](const App& x) -> Term {
              std::vector<Value> args;
              for (const auto& a : x.args) args.push_back(value(a, m));
              return app(value(x.fn, m), std::move(args));
            },
            [&](const LetProj& x) -> Term {
              Value tup = value(x.tuple, m);
              Subst inner = m;
              Ident name = open(x.name, inner);
              return let_proj(name, x.index, tup, term(x.body, inner));
            },
            [&](const PreLabel& x) -> Term {
              return pre(x.label, term(x.body, m));
            },
        },
        t->v);
  }
};

}  // namespace

Value var(Ident x) {
  return std::make_shared<ValueNode>(ValueNode{Var{std::move(x)}});
}
Value var(const char* x) { return var(Ident(x)); }

Value lam(std::vector<Param> params, Term body) {
  if (params.empty()) throw std::invalid_argument("lambda without parameters");
  return std::make_shared<ValueNode>(
      ValueNode{Lam{std::move(params), std::move(body)}});
}

Value tuple(std::vector<Value> items) {
  return std::make_shared<ValueNode>(ValueNode{Tuple{std::move(items)}});
}

Term app(Value fn, std::vector<Value> args) {
  if (args.empty()) throw std::invalid_argument("application without arguments");
  return std::make_shared<Node>(Node{App{std::move(fn), std::move(args)}});
}

Term let_proj(Ident x, int index, Value tuple, Term body) {
  if (index < 1) throw std::invalid_argument("projection index below 1");
  return std::make_shared<Node>(
      Node{LetProj{std::move(x), index, std::move(tuple), std::move(body)}});
}

Term pre(Label l, Term body) {
  return std::make_shared<Node>(Node{PreLabel{std::move(l), std::move(body)}});
}

bool alpha_eq(const Term& a, const Term& b) {
  Env env;
  return eq_term(a, b, env);
}

bool alpha_eq(const Value& a, const Value& b) {
  Env env;
  return eq_value(a, b, env);
}

std::set<Ident> free_vars(const Term& t) {
  Bound bound;
  std::set<Ident> out;
  fv_term(t, bound, out);
  return out;
}

std::set<Ident> free_vars(const Value& v) {
  Bound bound;
  std::set<Ident> out;
  fv_value(v, bound, out);
  return out;
}

std::size_t size(const Term& t) { return size_term(t); }

void avoid_names(NameSupply& names, const Value& v) {
  std::visit(overloaded{
                 [&](const Var& x) { names.avoid(x.name.text); },
                 [&](const Lam& x) {
                   for (const auto& p : x.params) names.avoid(p.name.text);
                   avoid_names(names, x.body);
                 },
                 [&](const Tuple& x) {
                   for (const auto& i : x.items) avoid_names(names, i);
                 },
             },
             v->v);
}

void avoid_names(NameSupply& names, const Term& t) {
  std::visit(overloaded{
                 [&](const App& x) {
                   avoid_names(names, x.fn);
                   for (const auto& a : x.args) avoid_names(names, a);
                 },
                 [&](const LetProj& x) {
                   names.avoid(x.name.text);
                   avoid_names(names, x.tuple);
                   avoid_names(names, x.body);
                 },
                 [&](const PreLabel& x) {
                   names.avoid(x.label.text);
                   avoid_names(names, x.body);
                 },
             },
             t->v);
}

Term subst(const Term& body, const Subst& bindings, NameSupply& names) {
  Substituter s{names, {}};
  for (const auto& [x, v] : bindings)
    for (const auto& y : free_vars(v)) s.range_fv.insert(y);
  return s.term(body, bindings);
}

Value subst(const Value& v, const Subst& bindings, NameSupply& names) {
  Substituter s{names, {}};
  for (const auto& [x, w] : bindings)
    for (const auto& y : free_vars(w)) s.range_fv.insert(y);
  return s.value(v, bindings);
}

Term subst(const Term& body, const Subst& bindings) {
  NameSupply names;
  avoid_names(names, body);
  for (const auto& [x, v] : bindings) avoid_names(names, v);
  return subst(body, bindings, names);
}

}  // namespace costlam::cps
