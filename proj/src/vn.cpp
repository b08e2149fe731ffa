#include "costlam/vn.hpp"

#include <algorithm>
#include <stdexcept>

#include "alpha_env.hpp"
#include "costlam/overloaded.hpp"

namespace costlam::vn {

namespace {

using Env = detail::BinderPairs<Ident>;
using Bound = detail::BoundSet<Ident>;

bool eq_term(const Term& a, const Term& b, Env& env);

bool eq_bindable(const Bindable& a, const Bindable& b, Env& env) {
  if (a.index() != b.index()) return false;
  return std::visit(
      overloaded{
          [&](const Lam& x) {
            const auto& y = std::get<Lam>(b);
            if (x.params.size() != y.params.size()) return false;
            for (std::size_t i = 0; i < x.params.size(); ++i)
              env.push(x.params[i].name, y.params[i].name);
            bool r = eq_term(x.body, y.body, env);
            for (std::size_t i = x.params.size(); i-- > 0;)
              env.pop(x.params[i].name, y.params[i].name);
            return r;
          },
          [&](const Tuple& x) {
            const auto& y = std::get<Tuple>(b);
            if (x.items.size() != y.items.size()) return false;
            for (std::size_t i = 0; i < x.items.size(); ++i)
              if (!env.same(x.items[i], y.items[i])) return false;
            return true;
          },
          [&](const Proj& x) {
            const auto& y = std::get<Proj>(b);
            return x.index == y.index && env.same(x.tuple, y.tuple);
          },
      },
      a);
}

bool eq_term(const Term& a, const Term& b, Env& env) {
  if (a->v.index() != b->v.index()) return false;
  return std::visit(
      overloaded{
          [&](const App& x) {
            const auto& y = std::get<App>(b->v);
            if (x.args.size() != y.args.size()) return false;
            if (!env.same(x.fn, y.fn)) return false;
            for (std::size_t i = 0; i < x.args.size(); ++i)
              if (!env.same(x.args[i], y.args[i])) return false;
            return true;
          },
          [&](const Let& x) {
            const auto& y = std::get<Let>(b->v);
            if (!eq_bindable(x.bound, y.bound, env)) return false;
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

// Collects free identifiers in first-occurrence order.
struct FreeCollector {
  Bound bound;
  std::vector<Ident> order;
  std::set<Ident> seen;

  void use(const Ident& x) {
    if (!bound.has(x) && seen.insert(x).second) order.push_back(x);
  }

  void bindable(const Bindable& b) {
    std::visit(overloaded{
                   [&](const Lam& x) {
                     for (const auto& p : x.params) bound.add(p.name);
                     term(x.body);
                     for (const auto& p : x.params) bound.remove(p.name);
                   },
                   [&](const Tuple& x) {
                     for (const auto& i : x.items) use(i);
                   },
                   [&](const Proj& x) { use(x.tuple); },
               },
               b);
  }

  void term(const Term& t) {
    std::visit(overloaded{
                   [&](const App& x) {
                     use(x.fn);
                     for (const auto& a : x.args) use(a);
                   },
                   [&](const Let& x) {
                     bindable(x.bound);
                     bound.add(x.name);
                     term(x.body);
                     bound.remove(x.name);
                   },
                   [&](const PreLabel& x) { term(x.body); },
               },
               t->v);
  }
};

struct Renamer {
  NameSupply& names;
  std::set<Ident> targets;
  bool fresh_all;

  Ident open(const Ident& x, Renaming& inner) {
    inner.erase(x);
    if (!fresh_all && !targets.count(x)) return x;
    Ident fresh = names.fresh_ident();
    inner[x] = fresh;
    return fresh;
  }

  Ident use(const Ident& x, const Renaming& m) {
    auto it = m.find(x);
    return it == m.end() ? x : it->second;
  }

  Bindable bindable(const Bindable& b, const Renaming& m) {
    return std::visit(
        overloaded{
            [&](const Lam& x) -> Bindable {
              Renaming inner = m;
              std::vector<Param> ps = x.params;
              for (auto& p : ps) inner.erase(p.name);
              for (auto& p : ps) p.name = open(p.name, inner);
              return Lam{std::move(ps), term(x.body, inner)};
            },
            [&](const Tuple& x) -> Bindable {
              std::vector<Ident> items;
              for (const auto& i : x.items) items.push_back(use(i, m));
              return Tuple{std::move(items), x.pack};
            },
            [&](const Proj& x) -> Bindable {
              return Proj{x.index, use(x.tuple, m)};
            },
        },
        b);
  }

  Term term(const Term& t, const Renaming& m) {
    if (m.empty() && !fresh_all) return t;
    return std::visit(
        overloaded{
            [&](const App& x) -> Term {
              std::vector<Ident> args;
              for (const auto& a : x.args) args.push_back(use(a, m));
              return app(use(x.fn, m), std::move(args));
            },
            [&](const Let& x) -> Term {
              Bindable b = bindable(x.bound, m);
              Renaming inner = m;
              Ident name = open(x.name, inner);
              return let(name, std::move(b), term(x.body, inner));
            },
            [&](const PreLabel& x) -> Term {
              return pre(x.label, term(x.body, m));
            },
        },
        t->v);
  }
};

std::size_t size_bindable(const Bindable& b) {
  return std::visit(overloaded{
                        [](const Lam& x) { return 1 + size(x.body); },
                        [](const Tuple&) -> std::size_t { return 1; },
                        [](const Proj&) -> std::size_t { return 1; },
                    },
                    b);
}

}  // namespace

Term app(Ident fn, std::vector<Ident> args) {
  if (args.empty()) throw std::invalid_argument("application without arguments");
  return std::make_shared<Node>(Node{App{std::move(fn), std::move(args)}});
}

Term let(Ident x, Bindable bound, Term body) {
  return std::make_shared<Node>(
      Node{Let{std::move(x), std::move(bound), std::move(body)}});
}

Term pre(Label l, Term body) {
  return std::make_shared<Node>(Node{PreLabel{std::move(l), std::move(body)}});
}

Bindable lam(std::vector<Param> params, Term body) {
  if (params.empty()) throw std::invalid_argument("lambda without parameters");
  return Lam{std::move(params), std::move(body)};
}

Bindable tuple(std::vector<Ident> items) { return Tuple{std::move(items), nullptr}; }

Bindable pack(Ident item, Type exists_type) {
  return Tuple{{std::move(item)}, std::move(exists_type)};
}

Bindable proj(int index, Ident t) {
  if (index < 1) throw std::invalid_argument("projection index below 1");
  return Proj{index, std::move(t)};
}

bool alpha_eq(const Term& a, const Term& b) {
  Env env;
  return eq_term(a, b, env);
}

std::set<Ident> free_vars(const Term& t) {
  FreeCollector c;
  c.term(t);
  return c.seen;
}

std::set<Ident> free_vars(const Bindable& b) {
  FreeCollector c;
  c.bindable(b);
  return c.seen;
}

std::vector<Ident> free_vars_ordered(const Bindable& b) {
  FreeCollector c;
  c.bindable(b);
  return c.order;
}

std::set<Label> labels(const Term& t) {
  std::set<Label> out;
  std::vector<Term> stack{t};
  while (!stack.empty()) {
    Term cur = stack.back();
    stack.pop_back();
    std::visit(overloaded{
                   [&](const App&) {},
                   [&](const Let& x) {
                     if (auto* l = std::get_if<Lam>(&x.bound))
                       stack.push_back(l->body);
                     stack.push_back(x.body);
                   },
                   [&](const PreLabel& x) {
                     out.insert(x.label);
                     stack.push_back(x.body);
                   },
               },
               cur->v);
  }
  return out;
}

std::size_t size(const Term& t) {
  std::size_t n = 0;
  const Node* cur = t.get();
  while (cur) {
    ++n;
    if (auto* l = std::get_if<Let>(&cur->v)) {
      n += size_bindable(l->bound);
      cur = l->body.get();
    } else if (auto* p = std::get_if<PreLabel>(&cur->v)) {
      cur = p->body.get();
    } else {
      n += std::get<App>(cur->v).args.size() + 1;
      cur = nullptr;
    }
  }
  return n;
}

bool contains_lambda(const Term& t) {
  const Node* cur = t.get();
  while (cur) {
    if (auto* l = std::get_if<Let>(&cur->v)) {
      if (std::holds_alternative<Lam>(l->bound)) return true;
      cur = l->body.get();
    } else if (auto* p = std::get_if<PreLabel>(&cur->v)) {
      cur = p->body.get();
    } else {
      cur = nullptr;
    }
  }
  return false;
}

Term rename(const Term& t, const Renaming& r, NameSupply& names) {
  Renamer ren{names, {}, false};
  for (const auto& [x, y] : r) ren.targets.insert(y);
  return ren.term(t, r);
}

Term rename_fresh(const Term& t, const Renaming& r, NameSupply& names) {
  Renamer ren{names, {}, true};
  return ren.term(t, r);
}

void avoid_names(NameSupply& names, const Term& t) {
  const Node* cur = t.get();
  while (cur) {
    if (auto* l = std::get_if<Let>(&cur->v)) {
      names.avoid(l->name.text);
      std::visit(overloaded{
                     [&](const Lam& x) {
                       for (const auto& p : x.params) names.avoid(p.name.text);
                       avoid_names(names, x.body);
                     },
                     [&](const Tuple& x) {
                       for (const auto& i : x.items) names.avoid(i.text);
                     },
                     [&](const Proj& x) { names.avoid(x.tuple.text); },
                 },
                 l->bound);
      cur = l->body.get();
    } else if (auto* p = std::get_if<PreLabel>(&cur->v)) {
      names.avoid(p->label.text);
      cur = p->body.get();
    } else {
      const auto& a = std::get<App>(cur->v);
      names.avoid(a.fn.text);
      for (const auto& x : a.args) names.avoid(x.text);
      cur = nullptr;
    }
  }
}

}  // namespace costlam::vn

namespace costlam {

vn::Term to_term(const HoistProgram& p) {
  vn::Term t = p.main;
  for (auto it = p.defs.rbegin(); it != p.defs.rend(); ++it)
    t = vn::let(it->name, vn::lam(it->params, it->body), t);
  return t;
}

HoistProgram to_program(const vn::Term& t) {
  HoistProgram p;
  vn::Term cur = t;
  while (auto* l = std::get_if<vn::Let>(&cur->v)) {
    auto* f = std::get_if<vn::Lam>(&l->bound);
    if (!f) break;
    if (vn::contains_lambda(f->body))
      throw std::invalid_argument("nested function definition in " +
                                  l->name.text);
    p.defs.push_back({l->name, f->params, f->body});
    cur = l->body;
  }
  if (vn::contains_lambda(cur))
    throw std::invalid_argument("function definition below top level");
  p.main = cur;
  return p;
}

bool alpha_eq(const HoistProgram& a, const HoistProgram& b) {
  return vn::alpha_eq(to_term(a), to_term(b));
}

}  // namespace costlam
