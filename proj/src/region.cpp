#include "costlam/region.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include "alpha_env.hpp"
#include "costlam/overloaded.hpp"

namespace costlam::rgn {

namespace {

struct TypeEnv {
  detail::BinderPairs<RegionId> regions;
  detail::BinderPairs<TyVar> tyvars;
};

bool effect_eq(const Effect& a, const Effect& b, const TypeEnv& env) {
  if (a.size() != b.size()) return false;
  for (const auto& r : a) {
    bool found = false;
    for (const auto& s : b)
      if (env.regions.same(r, s)) found = true;
    if (!found) return false;
  }
  return true;
}

bool type_rec(const Type& a, const Type& b, TypeEnv& env);

bool types_rec(const std::vector<Type>& a, const std::vector<Type>& b,
               TypeEnv& env) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!type_rec(a[i], b[i], env)) return false;
  return true;
}

bool type_rec(const Type& a, const Type& b, TypeEnv& env) {
  if (a->v.index() != b->v.index()) return false;
  return std::visit(
      overloaded{
          [&](const TVar& x) {
            return env.tyvars.same(x.name, std::get<TVar>(b->v).name);
          },
          [&](const Forall& x) {
            const auto& y = std::get<Forall>(b->v);
            if (x.regions.size() != y.regions.size()) return false;
            for (std::size_t i = 0; i < x.regions.size(); ++i)
              env.regions.push(x.regions[i], y.regions[i]);
            bool r = types_rec(x.domain, y.domain, env) &&
                     effect_eq(x.effect, y.effect, env);
            for (std::size_t i = x.regions.size(); i-- > 0;)
              env.regions.pop(x.regions[i], y.regions[i]);
            return r;
          },
          [&](const Unit&) { return true; },
          [&](const ProductAt& x) {
            const auto& y = std::get<ProductAt>(b->v);
            return env.regions.same(x.region, y.region) &&
                   types_rec(x.items, y.items, env);
          },
          [&](const ExistsAt& x) {
            const auto& y = std::get<ExistsAt>(b->v);
            if (!env.regions.same(x.region, y.region)) return false;
            env.tyvars.push(x.var, y.var);
            bool r = type_rec(x.body, y.body, env);
            env.tyvars.pop(x.var, y.var);
            return r;
          },
      },
      a->v);
}

void frv_rec(const Type& t, detail::BoundSet<RegionId>& bound,
             std::set<RegionId>& out) {
  auto use = [&](const RegionId& r) {
    if (!bound.has(r)) out.insert(r);
  };
  std::visit(overloaded{
                 [&](const TVar&) {},
                 [&](const Forall& x) {
                   for (const auto& r : x.regions) bound.add(r);
                   for (const auto& d : x.domain) frv_rec(d, bound, out);
                   for (const auto& r : x.effect) use(r);
                   for (const auto& r : x.regions) bound.remove(r);
                 },
                 [&](const Unit&) {},
                 [&](const ProductAt& x) {
                   for (const auto& d : x.items) frv_rec(d, bound, out);
                   use(x.region);
                 },
                 [&](const ExistsAt& x) {
                   frv_rec(x.body, bound, out);
                   use(x.region);
                 },
             },
             t->v);
}

void ftv_rec(const Type& t, detail::BoundSet<TyVar>& bound,
             std::set<TyVar>& out) {
  std::visit(overloaded{
                 [&](const TVar& x) {
                   if (!bound.has(x.name)) out.insert(x.name);
                 },
                 [&](const Forall& x) {
                   for (const auto& d : x.domain) ftv_rec(d, bound, out);
                 },
                 [&](const Unit&) {},
                 [&](const ProductAt& x) {
                   for (const auto& d : x.items) ftv_rec(d, bound, out);
                 },
                 [&](const ExistsAt& x) {
                   bound.add(x.var);
                   ftv_rec(x.body, bound, out);
                   bound.remove(x.var);
                 },
             },
             t->v);
}

RegionId rename_region(const RegionId& r,
                       const std::map<RegionId, RegionId>& m) {
  auto it = m.find(r);
  return it == m.end() ? r : it->second;
}

bool match_rec(const Type& p, const TyVar& hole, const Type& t,
               std::optional<Type>& witness, TypeEnv& env,
               std::vector<TyVar>& right_bound) {
  if (auto* pv = std::get_if<TVar>(&p->v)) {
    if (pv->name == hole) {
      for (const auto& v : free_tyvars(t))
        for (const auto& b : right_bound)
          if (v == b) return false;
      if (!witness) {
        witness = t;
        return true;
      }
      return type_eq(*witness, t);
    }
  }
  if (p->v.index() != t->v.index()) return false;
  return std::visit(
      overloaded{
          [&](const TVar& x) {
            return env.tyvars.same(x.name, std::get<TVar>(t->v).name);
          },
          [&](const Forall& x) {
            const auto& y = std::get<Forall>(t->v);
            if (x.regions.size() != y.regions.size() ||
                x.domain.size() != y.domain.size())
              return false;
            for (std::size_t i = 0; i < x.regions.size(); ++i)
              env.regions.push(x.regions[i], y.regions[i]);
            bool r = effect_eq(x.effect, y.effect, env);
            for (std::size_t i = 0; r && i < x.domain.size(); ++i)
              r = match_rec(x.domain[i], hole, y.domain[i], witness, env,
                            right_bound);
            for (std::size_t i = x.regions.size(); i-- > 0;)
              env.regions.pop(x.regions[i], y.regions[i]);
            return r;
          },
          [&](const Unit&) { return true; },
          [&](const ProductAt& x) {
            const auto& y = std::get<ProductAt>(t->v);
            if (!env.regions.same(x.region, y.region) ||
                x.items.size() != y.items.size())
              return false;
            for (std::size_t i = 0; i < x.items.size(); ++i)
              if (!match_rec(x.items[i], hole, y.items[i], witness, env,
                             right_bound))
                return false;
            return true;
          },
          [&](const ExistsAt& x) {
            const auto& y = std::get<ExistsAt>(t->v);
            if (!env.regions.same(x.region, y.region)) return false;
            env.tyvars.push(x.var, y.var);
            if (x.var == hole) {
              // the hole is shadowed here
              bool r = type_rec(x.body, y.body, env);
              env.tyvars.pop(x.var, y.var);
              return r;
            }
            right_bound.push_back(y.var);
            bool r = match_rec(x.body, hole, y.body, witness, env, right_bound);
            right_bound.pop_back();
            env.tyvars.pop(x.var, y.var);
            return r;
          },
      },
      p->v);
}

void print_rec(const Type& t, std::ostream& os) {
  auto list = [&](const std::vector<Type>& ts) {
    for (std::size_t i = 0; i < ts.size(); ++i) {
      if (i) os << ", ";
      print_rec(ts[i], os);
    }
  };
  std::visit(overloaded{
                 [&](const TVar& x) { os << x.name.text; },
                 [&](const Forall& x) {
                   if (!x.regions.empty()) {
                     os << "forall";
                     for (const auto& r : x.regions) os << " " << r.text;
                     os << ". ";
                   }
                   os << "(";
                   list(x.domain);
                   os << ") -{";
                   bool first = true;
                   for (const auto& r : x.effect) {
                     if (!first) os << ", ";
                     first = false;
                     os << r.text;
                   }
                   os << "}-> R";
                 },
                 [&](const Unit&) { os << "*()"; },
                 [&](const ProductAt& x) {
                   os << "*(";
                   list(x.items);
                   os << ")@" << x.region.text;
                 },
                 [&](const ExistsAt& x) {
                   os << "(exists " << x.var.text << ". ";
                   print_rec(x.body, os);
                   os << ")@" << x.region.text;
                 },
             },
             t->v);
}

// Term-level α-equivalence.
struct TermEnv {
  detail::BinderPairs<Ident> vars;
  detail::BinderPairs<RegionId> regions;
};

bool eq_bindable(const Bindable& a, const Bindable& b, TermEnv& env) {
  if (a.index() != b.index()) return false;
  return std::visit(
      overloaded{
          [&](const UnitTuple&) { return true; },
          [&](const TupleAt& x) {
            const auto& y = std::get<TupleAt>(b);
            if (x.items.size() != y.items.size()) return false;
            if (!env.regions.same(x.region, y.region)) return false;
            for (std::size_t i = 0; i < x.items.size(); ++i)
              if (!env.vars.same(x.items[i], y.items[i])) return false;
            return true;
          },
          [&](const Proj& x) {
            const auto& y = std::get<Proj>(b);
            return x.index == y.index && env.vars.same(x.tuple, y.tuple);
          },
      },
      a);
}

bool eq_term(const Term& a, const Term& b, TermEnv& env) {
  if (a->v.index() != b->v.index()) return false;
  return std::visit(
      overloaded{
          [&](const App& x) {
            const auto& y = std::get<App>(b->v);
            if (x.args.size() != y.args.size() ||
                x.regions.size() != y.regions.size())
              return false;
            if (!env.vars.same(x.fn, y.fn)) return false;
            for (std::size_t i = 0; i < x.regions.size(); ++i)
              if (!env.regions.same(x.regions[i], y.regions[i])) return false;
            for (std::size_t i = 0; i < x.args.size(); ++i)
              if (!env.vars.same(x.args[i], y.args[i])) return false;
            return true;
          },
          [&](const Let& x) {
            const auto& y = std::get<Let>(b->v);
            if (!eq_bindable(x.bound, y.bound, env)) return false;
            env.vars.push(x.name, y.name);
            bool r = eq_term(x.body, y.body, env);
            env.vars.pop(x.name, y.name);
            return r;
          },
          [&](const PreLabel& x) {
            const auto& y = std::get<PreLabel>(b->v);
            return x.label == y.label && eq_term(x.body, y.body, env);
          },
          [&](const NewRegion& x) {
            const auto& y = std::get<NewRegion>(b->v);
            env.regions.push(x.region, y.region);
            bool r = eq_term(x.body, y.body, env);
            env.regions.pop(x.region, y.region);
            return r;
          },
          [&](const Dispose& x) {
            const auto& y = std::get<Dispose>(b->v);
            return env.regions.same(x.region, y.region) &&
                   eq_term(x.body, y.body, env);
          },
      },
      a->v);
}

template <class F>
void walk(const Term& t, F&& f) {
  const Node* cur = t.get();
  while (cur) {
    f(*cur);
    cur = std::visit(overloaded{
                         [](const App&) -> const Node* { return nullptr; },
                         [](const Let& x) -> const Node* { return x.body.get(); },
                         [](const PreLabel& x) -> const Node* {
                           return x.body.get();
                         },
                         [](const NewRegion& x) -> const Node* {
                           return x.body.get();
                         },
                         [](const Dispose& x) -> const Node* {
                           return x.body.get();
                         },
                     },
                     cur->v);
  }
}

void frv_term(const Term& t, detail::BoundSet<RegionId>& bound,
              std::set<RegionId>& out) {
  auto use = [&](const RegionId& r) {
    if (!bound.has(r)) out.insert(r);
  };
  std::visit(overloaded{
                 [&](const App& x) {
                   for (const auto& r : x.regions) use(r);
                 },
                 [&](const Let& x) {
                   if (auto* tup = std::get_if<TupleAt>(&x.bound)) {
                     use(tup->region);
                     if (tup->pack)
                       frv_rec(exists_at(tup->pack->first, tup->pack->second,
                                         tup->region),
                               bound, out);
                   }
                   frv_term(x.body, bound, out);
                 },
                 [&](const PreLabel& x) { frv_term(x.body, bound, out); },
                 [&](const NewRegion& x) {
                   bound.add(x.region);
                   frv_term(x.body, bound, out);
                   bound.remove(x.region);
                 },
                 [&](const Dispose& x) {
                   use(x.region);
                   frv_term(x.body, bound, out);
                 },
             },
             t->v);
}

struct Renamer {
  NameSupply& names;

  Ident use(const Ident& x, const Renaming& m) {
    auto it = m.find(x);
    return it == m.end() ? x : it->second;
  }

  Term term(const Term& t, const Renaming& vars, const RegionRenaming& regs) {
    return std::visit(
        overloaded{
            [&](const App& x) -> Term {
              std::vector<RegionId> rs;
              for (const auto& r : x.regions) rs.push_back(rename_region(r, regs));
              std::vector<Ident> args;
              for (const auto& a : x.args) args.push_back(use(a, vars));
              return app(use(x.fn, vars), std::move(rs), std::move(args));
            },
            [&](const Let& x) -> Term {
              Bindable b = std::visit(
                  overloaded{
                      [&](const UnitTuple& u) -> Bindable { return u; },
                      [&](const TupleAt& tup) -> Bindable {
                        TupleAt out = tup;
                        for (auto& i : out.items) i = use(i, vars);
                        out.region = rename_region(tup.region, regs);
                        if (out.pack)
                          out.pack->second =
                              subst_regions(out.pack->second, regs);
                        return out;
                      },
                      [&](const Proj& p) -> Bindable {
                        return Proj{p.index, use(p.tuple, vars)};
                      },
                  },
                  x.bound);
              Renaming inner = vars;
              Ident fresh = names.fresh_ident();
              inner[x.name] = fresh;
              return let(fresh, std::move(b), term(x.body, inner, regs));
            },
            [&](const PreLabel& x) -> Term {
              return pre(x.label, term(x.body, vars, regs));
            },
            [&](const NewRegion& x) -> Term {
              RegionRenaming inner = regs;
              RegionId fresh = names.fresh_region();
              inner[x.region] = fresh;
              return newreg(fresh, term(x.body, vars, inner));
            },
            [&](const Dispose& x) -> Term {
              return dispose(rename_region(x.region, regs),
                             term(x.body, vars, regs));
            },
        },
        t->v);
  }
};

}  // namespace

Type type_var(TyVar name) {
  return std::make_shared<TypeNode>(TypeNode{TVar{std::move(name)}});
}

Type forall(std::vector<RegionId> regions, std::vector<Type> domain,
            Effect effect) {
  if (domain.empty()) throw std::invalid_argument("arrow with empty domain");
  return std::make_shared<TypeNode>(
      TypeNode{Forall{std::move(regions), std::move(domain), std::move(effect)}});
}

Type unit_type() {
  static const Type u = std::make_shared<TypeNode>(TypeNode{Unit{}});
  return u;
}

Type product_at(std::vector<Type> items, RegionId r) {
  if (items.empty()) throw std::invalid_argument("empty product at a region");
  return std::make_shared<TypeNode>(
      TypeNode{ProductAt{std::move(items), std::move(r)}});
}

Type exists_at(TyVar var, Type body, RegionId r) {
  return std::make_shared<TypeNode>(
      TypeNode{ExistsAt{std::move(var), std::move(body), std::move(r)}});
}

bool type_eq(const Type& a, const Type& b) {
  if (a == b) return true;
  TypeEnv env;
  return type_rec(a, b, env);
}

std::set<RegionId> free_regions(const Type& t) {
  detail::BoundSet<RegionId> bound;
  std::set<RegionId> out;
  frv_rec(t, bound, out);
  return out;
}

std::set<TyVar> free_tyvars(const Type& t) {
  detail::BoundSet<TyVar> bound;
  std::set<TyVar> out;
  ftv_rec(t, bound, out);
  return out;
}

Type subst_regions(const Type& t, const std::map<RegionId, RegionId>& m) {
  if (m.empty()) return t;
  return std::visit(
      overloaded{
          [&](const TVar&) -> Type { return t; },
          [&](const Forall& x) -> Type {
            std::map<RegionId, RegionId> inner = m;
            for (const auto& r : x.regions) inner.erase(r);
            std::set<RegionId> targets;
            for (const auto& [a, b] : inner) targets.insert(b);
            std::vector<RegionId> rs = x.regions;
            for (auto& r : rs) {
              if (!targets.count(r)) continue;
              RegionId fresh = r;
              while (targets.count(fresh) ||
                     std::find(x.regions.begin(), x.regions.end(), fresh) !=
                         x.regions.end())
                fresh = RegionId(fresh.text + "'");
              inner[r] = fresh;
              r = fresh;
            }
            std::vector<Type> dom;
            for (const auto& d : x.domain) dom.push_back(subst_regions(d, inner));
            Effect e;
            for (const auto& r : x.effect) e.insert(rename_region(r, inner));
            return forall(std::move(rs), std::move(dom), std::move(e));
          },
          [&](const Unit&) -> Type { return t; },
          [&](const ProductAt& x) -> Type {
            std::vector<Type> items;
            for (const auto& d : x.items) items.push_back(subst_regions(d, m));
            return product_at(std::move(items), rename_region(x.region, m));
          },
          [&](const ExistsAt& x) -> Type {
            return exists_at(x.var, subst_regions(x.body, m),
                             rename_region(x.region, m));
          },
      },
      t->v);
}

Type subst_tyvar(const Type& t, const TyVar& v, const Type& by) {
  return std::visit(
      overloaded{
          [&](const TVar& x) -> Type { return x.name == v ? by : t; },
          [&](const Forall& x) -> Type {
            std::vector<Type> dom;
            for (const auto& d : x.domain) dom.push_back(subst_tyvar(d, v, by));
            return forall(x.regions, std::move(dom), x.effect);
          },
          [&](const Unit&) -> Type { return t; },
          [&](const ProductAt& x) -> Type {
            std::vector<Type> items;
            for (const auto& d : x.items) items.push_back(subst_tyvar(d, v, by));
            return product_at(std::move(items), x.region);
          },
          [&](const ExistsAt& x) -> Type {
            if (x.var == v) return t;
            std::set<TyVar> avoid = free_tyvars(by);
            if (!avoid.count(x.var))
              return exists_at(x.var, subst_tyvar(x.body, v, by), x.region);
            for (const auto& w : free_tyvars(x.body)) avoid.insert(w);
            avoid.insert(v);
            TyVar fresh = x.var;
            while (avoid.count(fresh)) fresh = TyVar(fresh.text + "'");
            Type body = subst_tyvar(x.body, x.var, type_var(fresh));
            return exists_at(fresh, subst_tyvar(body, v, by), x.region);
          },
      },
      t->v);
}

bool match_type(const Type& pattern, const TyVar& hole, const Type& target,
                std::optional<Type>& witness) {
  TypeEnv env;
  std::vector<TyVar> right_bound;
  return match_rec(pattern, hole, target, witness, env, right_bound);
}

std::string print_type(const Type& t) {
  std::ostringstream os;
  print_rec(t, os);
  return os.str();
}

Term app(Ident fn, std::vector<RegionId> regions, std::vector<Ident> args) {
  if (args.empty()) throw std::invalid_argument("application without arguments");
  return std::make_shared<Node>(
      Node{App{std::move(fn), std::move(regions), std::move(args)}});
}

Term let(Ident x, Bindable bound, Term body) {
  if (auto* t = std::get_if<TupleAt>(&bound); t && t->items.empty())
    throw std::invalid_argument("empty tuple allocated at a region");
  return std::make_shared<Node>(
      Node{Let{std::move(x), std::move(bound), std::move(body)}});
}

Term pre(Label l, Term body) {
  return std::make_shared<Node>(Node{PreLabel{std::move(l), std::move(body)}});
}

Term newreg(RegionId r, Term body) {
  return std::make_shared<Node>(Node{NewRegion{std::move(r), std::move(body)}});
}

Term dispose(RegionId r, Term body) {
  return std::make_shared<Node>(Node{Dispose{std::move(r), std::move(body)}});
}

bool alpha_eq(const Term& a, const Term& b) {
  TermEnv env;
  return eq_term(a, b, env);
}

bool alpha_eq(const Program& a, const Program& b) {
  if (a.defs.size() != b.defs.size()) return false;
  TermEnv env;
  bool ok = true;
  std::size_t pushed = 0;
  for (std::size_t i = 0; ok && i < a.defs.size(); ++i) {
    const Def& x = a.defs[i];
    const Def& y = b.defs[i];
    if (x.regions.size() != y.regions.size() ||
        x.params.size() != y.params.size()) {
      ok = false;
      break;
    }
    for (std::size_t j = 0; j < x.regions.size(); ++j)
      env.regions.push(x.regions[j], y.regions[j]);
    for (std::size_t j = 0; j < x.params.size(); ++j)
      env.vars.push(x.params[j].name, y.params[j].name);
    ok = eq_term(x.body, y.body, env);
    for (std::size_t j = x.params.size(); j-- > 0;)
      env.vars.pop(x.params[j].name, y.params[j].name);
    for (std::size_t j = x.regions.size(); j-- > 0;)
      env.regions.pop(x.regions[j], y.regions[j]);
    env.vars.push(x.name, y.name);
    ++pushed;
  }
  if (ok) ok = eq_term(a.main, b.main, env);
  for (std::size_t i = pushed; i-- > 0;)
    env.vars.pop(a.defs[i].name, b.defs[i].name);
  return ok;
}

std::set<Ident> free_vars(const Program& p) {
  std::set<Ident> out;
  std::set<Ident> bound;
  auto scan = [&](const Term& t, std::set<Ident> local) {
    walk(t, [&](const Node& n) {
      auto use = [&](const Ident& x) {
        if (!local.count(x) && !bound.count(x)) out.insert(x);
      };
      std::visit(overloaded{
                     [&](const App& x) {
                       use(x.fn);
                       for (const auto& a : x.args) use(a);
                     },
                     [&](const Let& x) {
                       if (auto* t = std::get_if<TupleAt>(&x.bound))
                         for (const auto& i : t->items) use(i);
                       if (auto* pr = std::get_if<Proj>(&x.bound)) use(pr->tuple);
                       local.insert(x.name);
                     },
                     [&](const auto&) {},
                 },
                 n.v);
    });
  };
  for (const auto& d : p.defs) {
    std::set<Ident> local;
    for (const auto& prm : d.params) local.insert(prm.name);
    scan(d.body, local);
    bound.insert(d.name);
  }
  scan(p.main, {});
  return out;
}

std::set<RegionId> free_regions(const Term& t) {
  detail::BoundSet<RegionId> bound;
  std::set<RegionId> out;
  frv_term(t, bound, out);
  return out;
}

std::set<RegionId> free_regions(const Def& d) {
  detail::BoundSet<RegionId> bound;
  for (const auto& r : d.regions) bound.add(r);
  std::set<RegionId> out;
  frv_term(d.body, bound, out);
  for (const auto& p : d.params)
    if (p.type) frv_rec(p.type, bound, out);
  if (d.latent)
    for (const auto& r : *d.latent)
      if (!bound.has(r)) out.insert(r);
  return out;
}

std::size_t size(const Term& t) {
  std::size_t n = 0;
  walk(t, [&](const Node&) { ++n; });
  return n;
}

Term rename_fresh(const Term& t, const Renaming& vars,
                  const RegionRenaming& regions, NameSupply& names) {
  Renamer r{names};
  return r.term(t, vars, regions);
}

void avoid_names(NameSupply& names, const Program& p) {
  auto scan = [&](const Term& t) {
    walk(t, [&](const Node& n) {
      std::visit(overloaded{
                     [&](const App& x) {
                       names.avoid(x.fn.text);
                       for (const auto& a : x.args) names.avoid(a.text);
                       for (const auto& r : x.regions) names.avoid(r.text);
                     },
                     [&](const Let& x) {
                       names.avoid(x.name.text);
                       if (auto* t = std::get_if<TupleAt>(&x.bound)) {
                         names.avoid(t->region.text);
                         for (const auto& i : t->items) names.avoid(i.text);
                       }
                       if (auto* pr = std::get_if<Proj>(&x.bound))
                         names.avoid(pr->tuple.text);
                     },
                     [&](const PreLabel& x) { names.avoid(x.label.text); },
                     [&](const NewRegion& x) { names.avoid(x.region.text); },
                     [&](const Dispose& x) { names.avoid(x.region.text); },
                 },
                 n.v);
    });
  };
  for (const auto& d : p.defs) {
    names.avoid(d.name.text);
    for (const auto& r : d.regions) names.avoid(r.text);
    for (const auto& prm : d.params) names.avoid(prm.name.text);
    scan(d.body);
  }
  scan(p.main);
}

}  // namespace costlam::rgn
