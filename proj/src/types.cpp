#include "costlam/types.hpp"

#include <sstream>
#include <stdexcept>

#include "costlam/overloaded.hpp"

namespace costlam {

namespace {

using Binders = std::vector<std::pair<TyVar, TyVar>>;

// Index of the innermost binder for v on the given side, or -1.
int bound_index(const Binders& env, const TyVar& v, bool left) {
  for (int i = static_cast<int>(env.size()) - 1; i >= 0; --i) {
    const auto& b = left ? env[i].first : env[i].second;
    if (b == v) return i;
  }
  return -1;
}

bool eq_rec(const Type& a, const Type& b, Binders& env) {
  if (a->v.index() != b->v.index()) return false;
  return std::visit(
      overloaded{
          [&](const ty::Var& x) {
            const auto& y = std::get<ty::Var>(b->v);
            int i = bound_index(env, x.name, true);
            int j = bound_index(env, y.name, false);
            if (i < 0 && j < 0) return x.name == y.name;
            return i == j;
          },
          [&](const ty::Arrow& x) {
            const auto& y = std::get<ty::Arrow>(b->v);
            if (x.domain.size() != y.domain.size()) return false;
            for (std::size_t i = 0; i < x.domain.size(); ++i)
              if (!eq_rec(x.domain[i], y.domain[i], env)) return false;
            return eq_rec(x.codomain, y.codomain, env);
          },
          [&](const ty::Product& x) {
            const auto& y = std::get<ty::Product>(b->v);
            if (x.items.size() != y.items.size()) return false;
            for (std::size_t i = 0; i < x.items.size(); ++i)
              if (!eq_rec(x.items[i], y.items[i], env)) return false;
            return true;
          },
          [&](const ty::Exists& x) {
            const auto& y = std::get<ty::Exists>(b->v);
            env.emplace_back(x.var, y.var);
            bool r = eq_rec(x.body, y.body, env);
            env.pop_back();
            return r;
          },
          [&](const ty::Result&) { return true; },
      },
      a->v);
}

void ftv_rec(const Type& t, std::set<TyVar>& bound, std::set<TyVar>& out) {
  std::visit(overloaded{
                 [&](const ty::Var& x) {
                   if (!bound.count(x.name)) out.insert(x.name);
                 },
                 [&](const ty::Arrow& x) {
                   for (const auto& d : x.domain) ftv_rec(d, bound, out);
                   ftv_rec(x.codomain, bound, out);
                 },
                 [&](const ty::Product& x) {
                   for (const auto& d : x.items) ftv_rec(d, bound, out);
                 },
                 [&](const ty::Exists& x) {
                   bool added = bound.insert(x.var).second;
                   ftv_rec(x.body, bound, out);
                   if (added) bound.erase(x.var);
                 },
                 [&](const ty::Result&) {},
             },
             t->v);
}

TyVar prime_away(TyVar v, const std::set<TyVar>& avoid) {
  while (avoid.count(v)) v = TyVar(v.text + "'");
  return v;
}

bool match_rec(const Type& p, const TyVar& hole, const Type& t,
               std::optional<Type>& witness, Binders& env) {
  if (auto* pv = std::get_if<ty::Var>(&p->v)) {
    if (pv->name == hole && bound_index(env, hole, true) < 0) {
      std::set<TyVar> ftv = free_tyvars(t);
      for (const auto& b : env)
        if (ftv.count(b.second) && bound_index(env, b.second, false) >= 0)
          return false;
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
          [&](const ty::Var& x) {
            const auto& y = std::get<ty::Var>(t->v);
            int i = bound_index(env, x.name, true);
            int j = bound_index(env, y.name, false);
            if (i < 0 && j < 0) return x.name == y.name;
            return i == j;
          },
          [&](const ty::Arrow& x) {
            const auto& y = std::get<ty::Arrow>(t->v);
            if (x.domain.size() != y.domain.size()) return false;
            for (std::size_t i = 0; i < x.domain.size(); ++i)
              if (!match_rec(x.domain[i], hole, y.domain[i], witness, env))
                return false;
            return match_rec(x.codomain, hole, y.codomain, witness, env);
          },
          [&](const ty::Product& x) {
            const auto& y = std::get<ty::Product>(t->v);
            if (x.items.size() != y.items.size()) return false;
            for (std::size_t i = 0; i < x.items.size(); ++i)
              if (!match_rec(x.items[i], hole, y.items[i], witness, env))
                return false;
            return true;
          },
          [&](const ty::Exists& x) {
            const auto& y = std::get<ty::Exists>(t->v);
            env.emplace_back(x.var, y.var);
            bool r = match_rec(x.body, hole, y.body, witness, env);
            env.pop_back();
            return r;
          },
          [&](const ty::Result&) { return true; },
      },
      p->v);
}

void print_rec(const Type& t, std::ostream& os) {
  std::visit(overloaded{
                 [&](const ty::Var& x) { os << x.name.text; },
                 [&](const ty::Arrow& x) {
                   os << "(";
                   for (std::size_t i = 0; i < x.domain.size(); ++i) {
                     if (i) os << ", ";
                     print_rec(x.domain[i], os);
                   }
                   os << ") -> ";
                   print_rec(x.codomain, os);
                 },
                 [&](const ty::Product& x) {
                   os << "*(";
                   for (std::size_t i = 0; i < x.items.size(); ++i) {
                     if (i) os << ", ";
                     print_rec(x.items[i], os);
                   }
                   os << ")";
                 },
                 [&](const ty::Exists& x) {
                   os << "exists " << x.var.text << ". ";
                   print_rec(x.body, os);
                 },
                 [&](const ty::Result&) { os << "R"; },
             },
             t->v);
}

bool shape_ok(const Type& t, bool allow_result, bool arrows_to_result,
              bool allow_exists) {
  return std::visit(
      overloaded{
          [&](const ty::Var&) { return true; },
          [&](const ty::Arrow& x) {
            for (const auto& d : x.domain)
              if (!shape_ok(d, false, arrows_to_result, allow_exists))
                return false;
            if (arrows_to_result)
              return std::holds_alternative<ty::Result>(x.codomain->v);
            return shape_ok(x.codomain, false, false, allow_exists);
          },
          [&](const ty::Product& x) {
            for (const auto& d : x.items)
              if (!shape_ok(d, false, arrows_to_result, allow_exists))
                return false;
            return true;
          },
          [&](const ty::Exists& x) {
            return allow_exists &&
                   shape_ok(x.body, false, arrows_to_result, allow_exists);
          },
          [&](const ty::Result&) { return allow_result; },
      },
      t->v);
}

}  // namespace

Type type_var(TyVar name) {
  return std::make_shared<TypeNode>(TypeNode{ty::Var{std::move(name)}});
}
Type type_var(const char* name) { return type_var(TyVar(name)); }

Type arrow(std::vector<Type> domain, Type codomain) {
  if (domain.empty()) throw std::invalid_argument("arrow with empty domain");
  return std::make_shared<TypeNode>(
      TypeNode{ty::Arrow{std::move(domain), std::move(codomain)}});
}

Type product(std::vector<Type> items) {
  return std::make_shared<TypeNode>(TypeNode{ty::Product{std::move(items)}});
}

Type exists(TyVar var, Type body) {
  return std::make_shared<TypeNode>(
      TypeNode{ty::Exists{std::move(var), std::move(body)}});
}

Type result_type() {
  static const Type r = std::make_shared<TypeNode>(TypeNode{ty::Result{}});
  return r;
}

Type negate(Type a) { return arrow({std::move(a)}, result_type()); }

bool type_eq(const Type& a, const Type& b) {
  if (a == b) return true;
  Binders env;
  return eq_rec(a, b, env);
}

std::set<TyVar> free_tyvars(const Type& t) {
  std::set<TyVar> bound, out;
  ftv_rec(t, bound, out);
  return out;
}

bool mentions_tyvar(const Type& t, const TyVar& v) {
  return free_tyvars(t).count(v) > 0;
}

Type subst_type(const Type& t, const TyVar& var, const Type& by) {
  return std::visit(
      overloaded{
          [&](const ty::Var& x) -> Type { return x.name == var ? by : t; },
          [&](const ty::Arrow& x) -> Type {
            std::vector<Type> dom;
            for (const auto& d : x.domain)
              dom.push_back(subst_type(d, var, by));
            return arrow(std::move(dom), subst_type(x.codomain, var, by));
          },
          [&](const ty::Product& x) -> Type {
            std::vector<Type> items;
            for (const auto& d : x.items)
              items.push_back(subst_type(d, var, by));
            return product(std::move(items));
          },
          [&](const ty::Exists& x) -> Type {
            if (x.var == var) return t;
            std::set<TyVar> by_ftv = free_tyvars(by);
            if (!by_ftv.count(x.var))
              return exists(x.var, subst_type(x.body, var, by));
            std::set<TyVar> avoid = by_ftv;
            for (const auto& v : free_tyvars(x.body)) avoid.insert(v);
            avoid.insert(var);
            TyVar fresh = prime_away(x.var, avoid);
            Type body = subst_type(x.body, x.var, type_var(fresh));
            return exists(fresh, subst_type(body, var, by));
          },
          [&](const ty::Result&) -> Type { return t; },
      },
      t->v);
}

bool match_type(const Type& pattern, const TyVar& hole, const Type& target,
                std::optional<Type>& witness) {
  Binders env;
  return match_rec(pattern, hole, target, witness, env);
}

bool is_source_type(const Type& t) { return shape_ok(t, false, false, false); }
bool is_cps_type(const Type& t) { return shape_ok(t, false, true, false); }
bool is_vn_type(const Type& t) { return shape_ok(t, false, true, true); }

Type cps_type(const Type& a) {
  return std::visit(
      overloaded{
          [&](const ty::Var&) -> Type { return a; },
          [&](const ty::Arrow& x) -> Type {
            std::vector<Type> dom;
            for (const auto& d : x.domain) dom.push_back(cps_type(d));
            dom.push_back(negate(cps_type(x.codomain)));
            return arrow(std::move(dom), result_type());
          },
          [&](const ty::Product& x) -> Type {
            std::vector<Type> items;
            for (const auto& d : x.items) items.push_back(cps_type(d));
            return product(std::move(items));
          },
          [&](const ty::Exists&) -> Type {
            throw std::invalid_argument("cps_type: not a source type");
          },
          [&](const ty::Result&) -> Type {
            throw std::invalid_argument("cps_type: not a source type");
          },
      },
      a->v);
}

Type cc_type(const Type& a) {
  return std::visit(
      overloaded{
          [&](const ty::Var&) -> Type { return a; },
          [&](const ty::Arrow& x) -> Type {
            if (!std::holds_alternative<ty::Result>(x.codomain->v))
              throw std::invalid_argument("cc_type: arrow not into R");
            std::vector<Type> dom;
            std::set<TyVar> avoid;
            for (const auto& d : x.domain) {
              dom.push_back(cc_type(d));
              for (const auto& v : free_tyvars(dom.back())) avoid.insert(v);
            }
            TyVar t = prime_away(TyVar("t"), avoid);
            dom.insert(dom.begin(), type_var(t));
            Type code = arrow(std::move(dom), result_type());
            return exists(t, product({code, type_var(t)}));
          },
          [&](const ty::Product& x) -> Type {
            std::vector<Type> items;
            for (const auto& d : x.items) items.push_back(cc_type(d));
            return product(std::move(items));
          },
          [&](const ty::Exists& x) -> Type {
            return exists(x.var, cc_type(x.body));
          },
          [&](const ty::Result&) -> Type {
            throw std::invalid_argument("cc_type: bare result type");
          },
      },
      a->v);
}

Type compile_type(const Type& a) { return cc_type(cps_type(a)); }

const Type* ctx_lookup(const TypeCtx& ctx, const Ident& x) {
  for (auto it = ctx.rbegin(); it != ctx.rend(); ++it)
    if (it->first == x) return &it->second;
  return nullptr;
}

TypeCtx cps_ctx(const TypeCtx& ctx) {
  TypeCtx out;
  for (const auto& [x, t] : ctx) out.emplace_back(x, cps_type(t));
  return out;
}

TypeCtx cc_ctx(const TypeCtx& ctx) {
  TypeCtx out;
  for (const auto& [x, t] : ctx) out.emplace_back(x, cc_type(t));
  return out;
}

std::string print_type(const Type& t) {
  std::ostringstream os;
  print_rec(t, os);
  return os.str();
}

}  // namespace costlam
