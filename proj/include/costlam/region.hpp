#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <variant>
#include <vector>

#include "costlam/names.hpp"

namespace costlam::rgn {

using Effect = std::set<RegionId>;

struct TypeNode;
using Type = std::shared_ptr<const TypeNode>;

struct TVar {
  TyVar name;
};
// ∀r*.A+ -e-> R
struct Forall {
  std::vector<RegionId> regions;
  std::vector<Type> domain;
  Effect effect;
};
struct Unit {};
struct ProductAt {
  std::vector<Type> items;
  RegionId region;
};
struct ExistsAt {
  TyVar var;
  Type body;
  RegionId region;
};
struct TypeNode {
  std::variant<TVar, Forall, Unit, ProductAt, ExistsAt> v;
};

Type type_var(TyVar name);
Type forall(std::vector<RegionId> regions, std::vector<Type> domain,
            Effect effect);
Type unit_type();
Type product_at(std::vector<Type> items, RegionId r);
Type exists_at(TyVar var, Type body, RegionId r);

bool type_eq(const Type& a, const Type& b);
std::set<RegionId> free_regions(const Type& t);
std::set<TyVar> free_tyvars(const Type& t);
Type subst_regions(const Type& t, const std::map<RegionId, RegionId>& m);
Type subst_tyvar(const Type& t, const TyVar& v, const Type& by);
bool match_type(const Type& pattern, const TyVar& hole, const Type& target,
                std::optional<Type>& witness);
std::string print_type(const Type& t);

using TypeCtx = std::vector<std::pair<Ident, Type>>;

struct Param {
  Ident name;
  Type type;  // null when unannotated
};

struct Node;
using Term = std::shared_ptr<const Node>;

struct UnitTuple {};
struct TupleAt {
  std::vector<Ident> items;
  RegionId region;
  // Existential introduction (x)@r : (∃var.body)@r.
  std::optional<std::pair<TyVar, Type>> pack;
};
struct Proj {
  int index;
  Ident tuple;
};
using Bindable = std::variant<UnitTuple, TupleAt, Proj>;

struct App {
  Ident fn;
  std::vector<RegionId> regions;
  std::vector<Ident> args;
};
struct Let {
  Ident name;
  Bindable bound;
  Term body;
};
struct PreLabel {
  Label label;
  Term body;
};
struct NewRegion {
  RegionId region;
  Term body;
};
struct Dispose {
  RegionId region;
  Term body;
};
struct Node {
  std::variant<App, Let, PreLabel, NewRegion, Dispose> v;
};

Term app(Ident fn, std::vector<RegionId> regions, std::vector<Ident> args);
Term let(Ident x, Bindable bound, Term body);
Term pre(Label l, Term body);
Term newreg(RegionId r, Term body);
Term dispose(RegionId r, Term body);

struct Def {
  Ident name;
  std::vector<RegionId> regions;
  std::vector<Param> params;
  std::optional<Effect> latent;  // declared effect, if any
  Term body;
};

struct Program {
  std::vector<Def> defs;
  Term main;
};

bool alpha_eq(const Term& a, const Term& b);
bool alpha_eq(const Program& a, const Program& b);
std::set<Ident> free_vars(const Program& p);
std::set<RegionId> free_regions(const Term& t);
std::set<RegionId> free_regions(const Def& d);
std::size_t size(const Term& t);

using Renaming = std::map<Ident, Ident>;
using RegionRenaming = std::map<RegionId, RegionId>;
// Copies t renaming free names per the maps and every binder (variables and
// newreg regions) to fresh names.
Term rename_fresh(const Term& t, const Renaming& vars,
                  const RegionRenaming& regions, NameSupply& names);
void avoid_names(NameSupply& names, const Program& p);

}  // namespace costlam::rgn
