#pragma once

#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "costlam/names.hpp"

namespace costlam {

// One type language covers the source, CPS and value-named calculi; the
// per-calculus restrictions are checked by the is_*_type predicates.
struct TypeNode;
using Type = std::shared_ptr<const TypeNode>;

namespace ty {
struct Var {
  TyVar name;
};
struct Arrow {
  std::vector<Type> domain;
  Type codomain;
};
struct Product {
  std::vector<Type> items;
};
struct Exists {
  TyVar var;
  Type body;
};
struct Result {};
}  // namespace ty

struct TypeNode {
  std::variant<ty::Var, ty::Arrow, ty::Product, ty::Exists, ty::Result> v;
};

Type type_var(TyVar name);
Type type_var(const char* name);
Type arrow(std::vector<Type> domain, Type codomain);
Type product(std::vector<Type> items);
Type exists(TyVar var, Type body);
Type result_type();
// ¬A, i.e. A → R.
Type negate(Type a);

bool type_eq(const Type& a, const Type& b);
std::set<TyVar> free_tyvars(const Type& t);
// Capture-avoiding [by/var]t.
Type subst_type(const Type& t, const TyVar& var, const Type& by);
// Finds B with [B/hole]pattern ≡ target. A hole not occurring in pattern
// matches with any witness; the witness is then left empty.
bool match_type(const Type& pattern, const TyVar& hole, const Type& target,
                std::optional<Type>& witness);
bool mentions_tyvar(const Type& t, const TyVar& v);

bool is_source_type(const Type& t);
bool is_cps_type(const Type& t);
bool is_vn_type(const Type& t);

Type cps_type(const Type& a);
Type cc_type(const Type& a);
Type compile_type(const Type& a);

// Ordered context; later entries shadow earlier ones.
using TypeCtx = std::vector<std::pair<Ident, Type>>;

const Type* ctx_lookup(const TypeCtx& ctx, const Ident& x);
TypeCtx cps_ctx(const TypeCtx& ctx);
TypeCtx cc_ctx(const TypeCtx& ctx);

std::string print_type(const Type& t);

}  // namespace costlam
