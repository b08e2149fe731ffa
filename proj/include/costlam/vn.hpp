#pragma once

#include <map>
#include <memory>
#include <set>
#include <variant>
#include <vector>

#include "costlam/source.hpp"

namespace costlam::vn {

struct Node;
using Term = std::shared_ptr<const Node>;

struct Lam {
  std::vector<Param> params;
  Term body;
};
// (x*); a non-null pack marks an existential introduction of one identifier.
struct Tuple {
  std::vector<Ident> items;
  Type pack;
};
struct Proj {
  int index;
  Ident tuple;
};
using Bindable = std::variant<Lam, Tuple, Proj>;

struct App {
  Ident fn;
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
struct Node {
  std::variant<App, Let, PreLabel> v;
};

Term app(Ident fn, std::vector<Ident> args);
Term let(Ident x, Bindable bound, Term body);
Term pre(Label l, Term body);
Bindable lam(std::vector<Param> params, Term body);
Bindable tuple(std::vector<Ident> items);
Bindable pack(Ident item, Type exists_type);
Bindable proj(int index, Ident tuple);

bool alpha_eq(const Term& a, const Term& b);
std::set<Ident> free_vars(const Term& t);
std::set<Ident> free_vars(const Bindable& b);
// Free variables in order of first occurrence.
std::vector<Ident> free_vars_ordered(const Bindable& b);
std::set<Label> labels(const Term& t);
std::size_t size(const Term& t);
bool contains_lambda(const Term& t);

using Renaming = std::map<Ident, Ident>;
// Capture-avoiding identifier-for-identifier substitution.
Term rename(const Term& t, const Renaming& r, NameSupply& names);
// As rename, but every binder in t is replaced by a fresh name.
Term rename_fresh(const Term& t, const Renaming& r, NameSupply& names);

void avoid_names(NameSupply& names, const Term& t);

}  // namespace costlam::vn

namespace costlam {

// The hoisted form: closed top-level definitions followed by a main term.
struct HoistProgram {
  struct Def {
    Ident name;
    std::vector<Param> params;
    vn::Term body;
  };
  std::vector<Def> defs;
  vn::Term main;
};

vn::Term to_term(const HoistProgram& p);
// Splits the leading function definitions off; throws if the remainder or a
// definition body still contains a lambda.
HoistProgram to_program(const vn::Term& t);
bool alpha_eq(const HoistProgram& a, const HoistProgram& b);

}  // namespace costlam
