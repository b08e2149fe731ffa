#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <variant>
#include <vector>

#include "costlam/names.hpp"
#include "costlam/types.hpp"

namespace costlam {

// A binder with an optional type annotation.
struct Param {
  Ident name;
  Type type;  // null when unannotated
};

namespace src {

struct Node;
using Term = std::shared_ptr<const Node>;

struct Var {
  Ident name;
};
struct Lam {
  std::vector<Param> params;
  Term body;
};
struct App {
  Term fn;
  std::vector<Term> args;
};
struct Let {
  Ident name;
  Term bound;
  Term body;
};
struct Tuple {
  std::vector<Term> items;
};
struct Proj {
  int index;  // 1-based
  Term tuple;
};
struct PreLabel {
  Label label;
  Term body;
};
struct PostLabel {
  Label label;
  Term body;
};
// Cost constants and ⊕, present only in instrumented terms.
struct CostLit {
  std::uint64_t value;
};
struct CostAdd {
  Term lhs;
  Term rhs;
};

using Variant = std::variant<Var, Lam, App, Let, Tuple, Proj, PreLabel,
                             PostLabel, CostLit, CostAdd>;

struct Node {
  Variant v;
  bool is_value;
};

Term var(Ident x);
Term var(const char* x);
Term lam(std::vector<Param> params, Term body);
Term lam(std::vector<Ident> params, Term body);
Term app(Term fn, std::vector<Term> args);
Term let(Ident x, Term bound, Term body);
Term tuple(std::vector<Term> items);
Term proj(int index, Term t);
Term pre(Label l, Term body);
Term post(Label l, Term body);
Term cost_lit(std::uint64_t value);
Term cost_add(Term lhs, Term rhs);

inline bool is_value(const Term& t) { return t->is_value; }

bool alpha_eq(const Term& a, const Term& b);
std::set<Ident> free_vars(const Term& t);
std::set<Label> labels(const Term& t);
bool has_labels(const Term& t);
std::size_t size(const Term& t);

using Subst = std::map<Ident, Term>;
Term subst(const Term& body, const Subst& bindings, NameSupply& names);
Term subst(const Term& body, const Subst& bindings);

// A supply whose draws avoid every reserved name occurring in the terms.
NameSupply supply_avoiding(const Term& t);
void avoid_names(NameSupply& names, const Term& t);

}  // namespace src
}  // namespace costlam
