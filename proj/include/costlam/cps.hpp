#pragma once

#include <map>
#include <memory>
#include <set>
#include <variant>
#include <vector>

#include "costlam/source.hpp"

namespace costlam::cps {

struct ValueNode;
using Value = std::shared_ptr<const ValueNode>;
struct Node;
using Term = std::shared_ptr<const Node>;

struct Var {
  Ident name;
};
struct Lam {
  std::vector<Param> params;
  Term body;
};
struct Tuple {
  std::vector<Value> items;
};
struct ValueNode {
  std::variant<Var, Lam, Tuple> v;
};

struct App {
  Value fn;
  std::vector<Value> args;
};
// let x = proj i V in M
struct LetProj {
  Ident name;
  int index;
  Value tuple;
  Term body;
};
struct PreLabel {
  Label label;
  Term body;
};
struct Node {
  std::variant<App, LetProj, PreLabel> v;
};

Value var(Ident x);
Value var(const char* x);
Value lam(std::vector<Param> params, Term body);
Value tuple(std::vector<Value> items);
Term app(Value fn, std::vector<Value> args);
Term let_proj(Ident x, int index, Value tuple, Term body);
Term pre(Label l, Term body);

bool alpha_eq(const Term& a, const Term& b);
bool alpha_eq(const Value& a, const Value& b);
std::set<Ident> free_vars(const Term& t);
std::set<Ident> free_vars(const Value& v);
std::size_t size(const Term& t);

using Subst = std::map<Ident, Value>;
Term subst(const Term& body, const Subst& bindings, NameSupply& names);
Value subst(const Value& v, const Subst& bindings, NameSupply& names);
Term subst(const Term& body, const Subst& bindings);

void avoid_names(NameSupply& names, const Term& t);
void avoid_names(NameSupply& names, const Value& v);

}  // namespace costlam::cps
