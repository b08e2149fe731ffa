#include <sstream>
#include <string>

#include "costlam/overloaded.hpp"
#include "costlam/syntax.hpp"

namespace costlam {

namespace {

// Precedence levels: 0 binders and pre-labels, 1 sums, 2 postfix forms,
// 3 prefix forms, 4 atoms.

std::string params_text(const std::vector<Param>& ps) {
  std::string s;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    if (i) s += ' ';
    if (ps[i].type)
      s += "(" + ps[i].name.text + ":" + print_type(ps[i].type) + ")";
    else
      s += ps[i].name.text;
  }
  return s;
}

template <class T, class F>
std::string joined(const std::vector<T>& xs, F&& f) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) s += ", ";
    s += f(xs[i]);
  }
  return s;
}

std::string tuple_text(std::vector<std::string> items) {
  if (items.size() == 1) return "(" + items[0] + ",)";
  std::string s = "(";
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) s += ", ";
    s += items[i];
  }
  return s + ")";
}

std::string wrap(std::string s, int level, int ctx) {
  return level < ctx ? "(" + s + ")" : s;
}

// ---- source ----

int src_level(const src::Term& t) {
  return std::visit(overloaded{
                        [](const src::Lam&) { return 0; },
                        [](const src::Let&) { return 0; },
                        [](const src::PreLabel&) { return 0; },
                        [](const src::CostAdd&) { return 1; },
                        [](const src::App&) { return 2; },
                        [](const src::PostLabel&) { return 2; },
                        [](const src::Proj&) { return 3; },
                        [](const auto&) { return 4; },
                    },
                    t->v);
}

std::string src_text(const src::Term& t, int ctx) {
  std::string s = std::visit(
      overloaded{
          [](const src::Var& x) { return x.name.text; },
          [](const src::Lam& x) {
            return "\\" + params_text(x.params) + ". " + src_text(x.body, 0);
          },
          [](const src::App& x) {
            return src_text(x.fn, 2) + " @ (" +
                   joined(x.args, [](const src::Term& a) {
                     return src_text(a, 0);
                   }) +
                   ")";
          },
          [](const src::Let& x) {
            return "let " + x.name.text + " = " + src_text(x.bound, 0) +
                   " in " + src_text(x.body, 0);
          },
          [](const src::Tuple& x) {
            std::vector<std::string> items;
            for (const auto& i : x.items) items.push_back(src_text(i, 0));
            return tuple_text(std::move(items));
          },
          [](const src::Proj& x) {
            return "proj " + std::to_string(x.index) + " " +
                   src_text(x.tuple, 3);
          },
          [](const src::PreLabel& x) {
            return x.label.text + "> " + src_text(x.body, 0);
          },
          [](const src::PostLabel& x) {
            return src_text(x.body, 2) + " >" + x.label.text;
          },
          [](const src::CostLit& x) { return "#" + std::to_string(x.value); },
          [](const src::CostAdd& x) {
            return src_text(x.lhs, 1) + " + " + src_text(x.rhs, 2);
          },
      },
      t->v);
  return wrap(std::move(s), src_level(t), ctx);
}

// ---- CPS ----

std::string cps_term_text(const cps::Term& t);

std::string cps_value_text(const cps::Value& v, int ctx) {
  return std::visit(
      overloaded{
          [](const cps::Var& x) { return x.name.text; },
          [&](const cps::Lam& x) {
            return wrap("\\" + params_text(x.params) + ". " +
                            cps_term_text(x.body),
                        0, ctx);
          },
          [](const cps::Tuple& x) {
            std::vector<std::string> items;
            for (const auto& i : x.items) items.push_back(cps_value_text(i, 0));
            return tuple_text(std::move(items));
          },
      },
      v->v);
}

std::string cps_term_text(const cps::Term& t) {
  return std::visit(
      overloaded{
          [](const cps::App& x) {
            return cps_value_text(x.fn, 2) + " @ (" +
                   joined(x.args, [](const cps::Value& a) {
                     return cps_value_text(a, 0);
                   }) +
                   ")";
          },
          [](const cps::LetProj& x) {
            return "let " + x.name.text + " = proj " + std::to_string(x.index) +
                   " " + cps_value_text(x.tuple, 3) + " in " +
                   cps_term_text(x.body);
          },
          [](const cps::PreLabel& x) {
            return x.label.text + "> " + cps_term_text(x.body);
          },
      },
      t->v);
}

// ---- value named ----

std::string pad(int indent) { return std::string(indent, ' '); }

void vn_text(const vn::Term& t, int indent, std::ostringstream& os);

void vn_bindable_text(const vn::Bindable& b, int indent, std::ostringstream& os) {
  std::visit(overloaded{
                 [&](const vn::Lam& x) {
                   os << "\\" << params_text(x.params) << ".\n";
                   vn_text(x.body, indent + 2, os);
                   os << "\n" << pad(indent) << "in\n";
                 },
                 [&](const vn::Tuple& x) {
                   auto names = joined(x.items, [](const Ident& i) { return i.text; });
                   if (x.pack)
                     os << "pack[" << print_type(x.pack) << "] (" << names << ")";
                   else if (x.items.size() == 1)
                     os << "(" << names << ",)";
                   else
                     os << "(" << names << ")";
                   os << " in\n";
                 },
                 [&](const vn::Proj& x) {
                   os << "proj " << x.index << " " << x.tuple.text << " in\n";
                 },
             },
             b);
}

void vn_text(const vn::Term& t, int indent, std::ostringstream& os) {
  const vn::Node* cur = t.get();
  while (true) {
    os << pad(indent);
    if (auto* l = std::get_if<vn::Let>(&cur->v)) {
      os << "let " << l->name.text << " = ";
      vn_bindable_text(l->bound, indent, os);
      cur = l->body.get();
    } else if (auto* p = std::get_if<vn::PreLabel>(&cur->v)) {
      os << p->label.text << ">\n";
      cur = p->body.get();
    } else {
      const auto& a = std::get<vn::App>(cur->v);
      os << a.fn.text << " @ ("
         << joined(a.args, [](const Ident& i) { return i.text; }) << ")";
      return;
    }
  }
}

// ---- regions ----

std::string region_params_text(const std::vector<rgn::Param>& ps) {
  std::string s;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    if (i) s += ' ';
    if (ps[i].type)
      s += "(" + ps[i].name.text + ":" + rgn::print_type(ps[i].type) + ")";
    else
      s += ps[i].name.text;
  }
  return s;
}

void rgn_text(const rgn::Term& t, int indent, std::ostringstream& os) {
  const rgn::Node* cur = t.get();
  auto ids = [](const std::vector<Ident>& xs) {
    return joined(xs, [](const Ident& i) { return i.text; });
  };
  while (true) {
    os << pad(indent);
    if (auto* l = std::get_if<rgn::Let>(&cur->v)) {
      os << "let " << l->name.text << " = ";
      std::visit(overloaded{
                     [&](const rgn::UnitTuple&) { os << "()"; },
                     [&](const rgn::TupleAt& x) {
                       if (x.pack)
                         os << "pack[exists " << x.pack->first.text << ". "
                            << rgn::print_type(x.pack->second) << "] ("
                            << ids(x.items) << ")@" << x.region.text;
                       else
                         os << "(" << ids(x.items) << ")@" << x.region.text;
                     },
                     [&](const rgn::Proj& x) {
                       os << "proj " << x.index << " " << x.tuple.text;
                     },
                 },
                 l->bound);
      os << " in\n";
      cur = l->body.get();
    } else if (auto* p = std::get_if<rgn::PreLabel>(&cur->v)) {
      os << p->label.text << ">\n";
      cur = p->body.get();
    } else if (auto* n = std::get_if<rgn::NewRegion>(&cur->v)) {
      os << "newreg " << n->region.text << " in\n";
      cur = n->body.get();
    } else if (auto* d = std::get_if<rgn::Dispose>(&cur->v)) {
      os << "dispose " << d->region.text << " in\n";
      cur = d->body.get();
    } else {
      const auto& a = std::get<rgn::App>(cur->v);
      os << a.fn.text << " @ ";
      if (!a.regions.empty())
        os << "["
           << joined(a.regions, [](const RegionId& r) { return r.text; })
           << "] ";
      os << "(" << ids(a.args) << ")";
      return;
    }
  }
}

}  // namespace

std::string print(const src::Term& t) { return src_text(t, 0); }
std::string print(const cps::Term& t) { return cps_term_text(t); }
std::string print(const cps::Value& v) { return cps_value_text(v, 0); }

std::string print(const vn::Term& t) {
  std::ostringstream os;
  vn_text(t, 0, os);
  return os.str();
}

std::string print(const HoistProgram& p) { return print(to_term(p)); }

std::string print(const rgn::Term& t) {
  std::ostringstream os;
  rgn_text(t, 0, os);
  return os.str();
}

std::string print(const rgn::Program& p) {
  std::ostringstream os;
  for (const auto& d : p.defs) {
    os << "let " << d.name.text << " = \\";
    if (!d.regions.empty())
      os << "["
         << joined(d.regions, [](const RegionId& r) { return r.text; })
         << "] ";
    os << region_params_text(d.params);
    if (d.latent) {
      std::vector<RegionId> e(d.latent->begin(), d.latent->end());
      os << " !{" << joined(e, [](const RegionId& r) { return r.text; })
         << "}";
    }
    os << ".\n";
    rgn_text(d.body, 2, os);
    os << "\nin\n";
  }
  rgn_text(p.main, 0, os);
  return os.str();
}

std::string print(const Type& t) { return print_type(t); }
std::string print(const rgn::Type& t) { return rgn::print_type(t); }

std::string print(const TypeCtx& ctx) {
  return joined(ctx, [](const std::pair<Ident, Type>& e) {
    return e.first.text + " : " + print_type(e.second);
  });
}

std::string print(const rgn::TypeCtx& ctx) {
  return joined(ctx, [](const std::pair<Ident, rgn::Type>& e) {
    return e.first.text + " : " + rgn::print_type(e.second);
  });
}

}  // namespace costlam
