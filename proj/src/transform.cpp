#include "costlam/transform.hpp"

#include <algorithm>
#include <stdexcept>

#include "costlam/overloaded.hpp"
#include "costlam/typing.hpp"

namespace costlam {

// ---- labelling ----

src::Term label_with(const src::Term& m, int i, NameSupply& labels) {
  return std::visit(
      overloaded{
          [&](const src::Var&) { return m; },
          [&](const src::Lam& x) {
            Label l = labels.fresh_label();
            return src::lam(x.params, src::pre(l, label_with(x.body, 1, labels)));
          },
          [&](const src::App& x) {
            std::optional<Label> l;
            if (i == 0) l = labels.fresh_label();
            src::Term fn = label_with(x.fn, 0, labels);
            std::vector<src::Term> args;
            for (const auto& a : x.args) args.push_back(label_with(a, 0, labels));
            src::Term t = src::app(fn, std::move(args));
            return l ? src::post(*l, t) : t;
          },
          [&](const src::Let& x) {
            src::Term b = label_with(x.bound, 0, labels);
            return src::let(x.name, b, label_with(x.body, i, labels));
          },
          [&](const src::Tuple& x) {
            std::vector<src::Term> items;
            for (const auto& a : x.items) items.push_back(label_with(a, 0, labels));
            return src::tuple(std::move(items));
          },
          [&](const src::Proj& x) {
            return src::proj(x.index, label_with(x.tuple, 0, labels));
          },
          [&](const src::PreLabel&) -> src::Term {
            throw std::invalid_argument("label_init: input is already labelled");
          },
          [&](const src::PostLabel&) -> src::Term {
            throw std::invalid_argument("label_init: input is already labelled");
          },
          [&](const src::CostLit&) -> src::Term {
            throw std::invalid_argument("label_init: cost literal in source");
          },
          [&](const src::CostAdd&) -> src::Term {
            throw std::invalid_argument("label_init: cost sum in source");
          },
      },
      m->v);
}

src::Term label_init(const src::Term& m, NameSupply& labels) {
  return label_with(m, 0, labels);
}

src::Term label_init(const src::Term& m) {
  NameSupply labels;
  return label_with(m, 0, labels);
}

// ---- erasure ----

src::Term erase(const src::Term& t) {
  return std::visit(
      overloaded{
          [&](const src::Var&) { return t; },
          [&](const src::CostLit&) { return t; },
          [&](const src::Lam& x) { return src::lam(x.params, erase(x.body)); },
          [&](const src::App& x) {
            std::vector<src::Term> args;
            for (const auto& a : x.args) args.push_back(erase(a));
            return src::app(erase(x.fn), std::move(args));
          },
          [&](const src::Let& x) {
            return src::let(x.name, erase(x.bound), erase(x.body));
          },
          [&](const src::Tuple& x) {
            std::vector<src::Term> items;
            for (const auto& a : x.items) items.push_back(erase(a));
            return src::tuple(std::move(items));
          },
          [&](const src::Proj& x) { return src::proj(x.index, erase(x.tuple)); },
          [&](const src::PreLabel& x) { return erase(x.body); },
          [&](const src::PostLabel& x) { return erase(x.body); },
          [&](const src::CostAdd& x) {
            return src::cost_add(erase(x.lhs), erase(x.rhs));
          },
      },
      t->v);
}

cps::Value erase(const cps::Value& v) {
  return std::visit(
      overloaded{
          [&](const cps::Var&) { return v; },
          [&](const cps::Lam& x) { return cps::lam(x.params, erase(x.body)); },
          [&](const cps::Tuple& x) {
            std::vector<cps::Value> items;
            for (const auto& a : x.items) items.push_back(erase(a));
            return cps::tuple(std::move(items));
          },
      },
      v->v);
}

cps::Term erase(const cps::Term& t) {
  return std::visit(
      overloaded{
          [&](const cps::App& x) {
            std::vector<cps::Value> args;
            for (const auto& a : x.args) args.push_back(erase(a));
            return cps::app(erase(x.fn), std::move(args));
          },
          [&](const cps::LetProj& x) {
            return cps::let_proj(x.name, x.index, erase(x.tuple), erase(x.body));
          },
          [&](const cps::PreLabel& x) { return erase(x.body); },
      },
      t->v);
}

vn::Term erase(const vn::Term& t) {
  return std::visit(
      overloaded{
          [&](const vn::App&) { return t; },
          [&](const vn::Let& x) {
            vn::Bindable b = x.bound;
            if (auto* l = std::get_if<vn::Lam>(&b)) b = vn::lam(l->params, erase(l->body));
            return vn::let(x.name, std::move(b), erase(x.body));
          },
          [&](const vn::PreLabel& x) { return erase(x.body); },
      },
      t->v);
}

HoistProgram erase(const HoistProgram& p) {
  HoistProgram out;
  for (const auto& d : p.defs) out.defs.push_back({d.name, d.params, erase(d.body)});
  out.main = erase(p.main);
  return out;
}

namespace {

rgn::Term erase_rgn(const rgn::Term& t) {
  return std::visit(
      overloaded{
          [&](const rgn::App&) { return t; },
          [&](const rgn::Let& x) {
            return rgn::let(x.name, x.bound, erase_rgn(x.body));
          },
          [&](const rgn::PreLabel& x) { return erase_rgn(x.body); },
          [&](const rgn::NewRegion& x) {
            return rgn::newreg(x.region, erase_rgn(x.body));
          },
          [&](const rgn::Dispose& x) {
            return rgn::dispose(x.region, erase_rgn(x.body));
          },
      },
      t->v);
}

}  // namespace

rgn::Program erase(const rgn::Program& p) {
  rgn::Program out = p;
  for (auto& d : out.defs) d.body = erase_rgn(d.body);
  out.main = erase_rgn(p.main);
  return out;
}

// ---- well-labelledness ----

WellLabelClass well_labelled(const src::Term& m) {
  using C = WellLabelClass;
  auto all_w0 = [](const std::vector<src::Term>& ts) {
    return std::all_of(ts.begin(), ts.end(), [](const src::Term& t) {
      return well_labelled(t) != C::NotWellLabelled;
    });
  };
  return std::visit(
      overloaded{
          [](const src::Var&) { return C::W1; },
          [](const src::CostLit&) { return C::W1; },
          [](const src::Lam& x) {
            return well_labelled(x.body) == C::W1 ? C::W1 : C::NotWellLabelled;
          },
          [&](const src::App& x) {
            std::vector<src::Term> parts{x.fn};
            parts.insert(parts.end(), x.args.begin(), x.args.end());
            return all_w0(parts) ? C::W1 : C::NotWellLabelled;
          },
          [&](const src::Tuple& x) {
            return all_w0(x.items) ? C::W1 : C::NotWellLabelled;
          },
          [&](const src::Proj& x) {
            return all_w0({x.tuple}) ? C::W1 : C::NotWellLabelled;
          },
          [&](const src::CostAdd& x) {
            return all_w0({x.lhs, x.rhs}) ? C::W1 : C::NotWellLabelled;
          },
          [](const src::Let& x) {
            if (well_labelled(x.bound) == C::NotWellLabelled)
              return C::NotWellLabelled;
            return well_labelled(x.body);
          },
          [](const src::PreLabel& x) { return well_labelled(x.body); },
          [](const src::PostLabel& x) {
            return well_labelled(x.body) == C::NotWellLabelled ? C::NotWellLabelled
                                                                : C::W0;
          },
      },
      m->v);
}

bool in_w0(const src::Term& m) {
  return well_labelled(m) != WellLabelClass::NotWellLabelled;
}

std::string class_name(WellLabelClass c) {
  switch (c) {
    case WellLabelClass::W1: return "W1";
    case WellLabelClass::W0: return "W0";
    case WellLabelClass::NotWellLabelled: return "NotWellLabelled";
  }
  return "?";
}

// ---- CPS ----

namespace {

// A continuation: either a variable k or an abstraction λparam.body.
struct Cont {
  std::optional<Ident> var;
  Param param;
  cps::Term body;
};

class CpsBuilder {
 public:
  CpsBuilder(NameSupply& names, bool typed) : names_(names), typed_(typed) {}

  cps::Term top(const TypeCtx& ctx, const src::Term& m) {
    Ident x = names_.fresh_ident();
    Param p{x, nullptr};
    if (typed_) p.type = cps_type(typecheck_source(ctx, m));
    return colon(ctx, m, Cont{std::nullopt, p, cps::app(cps::var(kHalt), {cps::var(x)})});
  }

  cps::Value psi(const TypeCtx& ctx, const src::Term& v) {
    return std::visit(
        overloaded{
            [&](const src::Var& x) { return cps::var(x.name); },
            [&](const src::Lam& x) {
              Ident k = names_.fresh_ident();
              TypeCtx inner = ctx;
              std::vector<Param> params;
              for (const auto& p : x.params) {
                if (typed_ && !p.type)
                  throw std::invalid_argument("cps: unannotated binder " + p.name.text);
                params.push_back({p.name, p.type ? cps_type(p.type) : nullptr});
                if (typed_) inner.emplace_back(p.name, p.type);
              }
              Param kp{k, nullptr};
              if (typed_) kp.type = negate(cps_type(typecheck_source(inner, x.body)));
              params.push_back(kp);
              return cps::lam(std::move(params),
                              colon(inner, x.body, Cont{k, {}, nullptr}));
            },
            [&](const src::Tuple& x) {
              std::vector<cps::Value> items;
              for (const auto& i : x.items) items.push_back(psi(ctx, i));
              return cps::tuple(std::move(items));
            },
            [&](const auto&) -> cps::Value {
              throw std::invalid_argument("cps: not a value");
            },
        },
        v->v);
  }

 private:
  cps::Value as_value(const Cont& k) {
    if (k.var) return cps::var(*k.var);
    return cps::lam({k.param}, k.body);
  }

  cps::Term apply(const Cont& k, cps::Value v) {
    if (k.var) return cps::app(cps::var(*k.var), {std::move(v)});
    return cps::subst(k.body, {{k.param.name, std::move(v)}}, names_);
  }

  Param param_for(const TypeCtx& ctx, Ident x, const src::Term& m) {
    Param p{std::move(x), nullptr};
    if (typed_) p.type = cps_type(typecheck_source(ctx, m));
    return p;
  }

  // M0 : λx0 ... (Mn : λxn. inner(x0..xn))
  template <class Inner>
  cps::Term sequence(const TypeCtx& ctx, const std::vector<src::Term>& ms,
                     Inner&& inner) {
    std::vector<Ident> xs;
    for (std::size_t i = 0; i < ms.size(); ++i) xs.push_back(names_.fresh_ident());
    cps::Term body = inner(xs);
    for (std::size_t i = ms.size(); i-- > 0;)
      body = colon(ctx, ms[i], Cont{std::nullopt, param_for(ctx, xs[i], ms[i]), body});
    return body;
  }

  static std::vector<cps::Value> vars(const std::vector<Ident>& xs) {
    std::vector<cps::Value> out;
    for (const auto& x : xs) out.push_back(cps::var(x));
    return out;
  }

  cps::Term colon(const TypeCtx& ctx, const src::Term& m, const Cont& k) {
    if (src::is_value(m)) return apply(k, psi(ctx, m));
    return std::visit(
        overloaded{
            [&](const src::App& x) {
              std::vector<src::Term> parts{x.fn};
              parts.insert(parts.end(), x.args.begin(), x.args.end());
              return sequence(ctx, parts, [&](const std::vector<Ident>& xs) {
                std::vector<cps::Value> args = vars({xs.begin() + 1, xs.end()});
                args.push_back(as_value(k));
                return cps::app(cps::var(xs[0]), std::move(args));
              });
            },
            [&](const src::Tuple& x) {
              return sequence(ctx, x.items, [&](const std::vector<Ident>& xs) {
                return apply(k, cps::tuple(vars(xs)));
              });
            },
            [&](const src::Let& x) {
              Ident name = x.name;
              src::Term body = x.body;
              std::set<Ident> kfv = cps::free_vars(as_value(k));
              if (kfv.count(name)) {
                name = names_.fresh_ident();
                body = src::subst(body, {{x.name, src::var(name)}}, names_);
              }
              Param p = param_for(ctx, name, x.bound);
              TypeCtx inner = ctx;
              if (typed_) inner.emplace_back(name, typecheck_source(ctx, x.bound));
              cps::Term rest = colon(inner, body, k);
              return colon(ctx, x.bound, Cont{std::nullopt, p, rest});
            },
            [&](const src::Proj& x) {
              Ident t = names_.fresh_ident();
              Ident y = names_.fresh_ident();
              cps::Term inner = cps::let_proj(y, x.index, cps::var(t), apply(k, cps::var(y)));
              return colon(ctx, x.tuple, Cont{std::nullopt, param_for(ctx, t, x.tuple), inner});
            },
            [&](const src::PreLabel& x) {
              return cps::pre(x.label, colon(ctx, x.body, k));
            },
            [&](const src::PostLabel& x) {
              Ident v = names_.fresh_ident();
              cps::Term inner = cps::pre(x.label, apply(k, cps::var(v)));
              return colon(ctx, x.body, Cont{std::nullopt, param_for(ctx, v, x.body), inner});
            },
            [&](const auto&) -> cps::Term {
              throw std::invalid_argument("cps: cost expressions have no CPS form");
            },
        },
        m->v);
  }

  NameSupply& names_;
  bool typed_;
};

}  // namespace

cps::Term to_cps(const src::Term& m, NameSupply& names) {
  return CpsBuilder(names, false).top({}, m);
}

cps::Term to_cps(const src::Term& m) {
  NameSupply names = src::supply_avoiding(m);
  return to_cps(m, names);
}

cps::Term to_cps_typed(const TypeCtx& ctx, const src::Term& m, NameSupply& names) {
  return CpsBuilder(names, true).top(ctx, m);
}

cps::Value cps_value(const src::Term& v, NameSupply& names) {
  return CpsBuilder(names, false).psi({}, v);
}

// ---- value naming and readback ----

namespace {

struct Binding {
  Ident name;
  vn::Bindable bound;
};

vn::Term wrap(std::vector<Binding> bs, vn::Term body) {
  for (std::size_t i = bs.size(); i-- > 0;)
    body = vn::let(bs[i].name, std::move(bs[i].bound), body);
  return body;
}

class VnBuilder {
 public:
  explicit VnBuilder(NameSupply& names) : names_(names) {}

  vn::Term term(const cps::Term& t) {
    return std::visit(
        overloaded{
            [&](const cps::App& x) {
              std::vector<Binding> bs;
              Ident f = name(x.fn, bs);
              std::vector<Ident> args;
              for (const auto& a : x.args) args.push_back(name(a, bs));
              return wrap(std::move(bs), vn::app(f, std::move(args)));
            },
            [&](const cps::LetProj& x) {
              std::vector<Binding> bs;
              Ident y = name(x.tuple, bs);
              bs.push_back({x.name, vn::proj(x.index, y)});
              return wrap(std::move(bs), term(x.body));
            },
            [&](const cps::PreLabel& x) { return vn::pre(x.label, term(x.body)); },
        },
        t->v);
  }

 private:
  // An identifier for v, emitting E_vn(v, y) bindings for non-identifiers.
  Ident name(const cps::Value& v, std::vector<Binding>& bs) {
    if (auto* x = std::get_if<cps::Var>(&v->v)) return x->name;
    Ident y = names_.fresh_ident();
    bind(v, y, bs);
    return y;
  }

  void bind(const cps::Value& v, const Ident& y, std::vector<Binding>& bs) {
    if (auto* l = std::get_if<cps::Lam>(&v->v)) {
      bs.push_back({y, vn::lam(l->params, term(l->body))});
      return;
    }
    const auto& t = std::get<cps::Tuple>(v->v);
    std::vector<Ident> items;
    for (const auto& i : t.items) items.push_back(name(i, bs));
    bs.push_back({y, vn::tuple(std::move(items))});
  }

  NameSupply& names_;
};

cps::Term rb(const vn::Term& t, NameSupply& names) {
  return std::visit(
      overloaded{
          [&](const vn::App& x) {
            std::vector<cps::Value> args;
            for (const auto& a : x.args) args.push_back(cps::var(a));
            return cps::app(cps::var(x.fn), std::move(args));
          },
          [&](const vn::Let& x) {
            cps::Term body = rb(x.body, names);
            return std::visit(
                overloaded{
                    [&](const vn::Lam& l) {
                      return cps::subst(body, {{x.name, cps::lam(l.params, rb(l.body, names))}},
                                        names);
                    },
                    [&](const vn::Tuple& tu) {
                      std::vector<cps::Value> items;
                      for (const auto& i : tu.items) items.push_back(cps::var(i));
                      return cps::subst(body, {{x.name, cps::tuple(std::move(items))}}, names);
                    },
                    [&](const vn::Proj& p) {
                      return cps::let_proj(x.name, p.index, cps::var(p.tuple), body);
                    },
                },
                x.bound);
          },
          [&](const vn::PreLabel& x) { return cps::pre(x.label, rb(x.body, names)); },
      },
      t->v);
}

}  // namespace

vn::Term to_value_named(const cps::Term& m, NameSupply& names) {
  return VnBuilder(names).term(m);
}

vn::Term to_value_named(const cps::Term& m) {
  NameSupply names;
  cps::avoid_names(names, m);
  return to_value_named(m, names);
}

cps::Term readback(const vn::Term& n) {
  NameSupply names;
  vn::avoid_names(names, n);
  return rb(n, names);
}

// ---- closure conversion ----

TypeCtx cc_context(const TypeCtx& vn_ctx, bool opt_halt) {
  TypeCtx out;
  for (const auto& [x, a] : vn_ctx) {
    if (opt_halt && x == kHalt) {
      const auto* arr = std::get_if<ty::Arrow>(&a->v);
      if (!arr) throw std::invalid_argument("cc: halt must have an arrow type");
      std::vector<Type> dom;
      for (const auto& d : arr->domain) dom.push_back(cc_type(d));
      out.emplace_back(x, arrow(std::move(dom), result_type()));
    } else {
      out.emplace_back(x, cc_type(a));
    }
  }
  return out;
}

namespace {

class CcBuilder {
 public:
  CcBuilder(const CcOptions& o, NameSupply& names) : o_(o), names_(names) {}

  // ctx maps identifiers to converted types; it is consulted only when typed.
  vn::Term term(const vn::Term& t, TypeCtx& ctx) {
    return std::visit(
        overloaded{
            [&](const vn::App& x) { return app(x); },
            [&](const vn::Let& x) {
              return std::visit(
                  overloaded{
                      [&](const vn::Lam& l) { return def(x.name, l, x.body, ctx); },
                      [&](const vn::Tuple& tu) {
                        if (tu.pack) throw std::invalid_argument("cc: input already packed");
                        std::vector<Type> items;
                        if (o_.typed)
                          for (const auto& i : tu.items) items.push_back(lookup(ctx, i));
                        return with(ctx, x.name, o_.typed ? product(items) : nullptr,
                                    [&] { return vn::let(x.name, x.bound, term(x.body, ctx)); });
                      },
                      [&](const vn::Proj& p) {
                        Type a;
                        if (o_.typed) a = component(lookup(ctx, p.tuple), p.index);
                        return with(ctx, x.name, a,
                                    [&] { return vn::let(x.name, x.bound, term(x.body, ctx)); });
                      },
                  },
                  x.bound);
            },
            [&](const vn::PreLabel& x) { return vn::pre(x.label, term(x.body, ctx)); },
        },
        t->v);
  }

 private:
  template <class F>
  vn::Term with(TypeCtx& ctx, const Ident& x, Type a, F&& f) {
    if (!o_.typed) return f();
    ctx.emplace_back(x, std::move(a));
    vn::Term out = f();
    ctx.pop_back();
    return out;
  }

  static Type lookup(const TypeCtx& ctx, const Ident& x) {
    const Type* a = ctx_lookup(ctx, x);
    if (!a) throw std::invalid_argument("cc: no type for " + x.text);
    return *a;
  }

  static Type component(const Type& a, int i) {
    const auto* p = std::get_if<ty::Product>(&a->v);
    if (!p || i < 1 || i > static_cast<int>(p->items.size()))
      throw std::invalid_argument("cc: projection from " + print_type(a));
    return p->items[i - 1];
  }

  vn::Term app(const vn::App& x) {
    if (o_.opt_halt && x.fn == kHalt) return vn::app(x.fn, x.args);
    Ident c = names_.fresh_ident();
    Ident e = names_.fresh_ident();
    std::vector<Ident> args{e};
    args.insert(args.end(), x.args.begin(), x.args.end());
    vn::Term call = vn::app(c, std::move(args));
    if (!o_.typed)
      return vn::let(c, vn::proj(1, x.fn), vn::let(e, vn::proj(2, x.fn), call));
    Ident opened = names_.fresh_ident();
    return vn::let(opened, vn::proj(1, x.fn),
                   vn::let(c, vn::proj(1, opened), vn::let(e, vn::proj(2, opened), call)));
  }

  vn::Term def(const Ident& x, const vn::Lam& l, const vn::Term& rest, TypeCtx& ctx) {
    std::vector<Ident> fvs = vn::free_vars_ordered(vn::Bindable{l});
    Ident c = names_.fresh_ident();
    Ident env_in = names_.fresh_ident();
    Ident env_out = names_.fresh_ident();

    std::vector<Type> env_types;
    std::vector<Type> vn_param_types;
    TypeCtx inner;
    if (o_.typed) {
      for (const auto& z : fvs) env_types.push_back(lookup(ctx, z));
      for (const auto& z : fvs) inner.emplace_back(z, lookup(ctx, z));
      for (const auto& p : l.params) {
        if (!p.type) throw std::invalid_argument("cc: unannotated binder " + p.name.text);
        vn_param_types.push_back(p.type);
        inner.emplace_back(p.name, cc_type(p.type));
      }
    }
    vn::Term body = term(l.body, inner);

    // Unpack the environment; a captured halt is renamed since it cannot be
    // rebound.
    std::vector<Ident> binders = fvs;
    for (auto& z : binders) {
      if (z == kHalt) {
        Ident h = names_.fresh_ident();
        body = vn::rename(body, {{kHalt, h}}, names_);
        z = h;
      }
    }
    for (std::size_t i = binders.size(); i-- > 0;)
      body = vn::let(binders[i], vn::proj(static_cast<int>(i + 1), env_in), body);

    Type env_type = o_.typed ? product(env_types) : nullptr;
    std::vector<Param> params{{env_in, env_type}};
    for (const auto& p : l.params)
      params.push_back({p.name, o_.typed ? cc_type(p.type) : nullptr});

    if (!o_.typed) {
      vn::Term tail = term(rest, ctx);
      return vn::let(c, vn::lam(std::move(params), body),
                     vn::let(env_out, vn::tuple(fvs),
                             vn::let(x, vn::tuple({c, env_out}), tail)));
    }
    Type packed = cc_type(arrow(vn_param_types, result_type()));
    Ident pair = names_.fresh_ident();
    vn::Term tail = with(ctx, x, packed, [&] { return term(rest, ctx); });
    return vn::let(c, vn::lam(std::move(params), body),
                   vn::let(env_out, vn::tuple(fvs),
                           vn::let(pair, vn::tuple({c, env_out}),
                                   vn::let(x, vn::pack(pair, packed), tail))));
  }

  const CcOptions& o_;
  NameSupply& names_;
};

}  // namespace

vn::Term closure_convert(const vn::Term& m, const CcOptions& opts, NameSupply& names) {
  TypeCtx ctx;
  if (opts.typed) ctx = cc_context(opts.ctx, opts.opt_halt);
  return CcBuilder(opts, names).term(m, ctx);
}

vn::Term closure_convert(const vn::Term& m, const CcOptions& opts) {
  NameSupply names;
  vn::avoid_names(names, m);
  return closure_convert(m, opts, names);
}

// ---- hoisting ----

std::string rule_name(HoistRule r) {
  switch (r) {
    case HoistRule::H1: return "h1";
    case HoistRule::H2: return "h2";
    case HoistRule::H3: return "h3";
  }
  return "?";
}

namespace {

// let y = λz.T in M with T free of lambdas.
const vn::Let* simple_def(const vn::Term& t) {
  const auto* l = std::get_if<vn::Let>(&t->v);
  if (!l) return nullptr;
  const auto* f = std::get_if<vn::Lam>(&l->bound);
  if (!f || vn::contains_lambda(f->body)) return nullptr;
  return l;
}

std::optional<HoistRule> redex_at(const vn::Term& t) {
  if (const auto* p = std::get_if<vn::PreLabel>(&t->v))
    return simple_def(p->body) ? std::optional(HoistRule::H3) : std::nullopt;
  const auto* l = std::get_if<vn::Let>(&t->v);
  if (!l) return std::nullopt;
  if (const auto* f = std::get_if<vn::Lam>(&l->bound)) {
    const vn::Let* inner = simple_def(f->body);
    if (!inner) return std::nullopt;
    std::set<Ident> fv = vn::free_vars(inner->bound);
    for (const auto& w : f->params)
      if (fv.count(w.name)) return std::nullopt;
    return HoistRule::H2;
  }
  const vn::Let* inner = simple_def(l->body);
  if (!inner || vn::free_vars(inner->bound).count(l->name)) return std::nullopt;
  return HoistRule::H1;
}

const vn::Term* lam_body(const vn::Term& t) {
  const auto* l = std::get_if<vn::Let>(&t->v);
  if (!l) return nullptr;
  const auto* f = std::get_if<vn::Lam>(&l->bound);
  return f ? &f->body : nullptr;
}

const vn::Term* next_body(const vn::Term& t) {
  if (const auto* l = std::get_if<vn::Let>(&t->v)) return &l->body;
  if (const auto* p = std::get_if<vn::PreLabel>(&t->v)) return &p->body;
  return nullptr;
}

bool search(const vn::Term& t, HoistStrategy s, std::vector<int>& path, HoistRule& rule) {
  bool outer = s == HoistStrategy::LeftmostOutermost;
  if (outer) {
    if (auto r = redex_at(t)) {
      rule = *r;
      return true;
    }
  }
  std::vector<std::pair<int, const vn::Term*>> kids;
  if (const vn::Term* b = lam_body(t)) kids.emplace_back(1, b);
  if (const vn::Term* b = next_body(t)) kids.emplace_back(0, b);
  if (!outer) std::reverse(kids.begin(), kids.end());
  for (const auto& [i, k] : kids) {
    path.push_back(i);
    if (search(*k, s, path, rule)) return true;
    path.pop_back();
  }
  if (!outer) {
    if (auto r = redex_at(t)) {
      rule = *r;
      return true;
    }
  }
  return false;
}

void collect(const vn::Term& t, std::vector<int>& path, std::vector<HoistRedex>& out) {
  if (auto r = redex_at(t)) out.push_back({*r, path});
  if (const vn::Term* b = lam_body(t)) {
    path.push_back(1);
    collect(*b, path, out);
    path.pop_back();
  }
  if (const vn::Term* b = next_body(t)) {
    path.push_back(0);
    collect(*b, path, out);
    path.pop_back();
  }
}

vn::Term rewrite(const vn::Term& t, HoistRule rule, NameSupply& names) {
  switch (rule) {
    case HoistRule::H1: {
      const auto& outer = std::get<vn::Let>(t->v);
      const auto& inner = std::get<vn::Let>(outer.body->v);
      Ident y = inner.name;
      vn::Term m = inner.body;
      if (y == outer.name || vn::free_vars(outer.bound).count(y)) {
        y = names.fresh_ident();
        m = vn::rename(m, {{inner.name, y}}, names);
      }
      return vn::let(y, inner.bound, vn::let(outer.name, outer.bound, m));
    }
    case HoistRule::H2: {
      const auto& outer = std::get<vn::Let>(t->v);
      const auto& f = std::get<vn::Lam>(outer.bound);
      const auto& inner = std::get<vn::Let>(f.body->v);
      Ident y = inner.name;
      vn::Term m = inner.body;
      bool clash = y != outer.name && vn::free_vars(outer.body).count(y);
      for (const auto& w : f.params) clash = clash || w.name == y;
      if (clash) {
        y = names.fresh_ident();
        m = vn::rename(m, {{inner.name, y}}, names);
      }
      return vn::let(y, inner.bound,
                     vn::let(outer.name, vn::lam(f.params, m), outer.body));
    }
    case HoistRule::H3: {
      const auto& p = std::get<vn::PreLabel>(t->v);
      const auto& inner = std::get<vn::Let>(p.body->v);
      return vn::let(inner.name, inner.bound, vn::pre(p.label, inner.body));
    }
  }
  return t;
}

vn::Term apply_at(const vn::Term& t, const HoistRedex& r, std::size_t depth,
                  NameSupply& names) {
  if (depth == r.path.size()) return rewrite(t, r.rule, names);
  int dir = r.path[depth];
  if (const auto* p = std::get_if<vn::PreLabel>(&t->v))
    return vn::pre(p->label, apply_at(p->body, r, depth + 1, names));
  const auto& l = std::get<vn::Let>(t->v);
  if (dir == 1) {
    const auto& f = std::get<vn::Lam>(l.bound);
    return vn::let(l.name, vn::lam(f.params, apply_at(f.body, r, depth + 1, names)), l.body);
  }
  return vn::let(l.name, l.bound, apply_at(l.body, r, depth + 1, names));
}

}  // namespace

std::vector<HoistRedex> hoist_redexes(const vn::Term& m) {
  std::vector<HoistRedex> out;
  std::vector<int> path;
  collect(m, path, out);
  return out;
}

std::optional<HoistRedex> find_redex(const vn::Term& m, HoistStrategy s) {
  std::vector<int> path;
  HoistRule rule{};
  if (!search(m, s, path, rule)) return std::nullopt;
  return HoistRedex{rule, path};
}

vn::Term apply_redex(const vn::Term& m, const HoistRedex& r, NameSupply& names) {
  return apply_at(m, r, 0, names);
}

BigNat hoist_measure(const vn::Term& m) {
  return std::visit(
      overloaded{
          [](const vn::App&) { return BigNat(1); },
          [](const vn::Let& x) {
            BigNat rest = hoist_measure(x.body);
            if (const auto* f = std::get_if<vn::Lam>(&x.bound))
              return BigNat(2 * hoist_measure(f->body) + rest);
            return BigNat(2 * rest);
          },
          [](const vn::PreLabel& x) { return BigNat(2 * hoist_measure(x.body)); },
      },
      m->v);
}

vn::Term hoist_term(const vn::Term& m, const HoistOptions& opts, NameSupply& names,
                    HoistStats* stats) {
  vn::Term t = m;
  HoistStats local;
  BigNat size;
  if (opts.check_measure) size = hoist_measure(t);
  while (auto r = find_redex(t, opts.strategy)) {
    t = apply_redex(t, *r, names);
    ++local.steps;
    if (opts.check_measure) {
      BigNat next = hoist_measure(t);
      if (!(next < size)) local.measure_decreased = false;
      size = std::move(next);
    }
  }
  if (stats) *stats = local;
  return t;
}

HoistProgram hoist(const vn::Term& m, const HoistOptions& opts, HoistStats* stats) {
  NameSupply names;
  vn::avoid_names(names, m);
  return to_program(hoist_term(m, opts, names, stats));
}

// ---- the full chain ----

CompileArtifacts compile_stages(const src::Term& m, const CompileOptions& opts) {
  CompileArtifacts a;
  a.source = m;
  NameSupply names = src::supply_avoiding(m);
  CcOptions cc;
  if (opts.typed) {
    Type ty = typecheck_source(opts.ctx, m);
    a.source_type = ty;
    a.cps = to_cps_typed(opts.ctx, m, names);
    cc.typed = true;
    cc.opt_halt = opts.opt_halt;
    cc.ctx = cps_ctx(opts.ctx);
    cc.ctx.emplace_back(kHalt, cps_halt_type(ty));
  } else {
    a.cps = to_cps(m, names);
    cc.opt_halt = opts.opt_halt;
  }
  a.vn = to_value_named(a.cps, names);
  a.cc = closure_convert(a.vn, cc, names);
  a.hoisted = to_program(hoist_term(a.cc, opts.hoist, names, &a.hoist_stats));
  return a;
}

HoistProgram compile(const src::Term& m, const CompileOptions& opts) {
  return compile_stages(m, opts).hoisted;
}

}  // namespace costlam
