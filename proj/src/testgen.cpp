#include "costlam/testgen.hpp"

#include "costlam/overloaded.hpp"
#include "costlam/typing.hpp"

namespace costlam {

Generator::Generator(GenConfig cfg) : cfg_(std::move(cfg)), rng_(cfg_.seed) {}

std::uint64_t Generator::below(std::uint64_t n) {
  // Rejection sampling keeps the draw unbiased and identical across
  // standard libraries, unlike uniform_int_distribution.
  std::uint64_t limit = rng_.max() - rng_.max() % n;
  std::uint64_t x;
  do x = rng_();
  while (x >= limit);
  return x % n;
}

Ident Generator::fresh() { return Ident("v" + std::to_string(names_++)); }

TypeCtx Generator::default_ctx() const {
  TypeCtx ctx;
  for (std::size_t i = 0; i < cfg_.base_types.size(); ++i)
    ctx.emplace_back(Ident("g" + std::to_string(i + 1)), type_var(cfg_.base_types[i]));
  return ctx;
}

Type Generator::random_type(int depth) {
  auto base = [&] { return type_var(cfg_.base_types[below(cfg_.base_types.size())]); };
  if (depth <= 0) return base();
  auto roll = below(4);
  if (roll < 2) return base();
  if (roll == 2) {
    std::vector<Type> dom;
    std::size_t n = 1 + below(2);
    for (std::size_t i = 0; i < n; ++i) dom.push_back(random_type(depth - 1));
    return arrow(std::move(dom), random_type(depth - 1));
  }
  std::vector<Type> items;
  std::size_t n = below(cfg_.max_tuple_width + 1);
  for (std::size_t i = 0; i < n; ++i) items.push_back(random_type(depth - 1));
  return product(std::move(items));
}

std::vector<Ident> Generator::vars_of(const TypeCtx& ctx, const Type& a) const {
  std::vector<Ident> out;
  for (std::size_t i = 0; i < ctx.size(); ++i) {
    if (!type_eq(ctx[i].second, a)) continue;
    // Skip shadowed entries.
    bool shadowed = false;
    for (std::size_t j = i + 1; j < ctx.size(); ++j) shadowed = shadowed || ctx[j].first == ctx[i].first;
    if (!shadowed) out.push_back(ctx[i].first);
  }
  return out;
}

src::Term Generator::minimal(TypeCtx& ctx, const Type& a) {
  auto vs = vars_of(ctx, a);
  if (!vs.empty()) return src::var(vs[below(vs.size())]);
  if (const auto* f = std::get_if<ty::Arrow>(&a->v)) {
    std::vector<Param> ps;
    for (const auto& d : f->domain) {
      ps.push_back({fresh(), d});
      ctx.emplace_back(ps.back().name, d);
    }
    src::Term body = minimal(ctx, f->codomain);
    ctx.resize(ctx.size() - ps.size());
    return src::lam(std::move(ps), body);
  }
  if (const auto* p = std::get_if<ty::Product>(&a->v)) {
    std::vector<src::Term> items;
    for (const auto& i : p->items) items.push_back(minimal(ctx, i));
    return src::tuple(std::move(items));
  }
  throw GiveUp("no inhabitant of " + print_type(a));
}

src::Term Generator::gen(TypeCtx& ctx, const Type& a, int budget) {
  if (budget <= 1) return minimal(ctx, a);
  const auto* f = std::get_if<ty::Arrow>(&a->v);
  const auto* p = std::get_if<ty::Product>(&a->v);

  if (budget >= 3 && chance(cfg_.app_percent)) {
    std::vector<Type> dom;
    std::size_t n = 1 + (chance(25) ? 1 : 0);
    for (std::size_t i = 0; i < n; ++i) {
      // Prefer argument types already available in the context.
      if (chance(50)) dom.push_back(ctx[below(ctx.size())].second);
      else dom.push_back(random_type(1));
    }
    int rest = budget - 1;
    int fn_budget = std::max(1, rest / 2);
    src::Term fn = gen(ctx, arrow(dom, a), fn_budget);
    std::vector<src::Term> args;
    int arg_budget = std::max(1, (rest - fn_budget) / static_cast<int>(n));
    for (const auto& d : dom) args.push_back(gen(ctx, d, arg_budget));
    return src::app(fn, std::move(args));
  }
  auto roll = below(100);
  if (roll < 15) return minimal(ctx, a);
  if (roll < 45 && (f || p)) {
    if (f) {
      std::vector<Param> ps;
      for (const auto& d : f->domain) {
        ps.push_back({fresh(), d});
        ctx.emplace_back(ps.back().name, d);
      }
      src::Term body = gen(ctx, f->codomain, budget - 1);
      ctx.resize(ctx.size() - ps.size());
      return src::lam(std::move(ps), body);
    }
    std::vector<src::Term> items;
    int each = p->items.empty() ? 0 : std::max(1, (budget - 1) / static_cast<int>(p->items.size()));
    for (const auto& i : p->items) items.push_back(gen(ctx, i, each));
    return src::tuple(std::move(items));
  }
  if (roll < 75) {
    Type b = chance(50) ? random_type(1) : ctx[below(ctx.size())].second;
    int bb = std::max(1, (budget - 1) / 2);
    src::Term bound = gen(ctx, b, bb);
    Ident x = fresh();
    ctx.emplace_back(x, b);
    src::Term body = gen(ctx, a, budget - 1 - bb);
    ctx.pop_back();
    return src::let(x, bound, body);
  }
  // A projection out of a tuple holding a at a random position.
  std::vector<Type> items;
  std::size_t width = 1 + below(std::max(1, cfg_.max_tuple_width));
  std::size_t at = below(width);
  for (std::size_t i = 0; i < width; ++i) items.push_back(i == at ? a : random_type(0));
  return src::proj(static_cast<int>(at + 1), gen(ctx, product(items), budget - 1));
}

src::Term Generator::gen_typed_term(const Type& target, const TypeCtx& ctx, int budget) {
  TypeCtx c = ctx;
  return gen(c, target, budget);
}

GeneratedTerm Generator::next() {
  for (int attempt = 0;; ++attempt) {
    names_ = 0;
    Type a = random_type(cfg_.max_type_depth);
    TypeCtx ctx = default_ctx();
    int budget = 1 + static_cast<int>(below(cfg_.max_size));
    src::Term t = gen_typed_term(a, ctx, budget);
    if (static_cast<int>(src::size(t)) <= cfg_.max_size || attempt > 1000)
      return {ctx, a, t};
  }
}

std::vector<GeneratedTerm> gen_corpus(const GenConfig& cfg, std::size_t count) {
  Generator g(cfg);
  std::vector<GeneratedTerm> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(g.next());
  return out;
}

// ---- shrinking ----

namespace {

struct Child {
  src::Term term;
  TypeCtx extra;
};

std::vector<Child> children(const TypeCtx& ctx, const src::Term& t) {
  std::vector<Child> out;
  std::visit(overloaded{
                 [&](const src::Lam& x) {
                   TypeCtx e;
                   for (const auto& p : x.params)
                     if (p.type) e.emplace_back(p.name, p.type);
                   out.push_back({x.body, e});
                 },
                 [&](const src::App& x) {
                   out.push_back({x.fn, {}});
                   for (const auto& a : x.args) out.push_back({a, {}});
                 },
                 [&](const src::Let& x) {
                   out.push_back({x.bound, {}});
                   TypeCtx e;
                   try {
                     e.emplace_back(x.name, typecheck_source(ctx, x.bound));
                   } catch (const TypeError&) {
                   }
                   out.push_back({x.body, e});
                 },
                 [&](const src::Tuple& x) {
                   for (const auto& a : x.items) out.push_back({a, {}});
                 },
                 [&](const src::Proj& x) { out.push_back({x.tuple, {}}); },
                 [&](const src::PreLabel& x) { out.push_back({x.body, {}}); },
                 [&](const src::PostLabel& x) { out.push_back({x.body, {}}); },
                 [&](const src::CostAdd& x) {
                   out.push_back({x.lhs, {}});
                   out.push_back({x.rhs, {}});
                 },
                 [](const auto&) {},
             },
             t->v);
  return out;
}

src::Term with_child(const src::Term& t, std::size_t i, const src::Term& c) {
  return std::visit(
      overloaded{
          [&](const src::Lam& x) { return src::lam(x.params, c); },
          [&](const src::App& x) {
            if (i == 0) return src::app(c, x.args);
            auto args = x.args;
            args[i - 1] = c;
            return src::app(x.fn, std::move(args));
          },
          [&](const src::Let& x) {
            return i == 0 ? src::let(x.name, c, x.body) : src::let(x.name, x.bound, c);
          },
          [&](const src::Tuple& x) {
            auto items = x.items;
            items[i] = c;
            return src::tuple(std::move(items));
          },
          [&](const src::Proj& x) { return src::proj(x.index, c); },
          [&](const src::PreLabel& x) { return src::pre(x.label, c); },
          [&](const src::PostLabel& x) { return src::post(x.label, c); },
          [&](const src::CostAdd& x) {
            return i == 0 ? src::cost_add(c, x.rhs) : src::cost_add(x.lhs, c);
          },
          [&](const auto&) { return t; },
      },
      t->v);
}

void local_candidates(const TypeCtx& ctx, const src::Term& t, std::vector<src::Term>& out) {
  Type a;
  try {
    a = typecheck_source(ctx, t);
  } catch (const TypeError&) {
    return;
  }
  if (!std::holds_alternative<src::Var>(t->v)) {
    for (auto it = ctx.rbegin(); it != ctx.rend(); ++it)
      if (type_eq(it->second, a)) {
        out.push_back(src::var(it->first));
        break;
      }
  }
  for (const auto& c : children(ctx, t))
    if (c.extra.empty() || !std::holds_alternative<src::Lam>(t->v)) out.push_back(c.term);
  if (const auto* x = std::get_if<src::App>(&t->v)) {
    const auto* f = std::get_if<src::Lam>(&x->fn->v);
    bool values = std::all_of(x->args.begin(), x->args.end(),
                              [](const src::Term& v) { return src::is_value(v); });
    if (f && values && f->params.size() == x->args.size()) {
      src::Subst s;
      for (std::size_t i = 0; i < x->args.size(); ++i) s[f->params[i].name] = x->args[i];
      out.push_back(src::subst(f->body, s));
    }
  }
  if (const auto* x = std::get_if<src::Let>(&t->v)) {
    if (src::is_value(x->bound)) out.push_back(src::subst(x->body, {{x->name, x->bound}}));
  }
  if (const auto* x = std::get_if<src::Proj>(&t->v)) {
    if (const auto* tu = std::get_if<src::Tuple>(&x->tuple->v))
      if (x->index >= 1 && x->index <= static_cast<int>(tu->items.size()))
        out.push_back(tu->items[x->index - 1]);
  }
}

void all_candidates(const TypeCtx& ctx, const src::Term& t, std::vector<src::Term>& out) {
  local_candidates(ctx, t, out);
  auto kids = children(ctx, t);
  for (std::size_t i = 0; i < kids.size(); ++i) {
    TypeCtx inner = ctx;
    inner.insert(inner.end(), kids[i].extra.begin(), kids[i].extra.end());
    std::vector<src::Term> sub;
    all_candidates(inner, kids[i].term, sub);
    for (const auto& c : sub) out.push_back(with_child(t, i, c));
  }
}

}  // namespace

std::vector<src::Term> shrink(const TypeCtx& ctx, const src::Term& t) {
  Type a;
  try {
    a = typecheck_source(ctx, t);
  } catch (const TypeError&) {
    return {};
  }
  std::vector<src::Term> raw;
  all_candidates(ctx, t, raw);
  std::vector<src::Term> out;
  std::size_t n = src::size(t);
  for (const auto& c : raw) {
    if (src::size(c) >= n) continue;
    try {
      if (!type_eq(typecheck_source(ctx, c), a)) continue;
    } catch (const TypeError&) {
      continue;
    }
    out.push_back(c);
  }
  return out;
}

src::Term shrink_failing(const TypeCtx& ctx, const src::Term& t,
                         const std::function<bool(const src::Term&)>& fails,
                         std::size_t max_rounds) {
  src::Term cur = t;
  for (std::size_t round = 0; round < max_rounds; ++round) {
    bool moved = false;
    for (const auto& c : shrink(ctx, cur)) {
      bool f = false;
      try {
        f = fails(c);
      } catch (...) {
        f = true;
      }
      if (f) {
        cur = c;
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  return cur;
}

}  // namespace costlam
