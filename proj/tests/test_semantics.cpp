#include <functional>

#include "costlam/semantics.hpp"
#include "costlam/testgen.hpp"
#include "costlam/transform.hpp"
#include "support.hpp"

using namespace costlam;
using namespace costlam::test;

namespace {

// Independent oracle: a big-step, environment-based evaluator. No
// substitution, no evaluation contexts; closures capture their environment.
struct BVal;
using BValPtr = std::shared_ptr<const BVal>;
using BEnv = std::map<Ident, BValPtr>;
struct BVal {
  enum Kind { Atom, Closure, Tuple } kind;
  Ident atom;
  const src::Lam* lam = nullptr;
  BEnv env;
  std::vector<BValPtr> items;
};

struct Stuck {};

struct BigStep {
  std::vector<Label> trace;
  std::size_t fuel = 100000;

  BValPtr eval(const src::Term& t, const BEnv& env) {
    if (fuel-- == 0) throw Stuck{};
    return visit_node(
        t->v,
        [&](const src::Var& x) -> BValPtr {
          auto it = env.find(x.name);
          if (it != env.end()) return it->second;
          return std::make_shared<BVal>(BVal{BVal::Atom, x.name, nullptr, {}, {}});
        },
        [&](const src::Lam& l) -> BValPtr {
          return std::make_shared<BVal>(BVal{BVal::Closure, {}, &l, env, {}});
        },
        [&](const src::App& a) -> BValPtr {
          BValPtr f = eval(a.fn, env);
          std::vector<BValPtr> args;
          for (const auto& x : a.args) args.push_back(eval(x, env));
          if (f->kind != BVal::Closure || f->lam->params.size() != args.size()) throw Stuck{};
          BEnv inner = f->env;
          for (std::size_t i = 0; i < args.size(); ++i) inner[f->lam->params[i].name] = args[i];
          return eval(f->lam->body, inner);
        },
        [&](const src::Let& l) -> BValPtr {
          BEnv inner = env;
          inner[l.name] = eval(l.bound, env);
          return eval(l.body, inner);
        },
        [&](const src::Tuple& tp) -> BValPtr {
          auto v = std::make_shared<BVal>(BVal{BVal::Tuple, {}, nullptr, {}, {}});
          for (const auto& x : tp.items) v->items.push_back(eval(x, env));
          return v;
        },
        [&](const src::Proj& p) -> BValPtr {
          BValPtr v = eval(p.tuple, env);
          if (v->kind != BVal::Tuple || p.index < 1 || p.index > static_cast<int>(v->items.size()))
            throw Stuck{};
          return v->items[p.index - 1];
        },
        [&](const src::PreLabel& p) -> BValPtr {
          trace.push_back(p.label);
          return eval(p.body, env);
        },
        [&](const src::PostLabel& p) -> BValPtr {
          BValPtr v = eval(p.body, env);
          trace.push_back(p.label);
          return v;
        },
        [&](const auto&) -> BValPtr { throw Stuck{}; });
  }
};

// Shape of a value, comparable across the two evaluators.
std::string shape(const BValPtr& v) {
  switch (v->kind) {
    case BVal::Atom: return v->atom.text;
    case BVal::Closure: return "fun/" + std::to_string(v->lam->params.size());
    case BVal::Tuple: {
      std::string s = "(";
      for (const auto& i : v->items) s += shape(i) + ",";
      return s + ")";
    }
  }
  return "?";
}

std::string shape(const src::Term& t) {
  return visit_node(
      t->v, [](const src::Var& x) { return x.name.text; },
      [](const src::Lam& l) { return "fun/" + std::to_string(l.params.size()); },
      [](const src::Tuple& tp) {
        std::string s = "(";
        for (const auto& i : tp.items) s += shape(i) + ",";
        return s + ")";
      },
      [](const auto&) { return std::string("?"); });
}

}  // namespace

TEST_CASE("source steps of the self-application") {
  auto m = S("(\\x. x @ (x @ (x))) @ (\\z. z)");
  auto s1 = step_source(m);
  REQUIRE(s1.stepped);
  CHECK_FALSE(s1.label);
  CHECK(src::alpha_eq(s1.next, S("(\\z. z) @ ((\\z. z) @ (\\z. z))")));
  auto s2 = step_source(s1.next);
  CHECK(src::alpha_eq(s2.next, S("(\\z. z) @ (\\z. z)")));
  auto s3 = step_source(s2.next);
  CHECK(src::alpha_eq(s3.next, S("\\z. z")));
  CHECK_FALSE(step_source(s3.next).stepped);
}

TEST_CASE("labels and projections step as expected") {
  auto s = step_source(S("l> \\x. x"));
  REQUIRE(s.stepped);
  CHECK(s.label == Label("l"));
  CHECK(src::alpha_eq(s.next, S("\\x. x")));
  auto p = step_source(S("proj 2 (a, b, c)"));
  CHECK(p.stepped);
  CHECK_FALSE(p.label);
  CHECK(src::alpha_eq(p.next, S("b")));
  CHECK_FALSE(step_source(S("proj 4 (a, b, c)")).stepped);
  auto post = step_source(S("(\\x. x) >m"));
  CHECK(post.label == Label("m"));
}

TEST_CASE("cps and value-named steps") {
  auto s = step_cps(C("let x = proj 1 (\\y j. j @ (y), a) in k @ (x)"));
  REQUIRE(s.stepped);
  CHECK(cps::alpha_eq(s.next, C("k @ (\\y j. j @ (y))")));
  CHECK_FALSE(step_cps(C("halt @ (x)")).stepped);
  CHECK(final_status(C("halt @ (x)")) == RunStatus::Halt);

  auto v = step_vn(V("let f = \\x. g @ (x) in f @ (z)"));
  REQUIRE(v.stepped);
  CHECK(vn::alpha_eq(v.next, V("let f = \\x. g @ (x) in g @ (z)")));
  auto p = step_vn(V("let y = (a, b) in let z = proj 2 y in k @ (z)"));
  CHECK(vn::alpha_eq(p.next, V("let y = (a, b) in k @ (b)")));
  CHECK_FALSE(step_vn(V("g @ (x)")).stepped);
  CHECK(final_status(V("g @ (x)")) == RunStatus::Stuck);
}

TEST_CASE("the labelled self-application emits the oracle's trace") {
  // L(λx.@(x,@(x,x))) applied to a labelled identity
  auto f = label_init(S("\\x. x @ (x @ (x))"));
  auto m = src::app(f, {S("\\y. i> y")});
  BigStep oracle;
  auto v = oracle.eval(m, {});
  auto run = eval_trace(m);
  CHECK(run.status == RunStatus::Value);
  CHECK(run.labels == oracle.trace);
  CHECK(shape(run.final) == shape(v));
  // by hand: body label, inner call, post label, outer call
  std::vector<Label> hand{Label("_l0"), Label("i"), Label("_l1"), Label("i")};
  CHECK(oracle.trace == hand);
}

TEST_CASE("values are normal and divergence runs out of fuel") {
  auto v = eval_trace(S("\\x. x"));
  CHECK(v.labels.empty());
  CHECK(v.steps == 0);
  CHECK(v.status == RunStatus::Value);
  auto omega = eval_trace(S("(\\x. x @ (x)) @ (\\x. x @ (x))"), 100);
  CHECK(omega.status == RunStatus::Fuel);
  CHECK(omega.steps == 100);
  CHECK(eval_trace(S("g @ (x)")).status == RunStatus::Stuck);
}

TEST_CASE("source runs agree with the big-step oracle on generated terms") {
  GenConfig cfg;
  cfg.seed = 21;
  for (const auto& g : gen_corpus(cfg, 300)) {
    auto l = label_init(g.term);
    BigStep oracle;
    auto v = oracle.eval(l, {});
    auto run = eval_trace(l);
    REQUIRE(run.status == RunStatus::Value);
    CHECK(run.labels == oracle.trace);
    CHECK(shape(run.final) == shape(v));
  }
}

TEST_CASE("weak transitions skip silent steps only") {
  auto m = S("(\\x. l> x) @ (\\y. y)");
  auto step = [](const src::Term& t) { return step_source(t); };
  auto eq = [](const src::Term& a, const src::Term& b) { return src::alpha_eq(a, b); };
  CHECK(weak_reaches(m, {Label("l")}, S("\\y. y"), step, eq));
  CHECK_FALSE(weak_reaches(m, {}, S("\\y. y"), step, eq));
  CHECK(weak_reaches(m, {}, S("l> \\y. y"), step, eq));
}

TEST_CASE("compiled runs emit the source trace") {
  GenConfig cfg;
  cfg.seed = 22;
  for (const auto& g : gen_corpus(cfg, 100)) {
    auto l = label_init(g.term);
    CompileOptions o;
    o.opt_halt = true;
    auto src_run = eval_trace(l);
    auto vn_run = eval_trace(to_term(compile(l, o)));
    CHECK(vn_run.status == RunStatus::Halt);
    CHECK(vn_run.labels == src_run.labels);
  }
}
