#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <vector>

#include "costlam/source.hpp"
#include "costlam/types.hpp"

namespace costlam {

struct GenConfig {
  std::uint64_t seed = 1;
  int max_size = 30;
  int max_tuple_width = 3;
  std::vector<TyVar> base_types{TyVar("t1"), TyVar("t2")};
  int app_percent = 40;
  int max_type_depth = 2;
};

class GiveUp : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GeneratedTerm {
  TypeCtx ctx;
  Type type;
  src::Term term;
};

// Typed-by-construction generation of annotated source terms. Without
// recursion every generated term is strongly normalising.
class Generator {
 public:
  explicit Generator(GenConfig cfg);

  // One free variable per base type: g1 : t1, g2 : t2, ...
  TypeCtx default_ctx() const;

  // A random target type, then a term of that type under default_ctx(), of
  // size at most max_size.
  GeneratedTerm next();

  src::Term gen_typed_term(const Type& target, const TypeCtx& ctx, int budget);
  Type random_type(int depth);

  const GenConfig& config() const { return cfg_; }

 private:
  std::uint64_t below(std::uint64_t n);
  bool chance(int percent) { return static_cast<int>(below(100)) < percent; }
  Ident fresh();
  src::Term gen(TypeCtx& ctx, const Type& a, int budget);
  src::Term minimal(TypeCtx& ctx, const Type& a);
  std::vector<Ident> vars_of(const TypeCtx& ctx, const Type& a) const;

  GenConfig cfg_;
  std::mt19937_64 rng_;
  std::uint64_t names_ = 0;
};

std::vector<GeneratedTerm> gen_corpus(const GenConfig& cfg, std::size_t count);

// Smaller candidates that still type at the original type under ctx.
std::vector<src::Term> shrink(const TypeCtx& ctx, const src::Term& t);

// Greedy shrinking: follows the first candidate that still fails.
src::Term shrink_failing(const TypeCtx& ctx, const src::Term& t,
                         const std::function<bool(const src::Term&)>& fails,
                         std::size_t max_rounds = 200);

}  // namespace costlam
