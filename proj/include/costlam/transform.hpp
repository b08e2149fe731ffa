#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "costlam/cps.hpp"
#include "costlam/region.hpp"
#include "costlam/source.hpp"
#include "costlam/types.hpp"
#include "costlam/vn.hpp"

namespace costlam {

// ---- labelling and erasure ----

// Labels are drawn as _l0, _l1, ... in pre-order. Throws std::invalid_argument
// on input that already carries labels.
src::Term label_init(const src::Term& m);
src::Term label_init(const src::Term& m, NameSupply& labels);
// L_i for i = 0 or 1.
src::Term label_with(const src::Term& m, int i, NameSupply& labels);

src::Term erase(const src::Term& t);
cps::Term erase(const cps::Term& t);
cps::Value erase(const cps::Value& v);
vn::Term erase(const vn::Term& t);
HoistProgram erase(const HoistProgram& p);
rgn::Program erase(const rgn::Program& p);

// W1 is the stronger class: a W1 term is also in W0.
enum class WellLabelClass { W1, W0, NotWellLabelled };
WellLabelClass well_labelled(const src::Term& m);
bool in_w0(const src::Term& m);
std::string class_name(WellLabelClass c);

// ---- CPS ----

cps::Term to_cps(const src::Term& m, NameSupply& names);
cps::Term to_cps(const src::Term& m);
// Annotates every introduced binder; M must type under ctx.
cps::Term to_cps_typed(const TypeCtx& ctx, const src::Term& m,
                       NameSupply& names);
cps::Value cps_value(const src::Term& v, NameSupply& names);

// ---- value naming ----

vn::Term to_value_named(const cps::Term& m, NameSupply& names);
vn::Term to_value_named(const cps::Term& m);
cps::Term readback(const vn::Term& n);

// ---- closure conversion ----

struct CcOptions {
  bool typed = false;
  // Keep @(halt, x) as a direct call; halt then has an arrow type.
  bool opt_halt = false;
  // Value-named context including halt; used only when typed.
  TypeCtx ctx;
};
vn::Term closure_convert(const vn::Term& m, const CcOptions& opts,
                         NameSupply& names);
vn::Term closure_convert(const vn::Term& m, const CcOptions& opts = {});
// Context under which a typed conversion result checks.
TypeCtx cc_context(const TypeCtx& vn_ctx, bool opt_halt);

// ---- hoisting ----

enum class HoistRule { H1, H2, H3 };
std::string rule_name(HoistRule r);

struct HoistRedex {
  HoistRule rule;
  // Child indices from the root: 0 enters a let body or label body, 1 enters
  // the function body of a let-bound lambda.
  std::vector<int> path;
};

enum class HoistStrategy { LeftmostOutermost, RightmostInnermost };

std::vector<HoistRedex> hoist_redexes(const vn::Term& m);
std::optional<HoistRedex> find_redex(const vn::Term& m, HoistStrategy s);
vn::Term apply_redex(const vn::Term& m, const HoistRedex& r, NameSupply& names);

using BigNat = boost::multiprecision::cpp_int;
BigNat hoist_measure(const vn::Term& m);

struct HoistStats {
  std::size_t steps = 0;
  bool measure_decreased = true;  // along every step, when checked
};

struct HoistOptions {
  HoistStrategy strategy = HoistStrategy::LeftmostOutermost;
  bool check_measure = false;
};
vn::Term hoist_term(const vn::Term& m, const HoistOptions& opts,
                    NameSupply& names, HoistStats* stats = nullptr);
HoistProgram hoist(const vn::Term& m, const HoistOptions& opts = {},
                   HoistStats* stats = nullptr);

// ---- the full chain ----

struct CompileOptions {
  bool typed = false;
  bool opt_halt = false;
  TypeCtx ctx;  // source context, used when typed
  HoistOptions hoist;
};

struct CompileArtifacts {
  src::Term source;
  cps::Term cps;
  vn::Term vn;
  vn::Term cc;
  HoistProgram hoisted;
  HoistStats hoist_stats;
  std::optional<Type> source_type;  // when typed
};

CompileArtifacts compile_stages(const src::Term& m,
                                const CompileOptions& opts = {});
HoistProgram compile(const src::Term& m, const CompileOptions& opts = {});

}  // namespace costlam
