#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "costlam/region.hpp"
#include "costlam/semantics.hpp"
#include "costlam/types.hpp"
#include "costlam/vn.hpp"

namespace costlam::rgn {

// ---- heap contexts ----

struct BindUnit {
  Ident name;
};
struct BindTupleAt {
  Ident name;
  TupleAt tuple;
};
struct NewRegionEntry {
  RegionId region;
};
struct DisposedEntry {
  RegionId region;
};
using HeapEntry = std::variant<BindUnit, BindTupleAt, NewRegionEntry, DisposedEntry>;
// Outermost entry first.
using HeapCtx = std::vector<HeapEntry>;

bool coh(const HeapCtx& h, const Effect& live);
bool ndis(const RegionId& r, const HeapCtx& h);

// Splits a main term into its heap context and the redex position.
struct Decomposed {
  HeapCtx heap;
  Term redex;  // App, Let of a projection, or PreLabel
};
Decomposed decompose(const Term& main);
Term plug(const HeapCtx& h, Term hole);

// ---- semantics ----

class MemoryError : public std::runtime_error {
 public:
  enum class Kind { AccessDisposed, IncoherentHeap };
  MemoryError(Kind kind, RegionId region, std::size_t heap_index, const std::string& what)
      : std::runtime_error(what), kind(kind), region(std::move(region)), heap_index(heap_index) {}
  Kind kind;
  RegionId region;         // the offending region
  std::size_t heap_index;  // index into the heap context of the failing entry
};
std::string kind_name(MemoryError::Kind k);

struct RegionStep {
  bool stepped = false;
  std::optional<Label> label;
  Program next;
};
// Throws MemoryError when a guard fails on a redex that otherwise matches.
RegionStep step_region(const Program& p, NameSupply& names);
RegionStep step_region(const Program& p);
RunStatus final_status(const Program& p);

struct RegionRun {
  std::vector<Label> labels;
  std::size_t steps = 0;
  RunStatus status = RunStatus::Stuck;
  Program final;
  std::optional<MemoryError> error;  // set when the run ended on a memory error
};
RegionRun run_region(const Program& p, std::size_t fuel = kDefaultFuel);

// ---- type and effect system ----

class EffectError : public std::runtime_error {
 public:
  EffectError(std::string rule, const std::string& what)
      : std::runtime_error(what), rule(std::move(rule)) {}
  std::string rule;  // the violated side condition
};

std::set<RegionId> free_regions(const Program& p);
std::set<RegionId> free_regions(const TypeCtx& ctx);

// The least effect of the program under ctx. Throws EffectError.
Effect effect_check(const TypeCtx& ctx, const Program& p);
Effect effect_check(const TypeCtx& ctx, const Term& t);

// ---- erasure and enrichment ----

costlam::Type region_erase_type(const Type& t);
costlam::TypeCtx region_erase_ctx(const TypeCtx& ctx);
HoistProgram region_erase(const Program& p);

class EnrichError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// One region allocated around main, passed to every call, holding every tuple.
Type region_enrich_type(const costlam::Type& t, const RegionId& r);
// Fails unless every entry is neither a product nor an existential.
TypeCtx region_enrich_ctx(const costlam::TypeCtx& ctx, const RegionId& r);
Program region_enrich(const HoistProgram& p, const RegionId& r);
Program region_enrich(const HoistProgram& p);

// ---- progress, subject reduction and simulation ----

struct RegionReport {
  bool ok = true;
  Effect effect;
  std::size_t steps = 0;
  RunStatus status = RunStatus::Stuck;
  std::vector<Label> labels;
  std::string violation;  // first failed check
};
// Steps p to the end, checking after every step: no memory error, the
// effect judgement still holds at the initial effect, and the erased
// program takes the same step to a matching residual.
RegionReport check_region_progress_and_sr(const Program& p, const TypeCtx& ctx,
                                          std::size_t fuel = kDefaultFuel);

}  // namespace costlam::rgn
