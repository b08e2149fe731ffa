#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "costlam/semantics.hpp"
#include "costlam/source.hpp"
#include "costlam/vn.hpp"

namespace costlam {

// ---- cost monoids ----

// Natural numbers under addition; overflow is an error, not a wrap.
struct NatCost {
  using value_type = std::uint64_t;
  static value_type zero() { return 0; }
  static value_type plus(value_type a, value_type b);
  static std::string name() { return "nat"; }
};

template <class M>
concept CostMonoid = requires(typename M::value_type a) {
  { M::zero() } -> std::same_as<typename M::value_type>;
  { M::plus(a, a) } -> std::same_as<typename M::value_type>;
};

using CostTable = std::map<Label, std::uint64_t>;

class MissingCost : public std::runtime_error {
 public:
  explicit MissingCost(const Label& l)
      : std::runtime_error("no cost for label " + l.text), label(l) {}
  Label label;
};

// Homomorphic extension to label words. Throws MissingCost.
template <CostMonoid M = NatCost>
typename M::value_type costof(const CostTable& table, const std::vector<Label>& trace) {
  typename M::value_type m = M::zero();
  for (const auto& l : trace) {
    auto it = table.find(l);
    if (it == table.end()) throw MissingCost(l);
    m = M::plus(m, it->second);
  }
  return m;
}

// ---- instrumentation ----

src::Term instrument(const src::Term& m, const CostTable& costs, NameSupply& names);
src::Term instrument(const src::Term& m, const CostTable& costs);
// ψ on values.
src::Term instrument_value(const src::Term& v, const CostTable& costs, NameSupply& names);

class FuelExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class StuckError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CostResult {
  std::uint64_t cost;
  src::Term value;
  std::size_t steps;
};
// Runs an instrumented term to a (cost, value) pair.
CostResult eval_instrumented(const src::Term& t, std::size_t fuel = kDefaultFuel);

// ---- RTL ----

struct RtlInstr {
  enum class Kind { MakeTuple, Proj, EmitLabel };
  Kind kind;
  Ident dst;                 // MakeTuple, Proj
  std::vector<Ident> srcs;   // MakeTuple items; Proj source in srcs[0]
  int index = 0;             // Proj
  Label label;               // EmitLabel
};

struct RtlRoutine {
  Ident name;
  std::vector<Ident> params;
  std::vector<RtlInstr> body;
  Ident call_fn;
  std::vector<Ident> call_args;
};

struct RtlProgram {
  std::vector<RtlRoutine> routines;  // the last one is the entry point
};

// One routine per definition plus one for main. A label reached only through
// lets of tuples and projections is emitted at the routine head.
RtlProgram emit_rtl(const HoistProgram& p);
std::string print_rtl(const RtlProgram& r);

struct RtlRun {
  std::vector<Label> labels;
  std::size_t calls = 0;
  std::size_t instructions = 0;
  RunStatus status = RunStatus::Stuck;
};
RtlRun run_rtl(const RtlProgram& r, std::size_t fuel = kDefaultFuel);

// A node is (routine index, instruction index); the call is at body.size().
struct CfgNode {
  std::size_t routine;
  std::size_t index;
  bool operator==(const CfgNode&) const = default;
};

struct SoundReport {
  bool sound = true;
  std::vector<CfgNode> cycle;  // witness: a label-free cycle
};
struct PreciseReport {
  bool precise = true;
  std::optional<Label> label;          // first imprecise label
  std::uint64_t shortest = 0, longest = 0;
};

SoundReport check_sound(const RtlProgram& r);
PreciseReport check_precise(const RtlProgram& r);

class UnsoundLabelling : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
// Cost of a label: the longest label-free instruction path from it.
CostTable costof_table(const RtlProgram& r);

struct CertifyReport {
  enum class Outcome { Agree, Disagree, Inconclusive };
  Outcome outcome = Outcome::Inconclusive;
  CostTable table;
  std::uint64_t instrumented = 0;   // first component of the instrumented run
  std::uint64_t source_trace = 0;   // costof of the labelled source trace
  std::uint64_t compiled_trace = 0; // costof of the RTL run's trace
  bool sound = false, precise = false;
  bool value_matches = false;       // second component is ψ of the source value
  std::string detail;
};
// Unlabelled input is labelled first.
CertifyReport certify_cost(const src::Term& m, std::size_t fuel = kDefaultFuel);

}  // namespace costlam
