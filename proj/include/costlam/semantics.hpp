#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "costlam/cps.hpp"
#include "costlam/source.hpp"
#include "costlam/vn.hpp"

namespace costlam {

// One transition: stepped with an optional emitted label, or stuck.
template <class T>
struct Step {
  bool stepped = false;
  std::optional<Label> label;
  T next;
};

template <class T>
Step<T> stuck(T t) {
  return Step<T>{false, std::nullopt, std::move(t)};
}

inline constexpr std::size_t kDefaultFuel = 100000;

// VALUE: a value of the source calculus; HALT: an application of the free
// `halt` to arguments; STUCK: any other irreducible term; FUEL: out of steps.
enum class RunStatus { Value, Halt, Stuck, Fuel };

std::string status_name(RunStatus s);

struct TraceEntry {
  std::size_t step;
  std::optional<Label> label;
};

template <class T>
struct Run {
  std::vector<Label> labels;
  std::vector<TraceEntry> entries;
  std::size_t steps = 0;
  RunStatus status = RunStatus::Stuck;
  T final;
};

// Each stepper draws fresh binder names from `names`; the supply must avoid
// every reserved name already in the term (see supply_for).
Step<src::Term> step_source(const src::Term& t, NameSupply& names);
Step<cps::Term> step_cps(const cps::Term& t, NameSupply& names);
// Requires that no binder in the let-prefix captures a free variable of a
// function body it is copied past; throws std::logic_error otherwise.
Step<vn::Term> step_vn(const vn::Term& t, NameSupply& names);

Step<src::Term> step_source(const src::Term& t);
Step<cps::Term> step_cps(const cps::Term& t);
Step<vn::Term> step_vn(const vn::Term& t);

NameSupply supply_for(const src::Term& t);
NameSupply supply_for(const cps::Term& t);
NameSupply supply_for(const vn::Term& t);

RunStatus final_status(const src::Term& t);
RunStatus final_status(const cps::Term& t);
RunStatus final_status(const vn::Term& t);

// True when some binder shadows an enclosing binder of the same name.
bool has_shadowing(const vn::Term& t);

template <class T, class StepFn, class StatusFn>
Run<T> run_with(T t, std::size_t fuel, StepFn&& step, StatusFn&& status) {
  Run<T> r;
  while (true) {
    Step<T> s = step(t);
    if (!s.stepped || r.steps >= fuel) {
      r.status = s.stepped ? RunStatus::Fuel : status(t);
      r.final = std::move(t);
      return r;
    }
    ++r.steps;
    r.entries.push_back({r.steps, s.label});
    if (s.label) r.labels.push_back(*s.label);
    t = std::move(s.next);
  }
}

Run<src::Term> eval_trace(const src::Term& t, std::size_t fuel = kDefaultFuel);
Run<cps::Term> eval_trace(const cps::Term& t, std::size_t fuel = kDefaultFuel);
// Binders are freshened first when the input shadows names.
Run<vn::Term> eval_trace(const vn::Term& t, std::size_t fuel = kDefaultFuel);

// Searches the unique run from `from` for a term matching `target` reached by
// silent steps around exactly the labels in `expect` (M ⇒α N). Gives up after
// `limit` steps or once the run emits a label not expected.
template <class T, class StepFn, class EqFn>
bool weak_reaches(T from, const std::vector<Label>& expect, const T& target,
                  StepFn&& step, EqFn&& eq, std::size_t limit = 10000) {
  std::size_t seen = 0;
  for (std::size_t n = 0;; ++n) {
    if (seen == expect.size() && eq(from, target)) return true;
    if (n >= limit) return false;
    auto s = step(from);
    if (!s.stepped) return false;
    if (s.label) {
      if (seen >= expect.size() || !(*s.label == expect[seen])) return false;
      ++seen;
    }
    from = std::move(s.next);
  }
}

// One line per step ("<index> <label or .>") and a final status line.
std::string trace_lines(const std::vector<TraceEntry>& entries, RunStatus s);
// {"labels": [...], "steps": n, "status": "..."}
std::string trace_json(const std::vector<Label>& labels, std::size_t steps,
                       RunStatus s);

}  // namespace costlam
