#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "costlam/cps.hpp"
#include "costlam/semantics.hpp"
#include "costlam/source.hpp"
#include "costlam/types.hpp"
#include "costlam/vn.hpp"

namespace costlam {

class TypeError : public std::runtime_error {
 public:
  TypeError(std::string path, std::string expected, std::string found)
      : std::runtime_error(path + ": expected " + expected + ", found " +
                           found),
        path(std::move(path)),
        expected(std::move(expected)),
        found(std::move(found)) {}
  std::string path;
  std::string expected;
  std::string found;
};

// An unpacked type variable would escape into the context.
class EscapeError : public TypeError {
 public:
  using TypeError::TypeError;
};

Type typecheck_source(const TypeCtx& ctx, const src::Term& m);
Type typecheck_cps_value(const TypeCtx& ctx, const cps::Value& v);
// Checks ctx ⊢ M : R.
void typecheck_cps(const TypeCtx& ctx, const cps::Term& m);
// Checks ctx ⊢ M in the value-named system with existentials.
void typecheck_vn(const TypeCtx& ctx, const vn::Term& m);
void typecheck_hoist(const TypeCtx& ctx, const HoistProgram& p);

// halt : ¬cps(A)
Type cps_halt_type(const Type& a);
// halt : ∃t.×((t, cmp A) → R, t), or cmp(A) → R under opt-halt.
Type compiled_halt_type(const Type& a, bool opt_halt);
TypeCtx compile_ctx(const TypeCtx& ctx);

struct SubjectReductionReport {
  bool ok = true;
  std::size_t steps = 0;
  RunStatus status = RunStatus::Stuck;
  std::string violation;  // empty when ok
};

SubjectReductionReport check_subject_reduction(const TypeCtx& ctx,
                                               const src::Term& m,
                                               std::size_t steps);
SubjectReductionReport check_subject_reduction(const TypeCtx& ctx,
                                               const cps::Term& m,
                                               std::size_t steps);
SubjectReductionReport check_subject_reduction(const TypeCtx& ctx,
                                               const vn::Term& m,
                                               std::size_t steps);

struct StageJudgement {
  std::string stage;  // source, cps, vn, cc, hoist
  TypeCtx ctx;
  std::string term;
  bool ok = false;
  std::string error;
};

struct PreservationReport {
  bool ok = false;
  Type source_type;
  std::vector<StageJudgement> stages;
};

PreservationReport check_type_preservation(const TypeCtx& ctx,
                                           const src::Term& m, bool opt_halt);

}  // namespace costlam
