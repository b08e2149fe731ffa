// costlam: batch driver for the labelled compilation chain.
// Human-readable text goes to stdout, one JSON document per run to stderr.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "costlam/cost.hpp"
#include "costlam/harness.hpp"
#include "costlam/regions.hpp"
#include "costlam/semantics.hpp"
#include "costlam/syntax.hpp"
#include "costlam/testgen.hpp"
#include "costlam/transform.hpp"
#include "costlam/typing.hpp"

using namespace costlam;
using json = nlohmann::json;

namespace {

constexpr int kUsage = 2;

std::string read_input(const std::string& path) {
  if (path.empty() || path == "-") {
    return {std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>()};
  }
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json ctx_json(const TypeCtx& ctx) {
  json j = json::object();
  for (const auto& [x, a] : ctx) j[x.text] = print(a);
  return j;
}

json labels_json(const std::vector<Label>& ls) {
  json j = json::array();
  for (const auto& l : ls) j.push_back(l.text);
  return j;
}

json table_json(const CostTable& t) {
  json j = json::object();
  for (const auto& [l, c] : t) j[l.text] = c;
  return j;
}

// Labels the input unless it already carries labels.
src::Term labelled(const src::Term& m) {
  return src::has_labels(m) ? m : label_init(m);
}

std::uint64_t default_seed() {
  if (const char* s = std::getenv("COSTLAM_SEED")) {
    try {
      return std::stoull(s);
    } catch (const std::exception&) {
      throw CLI::ValidationError("COSTLAM_SEED", std::string("not a number: ") + s);
    }
  }
  return 1;
}

void emit(const json& doc) { std::cerr << doc.dump(2) << "\n"; }

// ---- compile ----

struct CompileArgs {
  std::string input;
  std::string stage = "all";
  bool typed = false;
  bool opt_halt = false;
  bool regions = false;
};

int do_compile(const CompileArgs& a) {
  ParseOptions po;
  po.allow_reserved = true;
  SourceInput in = parse_source_input(read_input(a.input), po);
  CompileOptions opts;
  opts.typed = a.typed || a.regions;
  opts.opt_halt = a.opt_halt || a.regions;
  opts.ctx = in.ctx;
  CompileArtifacts art = compile_stages(labelled(in.term), opts);

  json doc{{"command", "compile"}, {"stage", a.stage}, {"typed", opts.typed},
           {"opt_halt", opts.opt_halt}};
  if (art.source_type) doc["type"] = print(*art.source_type);
  json stages = json::object();
  auto show = [&](const std::string& name, const std::string& text) {
    if (a.stage != "all" && a.stage != name) return;
    if (a.stage == "all") std::cout << "== " << name << "\n";
    std::cout << text << "\n";
    stages[name] = text;
  };
  show("label", print(art.source));
  show("cps", print(art.cps));
  show("vn", print(art.vn));
  show("cc", print(art.cc));
  show("hoist", print(art.hoisted));
  show("rtl", print_rtl(emit_rtl(art.hoisted)));
  if (a.regions) {
    rgn::Program p = rgn::region_enrich(art.hoisted);
    std::string text = print(p);
    std::cout << (a.stage == "all" ? "== regions\n" : "") << text << "\n";
    stages["regions"] = text;
  }
  doc["stages"] = stages;
  doc["hoist_steps"] = art.hoist_stats.steps;
  emit(doc);
  return 0;
}

// ---- run ----

struct RunArgs {
  std::string input;
  std::string calculus = "source";
  std::size_t fuel = kDefaultFuel;
  bool trace = false;
};

int status_exit(RunStatus s) {
  switch (s) {
    case RunStatus::Value:
    case RunStatus::Halt: return 0;
    case RunStatus::Fuel: return 3;
    case RunStatus::Stuck: return 1;
  }
  return 1;
}

template <class T>
int report_run(const Run<T>& r, bool trace, json& doc) {
  if (trace) std::cout << trace_lines(r.entries, r.status);
  else std::cout << status_name(r.status) << "\n";
  std::cout << print(r.final) << "\n";
  doc["labels"] = labels_json(r.labels);
  doc["steps"] = r.steps;
  doc["status"] = status_name(r.status);
  doc["final"] = print(r.final);
  emit(doc);
  return status_exit(r.status);
}

int do_run(const RunArgs& a) {
  ParseOptions po;
  po.allow_reserved = true;
  std::string text = read_input(a.input);
  json doc{{"command", "run"}, {"calculus", a.calculus}, {"fuel", a.fuel}};
  if (a.calculus == "source") return report_run(eval_trace(parse_source_input(text, po).term, a.fuel), a.trace, doc);
  if (a.calculus == "cps") return report_run(eval_trace(parse_cps_input(text, po).term, a.fuel), a.trace, doc);
  if (a.calculus == "vn") return report_run(eval_trace(parse_vn_input(text, po).term, a.fuel), a.trace, doc);
  if (a.calculus == "hoist") return report_run(eval_trace(to_term(parse_hoist(text, po)), a.fuel), a.trace, doc);
  if (a.calculus == "rtl") {
    SourceInput in = parse_source_input(text, po);
    CompileOptions opts;
    opts.opt_halt = true;
    RtlRun r = run_rtl(emit_rtl(compile(labelled(in.term), opts)), a.fuel);
    if (a.trace)
      for (std::size_t i = 0; i < r.labels.size(); ++i) std::cout << i + 1 << " " << r.labels[i].text << "\n";
    std::cout << status_name(r.status) << "\n";
    doc["labels"] = labels_json(r.labels);
    doc["calls"] = r.calls;
    doc["instructions"] = r.instructions;
    doc["status"] = status_name(r.status);
    emit(doc);
    return status_exit(r.status);
  }
  // region
  RegionInput in = parse_region_input(text, po);
  rgn::RegionRun r = rgn::run_region(in.program, a.fuel);
  if (a.trace)
    for (std::size_t i = 0; i < r.labels.size(); ++i) std::cout << i + 1 << " " << r.labels[i].text << "\n";
  doc["labels"] = labels_json(r.labels);
  doc["steps"] = r.steps;
  doc["final"] = print(r.final);
  if (r.error) {
    std::cout << "MEMORY ERROR " << rgn::kind_name(r.error->kind) << " on " << r.error->region.text
              << " at heap index " << r.error->heap_index << "\n";
    std::cout << print(r.final) << "\n";
    doc["status"] = "MEMORY_ERROR";
    doc["error"] = {{"kind", rgn::kind_name(r.error->kind)},
                    {"region", r.error->region.text},
                    {"heap_index", r.error->heap_index},
                    {"message", r.error->what()}};
    emit(doc);
    return 1;
  }
  std::cout << status_name(r.status) << "\n" << print(r.final) << "\n";
  doc["status"] = status_name(r.status);
  emit(doc);
  return status_exit(r.status);
}

// ---- cost / certify ----

struct CostArgs {
  std::string input;
  std::size_t fuel = kDefaultFuel;
};

int do_cost(const CostArgs& a) {
  ParseOptions po;
  po.allow_reserved = true;
  src::Term l = labelled(parse_source_input(read_input(a.input), po).term);
  CompileOptions opts;
  opts.opt_halt = true;
  RtlProgram rtl = emit_rtl(compile(l, opts));
  CostTable table = costof_table(rtl);
  // labels dropped by compilation never run; they cost nothing
  for (const auto& lb : src::labels(l)) table.try_emplace(lb, 0);
  src::Term inst = instrument(l, table);

  std::cout << print_rtl(rtl) << "\n";
  for (const auto& [lb, c] : table) std::cout << lb.text << " " << c << "\n";
  std::cout << print(inst) << "\n";
  json doc{{"command", "cost"}, {"rtl", print_rtl(rtl)}, {"table", table_json(table)},
           {"instrumented", print(inst)}};
  auto src_run = eval_trace(l, a.fuel);
  doc["trace"] = labels_json(src_run.labels);
  if (src_run.status == RunStatus::Fuel) {
    std::cout << "INCONCLUSIVE fuel exhausted\n";
    doc["outcome"] = "INCONCLUSIVE";
    emit(doc);
    return 3;
  }
  std::uint64_t c = costof(table, src_run.labels);
  std::cout << "cost " << c << "\n";
  doc["cost"] = c;
  doc["outcome"] = "PASS";
  emit(doc);
  return 0;
}

int do_certify(const CostArgs& a) {
  ParseOptions po;
  po.allow_reserved = true;
  src::Term l = labelled(parse_source_input(read_input(a.input), po).term);
  CertifyReport r = certify_cost(l, a.fuel);
  std::string outcome = r.outcome == CertifyReport::Outcome::Agree      ? "PASS"
                        : r.outcome == CertifyReport::Outcome::Disagree ? "FAIL"
                                                                        : "INCONCLUSIVE";
  std::cout << outcome << " instrumented=" << r.instrumented << " source=" << r.source_trace
            << " compiled=" << r.compiled_trace << " sound=" << r.sound << " precise=" << r.precise
            << "\n";
  if (!r.detail.empty()) std::cout << r.detail << "\n";
  if (outcome != "PASS") std::cout << print(l) << "\n";
  json doc{{"command", "certify"},     {"outcome", outcome},
           {"table", table_json(r.table)}, {"instrumented", r.instrumented},
           {"source_trace", r.source_trace}, {"compiled_trace", r.compiled_trace},
           {"sound", r.sound},           {"precise", r.precise},
           {"value_matches", r.value_matches}, {"detail", r.detail},
           {"term", print(l)}};
  emit(doc);
  return outcome == "PASS" ? 0 : outcome == "FAIL" ? 1 : 3;
}

// ---- check ----

struct CheckArgs {
  std::string property = "all";
  std::string input;
  std::string calculus = "source";
  std::uint64_t seed = 1;
  std::size_t count = 100;
  int size = 30;
  unsigned jobs = 1;
  std::size_t fuel = kDefaultFuel;
  bool opt_halt = false;
};

// Typing judgements of one input program.
int check_input(const CheckArgs& a) {
  ParseOptions po;
  po.allow_reserved = true;
  std::string text = read_input(a.input);
  json doc{{"command", "check"}, {"calculus", a.calculus}};
  if (a.calculus == "region") {
    RegionInput in = parse_region_input(text, po);
    try {
      rgn::Effect e = rgn::effect_check(in.ctx, in.program);
      std::string eff = "{";
      for (const auto& r : e) eff += (eff.size() > 1 ? ", " : "") + r.text;
      eff += "}";
      std::cout << "PASS " << print(in.ctx) << " |- P : " << eff << "\n";
      doc["outcome"] = "PASS";
      doc["effect"] = eff;
      emit(doc);
      return 0;
    } catch (const rgn::EffectError& err) {
      std::cout << "FAIL " << err.rule << ": " << err.what() << "\n" << print(in.program) << "\n";
      doc["outcome"] = "FAIL";
      doc["rule"] = err.rule;
      doc["error"] = err.what();
      doc["term"] = print(in.program);
      emit(doc);
      return 1;
    }
  }
  SourceInput in = parse_source_input(text, po);
  PreservationReport r = check_type_preservation(in.ctx, labelled(in.term), a.opt_halt);
  json stages = json::array();
  for (const auto& s : r.stages) {
    std::cout << (s.ok ? "ok   " : "FAIL ") << s.stage << ": " << print(s.ctx) << " |- "
              << s.term << "\n";
    if (!s.ok) std::cout << "     " << s.error << "\n";
    stages.push_back({{"stage", s.stage}, {"ctx", print(s.ctx)}, {"term", s.term},
                      {"ok", s.ok}, {"error", s.error}});
  }
  doc["stages"] = stages;
  doc["outcome"] = r.ok ? "PASS" : "FAIL";
  if (r.source_type) doc["type"] = print(r.source_type);
  std::cout << (r.ok ? "PASS" : "FAIL") << "\n";
  emit(doc);
  return r.ok ? 0 : 1;
}

int do_check(const CheckArgs& a) {
  if (!a.input.empty()) return check_input(a);
  std::vector<Property> props;
  if (a.property == "all") {
    props = all_properties();
  } else if (auto p = property_from_name(a.property)) {
    props.push_back(*p);
  } else {
    throw CLI::ValidationError("--property", "unknown property " + a.property);
  }
  CheckOptions opts;
  opts.gen.seed = a.seed;
  opts.gen.max_size = a.size;
  opts.count = a.count;
  opts.jobs = a.jobs;
  opts.fuel = a.fuel;

  json reports = json::array();
  Outcome worst = Outcome::Pass;
  for (Property p : props) {
    PropertyReport r = run_property(p, opts);
    std::cout << outcome_name(r.outcome) << " " << property_name(p) << " n=" << r.count;
    if (r.inconclusive) std::cout << " inconclusive=" << r.inconclusive;
    std::cout << " (" << r.seconds << " s)\n";
    for (const auto& f : r.failures) {
      std::cout << "  " << f.check << ": " << f.detail << "\n";
      if (!f.ctx.empty()) std::cout << "    context: " << f.ctx << "\n";
      std::cout << "    term:    " << f.term << "\n    shrunk:  " << f.shrunk << "\n";
    }
    reports.push_back(json::parse(report_json(r)));
    if (r.outcome == Outcome::Fail) worst = Outcome::Fail;
    else if (r.outcome == Outcome::Inconclusive && worst == Outcome::Pass) worst = Outcome::Inconclusive;
  }
  emit({{"command", "check"}, {"seed", a.seed}, {"count", a.count}, {"size", a.size},
        {"outcome", outcome_name(worst)}, {"reports", reports}});
  return exit_code(worst);
}

// ---- gen ----

struct GenArgs {
  std::uint64_t seed = 1;
  int size = 30;
  std::size_t count = 1;
};

int do_gen(const GenArgs& a) {
  GenConfig cfg;
  cfg.seed = a.seed;
  cfg.max_size = a.size;
  json terms = json::array();
  // one term per line; every term shares the generator's default context,
  // which goes to the JSON document
  for (const auto& g : gen_corpus(cfg, a.count)) {
    std::cout << print(g.term) << "\n";
    terms.push_back({{"ctx", ctx_json(g.ctx)}, {"type", print(g.type)}, {"term", print(g.term)}});
  }
  emit({{"command", "gen"}, {"seed", a.seed}, {"size", a.size}, {"terms", terms}});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"costlam: labelled compilation, cost certification and region checking"};
  app.require_subcommand(1);

  CompileArgs ca;
  auto* compile_cmd = app.add_subcommand("compile", "print the stages of compile(L(M))");
  compile_cmd->add_option("input", ca.input, "source file (default: stdin)");
  compile_cmd->add_option("--stage", ca.stage)
      ->check(CLI::IsMember({"label", "cps", "vn", "cc", "hoist", "rtl", "all"}));
  compile_cmd->add_flag("--typed", ca.typed, "annotate every stage with types");
  compile_cmd->add_flag("--opt-halt", ca.opt_halt, "call halt directly instead of as a closure");
  compile_cmd->add_flag("--regions", ca.regions, "also print the region-enriched program");

  RunArgs ra;
  auto* run_cmd = app.add_subcommand("run", "evaluate a program and print its label trace");
  run_cmd->add_option("input", ra.input, "program file (default: stdin)");
  run_cmd->add_option("--calculus", ra.calculus)
      ->check(CLI::IsMember({"source", "cps", "vn", "hoist", "rtl", "region"}));
  run_cmd->add_option("--fuel", ra.fuel);
  run_cmd->add_flag("--trace", ra.trace);

  CostArgs co;
  auto* cost_cmd = app.add_subcommand("cost", "cost table, instrumented term and trace cost");
  cost_cmd->add_option("input", co.input, "source file (default: stdin)");
  cost_cmd->add_option("--fuel", co.fuel);

  CostArgs ce;
  auto* certify_cmd = app.add_subcommand("certify", "compare instrumented, source and RTL costs");
  certify_cmd->add_option("input", ce.input, "source file (default: stdin)");
  certify_cmd->add_option("--fuel", ce.fuel);

  CheckArgs ch;
  auto* check_cmd = app.add_subcommand("check", "run a property over generated terms, or type an input");
  check_cmd->add_option("--property", ch.property)
      ->check(CLI::IsMember({"all", "commutation", "simulation", "cost", "types", "regions",
                             "structural", "monoid"}));
  check_cmd->add_option("--seed", ch.seed);
  check_cmd->add_option("--count", ch.count);
  check_cmd->add_option("--size", ch.size);
  check_cmd->add_option("--jobs", ch.jobs)->check(CLI::PositiveNumber);
  check_cmd->add_option("--fuel", ch.fuel);
  check_cmd->add_option("--input", ch.input, "check the typing of this program instead");
  check_cmd->add_option("--calculus", ch.calculus)->check(CLI::IsMember({"source", "region"}));
  check_cmd->add_flag("--opt-halt", ch.opt_halt);

  GenArgs ga;
  auto* gen_cmd = app.add_subcommand("gen", "print generated well-typed source terms");
  gen_cmd->add_option("--seed", ga.seed);
  gen_cmd->add_option("--size", ga.size);
  gen_cmd->add_option("--count", ga.count);

  try {
    ch.seed = ga.seed = default_seed();
    app.parse(argc, argv);
    if (*compile_cmd) return do_compile(ca);
    if (*run_cmd) return do_run(ra);
    if (*cost_cmd) return do_cost(co);
    if (*certify_cmd) return do_certify(ce);
    if (*check_cmd) return do_check(ch);
    if (*gen_cmd) return do_gen(ga);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kUsage;
  } catch (const ParseError& e) {
    std::cout << "parse error at " << e.line << ":" << e.column << ": " << e.what() << "\n";
    emit({{"error", "parse"}, {"line", e.line}, {"column", e.column}, {"message", e.what()}});
    return kUsage;
  } catch (const std::exception& e) {
    std::cout << "error: " << e.what() << "\n";
    emit({{"error", "failure"}, {"message", e.what()}});
    return 1;
  }
  return kUsage;
}
