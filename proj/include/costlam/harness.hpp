#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "costlam/testgen.hpp"
#include "costlam/vn.hpp"

namespace costlam {

enum class Property { Commutation, Simulation, Cost, Types, Regions, Structural, Monoid };

std::string property_name(Property p);
std::optional<Property> property_from_name(const std::string& s);
const std::vector<Property>& all_properties();

enum class Outcome { Pass, Fail, Inconclusive };
std::string outcome_name(Outcome o);
int exit_code(Outcome o);

struct Finding {
  std::string check;   // which sub-check failed
  std::string detail;
  std::string term;    // concrete syntax of the generated term
  std::string shrunk;  // smallest still-failing term found
  std::string ctx;
};

struct PropertyReport {
  Property property;
  Outcome outcome = Outcome::Pass;
  std::size_t count = 0;         // terms (or triples) examined
  std::size_t inconclusive = 0;  // fuel exhausted
  std::vector<Finding> failures;
  std::map<std::string, std::size_t> stats;
  double seconds = 0;
};

struct CheckOptions {
  GenConfig gen;
  std::size_t count = 100;
  unsigned jobs = 1;
  std::size_t fuel = 100000;
  std::size_t max_reported = 5;  // failures shrunk and kept
};

// Failures of one property on one generated term; empty means it holds.
// An entry whose check is "inconclusive" marks a run out of fuel.
std::vector<std::pair<std::string, std::string>> check_term(Property p, const GeneratedTerm& g,
                                                            std::size_t fuel);

PropertyReport run_property(Property p, const CheckOptions& opts);

std::string report_json(const PropertyReport& r);

// Labels occur exactly once in every routine, after only lets of
// tuples and projections, and never in main.
bool labelled_routine_grammar(const HoistProgram& p, std::string* why = nullptr);

}  // namespace costlam
