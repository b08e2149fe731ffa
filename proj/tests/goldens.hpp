#pragma once

#include <string>
#include <vector>

namespace costlam::test {

// One worked example from the reference text, checked up to alpha-equivalence.
struct GoldenResult {
  std::string name;
  std::vector<std::string> failures;  // empty when the example is reproduced
};

std::vector<GoldenResult> run_goldens();

}  // namespace costlam::test
