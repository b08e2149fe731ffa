#include "goldens.hpp"
#include "support.hpp"

TEST_CASE("worked examples") {
  for (const auto& g : costlam::test::run_goldens()) {
    INFO(g.name);
    for (const auto& f : g.failures) FAIL_CHECK(f);
    CHECK(g.failures.empty());
  }
}
