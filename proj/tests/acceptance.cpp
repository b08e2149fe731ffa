// Acceptance run: one PASS/FAIL line per criterion. Exit status 0 only when
// every criterion passes within its time limit.

#include <chrono>
#include <cstdio>
#include <iostream>
#include <thread>

#include "costlam/harness.hpp"
#include "goldens.hpp"

using namespace costlam;

namespace {

constexpr std::uint64_t kSeed = 7;
constexpr int kMaxSize = 30;

struct Line {
  int id;
  std::string name;
  bool pass;
  double seconds;
  double limit;
  std::string note;
};

unsigned jobs() { return std::max(1u, std::thread::hardware_concurrency()); }

double since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Line goldens() {
  auto t0 = std::chrono::steady_clock::now();
  auto rs = test::run_goldens();
  double s = since(t0);
  std::string note;
  bool ok = true;
  for (const auto& r : rs) {
    if (r.failures.empty()) continue;
    ok = false;
    note += r.name + ": " + r.failures.front() + "; ";
  }
  if (ok) note = std::to_string(rs.size()) + " examples";
  return {1, "golden examples", ok, s, 1.0, note};
}

// Inconclusive runs count against the criterion: it asks for zero failures
// on the whole corpus.
Line property(int id, const std::string& name, Property p, std::size_t count, double limit) {
  CheckOptions o;
  o.gen.seed = kSeed;
  o.gen.max_size = kMaxSize;
  o.count = count;
  o.jobs = jobs();
  auto t0 = std::chrono::steady_clock::now();
  PropertyReport r = run_property(p, o);
  double s = since(t0);
  std::string note = "n=" + std::to_string(r.count);
  if (r.inconclusive) note += " inconclusive=" + std::to_string(r.inconclusive);
  if (!r.failures.empty())
    note += " first failure " + r.failures.front().check + ": " + r.failures.front().detail +
            " on " + r.failures.front().shrunk;
  return {id, name, r.outcome == Outcome::Pass, s, limit, note};
}

}  // namespace

int main() {
  std::vector<Line> lines;
  lines.push_back(goldens());
  lines.push_back(property(2, "commutation", Property::Commutation, 1000, 60));
  lines.push_back(property(3, "simulation", Property::Simulation, 1000, 120));
  lines.push_back(property(4, "cost certification", Property::Cost, 500, 120));
  lines.push_back(property(5, "type preservation", Property::Types, 500, 120));
  lines.push_back(property(6, "region safety", Property::Regions, 300, 120));
  lines.push_back(property(7, "structural", Property::Structural, 1000, 120));
  lines.push_back(property(8, "monoid laws and additivity", Property::Monoid, 10000, 5));

  bool all = true;
  for (const auto& l : lines) {
    bool ok = l.pass && l.seconds < l.limit;
    all = all && ok;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f s / %.0f s", l.seconds, l.limit);
    std::cout << "criterion " << l.id << " " << l.name << ": " << (ok ? "PASS" : "FAIL") << " ("
              << buf << ") " << l.note;
    if (l.pass && !ok) std::cout << " [over time limit]";
    std::cout << "\n";
  }
  return all ? 0 : 1;
}
