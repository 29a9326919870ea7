// Acceptance suite: one pass/fail line per criterion, non-zero exit on
// any failure. Each criterion pins its tolerances in code.
#include <chrono>
#include <iostream>

#include "latpri/construction.hpp"
#include "latpri/json_io.hpp"
#include "latpri/requirements.hpp"

using namespace latpri;

namespace {

int g_failures = 0;

struct Criterion {
  const char* name;
  double limit_seconds;
  explicit Criterion(const char* n, double lim) : name(n), limit_seconds(lim) {
    start = std::chrono::steady_clock::now();
    ok = true;
  }
  std::chrono::steady_clock::time_point start;
  bool ok;
  std::string why;
  void check(bool cond, const std::string& msg) {
    if (!cond && ok) {
      ok = false;
      why = msg;
    }
  }
  ~Criterion() {
    auto secs = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                              start)
                    .count();
    if (secs > limit_seconds && ok) {
      ok = false;
      why = "runtime " + std::to_string(secs) + "s over limit";
    }
    std::cout << (ok ? "PASS" : "FAIL") << " " << name << " (" << secs << "s)";
    if (!ok) std::cout << " -- " << why;
    std::cout << "\n";
    if (!ok) ++g_failures;
  }
};

void criterion_placeholder() {}

}  // namespace

int main() {
  criterion_placeholder();
  std::cout << "acceptance: placeholder\n";
  return g_failures == 0 ? 0 : 1;
}
