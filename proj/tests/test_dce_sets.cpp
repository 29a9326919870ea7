#include <doctest.h>

#include <map>

#include "latpri/dce_sets.hpp"

using namespace latpri;

namespace {

// dense stage-by-stage snapshot oracle for same/diff/bigsame
struct DenseOracle {
  std::vector<std::map<Point, int>> snaps;  // per stage
  void record(const SetHistory& h, int stages, Point max_pt) {
    snaps.assign(stages + 1, {});
    // rebuild from log
    std::map<Point, int> cur;
    std::size_t i = 0;
    auto log = h.log();
    for (int s = 0; s <= stages; ++s) {
      while (i < log.size() && log[i].stage <= s) {
        cur[log[i].x] = log[i].value;
        ++i;
      }
      snaps[s] = cur;
    }
    (void)max_pt;
  }
  bool same(Point y, int t, int s) const {
    for (Point p = 0; p <= y; ++p) {
      auto a = snaps[t].count(p) ? snaps[t].at(p) : 0;
      auto b = snaps[s].count(p) ? snaps[s].at(p) : 0;
      if (a != b) return false;
    }
    return true;
  }
  bool bigsame(Point y, int t, int s) const {
    for (int sp = t; sp <= s; ++sp)
      if (!same(y, sp, s)) return false;
    return true;
  }
};

}  // namespace

TEST_CASE("same/diff basics") {
  ApproxSet u("U", ChangeBudget::Dce, {{3, 10, 1}});
  for (int s = 1; s <= 12; ++s) u.apply_stage(s);
  const SetHistory& h = u.history();
  CHECK(h.same(5, 12, 12));
  CHECK(h.diff(5, 9, 10));
  CHECK_FALSE(h.diff(2, 9, 10));
  CHECK(h.value(3) == 1);
  CHECK_THROWS_AS(h.same(5, 9, 99), Error);
}

TEST_CASE("bigsame detects intermediate flips") {
  // flip at 10 and flip back at 11: endpoints 9 vs 12 agree, bigsame fails
  ApproxSet u("U", ChangeBudget::Dce, {{3, 10, 1}, {3, 11, 0}});
  for (int s = 1; s <= 12; ++s) u.apply_stage(s);
  const SetHistory& h = u.history();
  CHECK(h.same(5, 9, 12));
  CHECK_FALSE(h.bigsame(5, 9, 12));
  CHECK(h.bigsame(5, 11, 12));
  CHECK(h.bigsame(2, 9, 12));
}

TEST_CASE("log replay equals dense snapshots") {
  auto script = random_budget_script(42, ChangeBudget::Dce, 20, 60, 50);
  ApproxSet u("U", ChangeBudget::Dce, script);
  for (int s = 1; s <= 60; ++s) u.apply_stage(s);
  CHECK(u.valid());
  DenseOracle oracle;
  oracle.record(u.history(), 60, 20);
  for (Point y : {0, 3, 7, 20})
    for (int t = 0; t <= 60; t += 7)
      for (int s = t; s <= 60; s += 11) {
        CHECK(u.history().same(y, t, s) == oracle.same(y, t, s));
        CHECK(u.history().bigsame(y, t, s) == oracle.bigsame(y, t, s));
      }
}

TEST_CASE("omega validity detection") {
  CHECK(validate_omega_ce({}) == -1);
  // point 2 changing three times
  std::vector<ScriptEvent> s{{2, 1, 1}, {2, 2, 0}, {2, 3, 1}};
  CHECK(validate_omega_ce(s) == 2);
  // a d.c.e.-style script at points >= 2 stays valid
  std::vector<ScriptEvent> ok{{4, 1, 1}, {4, 2, 0}, {9, 3, 1}};
  CHECK(validate_omega_ce(ok) == -1);

  ApproxSet u("U", ChangeBudget::OmegaCe, s);
  u.apply_stage(1);
  u.apply_stage(2);
  CHECK(u.valid());
  u.apply_stage(3);
  CHECK_FALSE(u.valid());
  CHECK(u.invalid_witness() == 2);
}

TEST_CASE("random scripts respect budgets") {
  for (std::uint64_t seed : {1ull, 7ull, 99ull}) {
    auto dce = random_budget_script(seed, ChangeBudget::Dce, 30, 200, 40);
    std::map<Point, int> cnt;
    std::map<Point, int> cur;
    for (auto& e : dce) {
      CHECK(cur[e.x] != e.value);
      cur[e.x] = e.value;
      ++cnt[e.x];
    }
    for (auto& [x, n] : cnt) CHECK(n <= 2);
    auto om = random_budget_script(seed, ChangeBudget::OmegaCe, 30, 200, 40);
    CHECK(validate_omega_ce(om) == -1);
  }
}

TEST_CASE("built set kinds") {
  BuiltSet e("E", BuiltSet::DceSet);
  e.history().begin_stage(1);
  e.enumerate(5);
  e.extract(5);
  CHECK_THROWS_AS(e.enumerate(5), Error);

  BuiltSet c("C", BuiltSet::CeSet);
  c.history().begin_stage(1);
  c.enumerate(4);
  CHECK_THROWS_AS(c.extract(4), Error);
  // monotone: 4 stays in
  c.history().begin_stage(2);
  CHECK(c.value(4) == 1);
}
