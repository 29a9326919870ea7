#include "latpri/dce_sets.hpp"

#include <algorithm>

namespace latpri {

namespace {
// value at end of stage t from a stage-sorted per-point change list
int value_from(const std::vector<std::pair<int, int>>& entries, int t) {
  int v = 0;
  for (const auto& [st, val] : entries) {
    if (st > t) break;
    v = val;
  }
  return v;
}
}  // namespace

int SetHistory::value_at(Point x, int t) const {
  check_stage(t, t);
  if (t >= stage_) return value(x);
  auto it = per_point_.find(x);
  if (it == per_point_.end()) return 0;
  return value_from(it->second, t);
}

void SetHistory::set(Point x, int v) {
  int cur = value(x);
  if (cur == v) return;
  live_[x] = v;
  log_.push_back({x, stage_, v});
  per_point_[x].emplace_back(stage_, v);
}

void SetHistory::check_stage(int t, int s) const {
  if (t < 0 || s < t || s > stage_)
    throw Error(ErrorKind::StageOutOfRange,
                id_ + ": stage range [" + std::to_string(t) + "," +
                    std::to_string(s) + "] outside 0.." + std::to_string(stage_));
}

bool SetHistory::same(Point y, int t, int s) const {
  check_stage(t, s);
  for (const auto& [x, entries] : per_point_) {
    if (x > y) break;
    int vt = value_from(entries, t);
    int vs = s >= stage_ ? value(x) : value_from(entries, s);
    if (vt != vs) return false;
  }
  return true;
}

bool SetHistory::bigsame(Point y, int t, int s) const {
  check_stage(t, s);
  if (!same(y, t, s)) return false;
  // every intermediate end-of-stage prefix must equal the stage-s prefix;
  // log entries are genuine changes, so any event at x <= y inside (t, s)
  // either breaks an intermediate stage or is undone before s, which also
  // breaks an intermediate stage unless undone within the same stage
  for (const auto& [x, entries] : per_point_) {
    if (x > y) break;
    int prev = value_from(entries, t);
    for (std::size_t i = 0; i < entries.size(); ++i) {
      auto [st, val] = entries[i];
      if (st <= t || st > s) continue;
      bool last_in_stage =
          i + 1 == entries.size() || entries[i + 1].first > st;
      if (!last_in_stage) continue;  // mid-stage flicker, end value decides
      if (val != prev) return false;
      prev = val;
    }
  }
  return true;
}

int SetHistory::change_count(Point x) const {
  auto it = per_point_.find(x);
  return it == per_point_.end() ? 0 : static_cast<int>(it->second.size());
}

std::vector<Point> SetHistory::ones_below(Point below) const {
  std::vector<Point> out;
  for (const auto& [x, v] : live_) {
    if (x >= below) break;
    if (v == 1) out.push_back(x);
  }
  return out;
}

ApproxSet::ApproxSet(std::string id, ChangeBudget budget,
                     std::vector<ScriptEvent> script)
    : budget_(budget), script_(std::move(script)), hist_(std::move(id)) {
  std::stable_sort(script_.begin(), script_.end(),
                   [](const ScriptEvent& a, const ScriptEvent& b) {
                     return a.stage < b.stage;
                   });
  for (const auto& ev : script_)
    if (ev.stage <= 0)
      throw Error(ErrorKind::BadInput, "script events start at stage 1 (f(x,0)=0)");
}

std::vector<Point> ApproxSet::apply_stage(int s) {
  hist_.begin_stage(s);
  std::vector<Point> changed;
  while (next_ < script_.size() && script_[next_].stage <= s) {
    const auto& ev = script_[next_++];
    if (hist_.value(ev.x) == ev.value) continue;
    int& cnt = changes_[ev.x];
    ++cnt;
    long budget = budget_ == ChangeBudget::Dce ? 2 : ev.x;
    if (cnt > budget && invalid_witness_ < 0) invalid_witness_ = ev.x;
    hist_.set(ev.x, ev.value);
    changed.push_back(ev.x);
  }
  return changed;
}

std::uint64_t ApproxSet::script_change_volume(const std::vector<ScriptEvent>& ev) {
  return ev.size();
}

void ApproxSet::add_event(ScriptEvent ev) {
  auto it = script_.begin() + static_cast<long>(next_);
  while (it != script_.end() && it->stage <= ev.stage) ++it;
  script_.insert(it, ev);
}

std::vector<ScriptEvent> random_budget_script(std::uint64_t seed, ChangeBudget budget,
                                              Point max_point, int max_stage,
                                              int density_percent) {
  SplitMix64 rng(seed);
  std::vector<ScriptEvent> out;
  std::map<Point, int> used;
  std::map<Point, int> cur;
  for (int s = 1; s <= max_stage; ++s) {
    if (rng.below(100) >= static_cast<std::uint64_t>(density_percent)) continue;
    Point x = static_cast<Point>(rng.below(static_cast<std::uint64_t>(max_point) + 1));
    long cap = budget == ChangeBudget::Dce ? 2 : x;
    if (used[x] >= cap) continue;
    ++used[x];
    cur[x] ^= 1;
    out.push_back({x, s, cur[x]});
  }
  return out;
}

Point validate_omega_ce(const std::vector<ScriptEvent>& script) {
  std::map<Point, int> cur, cnt;
  for (const auto& ev : script) {
    if (cur[ev.x] == ev.value) continue;
    cur[ev.x] = ev.value;
    if (++cnt[ev.x] > ev.x) return ev.x;
  }
  return -1;
}

void BuiltSet::enumerate(Point x) {
  auto& [enums, extracts] = ops_[x];
  if (hist_.value(x) == 1) return;
  if (kind_ == DceSet && enums >= 1)
    throw Error(ErrorKind::InvariantViolation,
                hist_.id() + ": point " + std::to_string(x) + " enumerated twice");
  ++enums;
  hist_.set(x, 1);
}

void BuiltSet::extract(Point x) {
  auto& [enums, extracts] = ops_[x];
  if (kind_ == CeSet)
    throw Error(ErrorKind::InvariantViolation,
                hist_.id() + ": extraction from a c.e. set at " + std::to_string(x));
  if (hist_.value(x) == 0) return;
  if (extracts >= 1)
    throw Error(ErrorKind::InvariantViolation,
                hist_.id() + ": point " + std::to_string(x) + " extracted twice");
  ++extracts;
  hist_.set(x, 0);
}

}  // namespace latpri
