#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "latpri/common.hpp"

namespace latpri {

using Point = std::int64_t;

struct ScriptEvent {
  Point x;
  int stage;
  int value;  // 0 or 1
};

enum class ChangeBudget { Dce, OmegaCe };

// History of one set as a change log; stage snapshots are end-of-stage.
// Queries at the live stage see mid-stage content.
class SetHistory {
 public:
  explicit SetHistory(std::string id) : id_(std::move(id)) {}

  const std::string& id() const { return id_; }
  int current_stage() const { return stage_; }
  void begin_stage(int s) { stage_ = s; }

  int value(Point x) const {
    auto it = live_.find(x);
    return it == live_.end() ? 0 : it->second;
  }
  // value at end of stage t (t < current) or live value (t == current)
  int value_at(Point x, int t) const;

  void set(Point x, int v);

  // same(X,y,t,s): X_t restricted to y+1 equals X_s restricted to y+1
  bool same(Point y, int t, int s) const;
  bool diff(Point y, int t, int s) const { return !same(y, t, s); }
  // for all s' in [t,s]: same(X,y,s',s)
  bool bigsame(Point y, int t, int s) const;

  int change_count(Point x) const;
  std::uint64_t total_changes() const { return log_.size(); }

  // live points with value 1 below the bound, ascending
  std::vector<Point> ones_below(Point below) const;

  struct Change {
    Point x;
    int stage;
    int value;
  };
  const std::vector<Change>& log() const { return log_; }

 private:
  void check_stage(int t, int s) const;

  std::string id_;
  int stage_ = 0;
  std::map<Point, int> live_;
  std::vector<Change> log_;  // stage-ordered
  std::map<Point, std::vector<std::pair<int, int>>> per_point_;  // (stage, value)
};

// A scripted approximation of an oracle set (d.c.e. or omega-c.e.).
class ApproxSet {
 public:
  ApproxSet(std::string id, ChangeBudget budget, std::vector<ScriptEvent> script);

  const SetHistory& history() const { return hist_; }
  SetHistory& history() { return hist_; }
  ChangeBudget budget() const { return budget_; }

  // Applies script events for stage s; returns the points that changed.
  // Budget violations are detected here, never silently dropped.
  std::vector<Point> apply_stage(int s);

  // omega-c.e. validity: first point whose change count exceeds x, in
  // script order; -1 when valid so far.
  Point invalid_witness() const { return invalid_witness_; }
  bool valid() const { return invalid_witness_ < 0; }

  // Total changes the script can still make at points <= the given bound
  // plus those already made; used to size use blocks.
  static std::uint64_t script_change_volume(const std::vector<ScriptEvent>& ev);

  const std::vector<ScriptEvent>& script() const { return script_; }

  // insert a future event (adaptive test drivers)
  void add_event(ScriptEvent ev);

 private:
  ChangeBudget budget_;
  std::vector<ScriptEvent> script_;  // sorted by (stage, original order)
  std::size_t next_ = 0;
  SetHistory hist_;
  std::map<Point, int> changes_;
  Point invalid_witness_ = -1;
};

std::vector<ScriptEvent> random_budget_script(std::uint64_t seed, ChangeBudget budget,
                                              Point max_point, int max_stage,
                                              int density_percent);

// The invalidity check of the omega-c.e. listing: a point x may change at
// most x times. Returns the first witnessing x in event order, or -1.
Point validate_omega_ce(const std::vector<ScriptEvent>& script);

// A set built by the construction: E is d.c.e. (enumerate then extract at
// most once each), C-sets and K are c.e. (no extraction).
class BuiltSet {
 public:
  enum Kind { DceSet, CeSet };
  BuiltSet(std::string id, Kind kind) : kind_(kind), hist_(std::move(id)) {}

  Kind kind() const { return kind_; }
  const SetHistory& history() const { return hist_; }
  SetHistory& history() { return hist_; }
  int value(Point x) const { return hist_.value(x); }

  void enumerate(Point x);
  void extract(Point x);

 private:
  Kind kind_;
  SetHistory hist_;
  std::map<Point, std::pair<int, int>> ops_;  // x -> (enums, extracts)
};

}  // namespace latpri
