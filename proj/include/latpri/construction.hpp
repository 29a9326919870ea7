#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "latpri/dce_sets.hpp"
#include "latpri/json_io.hpp"
#include "latpri/priority_tree.hpp"

namespace latpri {

// Scripted convergence of one partial computable functional Psi: from
// stage `from` on, every witness converges to 0. from < 0 means it never
// converges. With lag >= 0 the use tracks the stage as
// max(use, s - lag); otherwise it is the fixed `use`.
struct PsiTable {
  int from = -1;
  Point use = 0;
  int lag = -1;
  Point use_at(int s) const {
    return lag >= 0 ? std::max<Point>(use, s - lag) : use;
  }
};

struct SimConfig {
  std::vector<std::pair<int, int>> covers;
  std::vector<std::string> names;
  int m = -1;
  int u_sets = 1;
  int tree_budget = 3000;
  std::vector<RReq> r_list;

  int stages = 100;
  std::vector<std::vector<ScriptEvent>> u_scripts;
  ChangeBudget u_budget = ChangeBudget::Dce;
  bool omega_mode = false;
  std::vector<ScriptEvent> k_script;
  std::map<int, PsiTable> psi_tables;
  PsiTable psi_default{-1, 0};

  std::uint64_t seed = 1;
  bool strict = true;
  bool record_trace = true;
};

struct UseBlock {
  int id = -1;
  Point lo = 0, hi = 0;  // span [lo, hi)
  std::string owner;     // functional instance key
  Point input = -1;
  int created_stage = 0;
  int killed_stage = -1;
  int killer_node = -1;
  bool perm_killed = false;
  std::vector<int> crosses;          // set ids, E first
  std::map<int, Point> next_unused;  // per crossed set: offset cursor
  bool killed() const { return killed_stage >= 0 || perm_killed; }
};

// An axiom (x, value, oracle restricted to use). The oracle content at
// creation time is implicit: the simulator's tick-stamped write logs
// reconstruct it, and `dirty` tracks the points currently deviating.
struct Axiom {
  Point x = -1;
  int value = 0;
  Point use = 0;
  int block = -1;  // block id backing this definition
  std::uint64_t created_tick = 0;
  mutable std::uint64_t checked_tick = 0;
  mutable std::set<Point> dirty;  // component-encoded: point * n_sets + sid
};

struct Functional {
  FuncInstance inst;
  std::vector<int> components;  // set ids, oracle order (E first)
  int target_set = -1;          // C_c for Gamma, U_i for Delta, K for Theta
  std::vector<Axiom> axioms;
  std::map<Point, std::vector<int>> axioms_by_input;
  std::map<Point, std::vector<int>> blocks_by_input;  // creation order
};

// The computation package E^i(beta) together with its data tree S^i.
struct DataPkg {
  int level = 0;      // i; equals the nesting depth from any E^0 root
  int node = -1;      // h at this position (right-descendant leaf's node)
  Elem f = -1;        // type
  int g = 1;          // strong 1 / weak 0; leaves are strong by definition
  int ref_stage = -1; // stage of the combine (internal positions)
  std::shared_ptr<DataPkg> left, right;
  // leaf payload
  Point y = -1;
  Point witness = -1;
  int psi = -1;
  std::vector<std::vector<Point>> frozen_ones;  // per oracle component of node
  std::vector<int> frozen_sets;                 // set ids, E first
  bool leaf() const { return !left; }
};

// One decision candidate after the controller modification (Def of
// modified data): a frontier position of S^ctr.
struct CtrEntry {
  int node = -1;
  Elem f = -1;
  bool critical = false;  // critical U_{level}^{b} problem
  int level = -1;         // i for critical entries
  int b = -1;             // copy of the problem
  Point y_adj = -1;       // y' (max over subtree for critical entries)
  const DataPkg* pkg = nullptr;  // subtree at this position
  struct Cond {
    int level;
    bool same_type;
    Point ref_len;
    int ref_stage;
  };
  std::vector<Cond> conds;
};

struct Controller {
  int node = -1;
  Elem c = -1;
  int s_ctr = -1;
  std::shared_ptr<DataPkg> data;  // E^0 / S^0 (untruncated)
  std::vector<CtrEntry> frontier; // left to right, subset-increasing nodes
  int decision = -1;              // index into frontier; -1 undefined yet
  bool alive = true;
  Point e_restraint = -1;         // restrain E on [0, e_restraint)
  std::uint64_t last_check_tick = 0;
  int noise_events = 0;
  int decision_changes = 0;
  // grants of the current decision
  int granted_d_node = -1;
  int granted_red_node = -1, granted_red_level = -1;
  int granted_link = -1;
};

struct Link {
  int id = -1;
  int start_snode = -1;
  int target = -1;
  int level = -1;  // U_i-link
  OutcomeKind target_kind = OutcomeKind::Ctr;
  int target_level = -1;
  std::shared_ptr<DataPkg> pkg;
  int establisher = -1;  // controller node
  std::vector<int> sources;
  bool alive = true;
};

struct TraceEvent {
  int stage;
  int sub;
  std::string line;  // serialized JSON
};

struct SimSummary {
  int stages_run = 0;
  bool invariant_ok = true;
  std::string violation;
  std::uint64_t trace_hash = 0;
  std::string final_state_json;
  std::map<std::string, int> event_counts;
  int invariant_checks = 0;
};

class Simulator {
 public:
  explicit Simulator(const SimConfig& cfg);

  void run();          // all configured stages (stops early on violation
                       // in strict mode by rethrowing)
  bool step();         // one stage; false when done
  int stage() const { return stage_; }

  const PriorityTree& tree() const { return *tree_; }
  const IntervalTree& itree() const { return *itree_; }
  const Lattice& lattice() const { return lat_; }
  const SimSummary& summary() const { return summary_; }
  const std::vector<TraceEvent>& trace() const { return trace_; }
  std::string final_state_json() const;

  // test/introspection hooks
  const std::vector<Controller>& controllers() const { return controllers_; }
  const Controller* controller_at(int node) const;
  const std::map<std::pair<int, int>, std::shared_ptr<DataPkg>>& slots() const {
    return data_slots_;
  }
  const SetHistory& set_history(int set_id) const;
  int set_e() const { return 0; }
  int set_c(Elem c) const;
  int set_u(int i) const;
  int set_k() const;
  bool d_active(int node) const { return d_active_.count(node) != 0; }
  bool red_overlay(int node, int level) const {
    return red_overlay_.count({node, level}) != 0;
  }
  const std::vector<Link>& links() const { return links_; }
  const std::vector<std::pair<int, int>>& visited_path() const { return visited_; }
  std::vector<std::vector<std::pair<int, int>>> visit_log;  // per stage

  // append script events before their stage has run (adaptive tests)
  void add_u_event(int u, ScriptEvent ev);
  void add_k_event(ScriptEvent ev);
  const SimConfig& config() const { return cfg_; }

 private:
  friend struct SimOps;
  SimConfig cfg_;
  Lattice lat_;
  std::unique_ptr<IntervalTree> itree_;
  std::unique_ptr<PriorityTree> tree_;

  // sets: 0 = E, 1..nji = C (ji order), then U_0.., then K
  std::vector<std::unique_ptr<BuiltSet>> built_;  // E + C's
  std::vector<std::unique_ptr<ApproxSet>> approx_;  // U's + K (last)
  int n_c_ = 0;

  std::map<std::string, Functional> funcs_;
  std::vector<UseBlock> blocks_;
  std::map<std::string, std::vector<int>> blocks_by_owner_;

  std::vector<Controller> controllers_;
  std::vector<Link> links_;
  std::map<std::pair<int, int>, std::shared_ptr<DataPkg>> data_slots_;
  std::map<int, Point> tp_, dw_;
  std::set<int> d_active_;
  std::map<std::pair<int, int>, int> red_overlay_;  // -> granter controller node
  std::map<int, int> last_visit_stage_;             // R-node -> stage

  // fresh number lines: thresholds and witnesses live below the block
  // band, use blocks and Theta-uses above it. Thresholds draw from their
  // own slow line so they stay below later computation lengths.
  static constexpr Point kBlockBand = Point{1} << 21;
  Point next_tp_ = 4;
  Point next_dw_ = 8;
  Point next_big_ = kBlockBand;

  // per-set write log: (tick, point) appended on every change, plus a
  // tick-stamped per-point value history for content reconstruction
  std::vector<std::vector<std::pair<std::uint64_t, Point>>> writes_;
  std::vector<std::map<Point, std::vector<std::pair<std::uint64_t, int>>>>
      point_hist_;
  std::uint64_t tick_ = 1;

  // per-stage state
  int stage_ = 0;
  int sub_ = 0;
  std::vector<std::pair<int, int>> visited_;  // (node, taken outcome idx)
  std::vector<std::pair<int, Point>> stage_block_enums_;  // (node, block lo)
  std::vector<std::pair<int, Point>> stage_restores_;
  struct RestoreCheck {
    int node;
    const DataPkg* leaf;
    std::uint64_t tick;
  };
  std::vector<RestoreCheck> restore_checks_;
  std::vector<std::vector<signed char>> writes_actors_;
  std::uint64_t block_cap_ = 256;

  // theta
  std::map<Point, Point> theta_use_;

  SimSummary summary_;
  std::vector<TraceEvent> trace_;
  Fnv64 trace_hash_;

  std::vector<Point> u_invalid_;  // witness per U, -1 while valid
  int omega_invalid_level_ = -1;
};

SimConfig config_from_json(const Json& j, const std::string& base_dir);
Json summary_to_json(const SimSummary& s);

}  // namespace latpri
