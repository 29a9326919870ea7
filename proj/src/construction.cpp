#include "latpri/construction.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

namespace latpri {

namespace {

std::vector<Elem> ji_tl_order(const IntervalTree& t) {
  std::vector<Elem> out;
  for (const auto& sigma : t.internal_sites()) {
    Elem c = t.c_label(sigma);
    if (t.ji_site().at(c) == sigma) out.push_back(c);
  }
  return out;
}

}  // namespace

// All engine logic lives here; Simulator exposes the surface.
struct SimOps {
  enum Actor { AScript = 0, AG = 1, ARestore = 2, AVisit = 3 };

  static SetHistory& hist(Simulator& S, int sid) {
    int nb = static_cast<int>(S.built_.size());
    if (sid < nb) return S.built_[sid]->history();
    return S.approx_[sid - nb]->history();
  }
  static const SetHistory& chist(const Simulator& S, int sid) {
    int nb = static_cast<int>(S.built_.size());
    if (sid < nb) return S.built_[sid]->history();
    return S.approx_[sid - nb]->history();
  }

  static std::string set_name(const Simulator& S, int sid) {
    return chist(S, sid).id();
  }

  static void trace(Simulator& S, const std::string& ev,
                    std::initializer_list<std::pair<const char*, long long>> fields,
                    const std::string& extra = "") {
    std::ostringstream os;
    os << "{\"s\":" << S.stage_ << ",\"sub\":" << S.sub_++ << ",\"ev\":\"" << ev
       << "\"";
    for (auto& [k, v] : fields) os << ",\"" << k << "\":" << v;
    if (!extra.empty()) os << "," << extra;
    os << "}";
    std::string line = os.str();
    S.trace_hash_.feed(line);
    S.trace_hash_.feed_u64(0x0a);
    S.summary_.event_counts[ev]++;
    if (S.cfg_.record_trace) S.trace_.push_back({S.stage_, S.sub_ - 1, line});
  }

  [[noreturn]] static void violate(Simulator& S, const std::string& what) {
    S.summary_.invariant_ok = false;
    S.summary_.violation = "stage " + std::to_string(S.stage_) + ": " + what;
    throw Error(ErrorKind::InvariantViolation, S.summary_.violation);
  }

  // ---- restraint gate -------------------------------------------------

  struct WriteCtx {
    Actor actor = AVisit;
    int acting_controller = -1;  // restore: node of the acting controller
    int g_target = -1;           // G chi-write: node of beta_i
  };

  static bool e_restrained_at(const Simulator& S, Point p, int except_ctrl) {
    for (const auto& ct : S.controllers_)
      if (ct.alive && ct.node != except_ctrl && ct.e_restraint > p) return true;
    return false;
  }

  static void check_gate(Simulator& S, int sid, Point p, const WriteCtx& ctx) {
    for (auto& ct : S.controllers_) {
      if (!ct.alive) continue;
      if (ctx.actor == ARestore && ct.node == ctx.acting_controller) continue;
      bool blocked = false;
      if (sid == 0) {
        blocked = p < ct.e_restraint;
      } else if (sid <= S.n_c_) {
        Elem cc = c_of_set(S, sid);
        blocked = cc != ct.c && p < ct.s_ctr;
      }
      if (!blocked) continue;
      if (ctx.actor == AG && ctx.g_target >= 0) {
        // targeting a higher-priority controller's C-set; lower ones get
        // initialized through the noise they now see
        int ce_t = S.tree_->outcome_index(ctx.g_target, OutcomeKind::Ctr);
        int ce_b = S.tree_->outcome_index(ct.node, OutcomeKind::Ctr);
        if (S.tree_->priority_cmp_edges(ctx.g_target, ce_t, ct.node, ce_b) < 0)
          continue;
      }
      if (ctx.actor == ARestore) {
        int ce_a =
            S.tree_->outcome_index(ctx.acting_controller, OutcomeKind::Ctr);
        int ce_b = S.tree_->outcome_index(ct.node, OutcomeKind::Ctr);
        if (S.tree_->priority_cmp_edges(ctx.acting_controller, ce_a, ct.node,
                                        ce_b) < 0)
          continue;
      }
      violate(S, "restrained write: " + set_name(S, sid) + "(" +
                     std::to_string(p) + ") under controller at node " +
                     std::to_string(ct.node));
    }
  }

  static Elem c_of_set(const Simulator& S, int sid) {
    auto order = ji_tl_order(*S.itree_);
    return order[sid - 1];
  }

  static void write_built(Simulator& S, int sid, Point p, int v, const WriteCtx& ctx) {
    if (chist(S, sid).value(p) == v) return;
    check_gate(S, sid, p, ctx);
    if (v)
      S.built_[sid]->enumerate(p);
    else
      S.built_[sid]->extract(p);
    std::uint64_t t = S.tick_++;
    S.writes_[sid].emplace_back(t, p);
    S.writes_actors_[sid].push_back(static_cast<signed char>(ctx.actor));
    S.point_hist_[sid][p].emplace_back(t, v);
    trace(S, v ? "point_enum" : "point_extract",
          {{"set", sid}, {"x", p}, {"actor", ctx.actor}});
  }

  // ---- fresh numbers ---------------------------------------------------

  static Point fresh_tp(Simulator& S) {
    // a slow dedicated counter: thresholds must stay below the
    // computation lengths that later data collects
    Point v = S.next_tp_ + 1;
    if (v >= Simulator::kBlockBand)
      violate(S, "threshold line ran into the block band");
    S.next_tp_ = v;
    return v;
  }

  static Point fresh_dw(Simulator& S, Point above) {
    Point v = std::max({S.next_dw_, static_cast<Point>(S.stage_), above}) + 1;
    if (v >= Simulator::kBlockBand)
      violate(S, "witness line ran into the block band");
    S.next_dw_ = v;
    return v;
  }

  static Point fresh_big(Simulator& S) {
    Point v = S.next_big_ + 2;
    S.next_big_ = v;
    return v;
  }

  static int fresh_block(Simulator& S, const std::string& owner, Point input,
                         std::vector<int> crosses) {
    Point lo = fresh_big(S) + 1;
    Point hi = lo + S.block_cap_;
    S.next_big_ = hi + 2;
    UseBlock b;
    b.id = static_cast<int>(S.blocks_.size());
    b.lo = lo;
    b.hi = hi;
    b.owner = owner;
    b.input = input;
    b.created_stage = S.stage_;
    b.crosses = std::move(crosses);
    S.blocks_.push_back(b);
    S.blocks_by_owner_[owner].push_back(b.id);
    trace(S, "block_created",
          {{"id", b.id}, {"lo", lo}, {"hi", hi}, {"x", input}},
          "\"owner\":\"" + owner + "\"");
    return b.id;
  }

  static Point unused_point(Simulator& S, UseBlock& b, int sid) {
    Point off = b.next_unused[sid]++;
    if (b.lo + off >= b.hi)
      violate(S, "use block " + std::to_string(b.id) + " capacity exhausted");
    return b.lo + off;
  }

  // ---- functionals ------------------------------------------------------

  static Functional& get_func(Simulator& S, const FuncInstance& fi) {
    std::string key = fi.key();
    auto it = S.funcs_.find(key);
    if (it != S.funcs_.end()) return it->second;
    Functional f;
    f.inst = fi;
    f.components.push_back(0);  // E
    if (fi.spec.kind == FunctionalSpec::Gamma) {
      f.components.push_back(set_u_id(S, fi.level));
      f.target_set = set_c_id(S, fi.spec.target_c);
    } else {
      for (Elem d : fi.spec.oracle_c) f.components.push_back(set_c_id(S, d));
      f.target_set = set_u_id(S, fi.level);
    }
    return S.funcs_.emplace(key, std::move(f)).first->second;
  }

  static int set_c_id(const Simulator& S, Elem c) {
    auto order = ji_tl_order(*S.itree_);
    for (std::size_t i = 0; i < order.size(); ++i)
      if (order[i] == c) return static_cast<int>(i) + 1;
    throw Error(ErrorKind::NotJoinIrreducible, "no C-set for element");
  }
  static int set_u_id(const Simulator& S, int i) { return 1 + S.n_c_ + i; }
  static int set_k_id(const Simulator& S) { return 1 + S.n_c_ + S.cfg_.u_sets; }

  static std::vector<Point> snapshot_ones(Simulator& S, int sid, Point below) {
    return chist(S, sid).ones_below(below);
  }

  static int value_at_tick(const Simulator& S, int sid, Point p, std::uint64_t t) {
    auto it = S.point_hist_[sid].find(p);
    if (it == S.point_hist_[sid].end()) return 0;
    const auto& v = it->second;
    auto hit = std::upper_bound(
        v.begin(), v.end(), std::make_pair(t, 2),
        [](const auto& a, const auto& b) { return a.first < b.first; });
    if (hit == v.begin()) return 0;
    return std::prev(hit)->second;
  }

  static bool axiom_matches(Simulator& S, const Functional& F, const Axiom& ax) {
    int n_sets = static_cast<int>(S.writes_.size());
    for (std::size_t ci = 0; ci < F.components.size(); ++ci) {
      int sid = F.components[ci];
      const auto& w = S.writes_[sid];
      for (auto it = w.rbegin(); it != w.rend() && it->first > ax.checked_tick;
           ++it) {
        Point p = it->second;
        if (p >= ax.use) continue;
        int now = chist(S, sid).value(p);
        int orig = value_at_tick(S, sid, p, ax.created_tick);
        Point key = p * n_sets + sid;
        if (now != orig)
          ax.dirty.insert(key);
        else
          ax.dirty.erase(key);
      }
    }
    ax.checked_tick = S.tick_;
    return ax.dirty.empty();
  }

  // index of the matching axiom for x, or -1
  static int eval_func(Simulator& S, Functional& F, Point x) {
    auto it = F.axioms_by_input.find(x);
    if (it == F.axioms_by_input.end()) return -1;
    for (auto ri = it->second.rbegin(); ri != it->second.rend(); ++ri)
      if (axiom_matches(S, F, F.axioms[*ri])) return *ri;
    return -1;
  }

  static void add_axiom(Simulator& S, Functional& F, Point x, int value, Point use,
                        int block) {
    // the axiom consistency rule: a definition may only be added while no
    // axiom applies, which keeps the set pairwise incomparable
    if (eval_func(S, F, x) >= 0)
      violate(S, "axiom consistency at " + F.inst.key() + "(" +
                     std::to_string(x) + "): definition while defined");
    Axiom ax;
    ax.x = x;
    ax.value = value;
    ax.use = use;
    ax.block = block;
    ax.created_tick = S.tick_++;
    ax.checked_tick = ax.created_tick;
    F.axioms_by_input[x].push_back(static_cast<int>(F.axioms.size()));
    F.axioms.push_back(std::move(ax));
  }

  static void define_value(Simulator& S, Functional& F, Point x, int block_id) {
    UseBlock& b = S.blocks_[block_id];
    int value = chist(S, F.target_set).value(x);
    add_axiom(S, F, x, value, b.hi, block_id);
  }

  // ---- correcting strategies -------------------------------------------

  static bool block_e_restrained(const Simulator& S, const UseBlock& b) {
    for (const auto& ct : S.controllers_)
      if (ct.alive && b.lo < ct.e_restraint) return true;
    return false;
  }

  // a crossed C-set through which the point can be written now
  static int free_cross_c(Simulator& S, UseBlock& b) {
    for (int sid : b.crosses) {
      if (sid == 0) continue;
      Point p = b.lo + b.next_unused[sid];
      bool blocked = false;
      for (const auto& ct : S.controllers_) {
        if (!ct.alive) continue;
        Elem cc = c_of_set(S, sid);
        if (cc != ct.c && p < ct.s_ctr) blocked = true;
      }
      if (!blocked) return sid;
    }
    return -1;
  }

  static void enum_block_point(Simulator& S, UseBlock& b, int sid, int node,
                               bool killing) {
    Point p = unused_point(S, b, sid);
    write_built(S, sid, p, 1, {AVisit, -1, -1});
    S.stage_block_enums_.emplace_back(node, b.lo);
    trace(S, killing ? "killing_point" : "correcting_point",
          {{"block", b.id}, {"set", sid}, {"x", p}, {"node", node}});
  }

  static void maintain_instance(Simulator& S, const FuncInstance& fi, int node) {
    Functional& F = get_func(S, fi);
    bool is_delta = fi.spec.kind == FunctionalSpec::Delta;
    for (Point x = 0; x <= S.stage_; ++x) {
      int axi = eval_func(S, F, x);
      bool redefine_needed = false;
      if (axi >= 0) {
        Axiom& ax = F.axioms[axi];
        int want = chist(S, F.target_set).value(x);
        if (ax.value == want) continue;  // correct
        UseBlock& b = S.blocks_[ax.block];
        bool restr = block_e_restrained(S, b);
        if (!is_delta) {
          if (restr)
            violate(S, "E-restrained Gamma block incorrect at " + F.inst.key() +
                           "(" + std::to_string(x) + ")");
          if (b.killed()) {
            enum_block_point(S, b, 0, node, true);
            redefine_needed = true;
          } else {
            enum_block_point(S, b, 0, node, false);
            define_value(S, F, x, b.id);
            continue;
          }
        } else {
          if (b.killed() && !restr) {
            enum_block_point(S, b, 0, node, true);
            redefine_needed = true;
          } else if (b.killed() && restr) {
            int sid = free_cross_c(S, b);
            if (sid < 0)
              violate(S, "no free C-set for killed Delta block " + F.inst.key());
            enum_block_point(S, b, sid, node, true);
            b.perm_killed = true;
            trace(S, "perm_kill", {{"block", b.id}});
            redefine_needed = true;
          } else if (!b.killed() && !restr) {
            enum_block_point(S, b, 0, node, false);
            define_value(S, F, x, b.id);
            continue;
          } else {
            int sid = free_cross_c(S, b);
            if (sid < 0)
              violate(S, "no free C-set for Delta correction " + F.inst.key());
            enum_block_point(S, b, sid, node, false);
            define_value(S, F, x, b.id);
            continue;
          }
        }
      }
      if (axi < 0 || redefine_needed) {
        // case 3: define with the unique non-killed block or a fresh one
        int live_block = -1;
        for (int bid : F.blocks_by_input[x]) {
          if (!S.blocks_[bid].killed()) {
            if (live_block != -1)
              violate(S, "two live use blocks for " + F.inst.key() + "(" +
                             std::to_string(x) + ")");
            live_block = bid;
          }
        }
        if (live_block == -1) {
          live_block = fresh_block(S, F.inst.key(), x, F.components);
          F.blocks_by_input[x].push_back(live_block);
        }
        define_value(S, F, x, live_block);
      }
    }
  }

  static void kill_instance(Simulator& S, const FuncInstance& fi, int node,
                            Point from) {
    auto it = S.funcs_.find(fi.key());
    if (it == S.funcs_.end()) return;
    Functional& F = it->second;
    for (Point x = from; x <= S.stage_; ++x) {
      int axi = eval_func(S, F, x);
      if (axi < 0) continue;
      UseBlock& b = S.blocks_[F.axioms[axi].block];
      if (b.killed()) continue;
      b.killed_stage = S.stage_;
      b.killer_node = node;
      trace(S, "kill", {{"block", b.id}, {"node", node}, {"x", x}});
      if (!block_e_restrained(S, b)) {
        enum_block_point(S, b, 0, node, true);
      } else {
        int sid = fi.spec.kind == FunctionalSpec::Delta ? free_cross_c(S, b) : -1;
        if (sid >= 0) {
          enum_block_point(S, b, sid, node, true);
          b.perm_killed = true;
          trace(S, "perm_kill", {{"block", b.id}});
        } else {
          trace(S, "kill_restrained", {{"block", b.id}});
        }
      }
    }
  }

  static void cancel_instance(Simulator& S, const FuncInstance& fi) {
    auto it = S.funcs_.find(fi.key());
    if (it == S.funcs_.end()) return;
    for (auto& [x, bids] : it->second.blocks_by_input)
      for (int bid : bids) S.blocks_[bid].perm_killed = true;
    S.funcs_.erase(it);
  }

  // ---- initialization ---------------------------------------------------

  static Controller* ctrl_at(Simulator& S, int node) {
    for (auto& ct : S.controllers_)
      if (ct.alive && ct.node == node) return &ct;
    return nullptr;
  }

  static void revoke_grants(Simulator& S, Controller& ct) {
    if (ct.granted_d_node >= 0) {
      S.d_active_.erase(ct.granted_d_node);
      ct.granted_d_node = -1;
    }
    if (ct.granted_red_node >= 0) {
      S.red_overlay_.erase({ct.granted_red_node, ct.granted_red_level});
      trace(S, "green", {{"node", ct.granted_red_node}, {"level", ct.granted_red_level}});
      ct.granted_red_node = -1;
      ct.granted_red_level = -1;
    }
    if (ct.granted_link >= 0) {
      if (S.links_[ct.granted_link].alive) {
        S.links_[ct.granted_link].alive = false;
        trace(S, "link_destroyed", {{"link", ct.granted_link}});
      }
      ct.granted_link = -1;
    }
  }

  static void init_ctr_state(Simulator& S, Controller& ct) {
    revoke_grants(S, ct);
    ct.alive = false;
    trace(S, "initialized_ctr", {{"node", ct.node}});
    // links sourced from this controller's data are stale now
    for (auto& lk : S.links_)
      if (lk.alive && std::find(lk.sources.begin(), lk.sources.end(), ct.node) !=
                          lk.sources.end()) {
        lk.alive = false;
        trace(S, "link_destroyed", {{"link", lk.id}});
      }
  }

  static void init_node(Simulator& S, int id) {
    const StrategyNode& n = S.tree_->node(id);
    if (n.is_s) {
      for (auto& fi : S.tree_->mt_s(id)) cancel_instance(S, fi);
    } else {
      S.tp_.erase(id);
      S.dw_.erase(id);
      S.d_active_.erase(id);
      S.last_visit_stage_.erase(id);
      for (int i = 0; i < S.tree_->levels(id); ++i) {
        auto d = S.tree_->mt_r(id, i);
        if (d) cancel_instance(S, *d);
        S.data_slots_.erase({id, i});
      }
      S.data_slots_.erase({id, S.tree_->levels(id)});
      if (Controller* ct = ctrl_at(S, id)) init_ctr_state(S, *ct);
    }
  }

  static void init_subtree(Simulator& S, int id) {
    init_node(S, id);
    const StrategyNode& n = S.tree_->node(id);
    for (const auto& o : n.outcomes)
      if (o.child >= 0) init_subtree(S, o.child);
  }

  // initialize everything strictly right of the edge (node, oi)
  static void init_right_of_edge(Simulator& S, int node, int oi) {
    const StrategyNode& n = S.tree_->node(node);
    for (std::size_t j = oi + 1; j < n.outcomes.size(); ++j) {
      const Outcome& o = n.outcomes[j];
      switch (o.kind) {
        case OutcomeKind::W: S.dw_.erase(node); break;
        case OutcomeKind::D: S.d_active_.erase(node); break;
        case OutcomeKind::Ctr:
          if (Controller* ct = ctrl_at(S, node)) init_ctr_state(S, *ct);
          break;
        case OutcomeKind::U: {
          // cancel the Delta built along the outcome; the node's own data
          // packages survive until the node itself is initialized
          auto d = S.tree_->mt_r(node, o.level);
          if (d) cancel_instance(S, *d);
          break;
        }
        default: break;
      }
      if (o.child >= 0) init_subtree(S, o.child);
    }
  }

  static void init_right_of_path(Simulator& S, const std::vector<std::pair<int, int>>& edges) {
    for (auto [node, oi] : edges) init_right_of_edge(S, node, oi);
  }

  static std::vector<std::pair<int, int>> path_edges_to(Simulator& S, int node,
                                                        int outcome) {
    std::vector<std::pair<int, int>> out;
    const auto& path = S.tree_->node(node).path;
    int cur = 0;
    for (int oi : path) {
      out.emplace_back(cur, oi);
      cur = S.tree_->node(cur).outcomes[oi].child;
    }
    out.emplace_back(node, outcome);
    return out;
  }

  // ---- data packages ----------------------------------------------------

  static void collect_leaves(const DataPkg* p, std::vector<const DataPkg*>& out) {
    if (p->leaf()) {
      out.push_back(p);
      return;
    }
    collect_leaves(p->left.get(), out);
    collect_leaves(p->right.get(), out);
  }

  static Point max_leaf_y(const DataPkg* p) {
    std::vector<const DataPkg*> ls;
    collect_leaves(p, ls);
    Point m = -1;
    for (auto* l : ls) m = std::max(m, l->y);
    return m;
  }

  static const DataPkg* leaf_with_y(const DataPkg* p, Point y) {
    std::vector<const DataPkg*> ls;
    collect_leaves(p, ls);
    for (auto* l : ls)
      if (l->y == y) return l;
    return nullptr;
  }

  static std::shared_ptr<DataPkg> combine(Simulator& S, std::shared_ptr<DataPkg> a,
                                          std::shared_ptr<DataPkg> b, int strong,
                                          int level) {
    if (!a || !b) violate(S, "combine: missing data package");
    if (a->level != level + 1 || b->level != level + 1)
      violate(S, "combine: level mismatch");
    std::vector<const DataPkg*> la, lb;
    collect_leaves(a.get(), la);
    collect_leaves(b.get(), lb);
    for (auto* x : la)
      for (auto* y : lb)
        if (x->node == y->node) violate(S, "combine: node overlap");
    const Lattice& l = S.lat_;
    if (strong) {
      if (a->f != b->f)
        violate(S, "strong combine requires equal types (pigeonhole)");
    } else {
      if (!l.leq(a->f, b->f)) violate(S, "weak combine: f(left) <= f(right) fails");
    }
    auto p = std::make_shared<DataPkg>();
    p->level = level;
    p->node = b->node;
    p->f = b->f;
    p->g = strong;
    p->ref_stage = S.stage_;
    p->left = a;
    p->right = b;
    trace(S, "data_built",
          {{"node", p->node}, {"level", level}, {"strong", strong}});
    return p;
  }

  // ---- controller machinery ----------------------------------------------

  struct PendingCond {
    int level;
    bool same_type;
    Point ref_len;  // -1: resolve to the entry's own adjusted y
    int ref_stage;
  };

  static void build_frontier(Simulator& S, Elem c, const DataPkg* pkg,
                             std::vector<PendingCond> conds,
                             std::vector<CtrEntry>& out) {
    if (pkg->leaf()) {
      CtrEntry e;
      e.node = pkg->node;
      e.f = pkg->f;
      e.critical = false;
      e.y_adj = pkg->y;
      e.pkg = pkg;
      for (auto& pc : conds)
        e.conds.push_back({pc.level, pc.same_type,
                           pc.ref_len < 0 ? pkg->y : pc.ref_len, pc.ref_stage});
      out.push_back(std::move(e));
      return;
    }
    int lvl = pkg->level;
    Point ref_right = max_leaf_y(pkg->right.get());
    const DataPkg* L = pkg->left.get();
    bool critical = L->f != c && S.lat_.lt(L->f, c) && pkg->f == c;
    if (critical) {
      CtrEntry e;
      e.node = L->node;
      e.f = L->f;
      e.critical = true;
      e.level = lvl;
      int parent_s = S.tree_->node(e.node).parent;
      e.b = S.tree_->seq_copy(parent_s, lvl);
      e.y_adj = max_leaf_y(L);
      e.pkg = L;
      for (auto& pc : conds) {
        if (!pc.same_type) {
          e.conds.push_back({pc.level, false, pc.ref_len, pc.ref_stage});
        } else {
          e.conds.push_back({pc.level, true,
                             pc.ref_len < 0 ? e.y_adj : pc.ref_len, pc.ref_stage});
        }
      }
      e.conds.push_back({lvl, false, ref_right, pkg->ref_stage});
      out.push_back(std::move(e));
    } else {
      auto cl = conds;
      cl.push_back({lvl, false, ref_right, pkg->ref_stage});
      build_frontier(S, c, L, std::move(cl), out);
    }
    auto cr = conds;
    cr.push_back({lvl, true, -1, pkg->ref_stage});
    build_frontier(S, c, pkg->right.get(), std::move(cr), out);
  }

  static bool cond_holds(Simulator& S, const CtrEntry::Cond& cd) {
    const SetHistory& h = chist(S, set_u_id(S, cd.level));
    bool same = h.same(cd.ref_len, cd.ref_stage, S.stage_);
    return cd.same_type ? same : !same;
  }

  static int evaluate_decision(Simulator& S, Controller& ct) {
    int best = -1;
    for (std::size_t i = 0; i < ct.frontier.size(); ++i) {
      bool all = true;
      for (auto& cd : ct.frontier[i].conds)
        if (!cond_holds(S, cd)) all = false;
      if (all) best = static_cast<int>(i);  // rightmost = subset-longest
    }
    if (best < 0)
      violate(S, "decision undefined for controller at node " +
                     std::to_string(ct.node));
    return best;
  }

  static void restore(Simulator& S, Controller& ct, const CtrEntry& e) {
    const DataPkg* leaf = leaf_with_y(e.pkg, e.y_adj);
    if (!leaf) violate(S, "restore: no leaf carries the adjusted length");
    Point y = e.y_adj;
    WriteCtx ctx{ARestore, ct.node, -1};
    for (auto& b : S.blocks_) {
      if (b.lo > y) break;
      if (b.hi > y + 1) continue;
      for (std::size_t ci = 0; ci < leaf->frozen_sets.size(); ++ci) {
        int sid = leaf->frozen_sets[ci];
        if (std::find(b.crosses.begin(), b.crosses.end(), sid) == b.crosses.end())
          continue;
        const auto& ones = leaf->frozen_ones[ci];
        for (Point p = b.lo; p < b.hi; ++p) {
          bool want = std::binary_search(ones.begin(), ones.end(), p);
          bool cur = chist(S, sid).value(p) == 1;
          if (want == cur) continue;
          if (sid == 0) {
            if (want)
              violate(S, "restore would re-enumerate an extracted E-point");
            write_built(S, 0, p, 0, ctx);
          } else {
            if (!want)
              violate(S, "restore would extract from a c.e. set");
            write_built(S, sid, p, 1, ctx);
          }
        }
      }
    }
    S.stage_restores_.emplace_back(ct.node, y);
    S.restore_checks_.push_back({ct.node, leaf, S.tick_});
    trace(S, "restore", {{"node", e.node}, {"y", y}});
  }

  static bool strong_env_compatible(Simulator& S, int a, int b, int i) {
    // a strictly above b; env equality plus GREEN Type II outcomes at
    // levels above i strictly between them
    if (S.tree_->env_lt(a, i) != S.tree_->env_lt(b, i)) return false;
    for (int x = b; x != -1; x = S.tree_->node(x).parent) {
      int par = S.tree_->node(x).parent;
      if (par == -1) break;
      const StrategyNode& pn = S.tree_->node(par);
      if (pn.is_s) continue;
      const Outcome& o = pn.outcomes[S.tree_->node(x).parent_outcome];
      if (o.kind == OutcomeKind::U && o.level > i && o.utype == UType::TypeII) {
        bool red = o.base_red || S.red_overlay_.count({par, o.level});
        bool inside = false;
        // require a <= pn path-wise (the outcome lies between a and b)
        for (int w = par; w != -1; w = S.tree_->node(w).parent)
          if (w == a) inside = true;
        if (inside && red) return false;
      }
      if (par == a) break;
    }
    return true;
  }

  static void strong_data_and_link(Simulator& S, Controller& ct, const CtrEntry& e) {
    int i = e.level;
    struct Cand {
      int node;
      Elem f;
      int b;
      const DataPkg* pkg;
      int ctrl_node;
    };
    std::vector<Cand> cands;
    for (auto& other : S.controllers_) {
      if (!other.alive || other.decision < 0) continue;
      const CtrEntry& de = other.frontier[other.decision];
      if (!de.critical || de.level != i) continue;
      cands.push_back({de.node, de.f, de.b, de.pkg, other.node});
    }
    // pick a pair a strictly above b, same type, strong-env compatible,
    // b subset-maximal, then lowest c index, then path order
    auto ji = ji_tl_order(*S.itree_);
    auto cindex = [&](Elem f) {
      for (std::size_t k = 0; k < ji.size(); ++k)
        if (ji[k] == f) return static_cast<int>(k);
      return -1;
    };
    int best_a = -1, best_b = -1;
    for (std::size_t x = 0; x < cands.size(); ++x)
      for (std::size_t yn = 0; yn < cands.size(); ++yn) {
        if (x == yn) continue;
        const Cand& A = cands[x];
        const Cand& B = cands[yn];
        if (A.f != B.f) continue;
        if (S.tree_->priority_cmp(A.node, B.node) != -1) continue;
        // A must be a strict ancestor of B
        bool anc = false;
        for (int w = B.node; w != -1; w = S.tree_->node(w).parent)
          if (w == A.node && w != B.node) anc = true;
        if (!anc) continue;
        if (!strong_env_compatible(S, A.node, B.node, i)) continue;
        if (best_b < 0) {
          best_a = static_cast<int>(x);
          best_b = static_cast<int>(yn);
          continue;
        }
        const Cand& curB = cands[best_b];
        int depth_new = S.tree_->node(B.node).depth;
        int depth_cur = S.tree_->node(curB.node).depth;
        bool better = false;
        if (depth_new != depth_cur)
          better = depth_new > depth_cur;
        else if (cindex(B.f) != cindex(curB.f))
          better = cindex(B.f) < cindex(curB.f);
        else
          better = S.tree_->priority_cmp(B.node, curB.node) < 0;
        if (better) {
          best_a = static_cast<int>(x);
          best_b = static_cast<int>(yn);
        }
      }
    if (best_b < 0)
      violate(S, "no strong chain pair for critical U^0 problem at node " +
                     std::to_string(e.node));
    const Cand& A = cands[best_a];
    const Cand& B = cands[best_b];
    auto pa = std::make_shared<DataPkg>(*A.pkg);
    auto pb = std::make_shared<DataPkg>(*B.pkg);
    auto pkg = combine(S, pa, pb, 1, i);
    Link lk;
    lk.id = static_cast<int>(S.links_.size());
    lk.start_snode = S.tree_->env_lt(B.node, i);
    lk.target = B.node;
    lk.level = i;
    if (i > 0) {
      lk.target_kind = OutcomeKind::U;
      lk.target_level = i - 1;
    } else {
      lk.target_kind = OutcomeKind::Ctr;
      lk.target_level = -1;
    }
    lk.pkg = pkg;
    lk.establisher = ct.node;
    lk.sources = {A.ctrl_node, B.ctrl_node};
    S.links_.push_back(lk);
    ct.granted_link = lk.id;
    trace(S, "link_established",
          {{"link", lk.id}, {"start", lk.start_snode}, {"target", lk.target},
           {"level", i}});
  }

  static std::vector<int> relevant_sets(Simulator& S, int node) {
    std::vector<int> out{0};
    for (int i = 0; i < S.n_c_; ++i) out.push_back(1 + i);
    int k = S.tree_->node(node).is_s
                ? static_cast<int>(S.tree_->node(node).seq.size())
                : S.tree_->levels(node);
    for (int i = 0; i < k; ++i) out.push_back(set_u_id(S, i));
    out.push_back(set_k_id(S));
    return out;
  }

  static bool writes_below_since(Simulator& S, int sid, Point bound,
                                 std::uint64_t tick) {
    const auto& w = S.writes_[sid];
    for (auto it = w.rbegin(); it != w.rend() && it->first > tick; ++it)
      if (it->second <= bound) return true;
    return false;
  }

  static void controller_strategy(Simulator& S) {
    // gc: links whose establisher died
    for (auto& lk : S.links_)
      if (lk.alive && !ctrl_at(S, lk.establisher)) {
        lk.alive = false;
        trace(S, "link_destroyed", {{"link", lk.id}});
      }
    // decision totality is an every-stage claim
    for (auto& ct : S.controllers_)
      if (ct.alive && S.stage_ > ct.s_ctr) {
        evaluate_decision(S, ct);
        S.summary_.invariant_checks++;
      }
    // highest-priority noisy controller acts
    Controller* act = nullptr;
    for (auto& ct : S.controllers_) {
      if (!ct.alive || S.stage_ <= ct.s_ctr) continue;
      bool noisy = false;
      for (int sid : relevant_sets(S, ct.node))
        if (writes_below_since(S, sid, ct.s_ctr, ct.last_check_tick)) noisy = true;
      if (!noisy) continue;
      if (!act) {
        act = &ct;
        continue;
      }
      int ca = S.tree_->outcome_index(ct.node, OutcomeKind::Ctr);
      int cb = S.tree_->outcome_index(act->node, OutcomeKind::Ctr);
      if (S.tree_->priority_cmp_edges(ct.node, ca, act->node, cb) < 0) act = &ct;
    }
    if (!act) return;
    Controller& ct = *act;
    ct.noise_events++;
    trace(S, "noise", {{"node", ct.node}});
    init_right_of_path(S, path_edges_to(S, ct.node,
                                        S.tree_->outcome_index(ct.node, OutcomeKind::Ctr)));
    bool threats = false;
    auto tp_it = S.tp_.find(ct.node);
    Point tpv = tp_it == S.tp_.end() ? -1 : tp_it->second;
    if (tpv >= 0)
      for (int sid : relevant_sets(S, ct.node))
        if (writes_below_since(S, sid, tpv, ct.last_check_tick)) threats = true;
    ct.last_check_tick = S.tick_;
    if (threats) {
      trace(S, "threats", {{"node", ct.node}});
      init_ctr_state(S, ct);
      return;
    }
    int d = evaluate_decision(S, ct);
    if (d == ct.decision) {
      // re-assert current grants; nothing else to do
      if (ct.granted_d_node >= 0) S.d_active_.insert(ct.granted_d_node);
      if (ct.granted_red_node >= 0)
        S.red_overlay_[{ct.granted_red_node, ct.granted_red_level}] = ct.node;
      return;
    }
    ct.decision_changes++;
    revoke_grants(S, ct);
    ct.decision = d;
    const CtrEntry& e = ct.frontier[d];
    trace(S, "decision_change", {{"node", ct.node}, {"to", e.node}});
    ct.e_restraint = e.y_adj + 1;
    restore(S, ct, e);
    grant_decision(S, ct);
  }

  static void grant_decision(Simulator& S, Controller& ct) {
    const CtrEntry& e = ct.frontier[ct.decision];
    if (!e.critical) {
      S.d_active_.insert(e.node);
      ct.granted_d_node = e.node;
      trace(S, "d_activated", {{"node", e.node}});
    } else if (e.b > 0) {
      int sharp = S.tree_->beta_sharp(e.node, e.level);
      if (sharp < 0) violate(S, "critical U^b problem with undefined sharp");
      S.red_overlay_[{sharp, e.level}] = ct.node;
      ct.granted_red_node = sharp;
      ct.granted_red_level = e.level;
      trace(S, "red", {{"node", sharp}, {"level", e.level}});
    } else {
      strong_data_and_link(S, ct, e);
    }
  }

  // ---- G strategy ---------------------------------------------------------

  static Functional& theta(Simulator& S) {
    auto it = S.funcs_.find("Theta");
    if (it != S.funcs_.end()) return it->second;
    Functional f;
    FunctionalSpec spec;
    spec.kind = FunctionalSpec::Gamma;
    spec.site = "theta";
    f.inst = {0, 0, spec};
    f.components.push_back(0);
    for (int i = 0; i < S.n_c_; ++i) f.components.push_back(1 + i);
    f.target_set = set_k_id(S);
    return S.funcs_.emplace("Theta", std::move(f)).first->second;
  }

  static void g_strategy(Simulator& S) {
    Functional& Th = theta(S);
    for (Point x = 0; x <= S.stage_; ++x) {
      if (!S.theta_use_.count(x)) {
        S.theta_use_[x] = fresh_big(S);
        int kv = chist(S, set_k_id(S)).value(x);
        add_axiom(S, Th, x, kv, S.theta_use_[x] + 1, -1);
        trace(S, "theta_defined", {{"x", x}, {"use", S.theta_use_[x]}});
        continue;
      }
      int axi = eval_func(S, Th, x);
      int kv = chist(S, set_k_id(S)).value(x);
      if (axi >= 0 && Th.axioms[axi].value == kv) continue;
      if (axi >= 0) {
        // incorrect: enumerate theta(x) into chi and then redefine
        Point a = S.theta_use_[x];
        int target = 0;
        int target_node = -1;
        for (auto& ct : S.controllers_) {
          if (!ct.alive || a >= ct.s_ctr) continue;
          if (target_node < 0) {
            target_node = ct.node;
            target = set_c_id(S, ct.c);
            continue;
          }
          int ca = S.tree_->outcome_index(ct.node, OutcomeKind::Ctr);
          int cb = S.tree_->outcome_index(target_node, OutcomeKind::Ctr);
          if (S.tree_->priority_cmp_edges(ct.node, ca, target_node, cb) < 0) {
            target_node = ct.node;
            target = set_c_id(S, ct.c);
          }
        }
        write_built(S, target, a, 1, {AG, -1, target_node});
        trace(S, "theta_corrected", {{"x", x}, {"set", target}});
      }
      add_axiom(S, Th, x, kv, S.theta_use_[x] + 1, -1);
    }
  }

  // ---- the computation search ----------------------------------------------

  static PsiTable psi_of(const Simulator& S, int node) {
    auto ti = S.cfg_.psi_tables.find(S.tree_->node(node).psi);
    return ti != S.cfg_.psi_tables.end() ? ti->second : S.cfg_.psi_default;
  }

  static bool find_computation(Simulator& S, int node) {
    const StrategyNode& n = S.tree_->node(node);
    PsiTable tab = psi_of(S, node);
    if (tab.from < 0 || S.stage_ < tab.from) return false;
    auto sit = S.last_visit_stage_.find(node);
    if (sit == S.last_visit_stage_.end()) return false;  // s* undefined
    int s_star = sit->second;
    Point y = tab.use_at(S.stage_) - 1;
    if (!(y < s_star)) return false;  // slowdown (3)
    for (int sid : relevant_sets(S, node)) {
      if (!chist(S, sid).bigsame(y, s_star, S.stage_)) return false;  // (1)
    }
    for (auto& [actor, lo] : S.stage_block_enums_) {
      // slowdown (2): same-stage block points by strict ancestors
      bool anc = false;
      for (int w = n.parent; w != -1; w = S.tree_->node(w).parent)
        if (w == actor) anc = true;
      if (anc && !(y < lo)) return false;
    }
    return true;
  }

  static std::shared_ptr<DataPkg> base_data(Simulator& S, int node) {
    const StrategyNode& n = S.tree_->node(node);
    PsiTable tab = psi_of(S, node);
    auto p = std::make_shared<DataPkg>();
    p->level = S.tree_->levels(node);
    p->node = node;
    p->f = n.c;
    p->g = 1;
    p->ref_stage = S.stage_;
    p->y = tab.use_at(S.stage_) - 1;
    p->witness = S.dw_.at(node);
    p->psi = n.psi;
    p->frozen_sets.push_back(0);
    for (Elem d : r_oracle(S.lat_, n.c))
      p->frozen_sets.push_back(set_c_id(S, d));
    for (int sid : p->frozen_sets)
      p->frozen_ones.push_back(snapshot_ones(S, sid, p->y + 1));
    return p;
  }

  // ---- controller creation ---------------------------------------------------

  static void become_controller(Simulator& S, int node) {
    auto slot = S.data_slots_.find({node, 0});
    if (slot == S.data_slots_.end())
      violate(S, "ctr outcome without U_0 data at node " + std::to_string(node));
    if (Controller* old = ctrl_at(S, node)) init_ctr_state(S, *old);
    Controller ct;
    ct.node = node;
    ct.c = S.tree_->node(node).c;
    ct.s_ctr = S.stage_;
    ct.data = slot->second;
    build_frontier(S, ct.c, ct.data.get(), {}, ct.frontier);
    for (std::size_t i = 1; i < ct.frontier.size(); ++i) {
      int prev = ct.frontier[i - 1].node;
      bool anc = false;
      for (int w = ct.frontier[i].node; w != -1; w = S.tree_->node(w).parent)
        if (w == prev && w != ct.frontier[i].node) anc = true;
      if (!anc) violate(S, "frontier nodes not subset-increasing");
    }
    ct.last_check_tick = S.tick_;
    // enumerate witnesses of the nodes of the controller's own type
    for (auto& e : ct.frontier) {
      if (e.f != ct.c) continue;
      const DataPkg* leaf = leaf_with_y(e.pkg, e.y_adj);
      if (!leaf || leaf->witness < 0) violate(S, "controller entry lacks witness");
      write_built(S, set_c_id(S, ct.c), leaf->witness, 1, {AVisit, -1, -1});
      trace(S, "witness_enum", {{"node", e.node}, {"x", leaf->witness}});
    }
    ct.decision = evaluate_decision(S, ct);
    ct.e_restraint = ct.frontier[ct.decision].y_adj + 1;
    S.controllers_.push_back(std::move(ct));
    Controller& self = S.controllers_.back();
    trace(S, "controller_created",
          {{"node", node}, {"entries", (long long)self.frontier.size()},
           {"decision", self.frontier[self.decision].node}});
    grant_decision(S, self);
  }

  // ---- visit machinery ---------------------------------------------------------

  // returns next node to visit or -1 to stop the stage
  static int enc_r(Simulator& S, int node, int start_level, bool via_link) {
    const StrategyNode& n = S.tree_->node(node);
    int k = S.tree_->levels(node);
    if (!via_link) {
      if (!S.tp_.count(node)) {
        S.tp_[node] = fresh_tp(S);
        trace(S, "tp_defined", {{"node", node}, {"x", S.tp_[node]}});
      }
      // enc(d)
      if (S.d_active_.count(node)) {
        int oi = S.tree_->outcome_index(node, OutcomeKind::D);
        trace(S, "enc", {{"node", node}, {"outcome", oi}});
        return take_edge(S, node, oi);
      }
      // enc(w)
      if (!S.dw_.count(node)) {
        S.dw_[node] = fresh_dw(S, S.tp_.at(node));
        trace(S, "dw_defined", {{"node", node}, {"x", S.dw_[node]}});
      }
      bool found = find_computation(S, node);
      S.last_visit_stage_[node] = S.stage_;
      if (!found) {
        int oi = S.tree_->outcome_index(node, OutcomeKind::W);
        trace(S, "enc", {{"node", node}, {"outcome", oi}});
        return take_edge(S, node, oi);
      }
      S.data_slots_[{node, k}] = base_data(S, node);
      trace(S, "data_built", {{"node", node}, {"level", k}, {"strong", 1}});
      start_level = k - 1;
    }
    for (int lvl = start_level; lvl >= 0; --lvl) {
      int oi = S.tree_->outcome_index(node, OutcomeKind::U, lvl);
      const Outcome& o = n.outcomes[oi];
      bool red = o.base_red || S.red_overlay_.count({node, lvl});
      trace(S, "enc", {{"node", node}, {"outcome", oi}});
      if (red) {
        int star = S.tree_->beta_star(node, lvl);
        auto ls = S.data_slots_.find({star, lvl + 1});
        auto rs = S.data_slots_.find({node, lvl + 1});
        if (ls == S.data_slots_.end())
          violate(S, "weak combine: star node " + std::to_string(star) +
                         " has no U_" + std::to_string(lvl + 1) + " data");
        if (rs == S.data_slots_.end())
          violate(S, "weak combine: own U-data missing");
        S.data_slots_[{node, lvl}] = combine(S, ls->second, rs->second, 0, lvl);
        continue;
      }
      // Type I or GREEN: kill, maintain the Delta for Type I, descend
      Point tp = S.tp_.at(node);
      for (auto& fi : S.tree_->kl_r(node, lvl)) kill_instance(S, fi, node, tp);
      if (o.utype == UType::TypeI) {
        auto d = S.tree_->mt_r(node, lvl);
        if (d) maintain_instance(S, *d, node);
      }
      return take_edge(S, node, oi);
    }
    // enc(ctr)
    int oi = S.tree_->outcome_index(node, OutcomeKind::Ctr);
    trace(S, "enc", {{"node", node}, {"outcome", oi}});
    init_right_of_edge(S, node, oi);
    S.visited_.emplace_back(node, oi);
    become_controller(S, node);
    return -1;
  }

  static int take_edge(Simulator& S, int node, int oi) {
    init_right_of_edge(S, node, oi);
    S.visited_.emplace_back(node, oi);
    int child = S.tree_->child_at(node, oi);
    if (child < 0) {
      trace(S, "truncated", {{"node", node}, {"outcome", oi}});
      return -1;
    }
    return child;
  }

  static void visit_loop(Simulator& S) {
    int cur = 0;
    while (cur >= 0) {
      const StrategyNode& n = S.tree_->node(cur);
      trace(S, "visit", {{"node", cur}, {"depth", n.depth}});
      if (n.depth >= S.stage_) {
        trace(S, "stage_stop", {{"node", cur}});
        return;
      }
      if (n.is_s) {
        // pending link starting here?
        int li = -1;
        for (auto& lk : S.links_) {
          if (!lk.alive || lk.start_snode != cur) continue;
          if (li < 0) {
            li = lk.id;
            continue;
          }
          int ca = S.tree_->outcome_index(lk.establisher, OutcomeKind::Ctr);
          int cb =
              S.tree_->outcome_index(S.links_[li].establisher, OutcomeKind::Ctr);
          if (S.tree_->priority_cmp_edges(lk.establisher, ca,
                                          S.links_[li].establisher, cb) < 0)
            li = lk.id;
        }
        if (li >= 0) {
          Link& lk = S.links_[li];
          for (auto& fi : S.tree_->mt_s_below(cur, lk.level))
            maintain_instance(S, fi, cur);
          lk.alive = false;
          trace(S, "link_traveled", {{"link", lk.id}, {"target", lk.target}});
          S.data_slots_[{lk.target, lk.level}] = lk.pkg;
          // geometric initialization along the skipped segment
          std::vector<std::pair<int, int>> edges;
          int t = lk.target;
          std::vector<std::pair<int, int>> rev;
          for (int w = t; w != cur && w != -1; w = S.tree_->node(w).parent)
            rev.emplace_back(S.tree_->node(w).parent,
                             S.tree_->node(w).parent_outcome);
          std::reverse(rev.begin(), rev.end());
          for (auto& e : rev) {
            init_right_of_edge(S, e.first, e.second);
            S.visited_.push_back(e);
          }
          if (lk.target_kind == OutcomeKind::Ctr) {
            int oi = S.tree_->outcome_index(lk.target, OutcomeKind::Ctr);
            trace(S, "enc", {{"node", lk.target}, {"outcome", oi}});
            init_right_of_edge(S, lk.target, oi);
            S.visited_.emplace_back(lk.target, oi);
            become_controller(S, lk.target);
            return;
          }
          cur = enc_r(S, lk.target, lk.target_level, true);
          continue;
        }
        if (S.omega_invalid_level_ >= 0 &&
            S.omega_invalid_level_ < static_cast<int>(n.seq.size())) {
          int oi = S.tree_->outcome_index(cur, OutcomeKind::Invalid);
          trace(S, "invalid_outcome", {{"node", cur}});
          init_right_of_edge(S, cur, oi);
          S.visited_.emplace_back(cur, oi);
          return;
        }
        for (auto& fi : S.tree_->mt_s(cur)) maintain_instance(S, fi, cur);
        cur = take_edge(S, cur, 0);
      } else {
        cur = enc_r(S, cur, -1, false);
      }
    }
  }

  // ---- end of stage checks -------------------------------------------------

  static void end_checks(Simulator& S) {
    // Theta correctness for every currently defined input
    Functional& Th = theta(S);
    for (Point x = 0; x <= S.stage_; ++x) {
      int axi = eval_func(S, Th, x);
      if (axi >= 0 && Th.axioms[axi].value != chist(S, set_k_id(S)).value(x))
        violate(S, "Theta incorrect at " + std::to_string(x));
      S.summary_.invariant_checks++;
    }
    // restoration integrity: visits must not injure a restored computation
    for (auto& rc : S.restore_checks_) {
      const DataPkg* leaf = rc.leaf;
      for (std::size_t ci = 0; ci < leaf->frozen_sets.size(); ++ci) {
        int sid = leaf->frozen_sets[ci];
        const auto& w = S.writes_[sid];
        const auto& actors = S.writes_actors_[sid];
        for (std::size_t k = w.size(); k-- > 0;) {
          if (w[k].first <= rc.tick) break;
          if (w[k].second > leaf->y) continue;
          signed char a = actors[k];
          if (a == AVisit)
            violate(S, "restored computation injured by a visit write at " +
                           set_name(S, sid) + "(" + std::to_string(w[k].second) +
                           ")");
        }
      }
      S.summary_.invariant_checks++;
    }
    // noise-bounded decisions
    for (auto& ct : S.controllers_) {
      if (ct.decision_changes > ct.noise_events + 1)
        violate(S, "decision changes exceed noise events at node " +
                       std::to_string(ct.node));
      S.summary_.invariant_checks++;
    }
  }

  static void apply_scripts(Simulator& S) {
    int nb = static_cast<int>(S.built_.size());
    for (std::size_t i = 0; i < S.approx_.size(); ++i) {
      auto changed = S.approx_[i]->apply_stage(S.stage_);
      int sid = nb + static_cast<int>(i);
      for (Point p : changed) {
        std::uint64_t t = S.tick_++;
        S.writes_[sid].emplace_back(t, p);
        S.writes_actors_[sid].push_back(AScript);
        S.point_hist_[sid][p].emplace_back(t, S.approx_[i]->history().value(p));
        trace(S, "u_change", {{"set", sid}, {"x", p}});
      }
    }
    for (int sid = 0; sid < nb; ++sid) hist(S, sid).begin_stage(S.stage_);
    if (S.cfg_.omega_mode && S.omega_invalid_level_ < 0) {
      for (int i = 0; i < S.cfg_.u_sets; ++i) {
        if (!S.approx_[i]->valid()) {
          S.omega_invalid_level_ = i;
          S.u_invalid_[i] = S.approx_[i]->invalid_witness();
          trace(S, "invalid_detected",
                {{"u", i}, {"x", S.approx_[i]->invalid_witness()}});
          break;
        }
      }
    }
  }
};

Simulator::Simulator(const SimConfig& cfg)
    : cfg_(cfg), lat_(Lattice::from_covers(cfg.covers, cfg.names)) {
  itree_ = std::make_unique<IntervalTree>(lat_);
  TreeOptions topt;
  topt.m = cfg.m;
  topt.u_sets = cfg.u_sets;
  topt.node_budget = cfg.tree_budget;
  topt.omega_invalid_outcomes = cfg.omega_mode;
  topt.r_list = cfg.r_list;
  tree_ = std::make_unique<PriorityTree>(*itree_, topt);

  built_.push_back(std::make_unique<BuiltSet>("E", BuiltSet::DceSet));
  auto order = ji_tl_order(*itree_);
  n_c_ = static_cast<int>(order.size());
  for (Elem c : order)
    built_.push_back(std::make_unique<BuiltSet>("C_" + itree_->c_name(c),
                                                BuiltSet::CeSet));
  std::uint64_t volume = 8;
  for (int i = 0; i < cfg_.u_sets; ++i) {
    std::vector<ScriptEvent> sc =
        i < static_cast<int>(cfg_.u_scripts.size()) ? cfg_.u_scripts[i]
                                                    : std::vector<ScriptEvent>{};
    volume += sc.size();
    approx_.push_back(std::make_unique<ApproxSet>(
        "U_" + std::to_string(i),
        cfg_.omega_mode ? ChangeBudget::OmegaCe : cfg_.u_budget, sc));
  }
  approx_.push_back(
      std::make_unique<ApproxSet>("K", ChangeBudget::Dce, cfg_.k_script));
  writes_.resize(built_.size() + approx_.size());
  writes_actors_.resize(built_.size() + approx_.size());
  point_hist_.resize(built_.size() + approx_.size());
  u_invalid_.assign(cfg_.u_sets, -1);
  block_cap_ = 4 * (cfg_.u_sets + 1) * (volume + 8) + 16;
  summary_ = {};
}

bool Simulator::step() {
  if (stage_ >= cfg_.stages) return false;
  ++stage_;
  sub_ = 0;
  visited_.clear();
  stage_block_enums_.clear();
  stage_restores_.clear();
  restore_checks_.clear();
  SimOps::trace(*this, "stage_begin", {{"stage", stage_}});
  SimOps::apply_scripts(*this);
  SimOps::controller_strategy(*this);
  SimOps::g_strategy(*this);
  SimOps::visit_loop(*this);
  SimOps::end_checks(*this);
  visit_log.push_back(visited_);
  summary_.stages_run = stage_;
  return true;
}

void Simulator::run() {
  try {
    while (step()) {
    }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::InvariantViolation) {
      summary_.invariant_ok = false;
      if (summary_.violation.empty()) summary_.violation = e.what();
      if (cfg_.strict) throw;
      return;
    }
    throw;
  }
  summary_.trace_hash = trace_hash_.h;
  summary_.final_state_json = final_state_json();
}

std::string Simulator::final_state_json() const {
  Json j;
  j["stages"] = stage_;
  j["sets"] = Json::object();
  for (const auto& b : built_) {
    Json pts = Json::array();
    for (Point p : b->history().ones_below(std::numeric_limits<Point>::max()))
      pts.push_back(p);
    j["sets"][b->history().id()] = pts;
  }
  j["controllers"] = Json::array();
  for (const auto& ct : controllers_) {
    if (!ct.alive) continue;
    Json c;
    c["node"] = ct.node;
    c["s_ctr"] = ct.s_ctr;
    c["decision"] = ct.decision >= 0 ? ct.frontier[ct.decision].node : -1;
    c["noise"] = ct.noise_events;
    c["changes"] = ct.decision_changes;
    j["controllers"].push_back(c);
  }
  j["blocks"] = blocks_.size();
  j["funcs"] = funcs_.size();
  return j.dump();
}

const Controller* Simulator::controller_at(int node) const {
  for (const auto& ct : controllers_)
    if (ct.alive && ct.node == node) return &ct;
  return nullptr;
}

const SetHistory& Simulator::set_history(int set_id) const {
  return SimOps::chist(*this, set_id);
}

int Simulator::set_c(Elem c) const { return SimOps::set_c_id(*this, c); }
int Simulator::set_u(int i) const { return SimOps::set_u_id(*this, i); }
int Simulator::set_k() const { return SimOps::set_k_id(*this); }

void Simulator::add_u_event(int u, ScriptEvent ev) {
  if (ev.stage <= stage_)
    throw Error(ErrorKind::BadInput, "cannot add events to past stages");
  approx_[u]->add_event(ev);
}

void Simulator::add_k_event(ScriptEvent ev) {
  if (ev.stage <= stage_)
    throw Error(ErrorKind::BadInput, "cannot add events to past stages");
  approx_.back()->add_event(ev);
}

SimConfig config_from_json(const Json& j, const std::string& base_dir) {
  SimConfig cfg;
  Json lat = j.at("lattice");
  if (lat.is_string())
    lat = load_json_file(base_dir + "/" + lat.get<std::string>());
  if (lat.contains("names"))
    for (const auto& n : lat["names"]) cfg.names.push_back(n.get<std::string>());
  for (const auto& c : lat.at("covers"))
    cfg.covers.emplace_back(c[0].get<int>(), c[1].get<int>());
  if (j.contains("m")) cfg.m = j["m"].get<int>();
  if (j.contains("u_sets")) cfg.u_sets = j["u_sets"].get<int>();
  if (j.contains("tree_budget")) cfg.tree_budget = j["tree_budget"].get<int>();
  if (j.contains("stages")) cfg.stages = j["stages"].get<int>();
  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("omega_ce")) cfg.omega_mode = j["omega_ce"].get<bool>();
  if (j.contains("check")) cfg.strict = j["check"] == "strict";
  if (j.contains("u_scripts")) {
    for (const auto& s : j["u_scripts"]) {
      if (s.is_object() && s.contains("random")) {
        const auto& r = s["random"];
        cfg.u_scripts.push_back(random_budget_script(
            r.value("seed", cfg.seed),
            cfg.omega_mode ? ChangeBudget::OmegaCe : ChangeBudget::Dce,
            r.value("points", 40), cfg.stages, r.value("density", 20)));
      } else {
        ChangeBudget b;
        cfg.u_scripts.push_back(script_from_json(s, &b));
      }
    }
  }
  if (j.contains("k_script"))
    cfg.k_script = script_from_json(j["k_script"], nullptr);
  if (j.contains("psi")) {
    for (auto it = j["psi"].begin(); it != j["psi"].end(); ++it) {
      PsiTable t;
      t.from = it.value().value("from", -1);
      t.use = it.value().value("use", 0);
      t.lag = it.value().value("lag", -1);
      if (it.key() == "default")
        cfg.psi_default = t;
      else
        cfg.psi_tables[std::stoi(it.key())] = t;
    }
  }
  return cfg;
}

Json summary_to_json(const SimSummary& s) {
  Json j;
  j["stages_run"] = s.stages_run;
  j["invariant_ok"] = s.invariant_ok;
  if (!s.violation.empty()) j["violation"] = s.violation;
  j["trace_hash"] = s.trace_hash;
  j["invariant_checks"] = s.invariant_checks;
  j["events"] = Json::object();
  for (const auto& [k, v] : s.event_counts) j["events"][k] = v;
  return j;
}

}  // namespace latpri
