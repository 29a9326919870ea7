#pragma once

#include <deque>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "latpri/requirements.hpp"

namespace latpri {

// One Gamma/Delta obligation instance: the copy-th copy of the family
// member at a given U-level.
struct FuncInstance {
  int level;  // which U_i
  int copy;   // which copy a
  FunctionalSpec spec;
  std::string key() const {
    return "U" + std::to_string(level) + "/a" + std::to_string(copy) + "/" +
           (spec.kind == FunctionalSpec::Gamma ? "G_" : "D_") +
           (spec.site.empty() ? "lam" : spec.site);
  }
  bool operator==(const FuncInstance& o) const {
    return level == o.level && copy == o.copy && spec == o.spec;
  }
};

enum class OutcomeKind { U, Ctr, W, D, S0, Invalid };
enum class UType { TypeI, TypeII };

struct Outcome {
  OutcomeKind kind;
  int level = -1;           // U-outcomes only
  UType utype = UType::TypeI;
  bool base_red = false;    // Type II with a = m-1
  int child = -1;           // node id; -1 while unmaterialized or terminal
  bool terminal = false;
  bool truncated = false;
  // assignment of the child, kept for lazy materialization
  std::vector<std::pair<int, int>> child_seq;
};

struct RReq {
  Elem c;
  int psi;
};

struct StrategyNode {
  int id = -1;
  int parent = -1;
  int parent_outcome = -1;  // index into parent's outcomes
  int depth = 0;
  bool is_s = false;
  // S-nodes: assignment in (m x [T_L])^k as (copy, leaf index) pairs
  std::vector<std::pair<int, int>> seq;
  // R-nodes
  int rlist_index = -1;
  Elem c = -1;
  int psi = -1;
  std::vector<Outcome> outcomes;  // left to right
  std::vector<int> path;          // outcome indices from root
};

struct TreeOptions {
  int m = -1;           // default |Ji| + 1
  int u_sets = 1;       // seq length cap
  int node_budget = 4000;
  bool omega_invalid_outcomes = false;
  std::vector<RReq> r_list;  // explicit prefix; extended by default rule
};

// The strategy tree. Nodes materialize lazily along whatever paths the
// construction (or a caller) explores; the node budget bounds the total
// number of materialized nodes and trips the truncation flag.
class PriorityTree {
 public:
  PriorityTree(const IntervalTree& itree, TreeOptions opt);

  const IntervalTree& itree() const { return *itree_; }
  const Lattice& lattice() const { return itree_->lattice(); }
  int m() const { return m_; }
  int u_sets() const { return u_sets_; }
  bool truncated() const { return truncated_; }
  int size() const { return static_cast<int>(nodes_.size()); }
  const StrategyNode& node(int id) const { return nodes_[id]; }
  int root() const { return 0; }
  const RReq& requirement(int rlist_index) const;
  const RMap& rmap(Elem c) const;

  // breadth-first materialization up to the budget, for dumps
  void materialize_bfs() const;

  // number of coordinates (assigned U-sets) at an R-node
  int levels(int rnode) const;
  int seq_copy(int snode, int i) const { return nodes_[snode].seq[i].first; }
  int seq_leaf(int snode, int i) const { return nodes_[snode].seq[i].second; }

  int outcome_index(int rnode, OutcomeKind k, int level = -1) const;
  int child_via(int node, OutcomeKind k, int level = -1) const;
  // materialize and return the child behind an outcome index
  int child_at(int node, int oi) const { return materialize_child(node, oi); }

  // beta^{*i}; the U_i-outcome of beta must be Type II.
  int beta_star(int beta, int i) const;
  // beta^{#i}; -1 when a_i = 0.
  int beta_sharp(int beta, int i) const;
  // The highest conflicting Delta site used by beta_star's definition.
  FunctionalSpec star_delta(int beta, int i) const;

  // env^{<i}: the shortest S-node agreeing with seq(beta^-) below i.
  int env_lt(int beta, int i) const;

  // kl / mt sets per outcome (Defs of maintain and kill, both levels).
  std::vector<FuncInstance> mt_s(int snode) const;
  std::vector<FuncInstance> mt_s_below(int snode, int i) const;  // mt(.,U_{<i})
  std::vector<FuncInstance> kl_r(int rnode, int i) const;        // kl(.,U_{>=i})
  std::optional<FuncInstance> mt_r(int rnode, int i) const;

  // total priority preorder: -1 if a before b, 0 equal, 1 after
  int priority_cmp(int a, int b) const;
  // compare outcome edges (node, outcome index)
  int priority_cmp_edges(int node_a, int oa, int node_b, int ob) const;
  // is edge (node,outcome) strictly left of the subtree/path through b?
  bool left_of_node(int node_a, int oa, int b) const;

  std::string path_string(int id) const;
  std::string seq_string(int id) const;
  std::string to_dot() const;

 private:
  std::vector<FuncInstance> family_instances(int level, int copy, int leaf) const;
  int assign_index(int parent_s) const;
  void build_outcomes(int rnode) const;
  int materialize_child(int id, int oi) const;

  const IntervalTree* itree_;
  int m_;
  int u_sets_;
  int budget_;
  bool omega_;
  mutable bool truncated_ = false;
  mutable std::deque<StrategyNode> nodes_;  // stable references
  mutable std::vector<RReq> r_list_;
  std::vector<RMap> rmaps_;          // by ji order
  std::vector<Elem> ji_order_;       // T_L discovery order
  int iota_ = 0;                     // index of leaf 00..0
};

}  // namespace latpri
