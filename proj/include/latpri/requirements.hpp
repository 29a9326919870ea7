#pragma once

#include <map>
#include <string>
#include <vector>

#include "latpri/lattice.hpp"

namespace latpri {

// One Gamma/Delta obligation at an internal site of T_L.
struct FunctionalSpec {
  enum Kind { Gamma, Delta } kind;
  std::string site;                 // sigma, an internal node of T_L
  Elem target_c = -1;               // Gamma: the join-irreducible c_sigma
  std::vector<Elem> oracle_c;       // C-sets after the implicit leading E
  // Gamma at sigma computes C_{c_sigma} from E (+) U.
  // Delta at sigma computes U from E (+) {C_d : d in spec(q_{sigma 1})}.
  bool operator==(const FunctionalSpec& o) const {
    return kind == o.kind && site == o.site;
  }
};

struct Interval {
  Elem p, q;
};

// The binary tree of intervals [p_sigma, q_sigma] over a distributive
// lattice, split at the lowest-index cover of p_sigma.
class IntervalTree {
 public:
  explicit IntervalTree(const Lattice& l);

  const Lattice& lattice() const { return *l_; }
  bool has(const std::string& sigma) const { return nodes_.count(sigma) != 0; }
  const Interval& interval(const std::string& sigma) const;
  bool is_leaf(const std::string& sigma) const;
  Elem c_label(const std::string& sigma) const;  // internal sites only

  // Leaves in lexicographic order (0 < 1): eta_0 < eta_1 < ...
  const std::vector<std::string>& leaves() const { return leaves_; }
  int leaf_index(const std::string& eta) const;

  // Internal sites in discovery (BFS) order.
  const std::vector<std::string>& internal_sites() const { return internal_; }

  // The site labeling each join-irreducible: c -> sigma for the special
  // sigma (every bit 0) with c_sigma = c.
  const std::map<Elem, std::string>& ji_site() const { return ji_site_; }
  std::string c_name(Elem c) const;  // "lam", "0", "00", ...

  // F_sigma(U), higher (shorter site) first.
  std::vector<FunctionalSpec> functional_family(const std::string& sigma) const;

 private:
  const Lattice* l_;
  std::map<std::string, Interval> nodes_;
  std::map<std::string, Elem> c_label_;
  std::vector<std::string> leaves_;
  std::vector<std::string> internal_;
  std::map<Elem, std::string> ji_site_;
};

// Oracle C-sets of the requirement R_c: spec(c * c_*), E implicit first.
std::vector<Elem> r_oracle(const Lattice& l, Elem c);

// Def. of conflicts: R_c vs Gamma_sigma iff c_sigma = c; R_c vs
// Delta_tau iff q_{tau 1} <= c * c_*.
bool has_conflict(const IntervalTree& t, Elem c, const FunctionalSpec& f);

// The nondecreasing retreat map on leaves.
struct RMap {
  Elem c;
  std::vector<int> table;  // leaf index -> leaf index
  int operator()(int leaf) const { return table[leaf]; }
};

RMap r_map(const IntervalTree& t, Elem c);

struct RequirementReport {
  std::string text;      // the human-readable block
  std::string rmap_csv;  // leaf table, one row per R_c
};

RequirementReport requirement_report(const Lattice& l);

}  // namespace latpri
