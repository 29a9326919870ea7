#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "latpri/common.hpp"

namespace latpri {

using Elem = int;

// Finite lattice over elements 0..n-1 with precomputed order and
// join/meet tables. Immutable after construction.
class Lattice {
 public:
  static Lattice from_covers(const std::vector<std::pair<int, int>>& covers,
                             std::vector<std::string> names);

  int size() const { return n_; }
  bool leq(Elem a, Elem b) const { return leq_[a][b]; }
  bool lt(Elem a, Elem b) const { return a != b && leq_[a][b]; }
  Elem join(Elem a, Elem b) const { return join_[a][b]; }
  Elem meet(Elem a, Elem b) const { return meet_[a][b]; }
  Elem zero() const { return zero_; }
  Elem one() const { return one_; }
  bool covers(Elem lo, Elem hi) const;  // lo -< hi
  const std::string& name(Elem a) const { return names_[a]; }
  Elem by_name(const std::string& s) const;

  bool distributive() const { return distributive_; }

  // Join-irreducibles in index order, and the unique lower cover of one.
  const std::vector<Elem>& ji() const { return ji_; }
  bool is_ji(Elem a) const { return is_ji_[a]; }
  Elem ji_pred(Elem c) const;

  // spec(a) = join-irreducibles below a, in index order.
  std::vector<Elem> spec(Elem a) const;
  int rank(Elem a) const { return static_cast<int>(spec(a).size()); }

  // Greatest x with a /\ x <= b. Throws NotDistributive when no maximum
  // exists, reporting a witnessing pair.
  Elem rel_pseudocomplement(Elem a, Elem b) const;

  // Covers of a within the interval [a, top], lowest index first.
  std::vector<Elem> covers_above_in(Elem a, Elem top) const;

  std::vector<std::pair<int, int>> cover_pairs() const;

 private:
  int n_ = 0;
  std::vector<std::vector<bool>> leq_;
  std::vector<std::vector<Elem>> join_, meet_;
  Elem zero_ = 0, one_ = 0;
  bool distributive_ = false;
  std::vector<Elem> ji_;
  std::vector<bool> is_ji_;
  std::vector<Elem> ji_pred_;  // -1 when not join-irreducible
  std::vector<std::string> names_;
};

bool is_distributive(const Lattice& l);

// All maximal chains bottom-to-top, as element sequences.
std::vector<std::vector<Elem>> maximal_chains(const Lattice& l);

// Yields every distributive lattice with at most max_elems elements, up
// to isomorphism, as down-set lattices of join-irreducible posets.
// Throws BoundExceeded when max_elems > hard_bound.
void enumerate_distributive_lattices(int max_elems,
                                     const std::function<void(const Lattice&)>& yield,
                                     int hard_bound = 12);

}  // namespace latpri
