#include "latpri/lattice.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace latpri {

Lattice Lattice::from_covers(const std::vector<std::pair<int, int>>& covers,
                             std::vector<std::string> names) {
  int n = static_cast<int>(names.size());
  for (auto [lo, hi] : covers) {
    n = std::max(n, std::max(lo, hi) + 1);
  }
  if (n == 0) n = 1;
  Lattice l;
  l.n_ = n;
  l.names_.resize(n);
  for (int i = 0; i < n; ++i) {
    l.names_[i] = i < static_cast<int>(names.size()) && !names[i].empty()
                      ? names[i]
                      : "e" + std::to_string(i);
  }

  std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
  for (auto [lo, hi] : covers) {
    if (lo < 0 || hi < 0 || lo >= n || hi >= n || lo == hi)
      throw Error(ErrorKind::BadInput, "bad cover pair");
    adj[lo][hi] = true;
  }

  // Reflexive-transitive closure; cycles make some a<b and b<a.
  auto leq = adj;
  for (int i = 0; i < n; ++i) leq[i][i] = true;
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      if (leq[i][k])
        for (int j = 0; j < n; ++j)
          if (leq[k][j]) leq[i][j] = true;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && leq[i][j] && leq[j][i])
        throw Error(ErrorKind::CycleInCovers,
                    "cover relation has a cycle through " + l.names_[i]);
  l.leq_ = leq;

  int zero = -1, one = -1;
  for (int i = 0; i < n; ++i) {
    bool below_all = true, above_all = true;
    for (int j = 0; j < n; ++j) {
      if (!leq[i][j]) below_all = false;
      if (!leq[j][i]) above_all = false;
    }
    if (below_all) {
      if (zero != -1) throw Error(ErrorKind::NoBounds, "no unique minimum");
      zero = i;
    }
    if (above_all) {
      if (one != -1) throw Error(ErrorKind::NoBounds, "no unique maximum");
      one = i;
    }
  }
  if (zero == -1 || one == -1)
    throw Error(ErrorKind::NoBounds, "lattice lacks a 0 or 1");
  l.zero_ = zero;
  l.one_ = one;

  l.join_.assign(n, std::vector<Elem>(n, -1));
  l.meet_.assign(n, std::vector<Elem>(n, -1));
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      Elem lub = -1, glb = -1;
      for (int x = 0; x < n; ++x) {
        if (leq[a][x] && leq[b][x] && (lub == -1 || leq[x][lub])) lub = x;
        if (leq[x][a] && leq[x][b] && (glb == -1 || leq[glb][x])) glb = x;
      }
      // verify the candidates really are least/greatest
      if (lub == -1 || glb == -1)
        throw Error(ErrorKind::NotALattice,
                    "pair (" + l.names_[a] + "," + l.names_[b] + ") lacks lub/glb");
      for (int x = 0; x < n; ++x) {
        if (leq[a][x] && leq[b][x] && !leq[lub][x])
          throw Error(ErrorKind::NotALattice,
                      "pair (" + l.names_[a] + "," + l.names_[b] + ") has no lub");
        if (leq[x][a] && leq[x][b] && !leq[x][glb])
          throw Error(ErrorKind::NotALattice,
                      "pair (" + l.names_[a] + "," + l.names_[b] + ") has no glb");
      }
      l.join_[a][b] = lub;
      l.meet_[a][b] = glb;
    }
  }

  l.is_ji_.assign(n, false);
  l.ji_pred_.assign(n, -1);
  for (int a = 0; a < n; ++a) {
    if (a == zero) continue;
    std::vector<Elem> below;
    for (int x = 0; x < n; ++x)
      if (x != a && leq[x][a] && l.covers(x, a)) below.push_back(x);
    if (below.size() == 1) {
      l.is_ji_[a] = true;
      l.ji_pred_[a] = below[0];
      l.ji_.push_back(a);
    }
  }

  l.distributive_ = is_distributive(l);
  return l;
}

bool Lattice::covers(Elem lo, Elem hi) const {
  if (!lt(lo, hi)) return false;
  for (int x = 0; x < n_; ++x)
    if (lt(lo, x) && lt(x, hi)) return false;
  return true;
}

Elem Lattice::by_name(const std::string& s) const {
  for (int i = 0; i < n_; ++i)
    if (names_[i] == s) return i;
  throw Error(ErrorKind::BadInput, "unknown element name: " + s);
}

Elem Lattice::ji_pred(Elem c) const {
  if (!is_ji_[c])
    throw Error(ErrorKind::NotJoinIrreducible, name(c) + " is not join-irreducible");
  return ji_pred_[c];
}

std::vector<Elem> Lattice::spec(Elem a) const {
  std::vector<Elem> out;
  for (Elem c : ji_)
    if (leq_[c][a]) out.push_back(c);
  return out;
}

Elem Lattice::rel_pseudocomplement(Elem a, Elem b) const {
  Elem best = -1;
  for (int x = 0; x < n_; ++x) {
    if (!leq_[meet_[a][x]][b]) continue;
    if (best == -1)
      best = x;
    else
      best = join_[best][x];
  }
  // best is the join of the whole defining set; it is the maximum iff it
  // itself belongs to the set.
  if (best == -1 || !leq_[meet_[a][best]][b]) {
    std::string witness = best == -1 ? "empty set" : name(best);
    throw Error(ErrorKind::NotDistributive,
                "no relative pseudocomplement " + name(a) + "*" + name(b) +
                    " (witness join " + witness + ")");
  }
  return best;
}

std::vector<Elem> Lattice::covers_above_in(Elem a, Elem top) const {
  std::vector<Elem> out;
  for (int x = 0; x < n_; ++x)
    if (leq_[x][top] && covers(a, x)) out.push_back(x);
  return out;
}

std::vector<std::pair<int, int>> Lattice::cover_pairs() const {
  std::vector<std::pair<int, int>> out;
  for (int a = 0; a < n_; ++a)
    for (int b = 0; b < n_; ++b)
      if (covers(a, b)) out.emplace_back(a, b);
  return out;
}

bool is_distributive(const Lattice& l) {
  int n = l.size();
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) {
        if (l.meet(a, l.join(b, c)) != l.join(l.meet(a, b), l.meet(a, c)))
          return false;
        if (l.join(a, l.meet(b, c)) != l.meet(l.join(a, b), l.join(a, c)))
          return false;
      }
  return true;
}

std::vector<std::vector<Elem>> maximal_chains(const Lattice& l) {
  std::vector<std::vector<Elem>> out;
  std::vector<Elem> cur{l.zero()};
  std::function<void()> dfs = [&]() {
    Elem top = cur.back();
    if (top == l.one()) {
      out.push_back(cur);
      return;
    }
    for (int x = 0; x < l.size(); ++x) {
      if (l.covers(top, x)) {
        cur.push_back(x);
        dfs();
        cur.pop_back();
      }
    }
  };
  dfs();
  return out;
}

namespace {

// A poset on k points as a strict order matrix. Down-sets are bitmasks.
struct Poset {
  int k = 0;
  std::vector<std::vector<bool>> lt;

  std::vector<unsigned> downsets() const {
    std::vector<unsigned> out;
    for (unsigned m = 0; m < (1u << k); ++m) {
      bool ok = true;
      for (int i = 0; i < k && ok; ++i)
        for (int j = 0; j < k && ok; ++j)
          if (lt[i][j] && (m >> j & 1) && !(m >> i & 1)) ok = false;
      if (ok) out.push_back(m);
    }
    return out;
  }
};

bool poset_isomorphic(const Poset& p, const Poset& q) {
  if (p.k != q.k) return false;
  std::vector<int> perm(p.k);
  for (int i = 0; i < p.k; ++i) perm[i] = i;
  do {
    bool ok = true;
    for (int i = 0; i < p.k && ok; ++i)
      for (int j = 0; j < p.k && ok; ++j)
        if (p.lt[i][j] != q.lt[perm[i]][perm[j]]) ok = false;
    if (ok) return true;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return false;
}

Lattice lattice_of_downsets(const Poset& p) {
  auto ds = p.downsets();
  std::sort(ds.begin(), ds.end(), [](unsigned a, unsigned b) {
    int ca = __builtin_popcount(a), cb = __builtin_popcount(b);
    return ca != cb ? ca < cb : a < b;
  });
  std::map<unsigned, int> idx;
  for (std::size_t i = 0; i < ds.size(); ++i) idx[ds[i]] = static_cast<int>(i);
  std::vector<std::pair<int, int>> covers;
  for (std::size_t i = 0; i < ds.size(); ++i)
    for (std::size_t j = 0; j < ds.size(); ++j) {
      unsigned a = ds[i], b = ds[j];
      if (a == b || (a & b) != a) continue;
      bool cover = true;
      for (unsigned c : ds)
        if (c != a && c != b && (a & c) == a && (c & b) == c) cover = false;
      if (cover) covers.emplace_back(idx[a], idx[b]);
    }
  std::vector<std::string> names(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) names[i] = "d" + std::to_string(i);
  return Lattice::from_covers(covers, names);
}

}  // namespace

void enumerate_distributive_lattices(int max_elems,
                                     const std::function<void(const Lattice&)>& yield,
                                     int hard_bound) {
  if (max_elems > hard_bound)
    throw Error(ErrorKind::BoundExceeded,
                "max_elems " + std::to_string(max_elems) + " exceeds bound " +
                    std::to_string(hard_bound));
  if (max_elems < 1) return;

  std::vector<Poset> seen;
  // Grow posets one point at a time; the down-set count of every prefix is
  // a lower bound for the final count, so prune early.
  std::function<void(Poset&)> grow = [&](Poset& p) {
    auto ds = p.downsets();
    if (static_cast<int>(ds.size()) > max_elems) return;
    bool fresh = true;
    for (const auto& q : seen)
      if (poset_isomorphic(p, q)) {
        fresh = false;
        break;
      }
    if (fresh) {
      seen.push_back(p);
      yield(lattice_of_downsets(p));
    } else {
      return;  // all extensions of a duplicate are reachable from the original
    }
    if (p.k >= max_elems - 1) return;
    int k = p.k;
    // New point's strict down-set D (must be a down-set) and strict up-set
    // U (an up-set disjoint from D); everything else incomparable.
    for (unsigned dmask = 0; dmask < (1u << k); ++dmask) {
      bool dok = true;
      for (int i = 0; i < k && dok; ++i)
        for (int j = 0; j < k && dok; ++j)
          if (p.lt[i][j] && (dmask >> j & 1) && !(dmask >> i & 1)) dok = false;
      if (!dok) continue;
      for (unsigned umask = 0; umask < (1u << k); ++umask) {
        if (umask & dmask) continue;
        bool uok = true;
        for (int i = 0; i < k && uok; ++i)
          for (int j = 0; j < k && uok; ++j)
            if (p.lt[i][j] && (umask >> i & 1) && !(umask >> j & 1)) uok = false;
        // transitivity across the new point
        for (int i = 0; i < k && uok; ++i)
          for (int j = 0; j < k && uok; ++j)
            if ((dmask >> i & 1) && (umask >> j & 1) && !p.lt[i][j] && i != j)
              uok = false;
        if (!uok) continue;
        Poset q;
        q.k = k + 1;
        q.lt.assign(q.k, std::vector<bool>(q.k, false));
        for (int i = 0; i < k; ++i)
          for (int j = 0; j < k; ++j) q.lt[i][j] = p.lt[i][j];
        for (int i = 0; i < k; ++i) {
          if (dmask >> i & 1) q.lt[i][k] = true;
          if (umask >> i & 1) q.lt[k][i] = true;
        }
        grow(q);
      }
    }
  };

  Poset empty;
  grow(empty);
}

}  // namespace latpri
