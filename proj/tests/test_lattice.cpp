#include <doctest.h>

#include <set>

#include "latpri/lattice.hpp"
#include "test_helpers.hpp"

using namespace latpri;
using namespace latpri::testing;

namespace {

// brute-force oracle for the relative pseudocomplement: scan all x
Elem brute_rel_pc(const Lattice& l, Elem a, Elem b, bool* exists) {
  Elem best = -1;
  for (int x = 0; x < l.size(); ++x) {
    if (!l.leq(l.meet(a, x), b)) continue;
    if (best == -1 || l.leq(best, x)) best = x;
  }
  // maximum must dominate every member
  for (int x = 0; x < l.size(); ++x)
    if (l.leq(l.meet(a, x), b) && !l.leq(x, best)) {
      *exists = false;
      return -1;
    }
  *exists = best != -1;
  return best;
}

}  // namespace

TEST_CASE("chain3 basics") {
  Lattice l = chain3();
  CHECK(l.size() == 3);
  CHECK(l.zero() == 0);
  CHECK(l.one() == 2);
  CHECK(l.distributive());
  // Ji = {a, 1}
  CHECK(l.ji() == std::vector<Elem>{1, 2});
  CHECK(l.ji_pred(1) == 0);
  CHECK(l.ji_pred(2) == 1);
}

TEST_CASE("single point lattice") {
  Lattice l = Lattice::from_covers({}, {"0"});
  CHECK(l.size() == 1);
  CHECK(l.ji().empty());
  CHECK(l.distributive());
}

TEST_CASE("diamond basics via brute force") {
  Lattice l = diamond();
  // brute-force lub/glb existence was already verified by construction;
  // join-irreducibles are the two atoms
  CHECK(l.ji() == std::vector<Elem>{1, 2});
  CHECK(l.distributive());
  CHECK(l.join(1, 2) == 3);
  CHECK(l.meet(1, 2) == 0);
}

TEST_CASE("M3 is not distributive; chains are short") {
  Lattice l = m3();
  CHECK_FALSE(l.distributive());
  CHECK_FALSE(is_distributive(l));
  for (const auto& ch : maximal_chains(l)) CHECK(ch.size() == 3);
  CHECK(l.ji().size() + 1 == 4);  // the non-example: 3 != 4
}

TEST_CASE("build errors") {
  CHECK_THROWS_AS(Lattice::from_covers({{0, 1}, {1, 0}}, {"a", "b"}), Error);
  // two maximal elements
  try {
    Lattice::from_covers({{0, 1}, {0, 2}}, {"0", "x", "y"});
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NoBounds);
  }
  // hexagon: pairs without lub inside {a,b} vs {c,d}? use the standard
  // non-lattice: two bottoms two tops
  try {
    Lattice::from_covers({{0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 4}, {3, 4}, {0, 5}},
                         {"p", "q", "x", "y", "t", "z"});
    CHECK(false);
  } catch (const Error& e) {
    CHECK((e.kind() == ErrorKind::NotALattice || e.kind() == ErrorKind::NoBounds));
  }
}

TEST_CASE("spec and rank") {
  Lattice l = diamond();
  CHECK(l.spec(l.zero()).empty());
  CHECK(l.spec(l.one()) == std::vector<Elem>{1, 2});
  for (int a = 0; a < l.size(); ++a) {
    CHECK(l.rank(a) == static_cast<int>(l.spec(a).size()));
    for (int b = 0; b < l.size(); ++b) {
      // spec(a v b) = spec(a) u spec(b)
      auto sa = l.spec(a);
      std::set<Elem> u(sa.begin(), sa.end());
      for (Elem x : l.spec(b)) u.insert(x);
      auto sj = l.spec(l.join(a, b));
      CHECK(std::set<Elem>(sj.begin(), sj.end()) == u);
    }
  }
}

TEST_CASE("relative pseudocomplement matches brute force") {
  for (const Lattice& l : {chain3(), diamond(), six()}) {
    for (int a = 0; a < l.size(); ++a)
      for (int b = 0; b < l.size(); ++b) {
        bool exists = false;
        Elem want = brute_rel_pc(l, a, b, &exists);
        REQUIRE(exists);
        CHECK(l.rel_pseudocomplement(a, b) == want);
      }
    // a*a = 1 always
    for (int a = 0; a < l.size(); ++a)
      CHECK(l.rel_pseudocomplement(a, a) == l.one());
  }
  // diamond: a*0 is the other atom
  Lattice d = diamond();
  CHECK(d.rel_pseudocomplement(1, 0) == 2);
  CHECK(d.rel_pseudocomplement(2, 0) == 1);
  // chain3: 1*a = a
  Lattice c = chain3();
  CHECK(c.rel_pseudocomplement(2, 1) == 1);
}

TEST_CASE("rel pseudocomplement can fail on M3") {
  Lattice l = m3();
  CHECK_THROWS_AS(l.rel_pseudocomplement(1, 0), Error);
}

TEST_CASE("enumerator small counts") {
  int n2 = 0;
  enumerate_distributive_lattices(2, [&](const Lattice& l) {
    ++n2;
    CHECK(l.size() <= 2);
  });
  CHECK(n2 == 2);

  bool saw_diamond = false, saw_chain4 = false;
  int n4 = 0;
  enumerate_distributive_lattices(4, [&](const Lattice& l) {
    ++n4;
    CHECK(is_distributive(l));
    if (l.size() == 4) {
      int atoms = 0;
      for (int x = 0; x < l.size(); ++x)
        if (l.covers(l.zero(), x)) ++atoms;
      if (atoms == 2) saw_diamond = true;
      if (atoms == 1 && maximal_chains(l)[0].size() == 4) saw_chain4 = true;
    }
  });
  CHECK(saw_diamond);
  CHECK(saw_chain4);
  CHECK(n4 == 5);  // 1, 2, chain3, chain4, diamond

  CHECK_THROWS_AS(enumerate_distributive_lattices(99, [](const Lattice&) {}),
                  Error);
}

TEST_CASE("useful facts on enumerated lattices") {
  enumerate_distributive_lattices(8, [&](const Lattice& l) {
    int n = l.size();
    for (int a = 0; a < n; ++a) {
      // a = join of spec(a)
      Elem j = l.zero();
      for (Elem c : l.spec(a)) j = l.join(j, c);
      CHECK(j == a);
      for (int b = 0; b < n; ++b) {
        CHECK(l.leq(a, l.rel_pseudocomplement(b, a)));  // a <= b*a
        if (l.leq(b, a)) {
          // c <= a implies a /\ (a*c) = c  (with c := b)
          CHECK(l.meet(a, l.rel_pseudocomplement(a, b)) == b);
        }
      }
    }
    // (b^*)^{[a,c]} = (b*a) /\ c whenever a <= b <= c
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c) {
          if (!(l.leq(a, b) && l.leq(b, c))) continue;
          // pseudocomplement of b inside [a, c]: greatest x in [a,c]
          // with b /\ x = a
          Elem best = -1;
          for (int x = 0; x < n; ++x) {
            if (!l.leq(a, x) || !l.leq(x, c)) continue;
            if (l.meet(b, x) != a) continue;
            if (best == -1 || l.leq(best, x)) best = x;
          }
          bool max_ok = best != -1;
          for (int x = 0; x < n && max_ok; ++x)
            if (l.leq(a, x) && l.leq(x, c) && l.meet(b, x) == a && !l.leq(x, best))
              max_ok = false;
          REQUIRE(max_ok);
          CHECK(best == l.meet(l.rel_pseudocomplement(b, a), c));
        }
    // join-irreducible monotonicity: a <= b in Ji implies
    // a*a_* <= b*b_* and b not<= a*a_*
    for (Elem a : l.ji())
      for (Elem b : l.ji()) {
        if (!l.leq(a, b)) continue;
        Elem pa = l.rel_pseudocomplement(a, l.ji_pred(a));
        Elem pb = l.rel_pseudocomplement(b, l.ji_pred(b));
        CHECK(l.leq(pa, pb));
        CHECK_FALSE(l.leq(b, pa));
      }
    // chain length theorem
    for (const auto& ch : maximal_chains(l))
      CHECK(ch.size() == l.ji().size() + 1);
    // spec is an order isomorphism onto down-sets of Ji
    std::set<std::vector<Elem>> images;
    for (int a = 0; a < n; ++a) {
      auto sa = l.spec(a);
      images.insert(sa);
      // down-closed within Ji
      for (Elem x : l.ji())
        for (Elem y : sa)
          if (l.leq(x, y))
            CHECK(std::find(sa.begin(), sa.end(), x) != sa.end());
      for (int b = 0; b < n; ++b) {
        auto sb = l.spec(b);
        bool subset = std::includes(sb.begin(), sb.end(), sa.begin(), sa.end());
        CHECK(l.leq(a, b) == subset);
      }
    }
    CHECK(static_cast<int>(images.size()) == n);
  });
}
