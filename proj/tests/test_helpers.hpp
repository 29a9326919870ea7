#pragma once

#include <string>
#include <vector>

#include "latpri/lattice.hpp"

namespace latpri::testing {

inline Lattice chain3() {
  return Lattice::from_covers({{0, 1}, {1, 2}}, {"0", "a", "1"});
}

inline Lattice diamond() {
  return Lattice::from_covers({{0, 1}, {0, 2}, {1, 3}, {2, 3}},
                              {"0", "a", "b", "1"});
}

// six elements, three join-irreducibles; the down-set lattice of the
// poset (x < z, y incomparable):
//   0 -< a, 0 -< b, a -< c, a -< d, b -< c, c -< 1, d -< 1
inline Lattice six() {
  return Lattice::from_covers(
      {{0, 1}, {0, 2}, {1, 3}, {2, 3}, {1, 4}, {3, 5}, {4, 5}},
      {"0", "a", "b", "c", "d", "1"});
}

inline Lattice m3() {
  return Lattice::from_covers({{0, 1}, {0, 2}, {0, 3}, {1, 4}, {2, 4}, {3, 4}},
                              {"0", "x", "y", "z", "1"});
}

}  // namespace latpri::testing
