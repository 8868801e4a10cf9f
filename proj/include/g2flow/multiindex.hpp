#pragma once

// Multi-index combinatorics for the exterior algebra over R^7.
//
// A p-subset of {1,...,7} is stored as a 7-bit mask (bit k <-> axis k+1).
// Within each degree p the basis covectors e^{i1...ip} (i1<...<ip) are
// ordered lexicographically; all tables below are built once at startup
// and shared.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace g2flow {

inline constexpr int kDim = 7;
inline constexpr uint8_t kFullMask = 0x7f;

// C(7,p) for p = 0..7.
inline constexpr std::array<int, 8> kDegreeDim = {1, 7, 21, 35, 35, 21, 7, 1};

int popcount7(uint8_t mask);

// Sign of the shuffle merging two disjoint index sets a and b into sorted
// order, i.e. the coefficient in e^a ^ e^b = sign * e^{a|b}.  Returns 0 if
// the sets intersect.
int merge_sign(uint8_t a, uint8_t b);

struct MultiIndexTables {
  // mask_of[p][r]: bitmask of the r-th degree-p basis subset (lex order).
  std::array<std::vector<uint8_t>, 8> mask_of;
  // rank_of[mask]: lex rank of the subset within its degree class.
  std::array<int, 128> rank_of;
  // axes_of[p][r]: ascending 0-based axis list of that subset.
  std::array<std::vector<std::array<int, 7>>, 8> axes_of;
  // complement_rank[p][r]: rank (in degree 7-p) of the complementary subset.
  std::array<std::vector<int>, 8> complement_rank;
  // complement_sign[p][r]: merge_sign(mask, ~mask), i.e. e^J ^ e^{Jc} =
  // sign * e^{1...7}.
  std::array<std::vector<int>, 8> complement_sign;

  struct WedgeEntry {
    int i, j, k;  // (a ^ b)[k] += sign * a[i] * b[j]
    int sign;
  };
  // wedge[p][q]: all nonzero structure constants for degree p ^ degree q.
  std::array<std::array<std::vector<WedgeEntry>, 8>, 8> wedge;

  static const MultiIndexTables& instance();

 private:
  MultiIndexTables();
};

// Human-readable basis label, e.g. "e^127".
std::string basis_label(int degree, int rank);

}  // namespace g2flow
