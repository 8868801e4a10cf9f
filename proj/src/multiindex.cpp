#include "g2flow/multiindex.hpp"

#include <stdexcept>

namespace g2flow {

int popcount7(uint8_t mask) { return __builtin_popcount(mask & kFullMask); }

int merge_sign(uint8_t a, uint8_t b) {
  if (a & b) return 0;
  // Count inversions between elements of a and b: pairs (x in a, y in b)
  // with y < x.
  int inversions = 0;
  for (int bit = 0; bit < kDim; ++bit) {
    if (a & (1u << bit)) {
      uint8_t below = static_cast<uint8_t>((1u << bit) - 1);
      inversions += popcount7(b & below);
    }
  }
  return (inversions % 2 == 0) ? 1 : -1;
}

MultiIndexTables::MultiIndexTables() {
  rank_of.fill(-1);
  std::array<int, 8> counter{};
  // Enumerating masks in increasing numeric order does NOT give lex order
  // of ascending tuples; generate per-degree subsets recursively instead.
  for (int p = 0; p <= kDim; ++p) {
    std::vector<int> idx(p);
    // Iterative generation of p-combinations of {0..6} in lex order.
    for (int i = 0; i < p; ++i) idx[i] = i;
    while (true) {
      uint8_t mask = 0;
      for (int i = 0; i < p; ++i) mask |= (1u << idx[i]);
      mask_of[p].push_back(mask);
      std::array<int, 7> ax{};
      ax.fill(-1);
      for (int i = 0; i < p; ++i) ax[i] = idx[i];
      axes_of[p].push_back(ax);
      rank_of[mask] = static_cast<int>(mask_of[p].size()) - 1;
      if (p == 0) break;
      int i = p - 1;
      while (i >= 0 && idx[i] == kDim - p + i) --i;
      if (i < 0) break;
      ++idx[i];
      for (int j = i + 1; j < p; ++j) idx[j] = idx[j - 1] + 1;
    }
    if (static_cast<int>(mask_of[p].size()) != kDegreeDim[p])
      throw std::logic_error("combination enumeration is broken");
    counter[p] = static_cast<int>(mask_of[p].size());
  }

  for (int p = 0; p <= kDim; ++p) {
    complement_rank[p].resize(kDegreeDim[p]);
    complement_sign[p].resize(kDegreeDim[p]);
    for (int r = 0; r < kDegreeDim[p]; ++r) {
      uint8_t m = mask_of[p][r];
      uint8_t mc = static_cast<uint8_t>(kFullMask & ~m);
      complement_rank[p][r] = rank_of[mc];
      complement_sign[p][r] = merge_sign(m, mc);
    }
  }

  for (int p = 0; p <= kDim; ++p) {
    for (int q = 0; q + p <= kDim; ++q) {
      auto& table = wedge[p][q];
      for (int i = 0; i < kDegreeDim[p]; ++i) {
        for (int j = 0; j < kDegreeDim[q]; ++j) {
          uint8_t a = mask_of[p][i], b = mask_of[q][j];
          int s = merge_sign(a, b);
          if (s == 0) continue;
          table.push_back({i, j, rank_of[static_cast<uint8_t>(a | b)], s});
        }
      }
    }
  }
}

const MultiIndexTables& MultiIndexTables::instance() {
  static MultiIndexTables tables;
  return tables;
}

std::string basis_label(int degree, int rank) {
  const auto& t = MultiIndexTables::instance();
  if (degree == 0) return "1";
  std::string s = "e^";
  for (int i = 0; i < degree; ++i)
    s += static_cast<char>('1' + t.axes_of[degree][rank][i]);
  return s;
}

}  // namespace g2flow
