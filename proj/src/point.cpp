#include "g2flow/point.hpp"

namespace g2flow {
namespace {

// Sign picked up when dropping axis a from the sorted set with mask
// `with_a`:  e_a . e^{with_a} = sign * e^{with_a \ a}.
double drop_sign(uint8_t with_a, int a) {
  int below = popcount7(with_a & uint8_t((1 << a) - 1));
  return (below % 2 == 0) ? 1.0 : -1.0;
}

}  // namespace

PointTables::PointTables() {
  const auto& mt = MultiIndexTables::instance();

  for (int p = 0; p <= 7; ++p) {
    sps[p].resize(kDegreeDim[p]);
    for (int r = 0; r < kDegreeDim[p]; ++r) {
      int sum = 0;
      for (int m = 0; m < p; ++m) sum += mt.axes_of[p][r][m] + 1;
      sps[p][r] = (sum % 2 == 0) ? 1 : -1;
    }
  }

  // Monomials of B[u][v] = (1/6) (e_u . phi) ^ (e_v . phi) ^ phi, read
  // off the e^{1..7} coefficient.  (e_u . phi) at 2-set J equals
  // drop_sign * phi[J u {u}], so each wedge[2][2] structure constant
  // contributes one cubic monomial once the top-degree completion with
  // phi on the complementary 3-set is attached.
  for (int u = 0; u < 7; ++u)
    for (int v = u; v < 7; ++v) {
      auto& list = b_mono[uv_index(u, v)];
      for (const auto& e : mt.wedge[2][2]) {
        uint8_t mi = mt.mask_of[2][e.i];
        uint8_t mj = mt.mask_of[2][e.j];
        if (mi & (uint8_t(1) << u)) continue;
        if (mj & (uint8_t(1) << v)) continue;
        uint8_t ma = mi | (uint8_t(1) << u);
        uint8_t mb = mj | (uint8_t(1) << v);
        int r = mt.rank_of[ma];
        int s = mt.rank_of[mb];
        int t = mt.complement_rank[4][e.k];
        double coeff = (1.0 / 6.0) * e.sign * drop_sign(ma, u) *
                       drop_sign(mb, v) * mt.complement_sign[4][e.k];
        list.push_back({r, s, t, coeff});
      }
    }

  for (int a = 0; a < 7; ++a) {
    for (int r2 = 0; r2 < 21; ++r2) {
      uint8_t m2 = mt.mask_of[2][r2];
      if (m2 & (uint8_t(1) << a)) continue;
      uint8_t m3 = m2 | (uint8_t(1) << a);
      lift2[a].push_back({r2, mt.rank_of[m3], drop_sign(m3, a)});
    }
    for (int c = 0; c < 7; ++c) {
      if (c == a) continue;
      uint8_t m2 = uint8_t((1 << a) | (1 << c));
      lift1[a].push_back({c, mt.rank_of[m2], drop_sign(m2, a)});
    }
  }
}

const PointTables& PointTables::instance() {
  static PointTables tables;
  return tables;
}

}  // namespace g2flow
