#include "g2flow/dpq.hpp"

#include "g2flow/exterior.hpp"
#include "g2flow/form.hpp"
#include "g2flow/g2.hpp"

namespace g2flow {

FlatTables::FlatTables() {
  G2Structure s(reference_positive_form());
  const MetricTensor& m = s.metric();
  for (int p = 0; p <= 7; ++p) {
    hodge[p] = Eigen::MatrixXd(kDegreeDim[7 - p], kDegreeDim[p]);
    for (int r = 0; r < kDegreeDim[p]; ++r) {
      AlternatingForm e(p);
      e[r] = 1.0;
      AlternatingForm he = g2flow::hodge(e, m);
      for (int c = 0; c < he.size(); ++c) hodge[p](c, r) = he[c];
    }
  }
  // wedge_matrix gives om ^ x; the tables store x ^ om, which flips the
  // sign on odd degrees ((-1)^(3q)).  The 4-form commutes with everything.
  for (int q = 0; q <= 4; ++q)
    wedge_om[q] = (q % 2 ? -1.0 : 1.0) * wedge_matrix(s.omega3(), q);
  for (int q = 0; q <= 3; ++q) wedge_th[q] = wedge_matrix(s.theta(), q);
  p2_7 = s.proj2_7();
  p2_14 = s.proj2_14();
  p3_1 = s.proj3_1();
  p3_7 = s.proj3_7();
  p3_27 = s.proj3_27();
}

const FlatTables& FlatTables::instance() {
  static FlatTables tables;
  return tables;
}

TrigForm random_type_trig(const TorusGrid& g, int type, SplitMix64& rng,
                          int n_modes, int max_harmonic) {
  const auto& t = FlatTables::instance();
  int degree;
  switch (type) {
    case 1: degree = 0; break;
    case 7: degree = 1; break;
    case 14: degree = 2; break;
    case 27: degree = 3; break;
    default:
      throw std::invalid_argument("type must be 1, 7, 14 or 27");
  }
  TrigForm raw = random_trig_form(g, degree, rng, n_modes, max_harmonic);
  if (type == 14) return apply_matrix(t.p2_14, raw, 2);
  if (type == 27) return apply_matrix(t.p3_27, raw, 3);
  return raw;
}

}  // namespace g2flow
