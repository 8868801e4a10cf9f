#pragma once

// The family of first-order operators between type components over the
// flat reference structure.  Sections are represented in their ambient
// degree: functions, 1-forms, 2-forms constrained to the 14-type, and
// 3-forms constrained to the 27-type.  Every operator is a composition
// of the stencil derivative with constant matrices of the reference
// structure, so the same template body runs on discrete fields and on
// analytic trig fields (the convergence oracles).

#include <Eigen/Dense>
#include <array>
#include <stdexcept>

#include "g2flow/field.hpp"

namespace g2flow {

// Constant matrices of the reference structure (identity metric):
// Hodge stars, wedge with the 3-form and with its dual, and the type
// projectors in degrees 2 and 3.
struct FlatTables {
  std::array<Eigen::MatrixXd, 8> hodge;     // hodge[p]: degree p -> 7-p
  std::array<Eigen::MatrixXd, 5> wedge_om;  // wedge_om[q]: x |-> x ^ om, q -> q+3
  std::array<Eigen::MatrixXd, 4> wedge_th;  // wedge_th[q]: q -> q+4
  Eigen::MatrixXd p2_7, p2_14, p3_1, p3_7, p3_27;

  static const FlatTables& instance();

 private:
  FlatTables();
};

namespace detail {
template <class F>
inline void want_degree(const F& x, int want, const char* op) {
  if (x.degree() != want)
    throw std::invalid_argument(std::string(op) + ": wrong input degree");
}
}  // namespace detail

// Codifferential over the flat reference structure: (-1)^p * d * .
template <class F>
F flat_codiff(const F& x) {
  const auto& t = FlatTables::instance();
  const int p = x.degree();
  if (p < 1) throw std::invalid_argument("flat_codiff: degree >= 1 required");
  F a = apply_matrix(t.hodge[p], x, 7 - p);
  F b = d(a);
  F c = apply_matrix(t.hodge[8 - p], b, p - 1);
  if (p % 2 == 1) c = -1.0 * c;
  return c;
}

// ---- the sixteen operators ---------------------------------------------
// Maps not listed (function -> function, function -> 14, function -> 27,
// 14 -> function, 14 -> 14, 27 -> function) vanish identically.

// function -> 1-form
template <class F>
F d1_7(const F& f) {
  detail::want_degree(f, 0, "d1_7");
  return d(f);
}

// 1-form -> function (the divergence; equals (1/4)*d(*(a^om)^om))
template <class F>
F d7_1(const F& a) {
  detail::want_degree(a, 1, "d7_1");
  return flat_codiff(a);
}

// 1-form -> 1-form: *(da ^ *om)
template <class F>
F d7_7(const F& a) {
  detail::want_degree(a, 1, "d7_7");
  const auto& t = FlatTables::instance();
  return apply_matrix(t.hodge[6], apply_matrix(t.wedge_th[2], d(a), 6), 1);
}

// 1-form -> 14-type: [da]_14
template <class F>
F d7_14(const F& a) {
  detail::want_degree(a, 1, "d7_14");
  return apply_matrix(FlatTables::instance().p2_14, d(a), 2);
}

// 1-form -> 27-type: [d *(a ^ *om)]_27
template <class F>
F d7_27(const F& a) {
  detail::want_degree(a, 1, "d7_27");
  const auto& t = FlatTables::instance();
  F s2 = apply_matrix(t.hodge[5], apply_matrix(t.wedge_th[1], a, 5), 2);
  return apply_matrix(t.p3_27, d(s2), 3);
}

// 14-type -> 1-form: -*([db]_7 ^ om)
template <class F>
F d14_7(const F& b) {
  detail::want_degree(b, 2, "d14_7");
  const auto& t = FlatTables::instance();
  F s7 = apply_matrix(t.p3_7, d(b), 3);
  return -1.0 * apply_matrix(t.hodge[6], apply_matrix(t.wedge_om[3], s7, 6), 1);
}

// 14-type -> 27-type: [db]_27
template <class F>
F d14_27(const F& b) {
  detail::want_degree(b, 2, "d14_27");
  return apply_matrix(FlatTables::instance().p3_27, d(b), 3);
}

// 27-type -> 1-form: *(delta g ^ *om)
template <class F>
F d27_7(const F& g) {
  detail::want_degree(g, 3, "d27_7");
  const auto& t = FlatTables::instance();
  return apply_matrix(t.hodge[6],
                      apply_matrix(t.wedge_th[2], flat_codiff(g), 6), 1);
}

// 27-type -> 14-type: [delta g]_14
template <class F>
F d27_14(const F& g) {
  detail::want_degree(g, 3, "d27_14");
  return apply_matrix(FlatTables::instance().p2_14, flat_codiff(g), 2);
}

// 27-type -> 27-type: [*dg]_27
template <class F>
F d27_27(const F& g) {
  detail::want_degree(g, 3, "d27_27");
  const auto& t = FlatTables::instance();
  return apply_matrix(t.p3_27, apply_matrix(t.hodge[4], d(g), 3), 3);
}

// ---- mixed variations --------------------------------------------------
// A variation with components (f, a, g) is the 3-form
//   f * om + *(a ^ om) + g.

template <class F>
F assemble_mixed(const F& fdot, const F& adot, const F& gdot) {
  detail::want_degree(fdot, 0, "assemble_mixed");
  detail::want_degree(adot, 1, "assemble_mixed");
  detail::want_degree(gdot, 3, "assemble_mixed");
  const auto& t = FlatTables::instance();
  F out = apply_matrix(t.wedge_om[0], fdot, 3);
  out = out + apply_matrix(t.hodge[4], apply_matrix(t.wedge_om[1], adot, 4), 3);
  out = out + gdot;
  return out;
}

// First-order decomposition of d applied to the assembled variation:
//   (4/7) d7_1(a) * (*om)
// + (d1_7 f + 1/2 d7_7 a + 1/4 d27_7 g) ^ om
// + *(d7_27 a + d27_27 g).
template <class F>
F mixed_d(const F& fdot, const F& adot, const F& gdot) {
  const auto& t = FlatTables::instance();
  F one = d1_7(fdot) + 0.5 * d7_7(adot) + 0.25 * d27_7(gdot);
  F out = apply_matrix(t.wedge_th[0], (4.0 / 7.0) * d7_1(adot), 4);
  out = out + apply_matrix(t.wedge_om[1], one, 4);
  out = out + apply_matrix(t.hodge[3], d7_27(adot) + d27_27(gdot), 4);
  return out;
}

// First-order decomposition of the codifferential of the assembled
// variation:
//   *((-d1_7 f - 2/3 d7_7 a + 1/3 d27_7 g) ^ *om)  [7-part]
// + d7_14 a + d27_14 g                             [14-part]
template <class F>
F mixed_codiff(const F& fdot, const F& adot, const F& gdot) {
  const auto& t = FlatTables::instance();
  F one = -1.0 * d1_7(fdot) + (-2.0 / 3.0) * d7_7(adot) +
          (1.0 / 3.0) * d27_7(gdot);
  F out = apply_matrix(t.hodge[5], apply_matrix(t.wedge_th[1], one, 5), 2);
  out = out + d7_14(adot) + d27_14(gdot);
  return out;
}

// ---- type-component generators ----------------------------------------

// Seeded band-limited trig field lying in the given type component
// (1, 7, 14 or 27) of the flat structure.
TrigForm random_type_trig(const TorusGrid& g, int type, SplitMix64& rng,
                          int n_modes, int max_harmonic);

}  // namespace g2flow
