#pragma once

// Scalar-templated pointwise pipeline for a G2 structure given by 35
// 3-form coefficients at one node.  Everything the discrete solvers need
// per node lives here: the induced metric and its inverse, compound
// (minor) matrices for p-form inner products, Hodge stars, the dual
// 4-form, type projections, and the adjoint chain that differentiates
// the torsion energy density through the metric.
//
// The template parameter S is double in the hot path and Dual when a
// directional derivative is pushed through the whole pipeline.  No Eigen
// here: plain arrays keep the kernels inlineable and Dual-compatible.

#include <array>
#include <cstdint>
#include <vector>

#include "g2flow/dual.hpp"
#include "g2flow/multiindex.hpp"

namespace g2flow {

// Precomputed integer/sign tables shared by all PointG2 instances.
struct PointTables {
  // The bilinear form of a 3-form phi is cubic in its coefficients:
  //   B[u][v] * e^{1..7} = (1/6) (e_u . phi) ^ (e_v . phi) ^ phi.
  // b_mono[uv] lists the monomials  coeff * om[r] * om[s] * om[t]  of the
  // packed entry (u <= v).
  struct Mono {
    int r, s, t;
    double coeff;
  };
  std::array<std::vector<Mono>, 28> b_mono;

  static int uv_index(int u, int v) {  // requires u <= v
    return u * 7 - u * (u + 1) / 2 + v;
  }

  // Parity of the 1-based axis sum of each degree-p subset, as a sign.
  // Appears in the complementary-minor identity
  //   C_p(g^{-1})[I,J] = det(g)^{-1} eps(I) eps(J) C_{7-p}(g)[Jc,Ic].
  std::array<std::vector<int>, 8> sps;

  // lift2[a]: all 2-subsets I' not containing axis a, with the rank of
  // {a} u I' and the position sign of a in it.  Drives the derivative of
  // 3x3 minors of the metric with respect to one metric entry.
  struct Lift2 {
    int r2, r3;
    double sign;
  };
  std::array<std::vector<Lift2>, 7> lift2;

  // lift1[a]: axes c != a with the rank of {a,c} and the sign of a's
  // position; same role for 2x2 minors.
  struct Lift1 {
    int axis, r2;
    double sign;
  };
  std::array<std::vector<Lift1>, 7> lift1;

  static const PointTables& instance();

 private:
  PointTables();
};

namespace detail {

template <class S>
inline void matvec(const S* m, const S* x, S* y, int n) {
  for (int i = 0; i < n; ++i) {
    S acc = S(0.0);
    const S* row = m + i * n;
    for (int j = 0; j < n; ++j) acc += row[j] * x[j];
    y[i] = acc;
  }
}

template <class S>
inline S dot(const S* a, const S* b, int n) {
  S acc = S(0.0);
  for (int i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

// Cholesky factorization of a symmetric 7x7 matrix.  Returns false if a
// pivot is non-positive (the matrix is not positive definite).  det
// receives the determinant.
template <class S>
inline bool chol7(const std::array<S, 49>& a, std::array<S, 49>& lower,
                  S& det) {
  using std::sqrt;
  lower.fill(S(0.0));
  det = S(1.0);
  for (int j = 0; j < 7; ++j) {
    S d = a[j * 7 + j];
    for (int k = 0; k < j; ++k) d -= lower[j * 7 + k] * lower[j * 7 + k];
    if (!(scalar_value(d) > 0.0)) return false;
    S l = sqrt(d);
    lower[j * 7 + j] = l;
    det *= d;
    for (int i = j + 1; i < 7; ++i) {
      S s = a[i * 7 + j];
      for (int k = 0; k < j; ++k) s -= lower[i * 7 + k] * lower[j * 7 + k];
      lower[i * 7 + j] = s / l;
    }
  }
  return true;
}

// Inverse from the Cholesky factor, symmetrized.
template <class S>
inline void chol_inverse7(const std::array<S, 49>& lower,
                          std::array<S, 49>& inv) {
  std::array<S, 7> col;
  for (int e = 0; e < 7; ++e) {
    for (int i = 0; i < 7; ++i) {
      S s = (i == e) ? S(1.0) : S(0.0);
      for (int k = 0; k < i; ++k) s -= lower[i * 7 + k] * col[k];
      col[i] = s / lower[i * 7 + i];
    }
    for (int i = 6; i >= 0; --i) {
      S s = col[i];
      for (int k = i + 1; k < 7; ++k) s -= lower[k * 7 + i] * col[k];
      col[i] = s / lower[i * 7 + i];
    }
    for (int i = 0; i < 7; ++i) inv[i * 7 + e] = col[i];
  }
  for (int i = 0; i < 7; ++i)
    for (int j = i + 1; j < 7; ++j) {
      S v = (inv[i * 7 + j] + inv[j * 7 + i]) * S(0.5);
      inv[i * 7 + j] = v;
      inv[j * 7 + i] = v;
    }
}

// Second compound: 21x21 matrix of 2x2 minors.
template <class S>
inline void compound2(const S* m, S* out) {
  const auto& mt = MultiIndexTables::instance();
  for (int r = 0; r < 21; ++r) {
    const auto& ri = mt.axes_of[2][r];
    for (int c = 0; c < 21; ++c) {
      const auto& cj = mt.axes_of[2][c];
      out[r * 21 + c] = m[ri[0] * 7 + cj[0]] * m[ri[1] * 7 + cj[1]] -
                        m[ri[0] * 7 + cj[1]] * m[ri[1] * 7 + cj[0]];
    }
  }
}

// Third compound: 35x35 matrix of 3x3 minors.
template <class S>
inline void compound3(const S* m, S* out) {
  const auto& mt = MultiIndexTables::instance();
  for (int r = 0; r < 35; ++r) {
    const auto& ri = mt.axes_of[3][r];
    const S* m0 = m + ri[0] * 7;
    const S* m1 = m + ri[1] * 7;
    const S* m2 = m + ri[2] * 7;
    for (int c = 0; c < 35; ++c) {
      const auto& cj = mt.axes_of[3][c];
      const int a = cj[0], b = cj[1], cc = cj[2];
      out[r * 35 + c] = m0[a] * (m1[b] * m2[cc] - m1[cc] * m2[b]) -
                        m0[b] * (m1[a] * m2[cc] - m1[cc] * m2[a]) +
                        m0[cc] * (m1[a] * m2[b] - m1[b] * m2[a]);
    }
  }
}

}  // namespace detail

// Raw-array wedge product using the shared structure constants.  out has
// degree p+q and is overwritten.
template <class S>
inline void wedge_arrays(int p, int q, const S* a, const S* b, S* out) {
  const auto& mt = MultiIndexTables::instance();
  const int nd = kDegreeDim[p + q];
  for (int k = 0; k < nd; ++k) out[k] = S(0.0);
  for (const auto& e : mt.wedge[p][q])
    out[e.k] += S(double(e.sign)) * a[e.i] * b[e.j];
}

// Plain interior product of a vector (components, no metric) with a
// degree-p form; out has degree p-1 and is overwritten.
template <class S>
inline void interior_vector(int p, const S* vec, const S* form, S* out) {
  const auto& mt = MultiIndexTables::instance();
  const int no = kDegreeDim[p - 1];
  for (int k = 0; k < no; ++k) out[k] = S(0.0);
  const int np = kDegreeDim[p];
  for (int r = 0; r < np; ++r) {
    uint8_t mask = mt.mask_of[p][r];
    const auto& ax = mt.axes_of[p][r];
    double sign = 1.0;
    for (int m = 0; m < p; ++m) {
      int rd = mt.rank_of[mask & ~(uint8_t(1) << ax[m])];
      out[rd] += S(sign) * vec[ax[m]] * form[r];
      sign = -sign;
    }
  }
}

// Complement re-indexing with parity signs: out[comp(i)] = eps(i) in[i].
// Turns a degree-p vector into the degree-(7-p) proxy used by the
// complementary-minor route for p >= 4 inner products.
template <class S>
inline void tilde_complement(int p, const S* in, S* out) {
  const auto& mt = MultiIndexTables::instance();
  const auto& pt = PointTables::instance();
  const int np = kDegreeDim[p];
  for (int i = 0; i < np; ++i)
    out[mt.complement_rank[p][i]] = S(double(pt.sps[p][i])) * in[i];
}

template <class S>
struct PointG2 {
  std::array<S, 35> om;       // 3-form coefficients
  std::array<S, 49> bform;    // unnormalized bilinear form B
  std::array<S, 49> g, h;     // metric and inverse metric
  S det_b, cb;                // det B and (det B)^{-1/9}
  S det_g, vol;               // det g and volume density
  std::array<S, 441> c2g, c2h;    // 2x2 minor matrices of g, h
  std::array<S, 1225> c3g, c3h;   // 3x3 minor matrices of g, h
  std::array<S, 35> theta4;       // dual 4-form  *om

  // Builds the full pipeline.  Returns false (leaving trailing members
  // unspecified) when the bilinear form is not positive definite, i.e.
  // the 3-form has left the positive cone.
  bool build(const S* omega35) {
    using std::pow;
    const auto& pt = PointTables::instance();
    for (int i = 0; i < 35; ++i) om[i] = omega35[i];
    for (int u = 0; u < 7; ++u)
      for (int v = u; v < 7; ++v) {
        S acc = S(0.0);
        for (const auto& m : pt.b_mono[PointTables::uv_index(u, v)])
          acc += S(m.coeff) * om[m.r] * om[m.s] * om[m.t];
        bform[u * 7 + v] = acc;
        bform[v * 7 + u] = acc;
      }
    std::array<S, 49> lower;
    if (!detail::chol7(bform, lower, det_b)) return false;
    cb = pow(det_b, -1.0 / 9.0);
    det_g = pow(det_b, 2.0 / 9.0);
    vol = pow(det_b, 1.0 / 9.0);
    std::array<S, 49> binv;
    detail::chol_inverse7(lower, binv);
    for (int i = 0; i < 49; ++i) {
      g[i] = cb * bform[i];
      h[i] = binv[i] / cb;
    }
    detail::compound2(g.data(), c2g.data());
    detail::compound2(h.data(), c2h.data());
    detail::compound3(g.data(), c3g.data());
    detail::compound3(h.data(), c3h.data());
    hodge(3, om.data(), theta4.data());
    return true;
  }

  // Applies the degree-p Gram matrix (inner-product matrix of basis
  // p-covectors).  Degrees >= 4 go through the complementary-minor
  // identity so only the stored compounds are needed.
  void gram_apply(int p, const S* in, S* out) const {
    const auto& mt = MultiIndexTables::instance();
    const auto& pt = PointTables::instance();
    switch (p) {
      case 0:
        out[0] = in[0];
        return;
      case 1:
        detail::matvec(h.data(), in, out, 7);
        return;
      case 2:
        detail::matvec(c2h.data(), in, out, 21);
        return;
      case 3:
        detail::matvec(c3h.data(), in, out, 35);
        return;
      case 7:
        out[0] = in[0] / det_g;
        return;
      default:
        break;
    }
    const int np = kDegreeDim[p];
    std::array<S, 35> tld, y;
    tilde_complement(p, in, tld.data());
    if (p == 4)
      detail::matvec(c3g.data(), tld.data(), y.data(), 35);
    else if (p == 5)
      detail::matvec(c2g.data(), tld.data(), y.data(), 21);
    else
      detail::matvec(g.data(), tld.data(), y.data(), 7);
    S dh = S(1.0) / det_g;
    for (int i = 0; i < np; ++i)
      out[i] = dh * S(double(pt.sps[p][i])) * y[mt.complement_rank[p][i]];
  }

  // Inverse Gram matrix: C_p(h)^{-1} = C_p(g) by multiplicativity of
  // compounds, so this is gram_apply with g and h exchanged.
  void gram_inv_apply(int p, const S* in, S* out) const {
    const auto& mt = MultiIndexTables::instance();
    const auto& pt = PointTables::instance();
    switch (p) {
      case 0:
        out[0] = in[0];
        return;
      case 1:
        detail::matvec(g.data(), in, out, 7);
        return;
      case 2:
        detail::matvec(c2g.data(), in, out, 21);
        return;
      case 3:
        detail::matvec(c3g.data(), in, out, 35);
        return;
      case 7:
        out[0] = det_g * in[0];
        return;
      default:
        break;
    }
    const int np = kDegreeDim[p];
    std::array<S, 35> tld, y;
    tilde_complement(p, in, tld.data());
    if (p == 4)
      detail::matvec(c3h.data(), tld.data(), y.data(), 35);
    else if (p == 5)
      detail::matvec(c2h.data(), tld.data(), y.data(), 21);
    else
      detail::matvec(h.data(), tld.data(), y.data(), 7);
    for (int i = 0; i < np; ++i)
      out[i] = det_g * S(double(pt.sps[p][i])) * y[mt.complement_rank[p][i]];
  }

  S inner(int p, const S* a, const S* b) const {
    std::array<S, 35> gb;
    gram_apply(p, b, gb.data());
    return detail::dot(a, gb.data(), kDegreeDim[p]);
  }

  // Hodge star: degree p in, degree 7-p out (overwritten).
  void hodge(int p, const S* in, S* out) const {
    const auto& mt = MultiIndexTables::instance();
    std::array<S, 35> raised;
    gram_apply(p, in, raised.data());
    const int np = kDegreeDim[p];
    for (int r = 0; r < np; ++r)
      out[mt.complement_rank[p][r]] =
          S(double(mt.complement_sign[p][r])) * vol * raised[r];
  }

  // Linearization map of the dual form on 3-forms:
  //   p(t) = -t + (<t,om>/3) om - (1/2) *(*(t ^ om) ^ om),
  // the operator with eigenvalues 4/3, 1, -1 on the 1-, 7-, 27-type
  // pieces; the dual-form derivative along t is *p(t).
  void p_apply(const S* t, S* out) const {
    std::array<S, 35> y;
    detail::matvec(c3h.data(), t, y.data(), 35);
    S in_om = detail::dot(y.data(), om.data(), 35);
    std::array<S, 7> u6, a1;
    wedge_arrays(3, 3, t, om.data(), u6.data());
    hodge(6, u6.data(), a1.data());
    std::array<S, 35> u4, w3;
    wedge_arrays(1, 3, a1.data(), om.data(), u4.data());
    hodge(4, u4.data(), w3.data());
    S third = in_om / S(3.0);
    for (int i = 0; i < 35; ++i)
      out[i] = -t[i] + third * om[i] - S(0.5) * w3[i];
  }

  // Type decomposition of a 3-form: t = t1 + t7 + t27, filtered through
  // the eigenvalues 4/3, 1, -1 of p.
  void project3(const S* t, S* t1, S* t7, S* t27) const {
    std::array<S, 35> ptv;
    p_apply(t, ptv.data());
    S c = inner(3, t, om.data()) / S(7.0);
    for (int i = 0; i < 35; ++i) {
      t1[i] = c * om[i];
      t7[i] = S(0.5) * (ptv[i] + t[i] - S(7.0 / 3.0) * t1[i]);
      t27[i] = t[i] - t1[i] - t7[i];
    }
  }

  // Type decomposition of a 2-form: s = s7 + s14, with
  // s7 = (s + *(s ^ om)) / 3.
  void project2(const S* s, S* s7, S* s14) const {
    std::array<S, 21> u5, w2;
    wedge_arrays(2, 3, s, om.data(), u5.data());
    hodge(5, u5.data(), w2.data());
    for (int i = 0; i < 21; ++i) {
      s7[i] = (s[i] + w2[i]) / S(3.0);
      s14[i] = s[i] - s7[i];
    }
  }

  // Transpose of the dual-form Jacobian:  out = J^T w  where
  // J t = *p(t).  Expands to  vol * gram3 * p(what),
  // what[r] = csign(r) w[comp(r)].
  void theta_adjoint(const S* w4, S* out3) const {
    const auto& mt = MultiIndexTables::instance();
    std::array<S, 35> what, tmp, y;
    for (int r = 0; r < 35; ++r)
      what[r] = S(double(mt.complement_sign[3][r])) * w4[mt.complement_rank[3][r]];
    p_apply(what.data(), tmp.data());
    detail::matvec(c3h.data(), tmp.data(), y.data(), 35);
    for (int r = 0; r < 35; ++r) out3[r] = vol * y[r];
  }

  // Gradient of the weighted quadratic density
  //   f = w (det g)^{-1/2} [ v4~^T C3(g) v4~ + v5~^T C2(g) v5~ ]
  // with respect to the 35 3-form coefficients, holding the complement
  // proxies v4~ (35, from the 4-form derivative) and v5~ (21, from the
  // 5-form derivative) fixed.  Accumulates into q_add.
  void metric_gradient(const S* v4t, const S* v5t, double w, S* q_add) const {
    using std::pow;
    const auto& pt = PointTables::instance();
    std::array<S, 35> y3;
    std::array<S, 21> y2;
    detail::matvec(c3g.data(), v4t, y3.data(), 35);
    detail::matvec(c2g.data(), v5t, y2.data(), 21);
    S quad = detail::dot(v4t, y3.data(), 35) + detail::dot(v5t, y2.data(), 21);
    S s = S(w) * pow(det_g, -0.5);

    // t3[a] in R^21 and t2[a] in R^7 hold the lifted proxies; the minor
    // derivative is then  d quad / d g_ab = t3[a]^T C2(g) t3[b]
    //                                     + t2[a]^T g t2[b].
    std::array<std::array<S, 21>, 7> t3{};
    std::array<std::array<S, 7>, 7> t2{};
    for (int a = 0; a < 7; ++a) {
      for (auto& v : t3[a]) v = S(0.0);
      for (auto& v : t2[a]) v = S(0.0);
      for (const auto& l : pt.lift2[a]) t3[a][l.r2] = S(l.sign) * v4t[l.r3];
      for (const auto& l : pt.lift1[a]) t2[a][l.axis] = S(l.sign) * v5t[l.r2];
    }
    std::array<std::array<S, 21>, 7> z3;
    std::array<std::array<S, 7>, 7> z2;
    for (int b = 0; b < 7; ++b) {
      detail::matvec(c2g.data(), t3[b].data(), z3[b].data(), 21);
      detail::matvec(g.data(), t2[b].data(), z2[b].data(), 7);
    }
    std::array<S, 49> dfdg;
    for (int a = 0; a < 7; ++a)
      for (int b = 0; b < 7; ++b)
        dfdg[a * 7 + b] =
            s * (S(-0.5) * h[a * 7 + b] * quad +
                 detail::dot(t3[a].data(), z3[b].data(), 21) +
                 detail::dot(t2[a].data(), z2[b].data(), 7));

    // Chain through g = (det B)^{-1/9} B.
    S trf = detail::dot(dfdg.data(), bform.data(), 49);
    std::array<S, 49> dfdb;
    S k = cb * cb / S(9.0) * trf;
    for (int i = 0; i < 49; ++i) dfdb[i] = cb * dfdg[i] - k * h[i];

    for (int u = 0; u < 7; ++u)
      for (int v = u; v < 7; ++v) {
        S wuv = dfdb[u * 7 + v];
        if (u != v) wuv += dfdb[v * 7 + u];
        for (const auto& m : pt.b_mono[PointTables::uv_index(u, v)]) {
          S c = wuv * S(m.coeff);
          q_add[m.r] += c * om[m.s] * om[m.t];
          q_add[m.s] += c * om[m.r] * om[m.t];
          q_add[m.t] += c * om[m.r] * om[m.s];
        }
      }
  }

  // vol * |u|^2_g for a 4-form given by its complement proxy v4t
  // (vol cancels one det factor: vol * det(g)^{-1} = det(g)^{-1/2}).
  S weighted_quad4(const S* v4t) const {
    using std::pow;
    std::array<S, 35> y;
    detail::matvec(c3g.data(), v4t, y.data(), 35);
    return pow(det_g, -0.5) * detail::dot(v4t, y.data(), 35);
  }

  S weighted_quad5(const S* v5t) const {
    using std::pow;
    std::array<S, 21> y;
    detail::matvec(c2g.data(), v5t, y.data(), 21);
    return pow(det_g, -0.5) * detail::dot(v5t, y.data(), 21);
  }

  // weight * vol * gram4 * u4, evaluated from the complement proxy;
  // this is the derivative of (1/2) weight * vol * |u4|^2 in u4.
  void dual4(const S* v4t, double weight, S* out) const {
    using std::pow;
    const auto& mt = MultiIndexTables::instance();
    const auto& pt = PointTables::instance();
    std::array<S, 35> y;
    detail::matvec(c3g.data(), v4t, y.data(), 35);
    S f = S(weight) * pow(det_g, -0.5);
    for (int i = 0; i < 35; ++i)
      out[i] = f * S(double(pt.sps[4][i])) * y[mt.complement_rank[4][i]];
  }

  void dual5(const S* v5t, double weight, S* out) const {
    using std::pow;
    const auto& mt = MultiIndexTables::instance();
    const auto& pt = PointTables::instance();
    std::array<S, 21> y;
    detail::matvec(c2g.data(), v5t, y.data(), 21);
    S f = S(weight) * pow(det_g, -0.5);
    for (int i = 0; i < 21; ++i)
      out[i] = f * S(double(pt.sps[5][i])) * y[mt.complement_rank[5][i]];
  }
};

}  // namespace g2flow
