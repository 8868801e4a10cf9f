#pragma once

// Gauge layer for the energy flow: the modified-flow vector field, Lie
// derivatives, the gauged gradient q_tilde, its linearization at the
// flat background (assembled along two independent routes), dense and
// Fourier-block spectra, a coercivity probe, the orbit/slice splitting
// and the quadratic remainder of q_tilde.
//
// Vector fields travel in degree-1 containers holding contravariant
// components X^a per node; the degree-1 gram machinery raises and lowers
// them where needed.  Every codifferential in this layer is the exact
// adjoint one, so (lambda_map, lambda_star) below form an exact matrix
// adjoint pair and the assembled linearization is symmetric to roundoff
// -- not just up to truncation error.

#include <Eigen/Dense>
#include <array>
#include <iosfwd>
#include <stdexcept>
#include <vector>

#include "g2flow/calculus.hpp"
#include "g2flow/energy.hpp"
#include "g2flow/rng.hpp"

namespace g2flow {

namespace detail {

// Metric contraction eta .| w at one point, the adjoint of wedging:
//   <eta .| w, tau>_{l-k} = <w, eta ^ tau>_l
// for eta of degree k and w of degree l.  Concretely
//   eta .| w = G_{l-k}^{-1} A^T G_l w,   A tau = eta ^ tau.
template <class S>
inline void contract_point(const PointG2<S>& pt, int k, int l, const S* eta,
                           const S* w, S* out) {
  const auto& mt = MultiIndexTables::instance();
  std::array<S, 35> gw, z;
  pt.gram_apply(l, w, gw.data());
  const int no = kDegreeDim[l - k];
  for (int r = 0; r < no; ++r) z[r] = S(0.0);
  for (const auto& e : mt.wedge[k][l - k])
    z[e.j] += S(double(e.sign)) * eta[e.i] * gw[e.k];
  pt.gram_inv_apply(l - k, z.data(), out);
}

}  // namespace detail

// Weighted inner product of two vector fields (contravariant components):
//   sum over nodes of cell * vol * g_ab X^a Y^b.
template <class S>
S l2_inner_vector(const StructureField<S>& sf, const BasicFormField<S>& x,
                  const BasicFormField<S>& y) {
  if (x.degree() != 1 || y.degree() != 1)
    throw std::invalid_argument("vector fields use degree-1 containers");
  x.check_compatible(y);
  std::vector<S> terms(static_cast<size_t>(x.nodes()));
  const double cell = sf.grid().cell();
  for (int64_t i = 0; i < x.nodes(); ++i) {
    const PointG2<S>& pt = sf.point(i);
    S low[7];
    pt.gram_inv_apply(1, y.node(i), low);  // lower the index: g_ab Y^b
    S acc = S(0.0);
    const S* xi = x.node(i);
    for (int a = 0; a < 7; ++a) acc += xi[a] * low[a];
    terms[static_cast<size_t>(i)] = S(cell) * pt.vol * acc;
  }
  return detail::pairwise_sum(terms);
}

template <class S>
S l2_norm2_vector(const StructureField<S>& sf, const BasicFormField<S>& x) {
  return l2_inner_vector(sf, x, x);
}

// Gauge vector field of the modified flow:
//   X(f) = -sharp((delta f) .| om).
// Linear in f; vanishes exactly when the 7-part of delta f does, because
// the 14-part of a 2-form is the kernel of .| om.
template <class S>
BasicFormField<S> deturck_vector_field(const StructureField<S>& bar,
                                       const BasicFormField<S>& f) {
  bar.require_positive();
  if (f.degree() != 3)
    throw std::invalid_argument("deturck_vector_field: 3-form expected");
  if (!bar.grid().same_layout(f.grid()))
    throw std::invalid_argument("deturck_vector_field: grid mismatch");
  BasicFormField<S> delta = codiff_adjoint(bar, f);
  BasicFormField<S> out(bar.grid(), 1);
  for (int64_t i = 0; i < out.nodes(); ++i) {
    const PointG2<S>& pt = bar.point(i);
    S c1[7], x1[7];
    detail::contract_point(pt, 2, 3, delta.node(i), pt.om.data(), c1);
    for (int a = 0; a < 7; ++a) x1[a] = -c1[a];
    pt.gram_apply(1, x1, out.node(i));  // raise: X^a = h^{ab} x_b
  }
  return out;
}

// Lie derivative along a vector field via Cartan's formula,
//   L_X f = X _| df + d(X _| f),
// with the discrete d.  Plain coefficient interior product, no metric.
template <class S>
BasicFormField<S> lie_derivative(const BasicFormField<S>& x,
                                 const BasicFormField<S>& f) {
  if (x.degree() != 1)
    throw std::invalid_argument("lie_derivative: vector field expected");
  if (!x.grid().same_layout(f.grid()))
    throw std::invalid_argument("lie_derivative: grid mismatch");
  const int p = f.degree();
  BasicFormField<S> out(f.grid(), p);
  if (p < 7) {
    BasicFormField<S> df = d(f);
    for (int64_t i = 0; i < out.nodes(); ++i)
      interior_vector(p + 1, x.node(i), df.node(i), out.node(i));
  }
  if (p >= 1) {
    BasicFormField<S> ix(f.grid(), p - 1);
    for (int64_t i = 0; i < out.nodes(); ++i)
      interior_vector(p, x.node(i), f.node(i), ix.node(i));
    out += d(ix);
  }
  return out;
}

// Infinitesimal orbit map X |-> L_X om applied to the background form.
template <class S>
BasicFormField<S> lambda_star(const StructureField<S>& bar,
                              const BasicFormField<S>& x) {
  return lie_derivative(x, bar.omega());
}

// Exact adjoint of lambda_star under l2_inner / l2_inner_vector:
//   lambda(tdot) = sharp((delta tdot) .| om  -  tdot .| d om),
// valid on any positive background; the second term drops when om is
// discretely closed.  Adjointness is a matrix identity here, because the
// codifferential is the exact adjoint of d and the pointwise wedge /
// interior-product pairings are metric adjoints by construction.
template <class S>
BasicFormField<S> lambda_map(const StructureField<S>& bar,
                             const BasicFormField<S>& tdot) {
  bar.require_positive();
  if (tdot.degree() != 3)
    throw std::invalid_argument("lambda_map: 3-form expected");
  if (!bar.grid().same_layout(tdot.grid()))
    throw std::invalid_argument("lambda_map: grid mismatch");
  BasicFormField<S> delta = codiff_adjoint(bar, tdot);
  BasicFormField<S> dom = d(bar.omega());
  BasicFormField<S> out(bar.grid(), 1);
  for (int64_t i = 0; i < out.nodes(); ++i) {
    const PointG2<S>& pt = bar.point(i);
    S c1[7], c2[7], x1[7];
    detail::contract_point(pt, 2, 3, delta.node(i), pt.om.data(), c1);
    detail::contract_point(pt, 3, 4, tdot.node(i), dom.node(i), c2);
    for (int a = 0; a < 7; ++a) x1[a] = c1[a] - c2[a];
    pt.gram_apply(1, x1, out.node(i));
  }
  return out;
}

// Gauged gradient: q_tilde(om) = Q(om) + L_{X(om)} om with X taken
// against the fixed background bar.  Coincides with Q wherever the gauge
// condition [delta om]_7 = 0 holds, in particular on constant fields.
template <class S>
BasicFormField<S> q_tilde(const StructureField<S>& bar,
                          const StructureField<S>& om) {
  om.require_positive();
  BasicFormField<S> out = gradient_q(om);
  BasicFormField<S> x = deturck_vector_field(bar, om.omega());
  out += lie_derivative(x, om.omega());
  return out;
}

// Lift a double field (plus optional derivative direction) into the dual
// channel for Jacobian-vector products.
BasicFormField<Dual> dual_field(const FormField& value,
                                const FormField* deriv = nullptr);

// ---- dense operators ---------------------------------------------------

struct CapacityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class OperatorKind { L, hodge_laplacian, lambda_star_normal };
// Two independent assemblies of the linearization:
//   variation      L b = -delta d b - p d delta p b - 3 d [delta b]_7
//   decomposition  -L b = Lap b + 34/21 d7_1 d1_7 f * om
//                         + *(d7_7 d7_7 a ^ om) + d7_27 d27_7 g
//                         - 2/21 d7_1 d27_7 g * om - 2/3 d7_27 d1_7 f
// where b = f * om + *(a ^ om) + g is the type split of the variation.
enum class LRoute { variation, decomposition };

// Dense assembly and eigensolves stay below this many unknowns; larger
// problems go through the matrix-free paths (Fourier blocks for flat
// spectra, sampled coercivity margins, CG for the splitting).
inline constexpr int kDenseCap = 5000;

struct OperatorMatrix {
  Eigen::MatrixXd mat;  // as assembled, not symmetrized
  OperatorKind kind = OperatorKind::L;
  const StructureField<double>* background = nullptr;  // non-owning
};

struct SpectrumResult {
  // Eigenvalues of the symmetrized operator as assembled, ascending.
  std::vector<double> eigenvalues;
  double kernel_cut = 0.0;  // 1e-8 * max |eigenvalue|
  int kernel_count = 0;     // #{ |eigenvalue| <= kernel_cut }
  // Extremes of the positive counterpart (-L for kind L, the operator
  // itself otherwise): smallest eigenvalue above the cut and the largest.
  double lambda1 = 0.0;
  double lambda_max = 0.0;
};

struct SplitResult {
  FormField omega0;    // gauge-fixed part, lambda(omega0) ~ 0
  FormField x;         // vector field (contravariant components)
  FormField lie_part;  // lambda_star(x); omega0 + lie_part == input
  double cg_residual = 0.0;
  int cg_iterations = 0;
};

struct GardingReport {
  // min over samples of  (<-L w, w> - |dw|^2 - |delta w|^2) / |w|_W^2
  // with |w|_W^2 = |w|^2 + |dw|^2 + |delta w|^2.
  double worst_margin = 0.0;
  int samples = 0;
};

// The two closed forms of the linearization, applied matrix-free at the
// flat background.
FormField l_apply(const StructureField<double>& bar, const FormField& b);
FormField l_apply_decomposed(const FormField& b);

// Dense column-by-column assembly; requires the constant flat background
// (checked) and dim = 35 * nodes <= kDenseCap (CapacityError otherwise).
OperatorMatrix assemble_L(const StructureField<double>& bar, LRoute route);

// L, the 3-form Hodge Laplacian (adjoint codifferential), or the normal
// operator lambda lambda_star on vector fields (dim 7 * nodes).
OperatorMatrix assemble_operator(const StructureField<double>& bar,
                                 OperatorKind kind,
                                 LRoute route = LRoute::variation);

// The orbit map itself as a (35 nodes) x (7 nodes) matrix.
Eigen::MatrixXd assemble_lambda_star(const StructureField<double>& bar);

// Dense symmetric eigensolve with the fixed kernel cut.
SpectrumResult spectrum(const OperatorMatrix& op);

// Spectrum of the flat-background L from its per-wavevector symbol
// blocks: exact for the constant-coefficient stencil operator, no dense
// cap, used to reach grids beyond kDenseCap.
SpectrumResult flat_l_spectrum_fourier(const TorusGrid& g);

// Sampled coercivity margins of -L against the Hodge--Dirac energy.
GardingReport garding_check(const StructureField<double>& bar, int samples,
                            SplitMix64& rng);
GardingReport garding_check(const OperatorMatrix& op, int samples,
                            SplitMix64& rng);

// Split f = omega0 + lambda_star(X) with omega0 orthogonal to the orbit
// directions, by CG on the normal equations restricted to the complement
// of the constant vector fields.  Throws std::runtime_error with the
// residual when CG stalls.
SplitResult orbit_slice_split(const StructureField<double>& bar,
                              const FormField& f, double tol = 1e-10,
                              int max_iterations = 2000);

// Quadratic remainder of the gauged gradient:
//   R = q_tilde(omega_prime + eps*w) - eps * (d/dt q_tilde(omega_prime + t*w))|_0
// with the derivative pushed through the dual channel.
FormField remainder(const StructureField<double>& bar,
                    const StructureField<double>& omega_prime,
                    const FormField& w, double eps);

// ---- reports -----------------------------------------------------------

void write_spectrum_csv(std::ostream& os, const SpectrumResult& s);
void write_spectrum_json(std::ostream& os, const SpectrumResult& s);
void write_split_json(std::ostream& os, const StructureField<double>& bar,
                      const SplitResult& s);

}  // namespace g2flow
