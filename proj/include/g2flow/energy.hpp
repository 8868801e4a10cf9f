#pragma once

// Dirichlet energy of a structure field, the exact negative L2-gradient
// of its discretization, and the Laplacian-flow right-hand side.
//
// The energy is
//
//   D = 1/2 integral ( |d om|^2 + |d theta(om)|^2 ) vol,
//
// quadrature by the midpoint sum.  gradient_q differentiates this
// discrete sum exactly: the stencil transpose handles the d-layers, the
// dual-form Jacobian transpose handles the theta dependence, and the
// metric-variation chain in PointG2 handles the |.|^2 vol weights.  The
// returned field Q satisfies
//
//   <Q, tdot>_{L2_om} = - d/dt D(om + t tdot) |_{t=0}
//
// for the discrete D, so gradient descent on Q decreases the actual
// computed energy.  The whole chain is scalar-templated; pushing Dual
// scalars through gives exact Jacobian-vector products of Q itself.

#include <array>
#include <vector>

#include "g2flow/calculus.hpp"

namespace g2flow {

struct EnergyReport {
  double dirichlet = 0.0;      // D
  double torsion_d = 0.0;      // ||d om||^2_{L2}
  double torsion_delta = 0.0;  // ||delta om||^2_{L2} (= ||d theta||^2)
  double hitchin = 0.0;        // H = integral vol
};

// Evaluates the report; cross-checks the |d theta|^2 quadrature against
// the ||delta om||^2 one (a pointwise star isometry, so they must agree
// to roundoff) and throws std::runtime_error if they drift apart.
EnergyReport energy(const StructureField<double>& sf);

// Hodge Laplacian of the defining 3-form, d delta + delta d with the
// analytic codifferential; the right-hand side of the Laplacian flow.
FormField laplacian_flow_rhs(const StructureField<double>& sf);

// Quadrature of |d tdot|^2 + |d (star p tdot)|^2 at a torsion-free
// background: the second variation of D along tdot.  Throws
// std::invalid_argument when the background has torsion.
double second_variation(const StructureField<double>& background,
                        const FormField& tdot);

// Exact negative gradient of the discrete Dirichlet energy in the
// L2-metric of the field itself.
template <class S>
BasicFormField<S> gradient_q(const StructureField<S>& sf) {
  sf.require_positive();
  const TorusGrid& g = sf.grid();
  const double cell = g.cell();
  const int64_t n = g.nodes();

  BasicFormField<S> u4 = d(sf.omega());
  BasicFormField<S> u5 = d(sf.theta_field());

  // Complement proxies of the derivative fields (kept for the metric
  // path) and the L2-duals that feed the stencil transposes.
  std::vector<S> v4t(static_cast<size_t>(35 * n));
  std::vector<S> v5t(static_cast<size_t>(21 * n));
  BasicFormField<S> a4(g, 4), b5(g, 5);
  for (int64_t i = 0; i < n; ++i) {
    const PointG2<S>& p = sf.point(i);
    S* w4 = &v4t[static_cast<size_t>(35 * i)];
    S* w5 = &v5t[static_cast<size_t>(21 * i)];
    tilde_complement(4, u4.node(i), w4);
    tilde_complement(5, u5.node(i), w5);
    p.dual4(w4, cell, a4.node(i));
    p.dual5(w5, cell, b5.node(i));
  }

  // Euclidean gradient of the discrete D: the d om path, the theta path
  // pulled back through the dual-form Jacobian, and the metric path.
  BasicFormField<S> grad = d_transpose(a4);
  BasicFormField<S> w4f = d_transpose(b5);
  for (int64_t i = 0; i < n; ++i) {
    const PointG2<S>& p = sf.point(i);
    std::array<S, 35> t3;
    p.theta_adjoint(w4f.node(i), t3.data());
    for (int r = 0; r < 35; ++r) grad.at(i, r) += t3[r];
    p.metric_gradient(&v4t[static_cast<size_t>(35 * i)],
                      &v5t[static_cast<size_t>(21 * i)], 0.5 * cell,
                      grad.node(i));
  }

  // Raise to the L2_om gradient: Q = -(cell vol gram3)^{-1} grad.
  BasicFormField<S> q(g, 3);
  for (int64_t i = 0; i < n; ++i) {
    const PointG2<S>& p = sf.point(i);
    p.gram_inv_apply(3, grad.node(i), q.node(i));
    S f = S(-1.0) / (S(cell) * p.vol);
    for (int r = 0; r < 35; ++r) q.at(i, r) *= f;
  }
  return q;
}

}  // namespace g2flow
