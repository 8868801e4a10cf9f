#pragma once

// A field of pointwise structures over a TorusGrid and the calculus that
// couples stencil derivatives to the varying metric: Hodge stars, the two
// codifferentials, Laplacians, L2 inner products and type projections.
//
// Two codifferentials coexist by design.  codiff_adjoint is the exact
// matrix adjoint of the discrete d in the discrete L2 product, so
// integration by parts holds to roundoff on any grid; codiff_analytic is
// the textbook (-1)^p * d * composition, which matches the adjoint one
// exactly on flat constant structures and up to truncation error
// elsewhere.  Operators that must be symmetric use the adjoint form;
// operators compared against closed-form calculations use the analytic
// form.

#include <Eigen/Dense>
#include <optional>

#include "g2flow/field.hpp"
#include "g2flow/g2.hpp"
#include "g2flow/point.hpp"

namespace g2flow {

template <class S>
class StructureField {
 public:
  explicit StructureField(const BasicFormField<S>& omega3)
      : omega_(omega3), pts_(static_cast<size_t>(omega3.nodes())) {
    if (omega3.degree() != 3)
      throw std::invalid_argument("structure field needs a 3-form");
    for (int64_t i = 0; i < omega_.nodes(); ++i) {
      if (!pts_[static_cast<size_t>(i)].build(omega_.node(i))) {
        positive_ = false;
        failure_node_ = i;
        AlternatingForm f(3);
        for (int r = 0; r < 35; ++r) f[r] = scalar_value(omega_.at(i, r));
        failure_report_ = is_positive(f);
        return;
      }
    }
  }

  // Constant reference structure on every node (torsion-free, flat).
  static StructureField flat(const TorusGrid& g) {
    return StructureField(
        constant_field<S>(g, 3, reference_positive_form().coeffs()));
  }

  bool positive() const { return positive_; }
  int64_t failure_node() const { return failure_node_; }
  const PositivityReport& failure_report() const { return failure_report_; }
  void require_positive() const {
    if (!positive_) throw PositivityError(failure_report_);
  }

  const BasicFormField<S>& omega() const { return omega_; }
  const TorusGrid& grid() const { return omega_.grid(); }
  const PointG2<S>& point(int64_t i) const {
    return pts_[static_cast<size_t>(i)];
  }

  BasicFormField<S> theta_field() const {
    BasicFormField<S> out(grid(), 4);
    for (int64_t i = 0; i < omega_.nodes(); ++i)
      for (int r = 0; r < 35; ++r) out.at(i, r) = point(i).theta4[r];
    return out;
  }

  // Total volume (the volume functional of the structure).
  S total_volume() const {
    std::vector<S> terms(static_cast<size_t>(omega_.nodes()));
    const double cell = grid().cell();
    for (int64_t i = 0; i < omega_.nodes(); ++i)
      terms[static_cast<size_t>(i)] = S(cell) * point(i).vol;
    return detail::pairwise_sum(terms);
  }

  // Smallest eigenvalue of the induced metric over all nodes (value
  // parts); a positivity margin for step-size control and diagnostics.
  double min_metric_eigenvalue() const {
    double m = std::numeric_limits<double>::infinity();
    for (int64_t i = 0; i < omega_.nodes(); ++i) {
      Eigen::Matrix<double, 7, 7> g;
      for (int r = 0; r < 7; ++r)
        for (int c = 0; c < 7; ++c)
          g(r, c) = scalar_value(point(i).g[r * 7 + c]);
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 7, 7>> es(g);
      m = std::min(m, es.eigenvalues().minCoeff());
    }
    return m;
  }

 private:
  BasicFormField<S> omega_;
  std::vector<PointG2<S>> pts_;
  bool positive_ = true;
  int64_t failure_node_ = -1;
  PositivityReport failure_report_;
};

// Attempts to build; empty when the form leaves the positive cone.
template <class S>
std::optional<StructureField<S>> try_structure(const BasicFormField<S>& omega) {
  StructureField<S> sf(omega);
  if (!sf.positive()) return std::nullopt;
  return sf;
}

template <class S>
BasicFormField<S> hodge_field(const StructureField<S>& sf,
                              const BasicFormField<S>& x) {
  const int p = x.degree();
  BasicFormField<S> out(sf.grid(), 7 - p);
  for (int64_t i = 0; i < x.nodes(); ++i)
    sf.point(i).hodge(p, x.node(i), out.node(i));
  return out;
}

// L2 inner product with metric weight and volume density, pairwise-reduced.
template <class S>
S l2_inner(const StructureField<S>& sf, const BasicFormField<S>& a,
           const BasicFormField<S>& b) {
  a.check_compatible(b);
  std::vector<S> terms(static_cast<size_t>(a.nodes()));
  const double cell = sf.grid().cell();
  for (int64_t i = 0; i < a.nodes(); ++i)
    terms[static_cast<size_t>(i)] =
        S(cell) * sf.point(i).vol *
        sf.point(i).inner(a.degree(), a.node(i), b.node(i));
  return detail::pairwise_sum(terms);
}

template <class S>
S l2_norm2(const StructureField<S>& sf, const BasicFormField<S>& a) {
  return l2_inner(sf, a, a);
}

// Exact adjoint of d in the discrete L2 product:
//   <codiff_adjoint b, c> = <b, d c>  for every c, to roundoff.
template <class S>
BasicFormField<S> codiff_adjoint(const StructureField<S>& sf,
                                 const BasicFormField<S>& b) {
  const int p = b.degree();
  if (p < 1) throw std::invalid_argument("codifferential needs degree >= 1");
  BasicFormField<S> tmp(sf.grid(), p);
  for (int64_t i = 0; i < b.nodes(); ++i) {
    sf.point(i).gram_apply(p, b.node(i), tmp.node(i));
    S v = sf.point(i).vol;
    for (int r = 0; r < tmp.dim(); ++r) tmp.at(i, r) *= v;
  }
  BasicFormField<S> dt = d_transpose(tmp);
  BasicFormField<S> out(sf.grid(), p - 1);
  for (int64_t i = 0; i < b.nodes(); ++i) {
    sf.point(i).gram_inv_apply(p - 1, dt.node(i), out.node(i));
    S v = sf.point(i).vol;
    for (int r = 0; r < out.dim(); ++r) out.at(i, r) /= v;
  }
  return out;
}

// Composition form (-1)^p * d * on p-forms (7 dimensions, Riemannian).
template <class S>
BasicFormField<S> codiff_analytic(const StructureField<S>& sf,
                                  const BasicFormField<S>& b) {
  const int p = b.degree();
  if (p < 1) throw std::invalid_argument("codifferential needs degree >= 1");
  BasicFormField<S> s1 = hodge_field(sf, b);
  BasicFormField<S> s2 = d(s1);
  BasicFormField<S> out = hodge_field(sf, s2);
  if (p % 2 == 1) out *= S(-1.0);
  return out;
}

enum class CodiffKind { adjoint, analytic };

template <class S>
BasicFormField<S> codiff(const StructureField<S>& sf,
                         const BasicFormField<S>& b, CodiffKind kind) {
  return kind == CodiffKind::adjoint ? codiff_adjoint(sf, b)
                                     : codiff_analytic(sf, b);
}

// Hodge Laplacian d delta + delta d.
template <class S>
BasicFormField<S> laplacian(const StructureField<S>& sf,
                            const BasicFormField<S>& x,
                            CodiffKind kind = CodiffKind::adjoint) {
  const int p = x.degree();
  BasicFormField<S> out(sf.grid(), p);
  if (p > 0) out += d(codiff(sf, x, kind));
  if (p < 7) out += codiff(sf, d(x), kind);
  return out;
}

template <class S>
BasicFormField<S> p_apply_field(const StructureField<S>& sf,
                                const BasicFormField<S>& t) {
  BasicFormField<S> out(sf.grid(), 3);
  for (int64_t i = 0; i < t.nodes(); ++i)
    sf.point(i).p_apply(t.node(i), out.node(i));
  return out;
}

template <class S>
void project3_field(const StructureField<S>& sf, const BasicFormField<S>& t,
                    BasicFormField<S>& t1, BasicFormField<S>& t7,
                    BasicFormField<S>& t27) {
  t1 = BasicFormField<S>(sf.grid(), 3);
  t7 = BasicFormField<S>(sf.grid(), 3);
  t27 = BasicFormField<S>(sf.grid(), 3);
  for (int64_t i = 0; i < t.nodes(); ++i)
    sf.point(i).project3(t.node(i), t1.node(i), t7.node(i), t27.node(i));
}

template <class S>
void project2_field(const StructureField<S>& sf, const BasicFormField<S>& s,
                    BasicFormField<S>& s7, BasicFormField<S>& s14) {
  s7 = BasicFormField<S>(sf.grid(), 2);
  s14 = BasicFormField<S>(sf.grid(), 2);
  for (int64_t i = 0; i < s.nodes(); ++i)
    sf.point(i).project2(s.node(i), s7.node(i), s14.node(i));
}

}  // namespace g2flow
