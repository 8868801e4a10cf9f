#include "g2flow/g2.hpp"

#include <cmath>

namespace g2flow {

AlternatingForm reference_positive_form() {
  return AlternatingForm::from_terms(3, {{"127", 1.0},
                                         {"347", 1.0},
                                         {"567", 1.0},
                                         {"135", 1.0},
                                         {"146", -1.0},
                                         {"236", -1.0},
                                         {"245", -1.0}});
}

PositivityError::PositivityError(const PositivityReport& r)
    : std::runtime_error("3-form is not positive (min eigenvalue " +
                         std::to_string(r.min_eigenvalue) + ")"),
      report(r) {}

namespace {

// Interior product of the 3-form with the u-th coordinate vector (plain
// coefficient contraction, no metric).
AlternatingForm interior_basis(const AlternatingForm& form3, int u) {
  const auto& t = MultiIndexTables::instance();
  AlternatingForm out(2);
  for (int r = 0; r < kDegreeDim[3]; ++r) {
    if (form3[r] == 0.0) continue;
    uint8_t mask = t.mask_of[3][r];
    uint8_t bit = 1u << u;
    if (!(mask & bit)) continue;
    // Position of u within the ascending triple fixes the sign.
    int pos = 0;
    for (int i = 0; i < 3; ++i)
      if (t.axes_of[3][r][i] == u) pos = i;
    double sign = (pos % 2 == 0) ? 1.0 : -1.0;
    out[t.rank_of[static_cast<uint8_t>(mask & ~bit)]] += sign * form3[r];
  }
  return out;
}

}  // namespace

Matrix7d bilinear_from_form(const AlternatingForm& form3) {
  if (form3.degree() != 3)
    throw std::invalid_argument("bilinear_from_form needs a 3-form");
  std::array<AlternatingForm, 7> iu;
  for (int u = 0; u < 7; ++u) iu[u] = interior_basis(form3, u);
  Matrix7d b;
  for (int u = 0; u < 7; ++u) {
    for (int v = u; v < 7; ++v) {
      double top = wedge(wedge(iu[u], iu[v]), form3)[0];
      b(u, v) = b(v, u) = top / 6.0;
    }
  }
  return b;
}

PositivityReport is_positive(const AlternatingForm& form3) {
  Matrix7d b = bilinear_from_form(form3);
  Eigen::SelfAdjointEigenSolver<Matrix7d> es(b);
  PositivityReport rep;
  rep.trace = b.trace();
  rep.min_eigenvalue = es.eigenvalues()[0];
  double zero_band = 1e-12 * std::max(1.0, b.cwiseAbs().maxCoeff());
  for (int i = 0; i < 7; ++i) {
    double ev = es.eigenvalues()[i];
    if (ev > zero_band)
      ++rep.n_positive;
    else if (ev < -zero_band)
      ++rep.n_negative;
    else
      ++rep.n_zero;
  }
  rep.positive =
      rep.min_eigenvalue > 1e-10 * rep.trace / 7.0 && rep.min_eigenvalue > 0.0;
  return rep;
}

MetricTensor metric_from_form(const AlternatingForm& form3) {
  PositivityReport rep = is_positive(form3);
  if (!rep.positive) throw PositivityError(rep);
  Matrix7d b = bilinear_from_form(form3);
  double scale = std::pow(b.determinant(), -1.0 / 9.0);
  return MetricTensor(scale * b);
}

namespace {

// Gram-Schmidt in the inner product given by `gram`; columns of v are
// replaced by an orthonormal spanning set (must be independent).
void orthonormalize(Eigen::MatrixXd& v, const Eigen::MatrixXd& gram) {
  for (int j = 0; j < v.cols(); ++j) {
    for (int rep = 0; rep < 2; ++rep)  // twice for numerical stability
      for (int k = 0; k < j; ++k)
        v.col(j) -= v.col(k).dot(gram * v.col(j)) * v.col(k);
    double n = std::sqrt(v.col(j).dot(gram * v.col(j)));
    if (n < 1e-13)
      throw std::runtime_error("projector span is numerically degenerate");
    v.col(j) /= n;
  }
}

}  // namespace

G2Structure::G2Structure(const AlternatingForm& form3)
    : omega3_(form3),
      metric_(metric_from_form(form3)),
      theta_(hodge(form3, metric_)) {
  const Eigen::MatrixXd& g2 = metric_.gram(2);
  const Eigen::MatrixXd& g3 = metric_.gram(3);

  // Lambda^2_7 is spanned by contractions of covectors into the 3-form.
  Eigen::MatrixXd span27(kDegreeDim[2], 7);
  for (int i = 0; i < 7; ++i) {
    AlternatingForm ei(1);
    ei[i] = 1.0;
    AlternatingForm w = contract(ei, omega3_, metric_);
    for (int r = 0; r < w.size(); ++r) span27(r, i) = w[r];
  }
  orthonormalize(span27, g2);
  proj2_7_ = span27 * span27.transpose() * g2;
  proj2_14_ = Eigen::MatrixXd::Identity(21, 21) - proj2_7_;

  // Lambda^3_1 = span of the form itself.
  Eigen::MatrixXd span31(kDegreeDim[3], 1);
  for (int r = 0; r < omega3_.size(); ++r) span31(r, 0) = omega3_[r];
  orthonormalize(span31, g3);
  proj3_1_ = span31 * span31.transpose() * g3;

  // Lambda^3_7 = span of hodge(covector ^ form).
  Eigen::MatrixXd span37(kDegreeDim[3], 7);
  for (int i = 0; i < 7; ++i) {
    AlternatingForm ei(1);
    ei[i] = 1.0;
    AlternatingForm w = hodge(wedge(ei, omega3_), metric_);
    for (int r = 0; r < w.size(); ++r) span37(r, i) = w[r];
  }
  orthonormalize(span37, g3);
  proj3_7_ = span37 * span37.transpose() * g3;

  proj3_27_ = Eigen::MatrixXd::Identity(35, 35) - proj3_1_ - proj3_7_;
  p_matrix_ = (4.0 / 3.0) * proj3_1_ + proj3_7_ - proj3_27_;
}

std::pair<AlternatingForm, AlternatingForm> project2(
    const G2Structure& s, const AlternatingForm& t2) {
  if (t2.degree() != 2) throw std::invalid_argument("project2 needs a 2-form");
  AlternatingForm sw = hodge(wedge(t2, s.omega3()), s.metric());
  AlternatingForm t7 = (1.0 / 3.0) * (t2 + sw);
  AlternatingForm t14 = (1.0 / 3.0) * (2.0 * t2 - sw);
  return {t7, t14};
}

namespace {

AlternatingForm apply_matrix(const Eigen::MatrixXd& m,
                             const AlternatingForm& f) {
  Eigen::Map<const Eigen::VectorXd> v(f.coeffs().data(), f.size());
  Eigen::VectorXd out = m * v;
  AlternatingForm r(f.degree());
  for (int i = 0; i < r.size(); ++i) r[i] = out[i];
  return r;
}

}  // namespace

std::tuple<AlternatingForm, AlternatingForm, AlternatingForm> project3(
    const G2Structure& s, const AlternatingForm& t3) {
  if (t3.degree() != 3) throw std::invalid_argument("project3 needs a 3-form");
  return {apply_matrix(s.proj3_1(), t3), apply_matrix(s.proj3_7(), t3),
          apply_matrix(s.proj3_27(), t3)};
}

AlternatingForm p_apply(const G2Structure& s, const AlternatingForm& t3) {
  if (t3.degree() != 3) throw std::invalid_argument("p_apply needs a 3-form");
  return apply_matrix(s.p_matrix(), t3);
}

AlternatingForm theta_derivative(const G2Structure& s,
                                 const AlternatingForm& tdot) {
  return hodge(p_apply(s, tdot), s.metric());
}

double hitchin_derivative(const G2Structure& s, const AlternatingForm& tdot) {
  if (tdot.degree() != 3)
    throw std::invalid_argument("hitchin_derivative needs a 3-form");
  return wedge(s.theta(), tdot)[0] / 3.0;
}

Eigen::MatrixXd pullback_matrix(const Matrix7d& A, int degree) {
  int n = kDegreeDim[degree];
  Eigen::MatrixXd out(n, n);
  for (int j = 0; j < n; ++j) {
    AlternatingForm basis(degree);
    basis[j] = 1.0;
    AlternatingForm pb = pullback(A, basis);
    for (int i = 0; i < n; ++i) out(i, j) = pb[i];
  }
  return out;
}

}  // namespace g2flow
