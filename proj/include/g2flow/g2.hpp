#pragma once

// Pointwise structure attached to a positive (stable) 3-form on R^7:
// induced metric and volume, dual 4-form, the type decompositions of
// 2- and 3-forms, and the curly-p endomorphism used by the Hodge-dual
// derivative.

#include <stdexcept>
#include <tuple>
#include <utility>

#include "g2flow/exterior.hpp"
#include "g2flow/form.hpp"
#include "g2flow/metric.hpp"

namespace g2flow {

// The reference positive 3-form:
// e^127 + e^347 + e^567 + e^135 - e^146 - e^236 - e^245.
AlternatingForm reference_positive_form();

struct PositivityReport {
  bool positive = false;
  int n_negative = 0, n_zero = 0, n_positive = 0;
  double min_eigenvalue = 0.0;
  double trace = 0.0;
};

class PositivityError : public std::runtime_error {
 public:
  explicit PositivityError(const PositivityReport& report);
  PositivityReport report;
};

// The symmetric bilinear form B with B(u,v) e^{1..7} =
// (1/6) (u .| form) ^ (v .| form) ^ form  (interior products, no metric).
Matrix7d bilinear_from_form(const AlternatingForm& form3);

// Eigenvalue check of B; a form is positive when the smallest eigenvalue
// clears 1e-10 * trace / 7.
PositivityReport is_positive(const AlternatingForm& form3);

// Normalized induced metric g = (det B)^{-1/9} B; throws PositivityError.
MetricTensor metric_from_form(const AlternatingForm& form3);

class G2Structure {
 public:
  // Builds the full structure; throws PositivityError when the form is not
  // positive.
  explicit G2Structure(const AlternatingForm& form3);

  const AlternatingForm& omega3() const { return omega3_; }
  const MetricTensor& metric() const { return metric_; }
  double vol() const { return metric_.vol_scale(); }
  const AlternatingForm& theta() const { return theta_; }

  // Type projectors, assembled numerically from equivariant spanning maps
  // and orthonormalization in the induced inner product.
  const Eigen::MatrixXd& proj2_7() const { return proj2_7_; }
  const Eigen::MatrixXd& proj2_14() const { return proj2_14_; }
  const Eigen::MatrixXd& proj3_1() const { return proj3_1_; }
  const Eigen::MatrixXd& proj3_7() const { return proj3_7_; }
  const Eigen::MatrixXd& proj3_27() const { return proj3_27_; }
  // p = (4/3) proj3_1 + proj3_7 - proj3_27.
  const Eigen::MatrixXd& p_matrix() const { return p_matrix_; }

 private:
  AlternatingForm omega3_;
  MetricTensor metric_;
  AlternatingForm theta_;
  Eigen::MatrixXd proj2_7_, proj2_14_, proj3_1_, proj3_7_, proj3_27_, p_matrix_;
};

// Split of a 2-form into its 7- and 14-dimensional types, computed from the
// wedge eigenvalue characterization: t7 = (t + hodge(t ^ omega))/3,
// t14 = (2 t - hodge(t ^ omega))/3.
std::pair<AlternatingForm, AlternatingForm> project2(const G2Structure& s,
                                                     const AlternatingForm& t2);

// Split of a 3-form into (t1, t7, t27) via the assembled projectors.
std::tuple<AlternatingForm, AlternatingForm, AlternatingForm> project3(
    const G2Structure& s, const AlternatingForm& t3);

// The self-adjoint isomorphism p = (4/3)[.]_1 + [.]_7 - [.]_27 of 3-forms.
AlternatingForm p_apply(const G2Structure& s, const AlternatingForm& t3);

// Derivative of form |-> hodge dual along tdot: equals hodge(p(tdot)).
AlternatingForm theta_derivative(const G2Structure& s,
                                 const AlternatingForm& tdot);

// Derivative of the volume functional density along tdot: the coefficient
// of (1/3) theta ^ tdot against e^{1...7}.
double hitchin_derivative(const G2Structure& s, const AlternatingForm& tdot);

// Pullback matrix of A on degree-p coefficients (columns are pullbacks of
// basis covectors).
Eigen::MatrixXd pullback_matrix(const Matrix7d& A, int degree);

}  // namespace g2flow
