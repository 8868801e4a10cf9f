#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "test_helpers.hpp"

using namespace g2flow;
using namespace g2flow::test;

// ==== basis bookkeeping =====================================================

TEST_CASE("degree dimensions and lex ranks") {
  const auto& t = MultiIndexTables::instance();
  for (int p = 0; p <= 7; ++p)
    CHECK(static_cast<int>(t.mask_of[p].size()) == kDegreeDim[p]);
  // First and last degree-3 subsets in lex order.
  CHECK(t.axes_of[3][0][0] == 0);
  CHECK(t.axes_of[3][0][1] == 1);
  CHECK(t.axes_of[3][0][2] == 2);
  CHECK(t.axes_of[3][34][0] == 4);
  CHECK(t.axes_of[3][34][1] == 5);
  CHECK(t.axes_of[3][34][2] == 6);
}

TEST_CASE("complement signs match wedge to the top form") {
  const auto& t = MultiIndexTables::instance();
  for (int p = 0; p <= 7; ++p) {
    for (int r = 0; r < kDegreeDim[p]; ++r) {
      AlternatingForm a(p), b(7 - p);
      a[r] = 1.0;
      b[t.complement_rank[p][r]] = 1.0;
      AlternatingForm top = wedge(a, b);
      CHECK(top[0] == static_cast<double>(t.complement_sign[p][r]));
    }
  }
}

// ==== wedge =================================================================

TEST_CASE("wedge of basis covectors") {
  AlternatingForm e1 = AlternatingForm::basis("1");
  AlternatingForm e2 = AlternatingForm::basis("2");
  CHECK(rel_err(wedge(e1, e2), AlternatingForm::basis("12")) == 0.0);
  CHECK(rel_err(wedge(e2, e1), AlternatingForm::basis("12", -1.0)) == 0.0);
}

TEST_CASE("wedge relations of the su(3) package") {
  AlternatingForm om = reference_omega2();
  AlternatingForm psip = reference_psi_plus();
  AlternatingForm psim = reference_psi_minus();
  CHECK(wedge(om, psip).max_abs() == 0.0);
  CHECK(wedge(om, psim).max_abs() == 0.0);
  // psi+ ^ psi- = (2/3) omega^3 = 4 e^{123456}.
  AlternatingForm want6 = AlternatingForm::basis("123456", 4.0);
  CHECK(rel_err(wedge(psip, psim), want6) < 1e-15);
  AlternatingForm om3 = wedge(om, wedge(om, om));
  CHECK(rel_err(om3, AlternatingForm::basis("123456", 6.0)) < 1e-15);
}

TEST_CASE("graded commutativity and associativity") {
  SplitMix64 rng(2024001);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    int p = static_cast<int>(rng.below(4));
    int q = static_cast<int>(rng.below(4));
    int r = static_cast<int>(rng.below(8 - p - q > 0 ? 8 - p - q : 1));
    AlternatingForm a = random_form(rng, p);
    AlternatingForm b = random_form(rng, q);
    AlternatingForm c = random_form(rng, r);
    double sign = (p * q % 2 == 0) ? 1.0 : -1.0;
    worst = std::max(worst, rel_err(wedge(a, b), sign * wedge(b, a)));
    worst = std::max(worst,
                     rel_err(wedge(wedge(a, b), c), wedge(a, wedge(b, c))));
  }
  CHECK(worst < 1e-12);
}

// ==== inner product and Hodge star =========================================

TEST_CASE("reference norms at the identity metric") {
  MetricTensor id = MetricTensor::identity();
  AlternatingForm omega3 = reference_form3();
  CHECK(std::fabs(inner(omega3, omega3, id) - 7.0) < 1e-14);
  AlternatingForm xi = AlternatingForm::basis("7");
  CHECK(std::fabs(norm2(wedge(xi, omega3), id) - 4.0) < 1e-14);
  CHECK(std::fabs(norm2(wedge(xi, reference_form4()), id) - 3.0) < 1e-14);
  CHECK(std::fabs(norm2(reference_psi_plus(), id) - 4.0) < 1e-14);
  CHECK(std::fabs(norm2(reference_psi_minus(), id) - 4.0) < 1e-14);
}

TEST_CASE("hodge star of the reference 3-form") {
  MetricTensor id = MetricTensor::identity();
  CHECK(rel_err(hodge(reference_form3(), id), reference_form4()) < 1e-15);
  CHECK(rel_err(hodge(reference_form4(), id), reference_form3()) < 1e-15);
}

TEST_CASE("hodge star of 1 is the volume form") {
  SplitMix64 rng(2024002);
  for (int trial = 0; trial < 50; ++trial) {
    MetricTensor m = random_metric(rng);
    AlternatingForm one(0);
    one[0] = 1.0;
    AlternatingForm v = hodge(one, m);
    CHECK(std::fabs(v[0] - m.vol_scale()) < 1e-12 * m.vol_scale());
  }
}

TEST_CASE("hodge involution and defining property at random metrics") {
  SplitMix64 rng(2024003);
  double worst_inv = 0.0, worst_def = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    MetricTensor m = random_metric(rng);
    int p = static_cast<int>(rng.below(8));
    AlternatingForm a = random_form(rng, p);
    AlternatingForm b = random_form(rng, p);
    worst_inv = std::max(worst_inv, rel_err(hodge(hodge(a, m), m), a));
    // a ^ hodge(b) = <a,b> vol e^{1..7}
    double lhs = wedge(a, hodge(b, m))[0];
    double rhs = inner(a, b, m) * m.vol_scale();
    worst_def =
        std::max(worst_def, std::fabs(lhs - rhs) / (1.0 + std::fabs(rhs)));
  }
  CHECK(worst_inv < 1e-12);
  CHECK(worst_def < 1e-12);
}

// ==== contraction ===========================================================

TEST_CASE("contraction anchors at the identity metric") {
  MetricTensor id = MetricTensor::identity();
  AlternatingForm got =
      contract(AlternatingForm::basis("12"), AlternatingForm::basis("12345"), id);
  CHECK(rel_err(got, AlternatingForm::basis("345")) < 1e-14);

  AlternatingForm omega3 = reference_form3();
  AlternatingForm e1 = AlternatingForm::basis("1");
  AlternatingForm want = AlternatingForm::from_terms(
      2, {{"27", 1.0}, {"35", 1.0}, {"46", -1.0}});
  CHECK(rel_err(contract(e1, omega3, id), want) < 1e-14);
  // Contracting twice against the 3-form recovers 3x the covector.
  AlternatingForm twice = contract(contract(e1, omega3, id), omega3, id);
  CHECK(rel_err(twice, AlternatingForm::basis("1", 3.0)) < 1e-13);
}

TEST_CASE("contraction is adjoint to wedge") {
  SplitMix64 rng(2024004);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    MetricTensor m = random_metric(rng);
    int k = 1 + static_cast<int>(rng.below(3));
    int l = k + static_cast<int>(rng.below(1 + (7 - k > 3 ? 3 : 7 - k)));
    AlternatingForm a = random_form(rng, k);
    AlternatingForm b = random_form(rng, l);
    AlternatingForm c = random_form(rng, l - k);
    double lhs = inner(contract(a, b, m), c, m);
    double rhs = inner(b, wedge(a, c), m);
    worst = std::max(worst, std::fabs(lhs - rhs) / (1.0 + std::fabs(rhs)));
  }
  CHECK(worst < 1e-12);
}

// ==== gram matrices and pullback ===========================================

TEST_CASE("complement route for high-degree gram matrices matches minors") {
  SplitMix64 rng(2024005);
  for (int trial = 0; trial < 20; ++trial) {
    MetricTensor m = random_metric(rng);
    for (int p = 4; p <= 7; ++p) {
      Eigen::MatrixXd direct = compound_matrix(m.inverse(), p);
      double scale = direct.cwiseAbs().maxCoeff();
      CHECK((m.gram(p) - direct).cwiseAbs().maxCoeff() < 1e-12 * scale);
    }
  }
}

TEST_CASE("compound matrices are multiplicative") {
  SplitMix64 rng(2024006);
  MetricTensor m = random_metric(rng);
  for (int p = 1; p <= 7; ++p) {
    Eigen::MatrixXd prod = compound_matrix(m.inverse(), p) * compound_matrix(m.g(), p);
    CHECK((prod - Eigen::MatrixXd::Identity(kDegreeDim[p], kDegreeDim[p]))
              .cwiseAbs()
              .maxCoeff() < 1e-10);
  }
}

TEST_CASE("pullback composes contravariantly and respects wedge") {
  SplitMix64 rng(2024007);
  for (int trial = 0; trial < 100; ++trial) {
    Matrix7d a = random_gl7(rng), b = random_gl7(rng);
    int p = 1 + static_cast<int>(rng.below(3));
    int q = 1 + static_cast<int>(rng.below(3));
    AlternatingForm f = random_form(rng, p);
    AlternatingForm h = random_form(rng, q);
    // (AB)* = B* A*
    CHECK(rel_err(pullback(a * b, f), pullback(b, pullback(a, f))) < 1e-12);
    CHECK(rel_err(pullback(a, wedge(f, h)), wedge(pullback(a, f), pullback(a, h)))
          < 1e-12);
  }
  Matrix7d a = random_gl7(rng);
  AlternatingForm top(7);
  top[0] = 1.0;
  CHECK(std::fabs(pullback(a, top)[0] - a.determinant()) < 1e-12);
}
