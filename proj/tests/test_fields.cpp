#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <sstream>

#include "doctest.h"
#include "g2flow/calculus.hpp"
#include "g2flow/field.hpp"
#include "g2flow/grid.hpp"
#include "test_helpers.hpp"

using namespace g2flow;
using namespace g2flow::test;

namespace {

TorusGrid grid2(int n, int fd_order, double l0 = 1.0, double l1 = 1.0) {
  return TorusGrid({n, n, 1, 1, 1, 1, 1}, {l0, l1, 1, 1, 1, 1, 1}, fd_order);
}

double field_rel_err(const FormField& got, const FormField& want) {
  double scale = 1.0 + want.max_abs();
  double m = 0.0;
  for (size_t i = 0; i < got.data().size(); ++i)
    m = std::max(m, std::fabs(got.data()[i] - want.data()[i]));
  return m / scale;
}

// A smooth positive structure field: reference form plus a small sampled
// trig perturbation (stays well inside the positive cone).
StructureField<double> wavy_structure(const TorusGrid& g, SplitMix64& rng,
                                      double amp) {
  TrigForm pert = random_trig_form(g, 3, rng, 3, 1);
  FormField om = constant_field<double>(g, 3, reference_positive_form().coeffs());
  om.axpy(amp, sample(g, pert));
  StructureField<double> sf(om);
  REQUIRE(sf.positive());
  return sf;
}

}  // namespace

// ==== grid layout ====

TEST_CASE("grid validates node counts, periods and stencil order") {
  CHECK_THROWS_AS(grid2(8, 3), std::invalid_argument);
  CHECK_THROWS_AS(grid2(2, 2), std::invalid_argument);
  CHECK_THROWS_AS(grid2(4, 4), std::invalid_argument);
  CHECK_THROWS_AS(grid2(8, 2, -1.0), std::invalid_argument);
  CHECK_NOTHROW(grid2(3, 2));
  CHECK_NOTHROW(grid2(5, 4));

  TorusGrid g({4, 3, 1, 1, 1, 5, 1}, {2.0, 1.0, 1, 1, 1, 3.0, 1}, 2);
  CHECK(g.nodes() == 4 * 3 * 5);
  CHECK(g.cell() == doctest::Approx(0.5 * (1.0 / 3.0) * 1.0 * (3.0 / 5.0))
                        .epsilon(1e-14));
  CHECK(g.active(0));
  CHECK_FALSE(g.active(2));

  // node-major, axis 1 slowest
  std::array<int, 7> c{1, 2, 0, 0, 0, 3, 0};
  int64_t idx = g.index(c);
  CHECK(idx == (int64_t(1) * 3 + 2) * 5 + 3);
  CHECK(g.coords(idx) == c);

  // periodic wrap
  std::array<int, 7> first{0, 0, 0, 0, 0, 0, 0};
  std::array<int, 7> last{3, 0, 0, 0, 0, 0, 0};
  CHECK(g.neighbors(0, -1)[g.index(first)] == g.index(last));
  CHECK(g.neighbors(0, 1)[g.index(last)] == g.index(first));
}

// ==== exterior derivative ====

TEST_CASE("d of d vanishes identically") {
  SplitMix64 rng(41);
  for (int order : {2, 4}) {
    TorusGrid g({6, 1, 5, 1, 1, 1, 7}, {1.0, 1, 2.0, 1, 1, 1, 1.5}, order);
    for (int deg : {0, 1, 2, 3, 5}) {
      FormField f = random_field(g, deg, rng, 1.0);
      FormField dd = d(d(f));
      CHECK(dd.max_abs() <= 1e-12 * (1.0 + f.max_abs()) / g.spacing()[0] /
                                g.spacing()[0]);
    }
  }
}

TEST_CASE("d kills constants and ignores collapsed axes") {
  TorusGrid g = grid2(6, 2);
  FormField c = constant_field<double>(g, 3, reference_positive_form().coeffs());
  CHECK(d(c).max_abs() == 0.0);

  // a field varying only along a collapsed axis direction cannot happen;
  // derivative along collapsed axes is identically zero by construction,
  // so d of any 6-form only uses axes 1 and 2 here
  SplitMix64 rng(42);
  FormField f = random_field(g, 6, rng, 1.0);
  FormField df = d(f);
  const auto& mt = MultiIndexTables::instance();
  (void)mt;
  // the only 7-form component receives contributions from axes 1,2 alone;
  // nothing to check structurally beyond finiteness
  CHECK(std::isfinite(df.max_abs()));
}

TEST_CASE("d converges to the analytic derivative at the stencil order") {
  SplitMix64 rng(43);
  for (int order : {2, 4}) {
    for (int deg : {0, 1, 2, 3}) {
      TrigForm f = random_trig_form(grid2(8, order), deg, rng, 2, 2);
      TrigForm df = d(f);
      double err[2];
      int idx = 0;
      for (int n : {8, 16}) {
        TorusGrid g = grid2(n, order);
        err[idx++] = field_rel_err(d(sample(g, f)), sample(g, df));
      }
      double measured = std::log2(err[0] / err[1]);
      CHECK(measured >= order - 0.6);
      CHECK(measured <= order + 0.7);
    }
  }
}

TEST_CASE("d_transpose is the coefficient adjoint of d") {
  SplitMix64 rng(44);
  for (int order : {2, 4}) {
    TorusGrid g({6, 5, 1, 1, 7, 1, 1}, {1.0, 1.3, 1, 1, 0.9, 1, 1}, order);
    for (int deg : {0, 2, 4, 6}) {
      FormField x = random_field(g, deg, rng, 1.0);
      FormField y = random_field(g, deg + 1, rng, 1.0);
      double lhs = dot(d(x), y);
      double rhs = dot(x, d_transpose(y));
      CHECK(std::fabs(lhs - rhs) <= 1e-11 * (1.0 + std::fabs(lhs)));
    }
  }
}

// ==== structure fields and L2 products ====

TEST_CASE("flat structure field: volume, metric, dual form") {
  TorusGrid g({5, 1, 1, 6, 1, 1, 1}, {2.0, 1, 1, 1.5, 1, 1, 1}, 2);
  auto sf = StructureField<double>::flat(g);
  CHECK(sf.positive());
  CHECK(sf.total_volume() == doctest::Approx(2.0 * 1.5).epsilon(1e-14));
  CHECK(sf.min_metric_eigenvalue() == doctest::Approx(1.0).epsilon(1e-12));

  FormField theta = sf.theta_field();
  FormField want = constant_field<double>(g, 4, reference_form4().coeffs());
  CHECK(field_rel_err(theta, want) <= 1e-14);

  // |omega|^2 = 7 pointwise, so the L2 norm is 7 * total volume
  CHECK(l2_norm2(sf, sf.omega()) == doctest::Approx(7.0 * 3.0).epsilon(1e-13));
  CHECK(l2_norm2(sf, theta) == doctest::Approx(7.0 * 3.0).epsilon(1e-13));
}

TEST_CASE("structure field flags positivity loss with a diagnosis") {
  TorusGrid g = grid2(3, 2);
  FormField bad = constant_field<double>(g, 3, reference_positive_form().coeffs());
  bad *= -1.0;
  StructureField<double> sf(bad);
  CHECK_FALSE(sf.positive());
  CHECK(sf.failure_node() == 0);
  CHECK(sf.failure_report().n_negative > 0);
  CHECK_THROWS_AS(sf.require_positive(), PositivityError);
  CHECK_FALSE(try_structure(bad).has_value());
}

TEST_CASE("l2 adjointness of codiff_adjoint on a wavy structure") {
  SplitMix64 rng(45);
  for (int order : {2, 4}) {
    TorusGrid g = grid2(order == 2 ? 6 : 8, order);
    auto sf = wavy_structure(g, rng, 0.05);
    for (int deg : {1, 3, 4, 7}) {
      FormField b = random_field(g, deg, rng, 1.0);
      FormField c = random_field(g, deg - 1, rng, 1.0);
      double lhs = l2_inner(sf, codiff_adjoint(sf, b), c);
      double rhs = l2_inner(sf, b, d(c));
      CHECK(std::fabs(lhs - rhs) <= 1e-10 * (1.0 + std::fabs(lhs)));
    }
  }
}

TEST_CASE("the two codifferentials coincide on flat structures") {
  SplitMix64 rng(46);
  for (int order : {2, 4}) {
    TorusGrid g = grid2(order == 2 ? 6 : 8, order);
    auto sf = StructureField<double>::flat(g);
    for (int deg = 1; deg <= 7; ++deg) {
      FormField b = random_field(g, deg, rng, 1.0);
      FormField da = codiff_adjoint(sf, b);
      FormField dn = codiff_analytic(sf, b);
      CHECK(field_rel_err(da, dn) <= 1e-12 / g.spacing()[0]);
    }
  }
}

TEST_CASE("codifferential routes coincide to roundoff on wavy structures") {
  // The star-composition route applies the stencil to the Hodge dual of
  // b, whose coefficients are a signed re-indexing of vol * gram * b --
  // the very field the transpose route differentiates.  The two routes
  // therefore agree to roundoff on arbitrary structure fields, not just
  // flat ones; this freezes that design property.
  SplitMix64 rng(47);
  for (int n : {8, 16}) {
    TorusGrid g = grid2(n, 2);
    auto sf = wavy_structure(g, rng, 0.05);
    for (int deg : {1, 2, 4, 6}) {
      FormField b = random_field(g, deg, rng, 1.0);
      CHECK(field_rel_err(codiff_adjoint(sf, b), codiff_analytic(sf, b)) <=
            1e-12 / g.spacing()[0]);
    }
  }
}

TEST_CASE("laplacian of constants vanishes and matches multipliers on modes") {
  TorusGrid g = grid2(8, 2, 1.0, 2.0);
  auto sf = StructureField<double>::flat(g);
  FormField c = constant_field<double>(g, 2, std::vector<double>(21, 0.3));
  CHECK(laplacian(sf, c).max_abs() <= 1e-13);

  // single mode e^{i k x}: discrete Laplacian acts as the squared
  // first-derivative symbol, summed over axes
  TrigForm mode(2);
  Eigen::VectorXd cv = Eigen::VectorXd::Zero(21);
  cv[3] = 1.0;
  std::array<double, 7> k{};
  k[0] = 2.0 * M_PI * 2 / g.len()[0];
  k[1] = 2.0 * M_PI * 1 / g.len()[1];
  mode.add_mode(cv, k, 0.25);
  FormField x = sample(g, mode);
  FormField lx = laplacian(sf, x);
  double mult = 0.0;
  for (int a = 0; a < 7; ++a) {
    double s = g.derivative_symbol(a, k[a]);
    mult += s * s;
  }
  FormField want = x;
  want *= mult;
  CHECK(field_rel_err(lx, want) <= 1e-11);
}

// ==== serialization ====

TEST_CASE("field serialization round-trips bit-exactly") {
  SplitMix64 rng(48);
  TorusGrid g({5, 3, 1, 1, 1, 1, 4}, {1.0, 0.75, 1, 1, 1, 1, 2.0}, 2);
  FormField f = random_field(g, 3, rng, 3.0);
  std::stringstream ss;
  write_field(ss, f);
  FormField back = read_field(ss, g);
  CHECK(back.degree() == 3);
  for (size_t i = 0; i < f.data().size(); ++i)
    CHECK(back.data()[i] == f.data()[i]);

  // a mismatched grid is rejected
  TorusGrid other({5, 3, 1, 1, 1, 1, 5}, {1.0, 0.75, 1, 1, 1, 1, 2.0}, 2);
  std::stringstream ss2;
  write_field(ss2, f);
  CHECK_THROWS_AS(read_field(ss2, other), std::runtime_error);
}

// ==== trig oracle algebra ====

TEST_CASE("trig fields evaluate, add, scale and differentiate exactly") {
  SplitMix64 rng(49);
  TorusGrid g = grid2(6, 2);
  TrigForm a = random_trig_form(g, 1, rng, 2, 2);
  TrigForm b = random_trig_form(g, 1, rng, 2, 2);
  std::array<double, 7> x{0.3, 0.55, 0, 0, 0, 0, 0};
  Eigen::VectorXd va = a.eval(x), vb = b.eval(x);
  CHECK(((a + b).eval(x) - (va + vb)).cwiseAbs().maxCoeff() <= 1e-14);
  CHECK(((2.5 * a).eval(x) - 2.5 * va).cwiseAbs().maxCoeff() <= 1e-14);

  // d twice is exactly zero mode algebra
  TrigForm dda = d(d(a));
  CHECK(dda.eval(x).cwiseAbs().maxCoeff() <= 1e-12);

  // matrix application commutes with sampling
  Eigen::MatrixXd m = Eigen::MatrixXd::Random(21, 7);
  FormField lhs = sample(g, apply_matrix(m, a, 2));
  FormField rhs = apply_matrix(m, sample(g, a), 2);
  CHECK(field_rel_err(lhs, rhs) <= 1e-13);
}
