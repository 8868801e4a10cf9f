#include "g2flow/suite.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <string_view>

#include <Eigen/Dense>

#include "json.hpp"
#include "g2flow/deturck.hpp"
#include "g2flow/dpq.hpp"
#include "g2flow/exterior.hpp"
#include "g2flow/g2.hpp"
#include "g2flow/metric.hpp"
#include "g2flow/rng.hpp"
#include "g2flow/su3.hpp"
#include "g2flow/symbol.hpp"

namespace g2flow {

namespace {

uint64_t fnv64(std::string_view s) {
  uint64_t h = 1469598103934665603ull;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  return h;
}

// Per-check runner: every sample gets its own recorded seed so a failure
// can be replayed in isolation.
class Runner {
 public:
  Runner(uint64_t seed, double tol_override)
      : seed_(seed), tol_override_(tol_override) {}

  // Identity checks accept the suite-wide tolerance override; structural
  // checks (orders, counts, margins with fixed meaning) do not.
  void identity(const std::string& name, const std::string& anchor,
                int samples, double default_tol,
                const std::function<double(SplitMix64&)>& err) {
    push(name, anchor, samples,
         tol_override_ > 0.0 ? tol_override_ : default_tol, err);
  }
  void structural(const std::string& name, const std::string& anchor,
                  int samples, double tol,
                  const std::function<double(SplitMix64&)>& err) {
    push(name, anchor, samples, tol, err);
  }

  std::vector<CheckRecord> take() { return std::move(checks_); }

 private:
  void push(const std::string& name, const std::string& anchor, int samples,
            double tol, const std::function<double(SplitMix64&)>& err) {
    CheckRecord r;
    r.name = name;
    r.anchor = anchor;
    r.samples = samples;
    r.tolerance = tol;
    r.passed = true;
    const uint64_t mix = fnv64(anchor) ^ seed_;
    for (int i = 0; i < samples; ++i) {
      uint64_t s = mix + 0x9e3779b97f4a7c15ull * static_cast<uint64_t>(i + 1);
      SplitMix64 rng(s);
      double e = err(rng);
      if (e > r.worst_error) r.worst_error = e;
      if (!(e <= r.tolerance) && r.passed) {
        r.passed = false;
        r.fail_seed = s;
      }
    }
    checks_.push_back(std::move(r));
  }

  uint64_t seed_;
  double tol_override_;
  std::vector<CheckRecord> checks_;
};

// ---- shared sample builders -------------------------------------------

AlternatingForm random_form(int degree, SplitMix64& rng) {
  std::vector<double> c(static_cast<size_t>(kDegreeDim[degree]));
  for (auto& x : c) x = rng.sym();
  return AlternatingForm(degree, std::move(c));
}

Matrix7d random_gl(SplitMix64& rng) {
  while (true) {
    Matrix7d a = Matrix7d::Identity();
    for (int i = 0; i < 7; ++i)
      for (int j = 0; j < 7; ++j) a(i, j) += 0.12 * rng.sym();
    if (a.determinant() > 0.25) return a;
  }
}

MetricTensor random_metric(SplitMix64& rng) {
  Matrix7d a = random_gl(rng);
  return MetricTensor(Matrix7d(a.transpose() * a));
}

G2Structure random_structure(SplitMix64& rng) {
  return G2Structure(pullback(random_gl(rng), reference_positive_form()));
}

double rel(double err, double scale) { return err / (1.0 + scale); }

double form_rel(const AlternatingForm& a, const AlternatingForm& b) {
  return rel((a - b).max_abs(), b.max_abs());
}

double field_rel(const FormField& a, const FormField& b) {
  return rel((a - b).max_abs(), b.max_abs());
}

// ---- algebra suite -----------------------------------------------------

void algebra_checks(Runner& r) {
  r.identity(
      "wedge product is associative", "alg.wedge.assoc", 50, 1e-9,
      [](SplitMix64& rng) {
        AlternatingForm a = random_form(1, rng), b = random_form(1, rng),
                        c = random_form(2, rng);
        return form_rel(wedge(wedge(a, b), c), wedge(a, wedge(b, c)));
      });

  r.identity(
      "wedge product is graded-commutative", "alg.wedge.graded", 50, 1e-9,
      [](SplitMix64& rng) {
        AlternatingForm a1 = random_form(1, rng), b1 = random_form(1, rng);
        AlternatingForm a2 = random_form(2, rng), b3 = random_form(3, rng);
        double odd = (wedge(a1, b1) + wedge(b1, a1)).max_abs();
        double even = (wedge(a2, b3) - wedge(b3, a2)).max_abs();
        return std::max(odd, even);
      });

  r.identity(
      "metric contraction is adjoint to wedging", "alg.contract.adjoint", 50,
      1e-9, [](SplitMix64& rng) {
        MetricTensor m = random_metric(rng);
        AlternatingForm eta = random_form(1, rng), w = random_form(3, rng),
                        c = random_form(2, rng);
        double lhs = inner(contract(eta, w, m), c, m);
        double rhs = inner(w, wedge(eta, c), m);
        return rel(std::fabs(lhs - rhs), std::fabs(rhs));
      });

  r.identity(
      "interior product is an antiderivation", "alg.contract.antiderivation",
      50, 1e-9, [](SplitMix64& rng) {
        MetricTensor m = random_metric(rng);
        AlternatingForm eta = random_form(1, rng), a = random_form(2, rng),
                        b = random_form(2, rng);
        AlternatingForm lhs = contract(eta, wedge(a, b), m);
        AlternatingForm rhs =
            wedge(contract(eta, a, m), b) + wedge(a, contract(eta, b, m));
        return form_rel(lhs, rhs);
      });

  r.identity(
      "hodge star squares to the identity", "alg.hodge.involution", 50, 1e-9,
      [](SplitMix64& rng) {
        MetricTensor m = random_metric(rng);
        int p = 1 + static_cast<int>(rng.below(3));
        AlternatingForm w = random_form(p, rng);
        return form_rel(hodge(hodge(w, m), m), w);
      });

  r.identity(
      "hodge star preserves the metric pairing", "alg.hodge.isometry", 50,
      1e-9, [](SplitMix64& rng) {
        MetricTensor m = random_metric(rng);
        AlternatingForm a = random_form(3, rng), b = random_form(3, rng);
        double lhs = inner(hodge(a, m), hodge(b, m), m);
        double rhs = inner(a, b, m);
        return rel(std::fabs(lhs - rhs), std::fabs(rhs));
      });

  r.identity(
      "wedging against the star realizes the pairing", "alg.hodge.pairing",
      50, 1e-9, [](SplitMix64& rng) {
        MetricTensor m = random_metric(rng);
        AlternatingForm a = random_form(2, rng), b = random_form(2, rng);
        double lhs = wedge(a, hodge(b, m))[0];
        double rhs = inner(a, b, m) * m.vol_scale();
        return rel(std::fabs(lhs - rhs), std::fabs(rhs));
      });

  r.identity(
      "two-plane areas obey the gram determinant", "alg.gram.two-plane", 50,
      1e-9, [](SplitMix64& rng) {
        MetricTensor m = random_metric(rng);
        AlternatingForm a = random_form(1, rng), b = random_form(1, rng);
        double lhs = norm2(wedge(a, b), m);
        double rhs = norm2(a, m) * norm2(b, m) -
                     inner(a, b, m) * inner(a, b, m);
        return rel(std::fabs(lhs - rhs), std::fabs(rhs));
      });

  r.structural(
      "reference form induces the identity metric exactly",
      "alg.metric.reference", 1, 0.0, [](SplitMix64&) {
        G2Structure s(reference_positive_form());
        double worst = std::fabs(s.vol() - 1.0);
        for (int i = 0; i < 7; ++i)
          for (int j = 0; j < 7; ++j)
            worst = std::max(worst, std::fabs(s.metric().g()(i, j) -
                                              (i == j ? 1.0 : 0.0)));
        return worst;
      });

  r.identity(
      "three-form type projectors resolve the identity", "alg.type3.projectors",
      25, 1e-9, [](SplitMix64& rng) {
        G2Structure s = random_structure(rng);
        const auto& p1 = s.proj3_1();
        const auto& p7 = s.proj3_7();
        const auto& p27 = s.proj3_27();
        Eigen::MatrixXd id = Eigen::MatrixXd::Identity(35, 35);
        double worst = (p1 + p7 + p27 - id).cwiseAbs().maxCoeff();
        for (const auto* p : {&p1, &p7, &p27})
          worst = std::max(worst, ((*p) * (*p) - (*p)).cwiseAbs().maxCoeff());
        worst = std::max(worst, (p1 * p7).cwiseAbs().maxCoeff());
        worst = std::max(worst, (p7 * p27).cwiseAbs().maxCoeff());
        worst = std::max(worst, (p27 * p1).cwiseAbs().maxCoeff());
        return worst;
      });

  r.identity(
      "two-form type projectors resolve the identity", "alg.type2.projectors",
      25, 1e-9, [](SplitMix64& rng) {
        G2Structure s = random_structure(rng);
        const auto& p7 = s.proj2_7();
        const auto& p14 = s.proj2_14();
        Eigen::MatrixXd id = Eigen::MatrixXd::Identity(21, 21);
        double worst = (p7 + p14 - id).cwiseAbs().maxCoeff();
        worst = std::max(worst, (p7 * p14).cwiseAbs().maxCoeff());
        worst = std::max(worst, (p7 * p7 - p7).cwiseAbs().maxCoeff());
        return worst;
      });

  r.identity(
      "double contraction against the form triples the 7-part",
      "alg.type2.seven-triple", 50, 1e-9, [](SplitMix64& rng) {
        G2Structure s = random_structure(rng);
        const MetricTensor& m = s.metric();
        AlternatingForm beta = random_form(2, rng);
        AlternatingForm lhs = contract(contract(beta, s.omega3(), m),
                                       s.omega3(), m);
        Eigen::Map<const Eigen::VectorXd> bc(beta.coeffs().data(), 21);
        Eigen::VectorXd b7 = s.proj2_7() * bc;
        AlternatingForm rhs(2, std::vector<double>(b7.data(), b7.data() + 21));
        rhs *= 3.0;
        return form_rel(lhs, rhs);
      });

  r.identity(
      "curvature-weight operator matches its projector formula",
      "alg.type3.p-operator", 25, 1e-9, [](SplitMix64& rng) {
        G2Structure s = random_structure(rng);
        Eigen::MatrixXd route = (4.0 / 3.0) * s.proj3_1() + s.proj3_7() -
                                s.proj3_27();
        return rel((route - s.p_matrix()).cwiseAbs().maxCoeff(),
                   s.p_matrix().cwiseAbs().maxCoeff());
      });

  r.identity(
      "structure forms have the universal norms", "alg.structure.norms", 50,
      1e-9, [](SplitMix64& rng) {
        G2Structure s = random_structure(rng);
        double a = std::fabs(norm2(s.omega3(), s.metric()) - 7.0) / 7.0;
        double b = std::fabs(norm2(s.theta(), s.metric()) - 7.0) / 7.0;
        return std::max(a, b);
      });

  r.identity(
      "the coform is the star of the form", "alg.structure.theta", 50, 1e-9,
      [](SplitMix64& rng) {
        G2Structure s = random_structure(rng);
        return form_rel(hodge(s.omega3(), s.metric()), s.theta());
      });

  r.identity(
      "volume derivative satisfies the homogeneity identity",
      "alg.structure.euler", 50, 1e-9, [](SplitMix64& rng) {
        G2Structure s = random_structure(rng);
        double lhs = hitchin_derivative(s, s.omega3());
        double rhs = (7.0 / 3.0) * s.vol();
        return rel(std::fabs(lhs - rhs), std::fabs(rhs));
      });

  r.identity(
      "metric, volume, and coform scale with fixed exponents",
      "alg.structure.scaling", 25, 1e-9, [](SplitMix64& rng) {
        G2Structure s = random_structure(rng);
        G2Structure t(2.0 * s.omega3());
        double c23 = std::pow(2.0, 2.0 / 3.0);
        double c73 = std::pow(2.0, 7.0 / 3.0);
        double c43 = std::pow(2.0, 4.0 / 3.0);
        double wg = (t.metric().g() - c23 * s.metric().g()).cwiseAbs()
                        .maxCoeff() /
                    s.metric().g().cwiseAbs().maxCoeff();
        double wv = std::fabs(t.vol() - c73 * s.vol()) / s.vol();
        double wt = form_rel(t.theta(), c43 * s.theta());
        return std::max({wg, wv, wt});
      });

  r.identity(
      "pullbacks compose contravariantly", "alg.pullback.compose", 50, 1e-9,
      [](SplitMix64& rng) {
        Matrix7d a = random_gl(rng), b = random_gl(rng);
        AlternatingForm f = random_form(3, rng);
        return form_rel(pullback(Matrix7d(a * b), f),
                        pullback(b, pullback(a, f)));
      });

  r.identity(
      "pullback distributes over the wedge", "alg.pullback.wedge", 50, 1e-9,
      [](SplitMix64& rng) {
        Matrix7d a = random_gl(rng);
        AlternatingForm f = random_form(2, rng), h = random_form(2, rng);
        return form_rel(pullback(a, wedge(f, h)),
                        wedge(pullback(a, f), pullback(a, h)));
      });

  r.identity(
      "induced metric is natural under pullback", "alg.metric.equivariance",
      25, 1e-9, [](SplitMix64& rng) {
        Matrix7d a = random_gl(rng);
        G2Structure s = random_structure(rng);
        G2Structure t(pullback(a, s.omega3()));
        Matrix7d expected = a.transpose() * s.metric().g() * a;
        return rel((t.metric().g() - expected).cwiseAbs().maxCoeff(),
                   expected.cwiseAbs().maxCoeff());
      });

  r.identity(
      "transverse frame decomposition reassembles exactly",
      "alg.su3.roundtrip", 25, 1e-9, [](SplitMix64& rng) {
        G2Structure s = random_structure(rng);
        AlternatingForm xi0 = random_form(1, rng);
        double n2 = norm2(xi0, s.metric());
        if (n2 < 1e-4) return 0.0;  // redraw-equivalent: skip degenerate draws
        AlternatingForm xi = (1.0 / std::sqrt(n2)) * xi0;
        Su3Frame frame = su3_frame(s, xi);
        AlternatingForm tdot = random_form(3, rng);
        Su3Components comp = su3_decompose(s, frame, tdot);
        return form_rel(su3_reassemble(s, frame, comp), tdot);
      });

  r.structural(
      "seeded generator reproduces its stream exactly", "alg.rng.reproducible",
      10, 0.0, [](SplitMix64& rng) {
        uint64_t s = rng.unit() > 0.5 ? 0x1234u : 0x9876u;
        SplitMix64 a(s), b(s);
        double worst = 0.0;
        for (int i = 0; i < 64; ++i)
          worst = std::max(worst, std::fabs(a.sym() - b.sym()));
        return worst;
      });
}

// ---- fields suite ------------------------------------------------------

struct FieldsContext {
  TorusGrid g8, g16;
  int fd;
  FieldsContext(const RunConfig& cfg)
      : g8({8, 8, 1, 1, 1, 1, 1},
           {cfg.grid_l[0], cfg.grid_l[1], 1, 1, 1, 1, 1}, cfg.fd_order),
        g16({16, 16, 1, 1, 1, 1, 1},
            {cfg.grid_l[0], cfg.grid_l[1], 1, 1, 1, 1, 1}, cfg.fd_order),
        fd(cfg.fd_order) {}
};

void fields_checks(Runner& r, const RunConfig& cfg) {
  auto ctx = std::make_shared<FieldsContext>(cfg);

  auto order_of = [ctx](const TrigForm& f, const TrigForm& target,
                        const std::function<FormField(const TorusGrid&,
                                                      const FormField&)>& op) {
    double e8 = field_rel(op(ctx->g8, sample(ctx->g8, f)),
                          sample(ctx->g8, target));
    double e16 = field_rel(op(ctx->g16, sample(ctx->g16, f)),
                           sample(ctx->g16, target));
    return std::log2(e8 / e16);
  };

  r.structural(
      "derivative converges at the stencil order", "fld.d.order", 6, 0.5,
      [ctx, order_of](SplitMix64& rng) {
        int deg = 1 + static_cast<int>(rng.below(3));
        TrigForm f = random_trig_form(ctx->g8, deg, rng, 2, 1);
        double order = order_of(
            f, d(f), [](const TorusGrid&, const FormField& x) { return d(x); });
        return std::fabs(order - ctx->fd);
      });

  r.structural(
      "codifferential converges at the stencil order", "fld.codiff.order", 6,
      0.5, [ctx, order_of](SplitMix64& rng) {
        TrigForm f = random_trig_form(ctx->g8, 3, rng, 2, 1);
        double order =
            order_of(f, flat_codiff(f),
                     [](const TorusGrid& g, const FormField& x) {
                       return codiff_adjoint(StructureField<double>::flat(g), x);
                     });
        return std::fabs(order - ctx->fd);
      });

  r.structural(
      "type-decomposed derivatives converge at the stencil order",
      "fld.dpq.order", 6, 0.5, [ctx, order_of](SplitMix64& rng) {
        int variant = static_cast<int>(rng.below(3));
        TrigForm f = random_type_trig(ctx->g8, variant == 0   ? 7
                                               : variant == 1 ? 14
                                                              : 27,
                                      rng, 2, 1);
        auto op = [variant](const TorusGrid&, const FormField& x) {
          return variant == 0 ? d7_27(x) : variant == 1 ? d14_7(x) : d27_27(x);
        };
        TrigForm target = variant == 0   ? d7_27(f)
                          : variant == 1 ? d14_7(f)
                                         : d27_27(f);
        return std::fabs(order_of(f, target, op) - ctx->fd);
      });

  r.identity(
      "discrete derivative squares to zero", "fld.d.square-zero", 10, 1e-9,
      [ctx](SplitMix64& rng) {
        TrigForm f = random_trig_form(ctx->g16, 2, rng, 2, 2);
        FormField x = sample(ctx->g16, f);
        return rel(d(d(x)).max_abs(), d(x).max_abs());
      });

  r.identity(
      "codifferential is the exact discrete adjoint", "fld.codiff.adjoint",
      10, 1e-9, [ctx](SplitMix64& rng) {
        SplitMix64 fork = rng.fork(1);
        TrigForm tf = random_trig_form(ctx->g8, 3, fork, 3, 2);
        FormField om = StructureField<double>::flat(ctx->g8).omega() +
                       0.02 * sample(ctx->g8, tf);
        StructureField<double> bg(om);
        if (!bg.positive()) return 0.0;
        FormField f = random_field(ctx->g8, 2, rng, 1.0);
        FormField h = random_field(ctx->g8, 3, rng, 1.0);
        double lhs = l2_inner(bg, d(f), h);
        double rhs = l2_inner(bg, f, codiff_adjoint(bg, h));
        return rel(std::fabs(lhs - rhs), std::fabs(rhs));
      });
}

// ---- symbols suite -----------------------------------------------------

struct SymbolSample {
  G2Structure s;
  AlternatingForm xi;
};

SymbolSample symbol_sample(SplitMix64& rng) {
  G2Structure s = random_structure(rng);
  while (true) {
    AlternatingForm xi = random_form(1, rng);
    double n2 = norm2(xi, s.metric());
    if (n2 < 1e-4) continue;
    return {s, (1.0 / std::sqrt(n2)) * xi};
  }
}

void symbols_checks(Runner& r) {
  r.structural(
      "gradient symbol is negative semidefinite with a 7-fold kernel",
      "sym.gradient.class", 100, 0.5, [](SplitMix64& rng) {
        SymbolSample q = symbol_sample(rng);
        SymbolMatrix sm = symbol_gradient(q.s, q.xi);
        bool ok = sm.cls.sign == SymbolSign::negative_semi &&
                  sm.cls.kernel_dim == 7;
        return ok ? 0.0 : 1.0;
      });

  r.identity(
      "gradient symbol realizes its quadratic form", "sym.gradient.qf", 100,
      1e-9, [](SplitMix64& rng) {
        SymbolSample q = symbol_sample(rng);
        SymbolMatrix sm = symbol_gradient(q.s, q.xi);
        const MetricTensor& m = q.s.metric();
        AlternatingForm w = random_form(3, rng);
        Eigen::Map<const Eigen::VectorXd> wc(w.coeffs().data(), 35);
        Eigen::VectorXd sw = sm.mat * wc;
        AlternatingForm sigma_w(3,
                                std::vector<double>(sw.data(), sw.data() + 35));
        double lhs = -inner(sigma_w, w, m);
        double rhs = norm2(wedge(q.xi, w), m) +
                     norm2(contract(q.xi, p_apply(q.s, w), m), m);
        return rel(std::fabs(lhs - rhs), std::fabs(rhs));
      });

  r.structural(
      "gauged symbol clears the unit ellipticity margin", "sym.gauged.margin",
      100, 1e-9, [](SplitMix64& rng) {
        SymbolSample q = symbol_sample(rng);
        SymbolMatrix sm = symbol_deturck(q.s, q.xi);
        double margin = -sm.cls.sym_max;  // least eigenvalue of -sym part
        return std::max(0.0, 1.0 - margin);
      });

  r.structural(
      "laplacian-flow symbol is indefinite with the same kernel",
      "sym.laplacian.class", 100, 0.5, [](SplitMix64& rng) {
        SymbolSample q = symbol_sample(rng);
        SymbolMatrix sm = symbol_laplacian_flow(q.s, q.xi);
        bool ok = sm.cls.sign == SymbolSign::indefinite &&
                  sm.cls.kernel_dim == 7;
        return ok ? 0.0 : 1.0;
      });

  r.structural(
      "orbit-map symbol has full rank", "sym.orbit.rank", 100, 0.5,
      [](SplitMix64& rng) {
        SymbolSample q = symbol_sample(rng);
        SymbolMatrix sm = symbol_orbit_map(q.s, q.xi);
        return sm.cls.kernel_dim == 0 ? 0.0 : 1.0;
      });

  r.identity(
      "orbit-map image lies in the gradient-symbol kernel",
      "sym.orbit.in-kernel", 100, 1e-10, [](SplitMix64& rng) {
        SymbolSample q = symbol_sample(rng);
        Eigen::MatrixXd grad = symbol_gradient(q.s, q.xi).mat;
        Eigen::MatrixXd orbit = symbol_orbit_map(q.s, q.xi).mat;
        return (grad * orbit).norm() / (grad.norm() * orbit.norm());
      });

  r.structural(
      "universal spectral bounds match their frozen values",
      "sym.kappa.frozen", 1, 1e-13, [](SplitMix64&) {
        double a = std::fabs(symbol_spectral_bound(FlowKind::dirichlet) -
                             7.0 / 3.0) /
                   (7.0 / 3.0);
        double b = std::fabs(symbol_spectral_bound(FlowKind::deturck) - 3.0) /
                   3.0;
        double c = std::fabs(symbol_spectral_bound(FlowKind::laplacian) -
                             1.2637626158259734) /
                   1.2637626158259734;
        return std::max({a, b, c});
      });
}

// ---- spectrum suite ----------------------------------------------------

void spectrum_checks(Runner& r, const RunConfig& cfg) {
  const int fd = cfg.fd_order;

  r.structural(
      "linearization kernel matches the three-form dimension",
      "spec.kernel.count", 1, 0.0, [fd](SplitMix64&) {
        TorusGrid g({9, 1, 1, 1, 1, 1, 1}, {1, 1, 1, 1, 1, 1, 1}, fd);
        SpectrumResult s = flat_l_spectrum_fourier(g);
        return std::fabs(static_cast<double>(s.kernel_count - 35));
      });

  r.structural(
      "spectral gap above the kernel is positive", "spec.gap.positive", 1,
      0.5, [fd](SplitMix64&) {
        TorusGrid g({9, 1, 1, 1, 1, 1, 1}, {1, 1, 1, 1, 1, 1, 1}, fd);
        SpectrumResult s = flat_l_spectrum_fourier(g);
        return (s.lambda1 > 0.0 && s.lambda_max >= s.lambda1) ? 0.0 : 1.0;
      });

  r.identity(
      "dense and frequency-block spectra agree", "spec.routes.agree", 1, 1e-8,
      [fd](SplitMix64&) {
        TorusGrid g({3, 1, 1, 1, 1, 1, 1}, {1, 1, 1, 1, 1, 1, 1}, fd);
        auto bar = StructureField<double>::flat(g);
        SpectrumResult dense = spectrum(assemble_L(bar, LRoute::variation));
        SpectrumResult four = flat_l_spectrum_fourier(g);
        double e1 = std::fabs(dense.lambda1 - four.lambda1) /
                    std::max(1.0, four.lambda1);
        double e2 = std::fabs(dense.lambda_max - four.lambda_max) /
                    std::max(1.0, four.lambda_max);
        double e3 = std::fabs(
            static_cast<double>(dense.kernel_count - four.kernel_count));
        return std::max({e1, e2, e3});
      });

  r.identity(
      "assembly routes for the linearization agree", "spec.routes.assembly",
      1, 1e-8, [fd](SplitMix64&) {
        TorusGrid g({3, 1, 1, 1, 1, 1, 1}, {1, 1, 1, 1, 1, 1, 1}, fd);
        auto bar = StructureField<double>::flat(g);
        OperatorMatrix a = assemble_L(bar, LRoute::variation);
        OperatorMatrix b = assemble_L(bar, LRoute::decomposition);
        return (a.mat - b.mat).cwiseAbs().maxCoeff() /
               (1.0 + a.mat.cwiseAbs().maxCoeff());
      });

  r.structural(
      "coercivity margin stays above the energy floor", "spec.garding.bound",
      1, 1e-6, [fd](SplitMix64& rng) {
        TorusGrid g({8, 8, 1, 1, 1, 1, 1}, {1, 1, 1, 1, 1, 1, 1}, fd);
        auto bar = StructureField<double>::flat(g);
        GardingReport rep = garding_check(bar, 30, rng);
        return std::max(0.0, -rep.worst_margin);
      });

  r.structural(
      "orbit-slice split reproduces the input with a gauge-fixed part",
      "spec.split.residual", 2, 1e-6, [fd](SplitMix64& rng) {
        TorusGrid g({5, 5, 1, 1, 1, 1, 1}, {1, 1, 1, 1, 1, 1, 1}, fd);
        auto bar = StructureField<double>::flat(g);
        TrigForm tf = random_trig_form(g, 3, rng, 3, 2);
        FormField f = sample(g, tf);
        SplitResult sp = orbit_slice_split(bar, f);
        double recon = field_rel(sp.omega0 + sp.lie_part, f);
        double slice = std::sqrt(l2_norm2_vector(bar, lambda_map(bar, sp.omega0))) /
                       (1.0 + std::sqrt(l2_norm2(bar, f)));
        return std::max(recon, slice);
      });
}

}  // namespace

SuiteReport run_suite(const std::string& name, const RunConfig& cfg,
                      uint64_t seed, double tol) {
  Runner runner(seed, tol);
  if (name == "algebra") {
    algebra_checks(runner);
  } else if (name == "fields") {
    fields_checks(runner, cfg);
  } else if (name == "symbols") {
    symbols_checks(runner);
  } else if (name == "spectrum") {
    spectrum_checks(runner, cfg);
  } else {
    throw std::invalid_argument("run_suite: unknown suite '" + name +
                                "' (want algebra, fields, symbols, spectrum)");
  }
  SuiteReport report;
  report.suite = name;
  report.seed = seed;
  report.tolerance = tol;
  report.checks = runner.take();
  report.passed = true;
  for (const CheckRecord& c : report.checks)
    if (!c.passed) report.passed = false;
  return report;
}

std::string suite_table(const SuiteReport& report) {
  std::string out = "suite: " + report.suite + "  (seed " +
                    std::to_string(report.seed) + ")\n";
  char line[256];
  std::snprintf(line, sizeof line, "%-28s %7s %12s %10s %s\n", "anchor",
                "samples", "worst", "tol", "status");
  out += line;
  for (const CheckRecord& c : report.checks) {
    std::snprintf(line, sizeof line, "%-28s %7d %12.3e %10.1e %s\n",
                  c.anchor.c_str(), c.samples, c.worst_error, c.tolerance,
                  c.passed ? "pass" : "FAIL");
    out += line;
    if (!c.passed) {
      std::snprintf(line, sizeof line, "  %s\n  first failing seed: %llu\n",
                    c.name.c_str(),
                    static_cast<unsigned long long>(c.fail_seed));
      out += line;
    }
  }
  out += report.passed ? "overall: pass\n" : "overall: FAIL\n";
  return out;
}

std::string suite_json(const SuiteReport& report) {
  nlohmann::json j;
  j["suite"] = report.suite;
  j["seed"] = report.seed;
  j["tolerance"] = report.tolerance;
  j["passed"] = report.passed;
  j["checks"] = nlohmann::json::array();
  for (const CheckRecord& c : report.checks) {
    nlohmann::json jc;
    jc["name"] = c.name;
    jc["anchor"] = c.anchor;
    jc["samples"] = c.samples;
    jc["worst_error"] = c.worst_error;
    jc["tolerance"] = c.tolerance;
    jc["passed"] = c.passed;
    if (!c.passed) jc["fail_seed"] = c.fail_seed;
    j["checks"].push_back(jc);
  }
  return j.dump(2);
}

}  // namespace g2flow
