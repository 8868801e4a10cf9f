#include "g2flow/symbol.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "json.hpp"

#include "g2flow/exterior.hpp"

namespace g2flow {

namespace {

double check_covector(const G2Structure& s, const AlternatingForm& xi) {
  if (xi.degree() != 1)
    throw std::invalid_argument("symbol: direction must be a covector");
  double n2 = norm2(xi, s.metric());
  if (!(n2 > 0.0)) throw std::invalid_argument("symbol: zero covector");
  return std::sqrt(n2);
}

template <typename Apply>
Eigen::MatrixXd assemble(int in_degree, Apply&& op) {
  const int cols = kDegreeDim[in_degree];
  const int rows = kDegreeDim[3];
  Eigen::MatrixXd m(rows, cols);
  for (int c = 0; c < cols; ++c) {
    AlternatingForm e(in_degree);
    e[c] = 1.0;
    AlternatingForm out = op(e);
    for (int r = 0; r < rows; ++r) m(r, c) = out[r];
  }
  return m;
}

template <typename Apply>
SymbolMatrix make_symbol(const G2Structure& s, const AlternatingForm& xi,
                         int in_degree, Apply&& op) {
  SymbolMatrix sm;
  sm.xi_norm = check_covector(s, xi);
  sm.mat = assemble(in_degree, std::forward<Apply>(op));
  sm.cls = classify_symbol(sm.mat, s);
  return sm;
}

AlternatingForm apply_matrix_form(const Eigen::MatrixXd& m,
                                  const AlternatingForm& w, int out_degree) {
  Eigen::Map<const Eigen::VectorXd> wv(w.coeffs().data(), w.size());
  Eigen::VectorXd out = m * wv;
  return AlternatingForm(out_degree,
                         std::vector<double>(out.data(), out.data() + out.size()));
}

}  // namespace

std::string to_string(FlowKind kind) {
  switch (kind) {
    case FlowKind::dirichlet: return "dirichlet";
    case FlowKind::deturck: return "deturck";
    case FlowKind::laplacian: return "laplacian";
  }
  return "unknown";
}

std::string to_string(SymbolSign sign) {
  switch (sign) {
    case SymbolSign::negative: return "negative_definite";
    case SymbolSign::negative_semi: return "negative_semidefinite";
    case SymbolSign::indefinite: return "indefinite";
    case SymbolSign::positive_semi: return "positive_semidefinite";
    case SymbolSign::positive: return "positive_definite";
    case SymbolSign::rectangular: return "rectangular";
  }
  return "unknown";
}

SymbolClassification classify_symbol(const Eigen::MatrixXd& mat,
                                     const G2Structure& s) {
  SymbolClassification cls;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(mat);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double sv_max = sv.size() > 0 ? sv(0) : 0.0;
  const double cut = 1e-9 * sv_max;
  if (sv_max == 0.0) {
    cls.kernel_dim = static_cast<int>(mat.cols());
  } else {
    for (Eigen::Index i = 0; i < sv.size(); ++i)
      if (sv(i) < cut) ++cls.kernel_dim;
  }

  if (mat.rows() != mat.cols()) {
    cls.sign = SymbolSign::rectangular;
    cls.sym_min = sv.size() > 0 ? sv(sv.size() - 1) : 0.0;
    cls.sym_max = sv_max;
    return cls;
  }

  int degree;
  if (mat.cols() == kDegreeDim[3]) {
    degree = 3;
  } else if (mat.cols() == kDegreeDim[1]) {
    degree = 1;
  } else {
    throw std::invalid_argument("classify_symbol: unsupported dimension");
  }
  const Eigen::MatrixXd& gram = s.metric().gram(degree);
  Eigen::MatrixXd gm = gram * mat;
  Eigen::MatrixXd sym = 0.5 * (gm + gm.transpose());
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, gram);
  cls.sym_min = es.eigenvalues().minCoeff();
  cls.sym_max = es.eigenvalues().maxCoeff();

  const double scale = std::max(std::fabs(cls.sym_min), std::fabs(cls.sym_max));
  const double thr = 1e-9 * scale;
  if (scale == 0.0) {
    cls.sign = SymbolSign::indefinite;
  } else if (cls.sym_max < -thr) {
    cls.sign = SymbolSign::negative;
  } else if (cls.sym_max <= thr) {
    cls.sign = SymbolSign::negative_semi;
  } else if (cls.sym_min > thr) {
    cls.sign = SymbolSign::positive;
  } else if (cls.sym_min >= -thr) {
    cls.sign = SymbolSign::positive_semi;
  } else {
    cls.sign = SymbolSign::indefinite;
  }
  return cls;
}

SymbolMatrix symbol_gradient(const G2Structure& s, const AlternatingForm& xi) {
  const MetricTensor& m = s.metric();
  return make_symbol(s, xi, 3, [&](const AlternatingForm& w) {
    AlternatingForm a = contract(xi, wedge(xi, w), m);
    AlternatingForm b =
        p_apply(s, wedge(xi, contract(xi, p_apply(s, w), m)));
    return -(a + b);
  });
}

SymbolMatrix symbol_gauge(const G2Structure& s, const AlternatingForm& xi) {
  const MetricTensor& m = s.metric();
  return make_symbol(s, xi, 3, [&](const AlternatingForm& w) {
    AlternatingForm t2 = contract(xi, w, m);
    AlternatingForm t1 = contract(t2, s.omega3(), m);
    AlternatingForm u2 = contract(t1, s.omega3(), m);
    return -wedge(xi, u2);
  });
}

SymbolMatrix symbol_deturck(const G2Structure& s, const AlternatingForm& xi) {
  SymbolMatrix grad = symbol_gradient(s, xi);
  SymbolMatrix gauge = symbol_gauge(s, xi);
  SymbolMatrix sm;
  sm.xi_norm = grad.xi_norm;
  sm.mat = grad.mat + gauge.mat;
  sm.cls = classify_symbol(sm.mat, s);
  return sm;
}

SymbolMatrix symbol_laplacian_flow(const G2Structure& s,
                                   const AlternatingForm& xi) {
  const MetricTensor& m = s.metric();
  const double xi2 = norm2(xi, m);
  return make_symbol(s, xi, 3, [&](const AlternatingForm& w) {
    auto parts = project3(s, w);
    AlternatingForm mix =
        (1.0 / 3.0) * std::get<0>(parts) - 2.0 * std::get<2>(parts);
    return xi2 * w + wedge(xi, contract(xi, mix, m));
  });
}

SymbolMatrix symbol_orbit_map(const G2Structure& s, const AlternatingForm& xi) {
  const MetricTensor& m = s.metric();
  return make_symbol(s, xi, 1, [&](const AlternatingForm& v) {
    return wedge(xi, contract(v, s.omega3(), m));
  });
}

namespace {

double bound_at_reference(FlowKind kind) {
  G2Structure ref(reference_positive_form());
  AlternatingForm xi(1);
  xi[0] = 1.0;
  SymbolMatrix sm;
  switch (kind) {
    case FlowKind::dirichlet: sm = symbol_gradient(ref, xi); break;
    case FlowKind::deturck: sm = symbol_deturck(ref, xi); break;
    case FlowKind::laplacian: sm = symbol_laplacian_flow(ref, xi); break;
  }
  return std::max(std::fabs(sm.cls.sym_min), std::fabs(sm.cls.sym_max));
}

}  // namespace

double symbol_spectral_bound(FlowKind kind) {
  static const double bounds[3] = {bound_at_reference(FlowKind::dirichlet),
                                   bound_at_reference(FlowKind::deturck),
                                   bound_at_reference(FlowKind::laplacian)};
  return bounds[static_cast<int>(kind)];
}

std::string symbol_record_json(const SymbolMatrix& sm, std::uint64_t seed) {
  nlohmann::json j;
  j["seed"] = seed;
  j["rows"] = sm.mat.rows();
  j["cols"] = sm.mat.cols();
  j["xi_norm"] = sm.xi_norm;
  j["sign"] = to_string(sm.cls.sign);
  j["kernel_dim"] = sm.cls.kernel_dim;
  j["sym_min"] = sm.cls.sym_min;
  j["sym_max"] = sm.cls.sym_max;
  return j.dump();
}

bool SymbolBatterySummary::pass() const {
  return samples > 0 && gradient_sign_failures == 0 &&
         gradient_kernel_failures == 0 && laplacian_sign_failures == 0 &&
         laplacian_kernel_failures == 0 && orbit_rank_failures == 0 &&
         deturck_min_margin >= 1.0 - 1e-9 && max_qf_residual <= 1e-9 &&
         max_composition_residual <= 1e-10;
}

SymbolBatterySummary symbol_battery(int samples, std::uint64_t seed) {
  SymbolBatterySummary out;
  out.samples = samples;
  out.deturck_min_margin = std::numeric_limits<double>::infinity();
  SplitMix64 rng(seed);
  const AlternatingForm ref = reference_positive_form();
  for (int i = 0; i < samples; ++i) {
    Matrix7d a;
    do {
      for (int r = 0; r < 7; ++r)
        for (int c = 0; c < 7; ++c)
          a(r, c) = (r == c ? 1.0 : 0.0) + 0.12 * rng.sym();
    } while (a.determinant() < 0.25);
    G2Structure s(pullback(a, ref));
    const MetricTensor& m = s.metric();

    AlternatingForm xi(1);
    double n2 = 0.0;
    do {
      for (int k = 0; k < 7; ++k) xi[k] = rng.sym();
      n2 = norm2(xi, m);
    } while (n2 < 1e-4);
    xi *= 1.0 / std::sqrt(n2);

    SymbolMatrix grad = symbol_gradient(s, xi);
    if (grad.cls.sign != SymbolSign::negative_semi) ++out.gradient_sign_failures;
    if (grad.cls.kernel_dim != 7) ++out.gradient_kernel_failures;

    AlternatingForm w(3);
    for (int r = 0; r < w.size(); ++r) w[r] = rng.sym();
    AlternatingForm sw = apply_matrix_form(grad.mat, w, 3);
    double lhs = -inner(sw, w, m);
    double rhs = norm2(wedge(xi, w), m) +
                 norm2(contract(xi, p_apply(s, w), m), m);
    out.max_qf_residual =
        std::max(out.max_qf_residual, std::fabs(lhs - rhs) / (1.0 + rhs));

    SymbolMatrix dt = symbol_deturck(s, xi);
    out.deturck_min_margin = std::min(out.deturck_min_margin, -dt.cls.sym_max);

    SymbolMatrix lf = symbol_laplacian_flow(s, xi);
    if (lf.cls.sign != SymbolSign::indefinite) ++out.laplacian_sign_failures;
    if (lf.cls.kernel_dim != 7) ++out.laplacian_kernel_failures;

    SymbolMatrix orbit = symbol_orbit_map(s, xi);
    if (orbit.cls.kernel_dim != 0) ++out.orbit_rank_failures;
    double comp = (grad.mat * orbit.mat).norm() /
                  (grad.mat.norm() * orbit.mat.norm());
    out.max_composition_residual = std::max(out.max_composition_residual, comp);
  }
  return out;
}

}  // namespace g2flow
