#include "g2flow/su3.hpp"

#include <cmath>

namespace g2flow {

Su3Frame su3_frame(const G2Structure& s, const AlternatingForm& xi) {
  if (xi.degree() != 1) throw std::invalid_argument("su3_frame needs a covector");
  double n2 = norm2(xi, s.metric());
  if (std::fabs(n2 - 1.0) > 1e-8)
    throw std::invalid_argument("su3_frame needs a unit covector");
  Su3Frame f;
  f.xi = xi;
  f.omega2 = contract(xi, s.omega3(), s.metric());
  f.psi_plus = s.omega3() - wedge(f.omega2, xi);
  // theta = psi_minus ^ xi + omega2^2/2, and contracting xi into theta
  // returns minus psi_minus.
  f.psi_minus = -contract(xi, s.theta(), s.metric());
  return f;
}

namespace {

Eigen::VectorXd to_vec(const AlternatingForm& f) {
  return Eigen::Map<const Eigen::VectorXd>(f.coeffs().data(), f.size());
}

AlternatingForm from_vec(int degree, const Eigen::VectorXd& v) {
  AlternatingForm f(degree);
  for (int i = 0; i < f.size(); ++i) f[i] = v[i];
  return f;
}

// Least-squares coefficient vector x minimizing |target - map(x)| in the
// given Gram inner product, where map(x) = sum_i x_i columns[i]; the
// normal matrix may be singular (rank-deficient directions are dropped).
Eigen::VectorXd fit_span(const Eigen::MatrixXd& columns,
                         const Eigen::MatrixXd& gram,
                         const Eigen::VectorXd& target) {
  Eigen::MatrixXd k = columns.transpose() * gram * columns;
  Eigen::VectorXd rhs = columns.transpose() * gram * target;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k);
  double cut = 1e-10 * es.eigenvalues().cwiseAbs().maxCoeff();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(k.rows());
  for (int i = 0; i < k.rows(); ++i) {
    if (es.eigenvalues()[i] > cut) {
      double c = es.eigenvectors().col(i).dot(rhs) / es.eigenvalues()[i];
      x += c * es.eigenvectors().col(i);
    }
  }
  return x;
}

}  // namespace

Su3Components su3_decompose(const G2Structure& s, const Su3Frame& frame,
                            const AlternatingForm& tdot) {
  if (tdot.degree() != 3)
    throw std::invalid_argument("su3_decompose needs a 3-form");
  const MetricTensor& m = s.metric();

  // Split tdot = beta ^ xi + gamma with xi .| beta = xi .| gamma = 0.
  AlternatingForm beta = contract(frame.xi, tdot, m);
  AlternatingForm gamma = tdot - wedge(beta, frame.xi);

  // Scalar pieces: <beta,omega>/3 = a - 4c, <gamma,psi+>/4 = a + 3c,
  // <gamma,psi->/4 = b.
  double s1 = inner(beta, frame.omega2, m) / 3.0;
  double s2 = inner(gamma, frame.psi_plus, m) / 4.0;
  Su3Components comp;
  comp.a = (3.0 * s1 + 4.0 * s2) / 7.0;
  comp.c = (s2 - s1) / 7.0;
  comp.b = inner(gamma, frame.psi_minus, m) / 4.0;

  // Vector pieces by least squares against the equivariant maps
  // v |-> v .| psi-  (in beta, giving X+Y) and
  // v |-> (v .| omega) ^ omega  (in gamma, giving X-Y).
  Eigen::MatrixXd map_b(kDegreeDim[2], 7), map_g(kDegreeDim[3], 7);
  for (int i = 0; i < 7; ++i) {
    AlternatingForm ei(1);
    ei[i] = 1.0;
    map_b.col(i) = to_vec(contract(ei, frame.psi_minus, m));
    map_g.col(i) =
        to_vec(wedge(contract(ei, frame.omega2, m), frame.omega2));
  }
  AlternatingForm beta_rest = beta - s1 * frame.omega2;
  AlternatingForm gamma_rest =
      gamma - s2 * frame.psi_plus - comp.b * frame.psi_minus;
  Eigen::VectorXd sum_xy = fit_span(map_b, m.gram(2), to_vec(beta_rest));
  Eigen::VectorXd diff_xy = fit_span(map_g, m.gram(3), to_vec(gamma_rest));

  AlternatingForm xsum = from_vec(1, sum_xy), xdiff = from_vec(1, diff_xy);
  // Remove any component along xi (the maps annihilate it).
  auto drop_xi = [&](AlternatingForm v) {
    return v - inner(v, frame.xi, m) * frame.xi;
  };
  comp.X = drop_xi(0.5 * (xsum + xdiff));
  comp.Y = drop_xi(0.5 * (xsum - xdiff));

  comp.beta8 = beta_rest - from_vec(2, map_b * sum_xy);
  comp.gamma12 = gamma_rest - from_vec(3, map_g * diff_xy);
  return comp;
}

AlternatingForm su3_reassemble(const G2Structure& s, const Su3Frame& frame,
                               const Su3Components& comp) {
  const MetricTensor& m = s.metric();
  AlternatingForm om_xi = wedge(frame.omega2, frame.xi);
  AlternatingForm out = comp.a * (om_xi + frame.psi_plus);
  out += comp.b * frame.psi_minus;
  out += comp.c * (-4.0 * om_xi + 3.0 * frame.psi_plus);
  AlternatingForm sum_xy = comp.X + comp.Y;
  AlternatingForm diff_xy = comp.X - comp.Y;
  out += wedge(contract(sum_xy, frame.psi_minus, m), frame.xi);
  out += wedge(contract(diff_xy, frame.omega2, m), frame.omega2);
  out += wedge(comp.beta8, frame.xi);
  out += comp.gamma12;
  return out;
}

}  // namespace g2flow
