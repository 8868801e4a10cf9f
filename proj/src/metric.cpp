#include "g2flow/metric.hpp"

#include <cmath>
#include <stdexcept>

namespace g2flow {

Eigen::MatrixXd compound_matrix(const Matrix7d& a, int degree) {
  const auto& t = MultiIndexTables::instance();
  int n = kDegreeDim[degree];
  Eigen::MatrixXd out(n, n);
  if (degree == 0) {
    out(0, 0) = 1.0;
    return out;
  }
  Eigen::MatrixXd sub(degree, degree);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int r = 0; r < degree; ++r)
        for (int c = 0; c < degree; ++c)
          sub(r, c) = a(t.axes_of[degree][i][r], t.axes_of[degree][j][c]);
      out(i, j) = sub.determinant();
    }
  }
  return out;
}

MetricTensor::MetricTensor(const Matrix7d& g) : g_(g) {
  if ((g - g.transpose()).cwiseAbs().maxCoeff() > 1e-12 * g.cwiseAbs().maxCoeff())
    throw std::invalid_argument("metric must be symmetric");
  Eigen::LLT<Matrix7d> llt(g);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("metric must be positive definite");
  det_ = g.determinant();
  vol_ = std::sqrt(det_);
  h_ = llt.solve(Matrix7d::Identity());
  // Symmetrize the inverse to keep Gram matrices exactly symmetric.
  h_ = 0.5 * (h_ + h_.transpose()).eval();
}

MetricTensor MetricTensor::identity() {
  return MetricTensor(Matrix7d::Identity());
}

namespace {

double det_upto3(const Matrix7d& a, const std::array<int, 7>& rows,
                 const std::array<int, 7>& cols, int p) {
  switch (p) {
    case 0:
      return 1.0;
    case 1:
      return a(rows[0], cols[0]);
    case 2:
      return a(rows[0], cols[0]) * a(rows[1], cols[1]) -
             a(rows[0], cols[1]) * a(rows[1], cols[0]);
    default:
      return a(rows[0], cols[0]) * (a(rows[1], cols[1]) * a(rows[2], cols[2]) -
                                    a(rows[1], cols[2]) * a(rows[2], cols[1])) -
             a(rows[0], cols[1]) * (a(rows[1], cols[0]) * a(rows[2], cols[2]) -
                                    a(rows[1], cols[2]) * a(rows[2], cols[0])) +
             a(rows[0], cols[2]) * (a(rows[1], cols[0]) * a(rows[2], cols[1]) -
                                    a(rows[1], cols[1]) * a(rows[2], cols[0]));
  }
}

Eigen::MatrixXd compound_small(const Matrix7d& a, int p) {
  const auto& t = MultiIndexTables::instance();
  int n = kDegreeDim[p];
  Eigen::MatrixXd out(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      out(i, j) = det_upto3(a, t.axes_of[p][i], t.axes_of[p][j], p);
  return out;
}

// Parity of the element sum of a subset (0-based axes -> use 1-based sum).
int sum_parity_sign(int degree, int rank) {
  const auto& t = MultiIndexTables::instance();
  int s = 0;
  for (int i = 0; i < degree; ++i) s += t.axes_of[degree][rank][i] + 1;
  return (s % 2 == 0) ? 1 : -1;
}

}  // namespace

const Eigen::MatrixXd& MetricTensor::gram(int degree) const {
  if (degree < 0 || degree > kDim)
    throw std::invalid_argument("gram degree must be in [0,7]");
  if (gram_[degree]) return *gram_[degree];
  if (degree <= 3) {
    gram_[degree] = compound_small(h_, degree);
  } else {
    // Complementary-minor identity: det(h[I,J]) =
    // det(h) * (-1)^{sum I + sum J} * det(g[Jc, Ic]).
    const auto& t = MultiIndexTables::instance();
    int q = kDim - degree;
    Eigen::MatrixXd cg = compound_small(g_, q);
    int n = kDegreeDim[degree];
    Eigen::MatrixXd out(n, n);
    double det_h = 1.0 / det_;
    for (int i = 0; i < n; ++i) {
      int ic = t.complement_rank[degree][i];
      int si = sum_parity_sign(degree, i);
      for (int j = 0; j < n; ++j) {
        int jc = t.complement_rank[degree][j];
        int sj = sum_parity_sign(degree, j);
        out(i, j) = det_h * si * sj * cg(jc, ic);
      }
    }
    gram_[degree] = std::move(out);
  }
  return *gram_[degree];
}

}  // namespace g2flow
