#include "g2flow/exterior.hpp"

#include <stdexcept>

namespace g2flow {

AlternatingForm wedge(const AlternatingForm& a, const AlternatingForm& b) {
  int p = a.degree(), q = b.degree();
  if (p + q > kDim)
    throw std::invalid_argument("wedge degree exceeds the dimension");
  const auto& table = MultiIndexTables::instance().wedge[p][q];
  AlternatingForm out(p + q);
  for (const auto& e : table) out[e.k] += e.sign * a[e.i] * b[e.j];
  return out;
}

double inner(const AlternatingForm& a, const AlternatingForm& b,
             const MetricTensor& m) {
  if (a.degree() != b.degree())
    throw std::invalid_argument("inner product requires equal degrees");
  const Eigen::MatrixXd& gram = m.gram(a.degree());
  Eigen::Map<const Eigen::VectorXd> va(a.coeffs().data(), a.size());
  Eigen::Map<const Eigen::VectorXd> vb(b.coeffs().data(), b.size());
  return va.dot(gram * vb);
}

AlternatingForm hodge(const AlternatingForm& a, const MetricTensor& m) {
  const auto& t = MultiIndexTables::instance();
  int p = a.degree();
  const Eigen::MatrixXd& gram = m.gram(p);
  Eigen::Map<const Eigen::VectorXd> va(a.coeffs().data(), a.size());
  Eigen::VectorXd raised = gram * va;
  AlternatingForm out(kDim - p);
  for (int r = 0; r < kDegreeDim[p]; ++r)
    out[t.complement_rank[p][r]] =
        t.complement_sign[p][r] * m.vol_scale() * raised[r];
  return out;
}

Eigen::MatrixXd wedge_matrix(const AlternatingForm& a, int q) {
  int p = a.degree();
  if (p + q > kDim)
    throw std::invalid_argument("wedge degree exceeds the dimension");
  const auto& table = MultiIndexTables::instance().wedge[p][q];
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(kDegreeDim[p + q], kDegreeDim[q]);
  for (const auto& e : table) w(e.k, e.j) += e.sign * a[e.i];
  return w;
}

AlternatingForm contract(const AlternatingForm& a, const AlternatingForm& b,
                         const MetricTensor& m) {
  int k = a.degree(), l = b.degree();
  if (k > l)
    throw std::invalid_argument("contraction degree exceeds form degree");
  int q = l - k;
  Eigen::MatrixXd w = wedge_matrix(a, q);
  Eigen::Map<const Eigen::VectorXd> vb(b.coeffs().data(), b.size());
  Eigen::VectorXd rhs = w.transpose() * (m.gram(l) * vb);
  Eigen::VectorXd x = m.gram(q).llt().solve(rhs);
  AlternatingForm out(q);
  for (int i = 0; i < out.size(); ++i) out[i] = x[i];
  return out;
}

AlternatingForm pullback(const Matrix7d& A, const AlternatingForm& f) {
  const auto& t = MultiIndexTables::instance();
  int p = f.degree();
  AlternatingForm out(p);
  if (p == 0) {
    out[0] = f[0];
    return out;
  }
  Eigen::MatrixXd sub(p, p);
  for (int i = 0; i < kDegreeDim[p]; ++i) {
    double acc = 0.0;
    for (int j = 0; j < kDegreeDim[p]; ++j) {
      if (f[j] == 0.0) continue;
      for (int r = 0; r < p; ++r)
        for (int c = 0; c < p; ++c)
          sub(r, c) = A(t.axes_of[p][j][r], t.axes_of[p][i][c]);
      acc += f[j] * sub.determinant();
    }
    out[i] = acc;
  }
  return out;
}

}  // namespace g2flow
