#pragma once

// Inner products on R^7 and the induced Gram matrices on each exterior
// power.  The degree-p Gram matrix is the p-th compound of the inverse
// metric: gram_p[I,J] = det( g^{-1}[I,J] ).

#include <Eigen/Dense>
#include <array>
#include <optional>

#include "g2flow/multiindex.hpp"

namespace g2flow {

using Matrix7d = Eigen::Matrix<double, 7, 7>;
using Vector7d = Eigen::Matrix<double, 7, 1>;

class MetricTensor {
 public:
  // g must be symmetric positive definite; throws std::invalid_argument
  // otherwise.
  explicit MetricTensor(const Matrix7d& g);

  static MetricTensor identity();

  const Matrix7d& g() const { return g_; }
  const Matrix7d& inverse() const { return h_; }
  double det() const { return det_; }
  // vol_scale = sqrt(det g); the volume form is vol_scale * e^{1...7}.
  double vol_scale() const { return vol_; }

  // Gram matrix of the induced inner product on degree-p forms
  // (C(7,p) x C(7,p), symmetric positive definite).  Cached.
  const Eigen::MatrixXd& gram(int degree) const;

 private:
  Matrix7d g_, h_;
  double det_, vol_;
  mutable std::array<std::optional<Eigen::MatrixXd>, 8> gram_;
};

// p-th compound matrix of a 7x7 matrix: C_p(A)[I,J] = det(A[I,J]) with
// rows/columns in lex order.  Reference implementation by direct minors.
Eigen::MatrixXd compound_matrix(const Matrix7d& a, int degree);

}  // namespace g2flow
