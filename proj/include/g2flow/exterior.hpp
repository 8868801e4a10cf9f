#pragma once

// The four basic operations on constant forms: wedge product, metric
// contraction (adjoint of wedge), induced inner product, and Hodge star.

#include "g2flow/form.hpp"
#include "g2flow/metric.hpp"

namespace g2flow {

// a ^ b; throws if the degrees sum beyond 7.
AlternatingForm wedge(const AlternatingForm& a, const AlternatingForm& b);

// <a, b>_m for forms of equal degree.
double inner(const AlternatingForm& a, const AlternatingForm& b,
             const MetricTensor& m);

inline double norm2(const AlternatingForm& a, const MetricTensor& m) {
  return inner(a, a, m);
}

// Hodge star: the unique form with  alpha ^ hodge(beta) = <alpha,beta> vol
// for every alpha of complementary degree.  hodge(hodge(a)) == a.
AlternatingForm hodge(const AlternatingForm& a, const MetricTensor& m);

// Metric contraction a .| b (degree(b) - degree(a)), defined by
// <a .| b, c> = <b, a ^ c> for all c.  Throws if degree(a) > degree(b).
AlternatingForm contract(const AlternatingForm& a, const AlternatingForm& b,
                         const MetricTensor& m);

// Matrix of c |-> a ^ c from degree q into degree q + degree(a).
Eigen::MatrixXd wedge_matrix(const AlternatingForm& a, int q);

// Pullback along the linear map A: (pullback(A,f))(u1,..,up) = f(Au1,..,Aup).
AlternatingForm pullback(const Matrix7d& A, const AlternatingForm& f);

}  // namespace g2flow
