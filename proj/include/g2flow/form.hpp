#pragma once

// Constant alternating forms on R^7 with lexicographically ordered
// coefficients.

#include <cstddef>
#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

#include "g2flow/multiindex.hpp"

namespace g2flow {

class AlternatingForm {
 public:
  AlternatingForm() : degree_(0), c_(1, 0.0) {}
  explicit AlternatingForm(int degree)
      : degree_(check_degree(degree)), c_(kDegreeDim[degree], 0.0) {}
  AlternatingForm(int degree, std::vector<double> coeffs);

  // Basis covector e^{i1...ip} given by a digit string such as "127".
  static AlternatingForm basis(const std::string& axes, double coeff = 1.0);
  // Sum of basis terms, e.g. {{"127", 1.0}, {"347", 1.0}}.
  static AlternatingForm from_terms(
      int degree,
      std::initializer_list<std::pair<const char*, double>> terms);

  int degree() const { return degree_; }
  int size() const { return static_cast<int>(c_.size()); }
  double& operator[](int r) { return c_[r]; }
  double operator[](int r) const { return c_[r]; }
  const std::vector<double>& coeffs() const { return c_; }
  std::vector<double>& coeffs() { return c_; }

  AlternatingForm& operator+=(const AlternatingForm& o);
  AlternatingForm& operator-=(const AlternatingForm& o);
  AlternatingForm& operator*=(double s);

  friend AlternatingForm operator+(AlternatingForm a, const AlternatingForm& b) {
    return a += b;
  }
  friend AlternatingForm operator-(AlternatingForm a, const AlternatingForm& b) {
    return a -= b;
  }
  friend AlternatingForm operator*(double s, AlternatingForm a) {
    return a *= s;
  }
  friend AlternatingForm operator*(AlternatingForm a, double s) {
    return a *= s;
  }
  friend AlternatingForm operator-(AlternatingForm a) { return a *= -1.0; }

  // Max-norm of the coefficient vector (basis-dependent; for diagnostics).
  double max_abs() const;

  std::string to_string() const;

 private:
  static int check_degree(int degree);
  int degree_;
  std::vector<double> c_;
};

}  // namespace g2flow
