#include "g2flow/form.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace g2flow {

int AlternatingForm::check_degree(int degree) {
  if (degree < 0 || degree > kDim)
    throw std::invalid_argument("form degree must be in [0,7]");
  return degree;
}

AlternatingForm::AlternatingForm(int degree, std::vector<double> coeffs)
    : degree_(check_degree(degree)), c_(std::move(coeffs)) {
  if (static_cast<int>(c_.size()) != kDegreeDim[degree_])
    throw std::invalid_argument("coefficient count does not match degree");
}

AlternatingForm AlternatingForm::basis(const std::string& axes, double coeff) {
  const auto& t = MultiIndexTables::instance();
  uint8_t mask = 0;
  for (char ch : axes) {
    if (ch < '1' || ch > '7')
      throw std::invalid_argument("axis digits must be 1..7");
    uint8_t bit = 1u << (ch - '1');
    if (mask & bit) throw std::invalid_argument("repeated axis in basis label");
    mask |= bit;
  }
  AlternatingForm f(static_cast<int>(axes.size()));
  f.c_[t.rank_of[mask]] = coeff;
  return f;
}

AlternatingForm AlternatingForm::from_terms(
    int degree, std::initializer_list<std::pair<const char*, double>> terms) {
  AlternatingForm f(degree);
  for (const auto& [label, coeff] : terms) f += basis(label, coeff);
  return f;
}

AlternatingForm& AlternatingForm::operator+=(const AlternatingForm& o) {
  if (o.degree_ != degree_)
    throw std::invalid_argument("degree mismatch in form addition");
  for (size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
  return *this;
}

AlternatingForm& AlternatingForm::operator-=(const AlternatingForm& o) {
  if (o.degree_ != degree_)
    throw std::invalid_argument("degree mismatch in form subtraction");
  for (size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
  return *this;
}

AlternatingForm& AlternatingForm::operator*=(double s) {
  for (double& v : c_) v *= s;
  return *this;
}

double AlternatingForm::max_abs() const {
  double m = 0.0;
  for (double v : c_) m = std::max(m, std::fabs(v));
  return m;
}

std::string AlternatingForm::to_string() const {
  std::string out;
  char buf[64];
  for (int r = 0; r < size(); ++r) {
    if (c_[r] == 0.0) continue;
    std::snprintf(buf, sizeof(buf), "%+.6g*", c_[r]);
    out += buf;
    out += basis_label(degree_, r);
    out += " ";
  }
  if (out.empty()) out = "0";
  return out;
}

}  // namespace g2flow
