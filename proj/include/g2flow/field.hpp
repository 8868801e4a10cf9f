#pragma once

// Discrete p-form fields on a TorusGrid and the analytic trigonometric
// fields used as convergence oracles.
//
// A field stores one coefficient block per node (lex basis order within
// the degree), node-major with axis 1 slowest.  The scalar type S is
// double in production and Dual for Jacobian-vector products; analytic
// TrigForm fields are double-only.

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "g2flow/dual.hpp"
#include "g2flow/grid.hpp"
#include "g2flow/multiindex.hpp"
#include "g2flow/rng.hpp"

namespace g2flow {

namespace detail {

// Deterministic pairwise (binary-tree) reduction; the summation order is
// fixed by the layout, never by chunking, so results are reproducible
// bit-for-bit.  Destroys the buffer.
template <class S>
inline S pairwise_sum(std::vector<S>& v) {
  size_t n = v.size();
  if (n == 0) return S(0.0);
  while (n > 1) {
    size_t m = n / 2;
    for (size_t i = 0; i < m; ++i) v[i] = v[2 * i] + v[2 * i + 1];
    if (n % 2) {
      v[m] = v[n - 1];
      ++m;
    }
    n = m;
  }
  return v[0];
}

}  // namespace detail

template <class S>
class BasicFormField {
 public:
  BasicFormField() = default;
  BasicFormField(const TorusGrid& grid, int degree)
      : grid_(&grid),
        degree_(degree),
        data_(static_cast<size_t>(grid.nodes()) * kDegreeDim[degree], S(0.0)) {
    if (degree < 0 || degree > 7)
      throw std::invalid_argument("field degree out of range");
  }

  const TorusGrid& grid() const { return *grid_; }
  int degree() const { return degree_; }
  int dim() const { return kDegreeDim[degree_]; }
  int64_t nodes() const { return grid_->nodes(); }
  bool empty() const { return grid_ == nullptr; }

  S* node(int64_t i) { return data_.data() + static_cast<size_t>(i) * dim(); }
  const S* node(int64_t i) const {
    return data_.data() + static_cast<size_t>(i) * dim();
  }
  S& at(int64_t i, int r) { return data_[static_cast<size_t>(i) * dim() + r]; }
  const S& at(int64_t i, int r) const {
    return data_[static_cast<size_t>(i) * dim() + r];
  }
  std::vector<S>& data() { return data_; }
  const std::vector<S>& data() const { return data_; }

  BasicFormField& operator+=(const BasicFormField& o) {
    check_compatible(o);
    for (size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }
  BasicFormField& operator-=(const BasicFormField& o) {
    check_compatible(o);
    for (size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
  }
  BasicFormField& operator*=(S s) {
    for (auto& v : data_) v *= s;
    return *this;
  }
  // this += c * o
  BasicFormField& axpy(S c, const BasicFormField& o) {
    check_compatible(o);
    for (size_t i = 0; i < data_.size(); ++i) data_[i] += c * o.data_[i];
    return *this;
  }

  friend BasicFormField operator+(BasicFormField a, const BasicFormField& b) {
    return a += b;
  }
  friend BasicFormField operator-(BasicFormField a, const BasicFormField& b) {
    return a -= b;
  }
  friend BasicFormField operator*(S s, BasicFormField a) { return a *= s; }
  friend BasicFormField operator-(BasicFormField a) { return a *= S(-1.0); }

  double max_abs() const {
    double m = 0.0;
    for (const auto& v : data_) {
      double av = scalar_value(v);
      m = std::max(m, av < 0 ? -av : av);
    }
    return m;
  }

  void check_compatible(const BasicFormField& o) const {
    if (degree_ != o.degree_ || !grid_->same_layout(*o.grid_))
      throw std::invalid_argument("incompatible fields");
  }

 private:
  const TorusGrid* grid_ = nullptr;
  int degree_ = 0;
  std::vector<S> data_;
};

using FormField = BasicFormField<double>;

// ---- stencil calculus -------------------------------------------------

// Exterior derivative with central differences; collapsed axes contribute
// nothing.
template <class S>
BasicFormField<S> d(const BasicFormField<S>& f) {
  const TorusGrid& g = f.grid();
  const auto& mt = MultiIndexTables::instance();
  const int p = f.degree();
  if (p >= 7) throw std::invalid_argument("cannot take d of a 7-form");
  BasicFormField<S> out(g, p + 1);
  struct Term {
    int rin, rout;
    double sign;
  };
  for (int a = 0; a < 7; ++a) {
    if (!g.active(a)) continue;
    std::vector<Term> terms;
    for (int r = 0; r < kDegreeDim[p]; ++r) {
      uint8_t m = mt.mask_of[p][r];
      if (m & (uint8_t(1) << a)) continue;
      terms.push_back({r, mt.rank_of[m | (uint8_t(1) << a)],
                       double(merge_sign(uint8_t(1) << a, m))});
    }
    const auto& p1 = g.neighbors(a, 1);
    const auto& m1 = g.neighbors(a, -1);
    const double ha = g.spacing()[a];
    if (g.fd_order() == 2) {
      const double c1 = 1.0 / (2.0 * ha);
      for (int64_t i = 0; i < g.nodes(); ++i) {
        const S* fp = f.node(p1[i]);
        const S* fm = f.node(m1[i]);
        S* o = out.node(i);
        for (const auto& t : terms)
          o[t.rout] += S(t.sign * c1) * (fp[t.rin] - fm[t.rin]);
      }
    } else {
      const auto& p2 = g.neighbors(a, 2);
      const auto& m2 = g.neighbors(a, -2);
      const double c1 = 8.0 / (12.0 * ha), c2 = -1.0 / (12.0 * ha);
      for (int64_t i = 0; i < g.nodes(); ++i) {
        const S* fp1 = f.node(p1[i]);
        const S* fm1 = f.node(m1[i]);
        const S* fp2 = f.node(p2[i]);
        const S* fm2 = f.node(m2[i]);
        S* o = out.node(i);
        for (const auto& t : terms)
          o[t.rout] += S(t.sign) * (S(c1) * (fp1[t.rin] - fm1[t.rin]) +
                                    S(c2) * (fp2[t.rin] - fm2[t.rin]));
      }
    }
  }
  return out;
}

// Coefficient transpose of d: for periodic central stencils each D_a is
// antisymmetric, so (d^T w)[J] = -sum_{a not in J} sign(a,J) D_a w[J u a].
template <class S>
BasicFormField<S> d_transpose(const BasicFormField<S>& w) {
  const TorusGrid& g = w.grid();
  const auto& mt = MultiIndexTables::instance();
  const int q = w.degree();
  if (q < 1) throw std::invalid_argument("cannot transpose d into degree -1");
  BasicFormField<S> out(g, q - 1);
  struct Term {
    int rin, rout;
    double sign;
  };
  for (int a = 0; a < 7; ++a) {
    if (!g.active(a)) continue;
    std::vector<Term> terms;
    for (int r = 0; r < kDegreeDim[q - 1]; ++r) {
      uint8_t m = mt.mask_of[q - 1][r];
      if (m & (uint8_t(1) << a)) continue;
      terms.push_back({mt.rank_of[m | (uint8_t(1) << a)], r,
                       -double(merge_sign(uint8_t(1) << a, m))});
    }
    const auto& p1 = g.neighbors(a, 1);
    const auto& m1 = g.neighbors(a, -1);
    const double ha = g.spacing()[a];
    if (g.fd_order() == 2) {
      const double c1 = 1.0 / (2.0 * ha);
      for (int64_t i = 0; i < g.nodes(); ++i) {
        const S* fp = w.node(p1[i]);
        const S* fm = w.node(m1[i]);
        S* o = out.node(i);
        for (const auto& t : terms)
          o[t.rout] += S(t.sign * c1) * (fp[t.rin] - fm[t.rin]);
      }
    } else {
      const auto& p2 = g.neighbors(a, 2);
      const auto& m2 = g.neighbors(a, -2);
      const double c1 = 8.0 / (12.0 * ha), c2 = -1.0 / (12.0 * ha);
      for (int64_t i = 0; i < g.nodes(); ++i) {
        const S* fp1 = w.node(p1[i]);
        const S* fm1 = w.node(m1[i]);
        const S* fp2 = w.node(p2[i]);
        const S* fm2 = w.node(m2[i]);
        S* o = out.node(i);
        for (const auto& t : terms)
          o[t.rout] += S(t.sign) * (S(c1) * (fp1[t.rin] - fm1[t.rin]) +
                                    S(c2) * (fp2[t.rin] - fm2[t.rin]));
      }
    }
  }
  return out;
}

// Plain coefficient inner product (no metric weight), pairwise-reduced.
template <class S>
S dot(const BasicFormField<S>& a, const BasicFormField<S>& b) {
  a.check_compatible(b);
  std::vector<S> terms(static_cast<size_t>(a.nodes()));
  const int dim = a.dim();
  for (int64_t i = 0; i < a.nodes(); ++i) {
    S acc = S(0.0);
    const S* pa = a.node(i);
    const S* pb = b.node(i);
    for (int r = 0; r < dim; ++r) acc += pa[r] * pb[r];
    terms[static_cast<size_t>(i)] = acc;
  }
  return detail::pairwise_sum(terms);
}

// Constant-coefficient matrix applied at every node (rows: out degree,
// cols: in degree).
template <class S>
BasicFormField<S> apply_matrix(const Eigen::MatrixXd& m,
                               const BasicFormField<S>& x, int out_degree) {
  if (m.cols() != x.dim() || m.rows() != kDegreeDim[out_degree])
    throw std::invalid_argument("matrix shape mismatch");
  BasicFormField<S> out(x.grid(), out_degree);
  const int rows = static_cast<int>(m.rows());
  const int cols = static_cast<int>(m.cols());
  for (int64_t i = 0; i < x.nodes(); ++i) {
    const S* in = x.node(i);
    S* o = out.node(i);
    for (int r = 0; r < rows; ++r) {
      S acc = S(0.0);
      for (int c = 0; c < cols; ++c) acc += S(m(r, c)) * in[c];
      o[r] = acc;
    }
  }
  return out;
}

// Constant field with the given coefficients at every node.
template <class S>
BasicFormField<S> constant_field(const TorusGrid& g, int degree,
                                 const std::vector<double>& coeffs) {
  if (static_cast<int>(coeffs.size()) != kDegreeDim[degree])
    throw std::invalid_argument("coefficient count mismatch");
  BasicFormField<S> out(g, degree);
  for (int64_t i = 0; i < g.nodes(); ++i)
    for (int r = 0; r < out.dim(); ++r) out.at(i, r) = S(coeffs[r]);
  return out;
}

// Seeded uniform random field with coefficients in [-amp, amp), filled in
// node-major order so the result is reproducible.
FormField random_field(const TorusGrid& g, int degree, SplitMix64& rng,
                       double amp);

// ---- analytic trigonometric fields ------------------------------------

// A finite sum of modes  c * cos(k.x + phase)  with vector coefficients.
// Closed under the exterior derivative and under constant matrices, so
// entire operator chains evaluate exactly; sampling on a grid gives the
// reference values for convergence studies.
class TrigForm {
 public:
  struct Mode {
    Eigen::VectorXd c;
    std::array<double, 7> k;
    double phase = 0.0;
  };

  explicit TrigForm(int degree) : degree_(degree) {}
  int degree() const { return degree_; }
  int dim() const { return kDegreeDim[degree_]; }
  const std::vector<Mode>& modes() const { return modes_; }
  void add_mode(const Eigen::VectorXd& c, const std::array<double, 7>& k,
                double phase);

  Eigen::VectorXd eval(const std::array<double, 7>& x) const;

 private:
  int degree_;
  std::vector<Mode> modes_;
};

// Exact exterior derivative (one output mode per input mode, phase
// advanced by pi/2).
TrigForm d(const TrigForm& f);

TrigForm apply_matrix(const Eigen::MatrixXd& m, const TrigForm& x,
                      int out_degree);
TrigForm operator+(const TrigForm& a, const TrigForm& b);
TrigForm operator*(double s, TrigForm a);

FormField sample(const TorusGrid& g, const TrigForm& f);

// A seeded random band-limited trig field whose frequencies are grid
// periodic: k_a = 2 pi m_a / len_a with |m_a| <= max_harmonic on active
// axes.  Every mode gets a random coefficient vector and phase.
TrigForm random_trig_form(const TorusGrid& g, int degree, SplitMix64& rng,
                          int n_modes, int max_harmonic);

// ---- serialization ----------------------------------------------------

// Stable text format (one header block, then one line of %.17g
// coefficients per node in storage order):
//   g2flow-field 1
//   degree <p>
//   n <n1> ... <n7>
//   len <l1> ... <l7>
//   fd_order <2|4>
//   <coefficients ...>
void write_field(std::ostream& os, const FormField& f);
void write_field(const std::string& path, const FormField& f);
// Validates that the header matches `grid`; throws std::runtime_error on
// mismatch or parse failure.
FormField read_field(std::istream& is, const TorusGrid& grid);
FormField read_field(const std::string& path, const TorusGrid& grid);

}  // namespace g2flow
