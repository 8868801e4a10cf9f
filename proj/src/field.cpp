#include "g2flow/field.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "g2flow/form.hpp"
#include "g2flow/exterior.hpp"

namespace g2flow {

FormField random_field(const TorusGrid& g, int degree, SplitMix64& rng,
                       double amp) {
  FormField out(g, degree);
  for (auto& v : out.data()) v = amp * rng.sym();
  return out;
}

void TrigForm::add_mode(const Eigen::VectorXd& c, const std::array<double, 7>& k,
                        double phase) {
  if (c.size() != dim()) throw std::invalid_argument("mode coefficient size");
  modes_.push_back({c, k, phase});
}

Eigen::VectorXd TrigForm::eval(const std::array<double, 7>& x) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(dim());
  for (const auto& m : modes_) {
    double arg = m.phase;
    for (int a = 0; a < 7; ++a) arg += m.k[a] * x[a];
    out += std::cos(arg) * m.c;
  }
  return out;
}

TrigForm d(const TrigForm& f) {
  // d/dx_a cos(k.x + p) = k_a cos(k.x + p + pi/2); the coefficient vector
  // is wedged with sum_a k_a e^a.
  const int p = f.degree();
  TrigForm out(p + 1);
  for (const auto& m : f.modes()) {
    AlternatingForm one(1);
    for (int a = 0; a < 7; ++a) one[a] = m.k[a];
    Eigen::MatrixXd w = wedge_matrix(one, p);
    Eigen::VectorXd c = w * m.c;
    if (c.cwiseAbs().maxCoeff() == 0.0) continue;
    out.add_mode(c, m.k, m.phase + M_PI / 2.0);
  }
  return out;
}

TrigForm apply_matrix(const Eigen::MatrixXd& m, const TrigForm& x,
                      int out_degree) {
  if (m.cols() != x.dim() || m.rows() != kDegreeDim[out_degree])
    throw std::invalid_argument("matrix shape mismatch");
  TrigForm out(out_degree);
  for (const auto& mo : x.modes()) {
    Eigen::VectorXd c = m * mo.c;
    if (c.size() > 0 && c.cwiseAbs().maxCoeff() == 0.0) continue;
    out.add_mode(c, mo.k, mo.phase);
  }
  return out;
}

TrigForm operator+(const TrigForm& a, const TrigForm& b) {
  if (a.degree() != b.degree()) throw std::invalid_argument("degree mismatch");
  TrigForm out = a;
  for (const auto& m : b.modes()) out.add_mode(m.c, m.k, m.phase);
  return out;
}

TrigForm operator*(double s, TrigForm a) {
  TrigForm out(a.degree());
  for (const auto& m : a.modes()) out.add_mode(s * m.c, m.k, m.phase);
  return out;
}

FormField sample(const TorusGrid& g, const TrigForm& f) {
  FormField out(g, f.degree());
  for (int64_t i = 0; i < g.nodes(); ++i) {
    Eigen::VectorXd v = f.eval(g.position(i));
    for (int r = 0; r < out.dim(); ++r) out.at(i, r) = v[r];
  }
  return out;
}

TrigForm random_trig_form(const TorusGrid& g, int degree, SplitMix64& rng,
                          int n_modes, int max_harmonic) {
  TrigForm out(degree);
  bool any_active = false;
  for (int a = 0; a < 7; ++a) any_active = any_active || g.active(a);
  for (int m = 0; m < n_modes; ++m) {
    // Redraw all-zero wavevectors so every mode genuinely oscillates
    // (otherwise d and the codifferential annihilate it and convergence
    // measurements degenerate to 0/0).
    std::array<double, 7> k{};
    bool nonzero = false;
    while (any_active && !nonzero) {
      for (int a = 0; a < 7; ++a) {
        if (!g.active(a)) continue;
        int ha =
            static_cast<int>(rng.below(2 * max_harmonic + 1)) - max_harmonic;
        k[a] = 2.0 * M_PI * ha / g.len()[a];
        nonzero = nonzero || ha != 0;
      }
    }
    Eigen::VectorXd c(kDegreeDim[degree]);
    for (int r = 0; r < c.size(); ++r) c[r] = rng.sym();
    double phase = rng.real(0.0, 2.0 * M_PI);
    out.add_mode(c, k, phase);
  }
  return out;
}

void write_field(std::ostream& os, const FormField& f) {
  const TorusGrid& g = f.grid();
  os << "g2flow-field 1\n";
  os << "degree " << f.degree() << "\n";
  os << "n";
  for (int a = 0; a < 7; ++a) os << " " << g.n()[a];
  os << "\nlen";
  char buf[32];
  for (int a = 0; a < 7; ++a) {
    std::snprintf(buf, sizeof buf, " %.17g", g.len()[a]);
    os << buf;
  }
  os << "\nfd_order " << g.fd_order() << "\n";
  for (int64_t i = 0; i < f.nodes(); ++i) {
    for (int r = 0; r < f.dim(); ++r) {
      std::snprintf(buf, sizeof buf, "%.17g", f.at(i, r));
      os << (r ? " " : "") << buf;
    }
    os << "\n";
  }
}

void write_field(const std::string& path, const FormField& f) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  write_field(os, f);
}

namespace {
void expect_token(std::istream& is, const std::string& want) {
  std::string got;
  is >> got;
  if (got != want)
    throw std::runtime_error("field parse: expected '" + want + "', got '" +
                             got + "'");
}
}  // namespace

FormField read_field(std::istream& is, const TorusGrid& grid) {
  expect_token(is, "g2flow-field");
  expect_token(is, "1");
  expect_token(is, "degree");
  int degree = -1;
  is >> degree;
  if (degree < 0 || degree > 7) throw std::runtime_error("bad field degree");
  expect_token(is, "n");
  for (int a = 0; a < 7; ++a) {
    int v;
    is >> v;
    if (v != grid.n()[a]) throw std::runtime_error("field grid shape mismatch");
  }
  expect_token(is, "len");
  for (int a = 0; a < 7; ++a) {
    double v;
    is >> v;
    if (v != grid.len()[a])
      throw std::runtime_error("field grid period mismatch");
  }
  expect_token(is, "fd_order");
  int order;
  is >> order;
  if (order != grid.fd_order())
    throw std::runtime_error("field stencil order mismatch");
  FormField out(grid, degree);
  for (auto& v : out.data())
    if (!(is >> v)) throw std::runtime_error("field parse: short data");
  return out;
}

FormField read_field(const std::string& path, const TorusGrid& grid) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  return read_field(is, grid);
}

}  // namespace g2flow
