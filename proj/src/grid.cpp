#include "g2flow/grid.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace g2flow {

TorusGrid::TorusGrid(const std::array<int, 7>& n,
                     const std::array<double, 7>& len, int fd_order)
    : n_(n), len_(len), fd_order_(fd_order) {
  if (fd_order != 2 && fd_order != 4)
    throw std::invalid_argument("fd_order must be 2 or 4, got " +
                                std::to_string(fd_order));
  const int min_active = (fd_order == 2) ? 3 : 5;
  for (int a = 0; a < 7; ++a) {
    if (n_[a] != 1 && n_[a] < min_active)
      throw std::invalid_argument(
          "axis " + std::to_string(a + 1) + " has " + std::to_string(n_[a]) +
          " nodes; need 1 or >= " + std::to_string(min_active) +
          " for order " + std::to_string(fd_order));
    if (!(len_[a] > 0.0))
      throw std::invalid_argument("axis " + std::to_string(a + 1) +
                                  " period must be positive");
  }
  n_nodes_ = 1;
  for (int a = 6; a >= 0; --a) {
    stride_[a] = n_nodes_;
    n_nodes_ *= n_[a];
  }
  cell_ = 1.0;
  for (int a = 0; a < 7; ++a) {
    h_[a] = len_[a] / n_[a];
    cell_ *= h_[a];
  }
  for (int a = 0; a < 7; ++a)
    for (int d : {-2, -1, 1, 2}) {
      auto& tab = nbr_[a][d + 2];
      tab.resize(static_cast<size_t>(n_nodes_));
      for (int64_t i = 0; i < n_nodes_; ++i) {
        int c = static_cast<int>((i / stride_[a]) % n_[a]);
        int cs = ((c + d) % n_[a] + n_[a]) % n_[a];
        tab[static_cast<size_t>(i)] = i + int64_t(cs - c) * stride_[a];
      }
    }
}

int64_t TorusGrid::index(const std::array<int, 7>& c) const {
  int64_t idx = 0;
  for (int a = 0; a < 7; ++a) idx += int64_t(c[a]) * stride_[a];
  return idx;
}

std::array<int, 7> TorusGrid::coords(int64_t index) const {
  std::array<int, 7> c;
  for (int a = 0; a < 7; ++a) c[a] = static_cast<int>((index / stride_[a]) % n_[a]);
  return c;
}

std::array<double, 7> TorusGrid::position(int64_t index) const {
  auto c = coords(index);
  std::array<double, 7> x;
  for (int a = 0; a < 7; ++a) x[a] = c[a] * h_[a];
  return x;
}

const std::vector<int64_t>& TorusGrid::neighbors(int axis, int delta) const {
  return nbr_[axis][delta + 2];
}

double TorusGrid::derivative_symbol(int axis, double k) const {
  if (!active(axis)) return 0.0;
  double t = k * h_[axis];
  if (fd_order_ == 2) return std::sin(t) / h_[axis];
  return (8.0 * std::sin(t) - std::sin(2.0 * t)) / (6.0 * h_[axis]);
}

double TorusGrid::max_derivative_symbol(int axis) const {
  if (!active(axis)) return 0.0;
  if (fd_order_ == 2) return 1.0 / h_[axis];
  // Maximize (8 sin t - sin 2t)/6: the critical cosine solves
  // 2c^2 - 4c - 1 = 0, c = 1 - sqrt(6)/2.
  double c = 1.0 - std::sqrt(6.0) / 2.0;
  double s = std::sqrt(1.0 - c * c);
  double val = (8.0 * s - 2.0 * s * c) / 6.0;
  return val / h_[axis];
}

bool TorusGrid::same_layout(const TorusGrid& other) const {
  return n_ == other.n_ && len_ == other.len_ && fd_order_ == other.fd_order_;
}

}  // namespace g2flow
