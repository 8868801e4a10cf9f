#pragma once

// Flat periodic grid on a 7-torus with axis-aligned spacing.  Axes with a
// single node are "collapsed": fields are constant along them and the
// finite-difference derivative in that direction is identically zero, so
// products of circles of any dimension up to 7 run through the same code.

#include <array>
#include <cstdint>
#include <vector>

namespace g2flow {

class TorusGrid {
 public:
  // n[i]: nodes along axis i (1, or >= 3 for order 2, >= 5 for order 4);
  // len[i]: period length (> 0); fd_order: 2 or 4 (central stencils).
  // Throws std::invalid_argument on any violation.
  TorusGrid(const std::array<int, 7>& n, const std::array<double, 7>& len,
            int fd_order);

  const std::array<int, 7>& n() const { return n_; }
  const std::array<double, 7>& len() const { return len_; }
  int fd_order() const { return fd_order_; }
  const std::array<double, 7>& spacing() const { return h_; }
  // Volume of one grid cell (product of spacings over all axes).
  double cell() const { return cell_; }
  int64_t nodes() const { return n_nodes_; }
  bool active(int axis) const { return n_[axis] > 1; }

  // Node-major linear index with axis 1 slowest:
  //   index = ((c0 n1 + c1) n2 + ... ) n6 + c6.
  int64_t index(const std::array<int, 7>& c) const;
  std::array<int, 7> coords(int64_t index) const;
  std::array<double, 7> position(int64_t index) const;

  // Periodic neighbor table: index of the node shifted by `delta` steps
  // along `axis`, for delta in {-2,-1,1,2}.
  const std::vector<int64_t>& neighbors(int axis, int delta) const;

  // Largest value of the first-derivative stencil symbol along an axis
  // (sin(t)/h for order 2, (8 sin t - sin 2t)/(6h) for order 4); zero for
  // collapsed axes.  Used for step-size bounds.
  double max_derivative_symbol(int axis) const;

  // First-derivative stencil symbol at angular frequency k (cycles scaled
  // by spacing internally): the discrete D_a applied to exp(i k x) gives
  // i * symbol * exp(i k x).
  double derivative_symbol(int axis, double k) const;

  bool same_layout(const TorusGrid& other) const;

 private:
  std::array<int, 7> n_;
  std::array<double, 7> len_;
  int fd_order_;
  std::array<double, 7> h_;
  std::array<int64_t, 7> stride_;
  int64_t n_nodes_;
  double cell_;
  // neighbor tables indexed [axis][delta+2] (delta 0 unused).
  std::array<std::array<std::vector<int64_t>, 5>, 7> nbr_;
};

}  // namespace g2flow
