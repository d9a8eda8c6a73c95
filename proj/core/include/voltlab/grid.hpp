#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace voltlab {

using Vec = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXd;
using CMat = Eigen::MatrixXcd;
using cplx = std::complex<double>;

/// Uniform left-endpoint grid on [0,1): nodes x_i = i*h with h = 1/n.
/// Power-of-two n keeps h, x_i and x_i*h exactly representable, which several
/// exact-cancellation routines rely on; non-dyadic n is allowed everywhere but
/// weakens "bitwise" statements to "within a few ulps".
struct Grid {
  int n = 0;
  double h = 0.0;

  Grid() = default;
  explicit Grid(int n_nodes) : n(n_nodes), h(1.0 / n_nodes) {
    if (n_nodes < 2) {
      throw std::invalid_argument("Grid: need at least 2 nodes, got " +
                                  std::to_string(n_nodes));
    }
  }

  double node(int i) const { return i * h; }

  Vec nodes() const {
    Vec x(n);
    for (int i = 0; i < n; ++i) x[i] = i * h;
    return x;
  }

  bool dyadic() const { return (n & (n - 1)) == 0; }

  friend bool operator==(const Grid& a, const Grid& b) {
    return a.n == b.n;
  }
};

inline void require_same_grid(const Grid& a, const Grid& b, const char* where) {
  if (!(a == b)) {
    throw std::invalid_argument(std::string(where) + ": grid mismatch (" +
                                std::to_string(a.n) + " vs " +
                                std::to_string(b.n) + " nodes)");
  }
}

}  // namespace voltlab
