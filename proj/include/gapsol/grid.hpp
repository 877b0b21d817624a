// Uniform periodic grids on the cube Q_k, periodic fields, and the spectral
// calculus (Laplacian, quadrature, H^1 norm, lattice translations) on them.
#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "gapsol/detail/fourier.hpp"
#include "gapsol/error.hpp"

namespace gapsol {

/// Grid on Q_k: `n` nodes per lattice unit on each of `dim` axes, `n*k` nodes per axis.
struct GridSpec {
  int dim = 1;
  int k = 1;
  int n = 4;

  int points_per_axis() const { return n * k; }
  std::size_t size() const {
    std::size_t m = static_cast<std::size_t>(points_per_axis());
    return dim == 1 ? m : m * m;
  }
  double spacing() const { return 1.0 / n; }
  /// Quadrature weight h^N of every node.
  double node_weight() const { return std::pow(spacing(), dim); }
  double cell_measure() const { return std::pow(static_cast<double>(k), dim); }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

inline std::string describe(const GridSpec& g) {
  return "dim=" + std::to_string(g.dim) + " k=" + std::to_string(g.k) +
         " n=" + std::to_string(g.n);
}

inline GridSpec make_grid(int dim, int k, int n) {
  if (dim != 1 && dim != 2) fail(ErrorCode::InvalidGrid, "dimension must be 1 or 2");
  if (k < 1) fail(ErrorCode::InvalidGrid, "cell edge k must be a positive integer");
  if (n < 4 || n % 2 != 0)
    fail(ErrorCode::InvalidGrid, "points per unit n must be an even integer >= 4");
  return GridSpec{dim, k, n};
}

inline void require_same_grid(const GridSpec& a, const GridSpec& b) {
  if (!(a == b))
    fail(ErrorCode::GridMismatch, "grids differ: " + describe(a) + " vs " + describe(b));
}

/// Multi-index of a flat node index (axis 0 slowest).
inline std::array<int, 2> node_multi_index(const GridSpec& g, std::size_t index) {
  const int m = g.points_per_axis();
  if (g.dim == 1) return {static_cast<int>(index), 0};
  return {static_cast<int>(index / m), static_cast<int>(index % m)};
}

/// Lattice position j*h of a node; potentials are evaluated here.
inline std::array<double, 2> node_position(const GridSpec& g, std::size_t index) {
  auto j = node_multi_index(g, index);
  return {j[0] * g.spacing(), g.dim == 2 ? j[1] * g.spacing() : 0.0};
}

/// Reporting coordinate j*h - k/2: the cell seen as centred at the origin.
inline std::array<double, 2> centered_coordinate(const GridSpec& g, std::size_t index) {
  auto x = node_position(g, index);
  const double half = 0.5 * g.k;
  return {x[0] - half, g.dim == 2 ? x[1] - half : 0.0};
}

/// Real samples of a k-periodic function on a GridSpec; values are row-major.
class PeriodicField {
 public:
  PeriodicField() = default;

  explicit PeriodicField(const GridSpec& grid)
      : grid_(grid), values_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid.size()))) {}

  PeriodicField(const GridSpec& grid, Eigen::VectorXd values)
      : grid_(grid), values_(std::move(values)) {
    if (static_cast<std::size_t>(values_.size()) != grid_.size())
      fail(ErrorCode::GridMismatch, "value count does not match grid " + describe(grid_));
    if (!values_.allFinite()) fail(ErrorCode::InvalidArgument, "field contains non-finite values");
  }

  static PeriodicField constant(const GridSpec& grid, double c) {
    return PeriodicField(grid, Eigen::VectorXd::Constant(static_cast<Eigen::Index>(grid.size()), c));
  }

  /// Samples fn(x) at the centred reporting coordinates.
  template <class Fn>
  static PeriodicField from_centered(const GridSpec& grid, Fn&& fn) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(grid.size()));
    for (std::size_t i = 0; i < grid.size(); ++i) v[static_cast<Eigen::Index>(i)] = fn(centered_coordinate(grid, i));
    return PeriodicField(grid, std::move(v));
  }

  /// Samples fn(x) at the lattice positions j*h.
  template <class Fn>
  static PeriodicField from_lattice(const GridSpec& grid, Fn&& fn) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(grid.size()));
    for (std::size_t i = 0; i < grid.size(); ++i) v[static_cast<Eigen::Index>(i)] = fn(node_position(grid, i));
    return PeriodicField(grid, std::move(v));
  }

  const GridSpec& grid() const { return grid_; }
  const Eigen::VectorXd& values() const { return values_; }
  std::size_t size() const { return static_cast<std::size_t>(values_.size()); }
  double operator[](std::size_t i) const { return values_[static_cast<Eigen::Index>(i)]; }

  double sup_norm() const { return values_.size() ? values_.cwiseAbs().maxCoeff() : 0.0; }

  PeriodicField& operator+=(const PeriodicField& o) {
    require_same_grid(grid_, o.grid_);
    values_ += o.values_;
    return *this;
  }
  PeriodicField& operator-=(const PeriodicField& o) {
    require_same_grid(grid_, o.grid_);
    values_ -= o.values_;
    return *this;
  }
  PeriodicField& operator*=(double s) {
    values_ *= s;
    return *this;
  }

  friend PeriodicField operator+(PeriodicField a, const PeriodicField& b) { return a += b; }
  friend PeriodicField operator-(PeriodicField a, const PeriodicField& b) { return a -= b; }
  friend PeriodicField operator*(double s, PeriodicField a) { return a *= s; }
  friend PeriodicField operator*(PeriodicField a, double s) { return a *= s; }
  friend PeriodicField operator-(PeriodicField a) { return a *= -1.0; }

  /// Pointwise product.
  friend PeriodicField hadamard(const PeriodicField& a, const PeriodicField& b) {
    require_same_grid(a.grid_, b.grid_);
    return PeriodicField(a.grid_, a.values_.cwiseProduct(b.values_));
  }

 private:
  GridSpec grid_{};
  Eigen::VectorXd values_;
};

/// Discrete Fourier coefficients of u (unscaled forward DFT).
inline detail::ComplexVector fourier_transform(const PeriodicField& u) {
  return detail::forward(u.values(), u.grid().dim, u.grid().points_per_axis());
}

inline PeriodicField inverse_fourier_transform(const GridSpec& g, detail::ComplexVector coeffs) {
  return PeriodicField(g, detail::inverse_real(std::move(coeffs), g.dim, g.points_per_axis()));
}

/// |2*pi*m/k|^2 for the multi-index of DFT coefficient `index`.
inline double laplacian_symbol(const GridSpec& g, std::size_t index) {
  const int m = g.points_per_axis();
  const double w = 2.0 * M_PI / g.k;
  auto j = node_multi_index(g, index);
  double s = 0.0;
  for (int a = 0; a < g.dim; ++a) {
    const double p = w * detail::signed_frequency(j[static_cast<std::size_t>(a)], m);
    s += p * p;
  }
  return s;
}

/// Applies a Fourier multiplier symbol(index) to u.
template <class Symbol>
PeriodicField apply_fourier_multiplier(const PeriodicField& u, Symbol&& symbol) {
  auto c = fourier_transform(u);
  for (Eigen::Index i = 0; i < c.size(); ++i) c[i] *= symbol(static_cast<std::size_t>(i));
  return inverse_fourier_transform(u.grid(), std::move(c));
}

/// -Laplacian of the trigonometric interpolant of u.
inline PeriodicField laplacian_apply(const PeriodicField& u) {
  const GridSpec g = u.grid();
  return apply_fourier_multiplier(u, [&](std::size_t i) { return laplacian_symbol(g, i); });
}

/// Sum of values times h^N; exact for trigonometric polynomials below Nyquist.
inline double integrate(const PeriodicField& g) { return g.values().sum() * g.grid().node_weight(); }

/// L^2(Q_k) inner product.
inline double inner(const PeriodicField& a, const PeriodicField& b) {
  require_same_grid(a.grid(), b.grid());
  return a.values().dot(b.values()) * a.grid().node_weight();
}

inline double l2_norm(const PeriodicField& u) { return std::sqrt(inner(u, u)); }

/// Integral of |grad u|^2 through Parseval.
inline double gradient_energy(const PeriodicField& u) {
  const GridSpec& g = u.grid();
  auto c = fourier_transform(u);
  double s = 0.0;
  for (Eigen::Index i = 0; i < c.size(); ++i) s += laplacian_symbol(g, static_cast<std::size_t>(i)) * std::norm(c[i]);
  // Parseval: sum |u_j|^2 = (1/D) sum |c_p|^2
  return s / static_cast<double>(g.size()) * g.node_weight();
}

inline double h1_norm(const PeriodicField& u) {
  return std::sqrt(gradient_energy(u) + inner(u, u));
}

/// u(. + b) for an integer lattice vector b, with periodic wraparound.
inline PeriodicField translate_field(const PeriodicField& u, std::span<const int> b) {
  const GridSpec& g = u.grid();
  if (b.size() != static_cast<std::size_t>(g.dim))
    fail(ErrorCode::InvalidArgument, "translation vector has wrong dimension");
  const int m = g.points_per_axis();
  auto wrap = [m](long long i) { return static_cast<int>(((i % m) + m) % m); };
  Eigen::VectorXd out(u.values().size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    auto j = node_multi_index(g, i);
    int s0 = wrap(static_cast<long long>(j[0]) + static_cast<long long>(b[0]) * g.n);
    std::size_t src = static_cast<std::size_t>(s0);
    if (g.dim == 2) {
      int s1 = wrap(static_cast<long long>(j[1]) + static_cast<long long>(b[1]) * g.n);
      src = static_cast<std::size_t>(s0) * m + static_cast<std::size_t>(s1);
    }
    out[static_cast<Eigen::Index>(i)] = u[src];
  }
  return PeriodicField(g, std::move(out));
}

/// Real-valued shift; only integral lattice vectors are admissible.
inline PeriodicField translate_field(const PeriodicField& u, std::span<const double> b) {
  std::vector<int> ib;
  for (double v : b) {
    if (!std::isfinite(v) || std::abs(v - std::round(v)) > 1e-12)
      fail(ErrorCode::NonIntegerShift, "translation must be an integer lattice vector");
    ib.push_back(static_cast<int>(std::lround(v)));
  }
  return translate_field(u, std::span<const int>(ib));
}

}  // namespace gapsol
