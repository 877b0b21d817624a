// The periodic Schrodinger operator L_k = -Laplacian + V on Q_k.
//
// Because V is 1-periodic, L_k commutes with unit lattice translations and is
// block diagonal in the Fourier basis: the DFT modes p with p = j (mod k) form
// the Bloch fiber at quasimomentum theta = 2*pi*j/k, an n^N x n^N Hermitian
// matrix. Diagonalizing the k^N fibers gives every eigenpair of the discrete
// L_k exactly, and spectral functions g(L_k) (projections, |L_k|^{-1}) are
// applied with one FFT pair. The continuous Bloch bands use the same fiber
// matrices at arbitrary theta.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gapsol/cell_function.hpp"
#include "gapsol/grid.hpp"

namespace gapsol {

/// Numerical form of "0 is not in the spectrum": |lambda| below this aborts.
inline constexpr double kSpectrumZeroTolerance = 1e-8;

/// The +/- of the right-hand side +-f(x,u).
enum class Sign { plus, minus };

inline double orientation(Sign s) { return s == Sign::plus ? 1.0 : -1.0; }
inline std::string to_string(Sign s) { return s == Sign::plus ? "plus" : "minus"; }

/// -Laplacian u + V u, with V tiled from its unit cell.
inline PeriodicField apply_operator(const PotentialSpec& V, const PeriodicField& u) {
  const Eigen::VectorXd v = V.sample(u.grid());
  PeriodicField out = laplacian_apply(u);
  return PeriodicField(u.grid(), out.values() + v.cwiseProduct(u.values()));
}

namespace detail {

inline std::size_t ipow(int base, int dim) {
  return dim == 1 ? static_cast<std::size_t>(base) : static_cast<std::size_t>(base) * base;
}

/// DFT of the unit-cell samples divided by n^dim: coefficient of exp(2*pi*i*m.x).
inline ComplexVector cell_fourier(const CellFunction& V, int dim, int n) {
  ComplexVector c = forward(V.cell_samples(dim, n), dim, n);
  return c / static_cast<double>(ipow(n, dim));
}

/// Fiber modes are m in [-n/2, n/2) per axis; local index is row-major.
inline std::array<int, 2> fiber_mode(std::size_t local, int dim, int n) {
  if (dim == 1) return {static_cast<int>(local) - n / 2, 0};
  return {static_cast<int>(local / n) - n / 2, static_cast<int>(local % n) - n / 2};
}

inline Eigen::MatrixXcd fiber_matrix(const ComplexVector& vhat, int dim, int n,
                                     std::array<double, 2> theta) {
  const std::size_t s = ipow(n, dim);
  Eigen::MatrixXcd h(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(s));
  auto wrap = [n](int d) { return ((d % n) + n) % n; };
  for (std::size_t a = 0; a < s; ++a) {
    const auto ma = fiber_mode(a, dim, n);
    for (std::size_t b = 0; b < s; ++b) {
      const auto mb = fiber_mode(b, dim, n);
      std::size_t idx = static_cast<std::size_t>(wrap(ma[0] - mb[0]));
      if (dim == 2) idx = idx * n + static_cast<std::size_t>(wrap(ma[1] - mb[1]));
      h(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = vhat[static_cast<Eigen::Index>(idx)];
    }
    double kin = 0.0;
    for (int ax = 0; ax < dim; ++ax) {
      const double q = 2.0 * M_PI * ma[static_cast<std::size_t>(ax)] + theta[static_cast<std::size_t>(ax)];
      kin += q * q;
    }
    h(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(a)) += kin;
  }
  return h;
}

inline Eigen::VectorXd fiber_eigenvalues(const ComplexVector& vhat, int dim, int n,
                                         std::array<double, 2> theta) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(fiber_matrix(vhat, dim, n, theta),
                                                     Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

}  // namespace detail

enum class EigenMethod {
  floquet,  ///< exact block diagonalization over the k^N Bloch fibers
  dense,    ///< full real-symmetric matrix; for validation, limited to dense_limit dof
};

struct EigenOptions {
  static constexpr std::size_t all = std::numeric_limits<std::size_t>::max();

  EigenMethod method = EigenMethod::floquet;
  /// Eigenvectors to materialize; unset means split_index + buffer.
  std::optional<std::size_t> n_pairs;
  std::size_t buffer = 10;
  std::size_t dense_limit = 5000;
};

class SpectralDecomposition;
SpectralDecomposition eigendecompose(const PotentialSpec& V, const GridSpec& grid,
                                     const EigenOptions& options = {});

/// Eigenpairs of L_k, split index, and spectral calculus g(L_k).
class SpectralDecomposition {
 public:
  const GridSpec& grid() const { return grid_; }
  /// Every eigenvalue of the discrete L_k, ascending.
  const std::vector<double>& eigenvalues() const { return eigenvalues_; }
  /// Number of negative eigenvalues, i.e. dim E^-_k.
  std::size_t split_index() const { return split_; }
  /// Materialized eigenvectors, L^2-orthonormal, matching eigenvalues()[0..retained).
  const std::vector<PeriodicField>& eigenvectors() const { return vectors_; }
  std::size_t retained() const { return vectors_.size(); }
  EigenMethod method() const { return method_; }
  const Eigen::VectorXd& potential_samples() const { return v_; }

  PeriodicField apply_operator(const PeriodicField& u) const {
    require_same_grid(grid_, u.grid());
    PeriodicField out = laplacian_apply(u);
    return PeriodicField(grid_, out.values() + v_.cwiseProduct(u.values()));
  }

  /// g(L_k) r for a real function g of the eigenvalue.
  template <class G>
  PeriodicField apply_function(const PeriodicField& r, G&& g) const {
    require_same_grid(grid_, r.grid());
    if (method_ == EigenMethod::dense) {
      Eigen::VectorXd coeff = dense_vectors_.transpose() * r.values();
      for (Eigen::Index i = 0; i < coeff.size(); ++i) coeff[i] *= g(dense_values_[i]);
      return PeriodicField(grid_, dense_vectors_ * coeff);
    }
    detail::ComplexVector c = fourier_transform(r);
    detail::ComplexVector out = detail::ComplexVector::Zero(c.size());
    for (const auto& f : fibers_) {
      detail::ComplexVector x(static_cast<Eigen::Index>(f.dft_index.size()));
      for (std::size_t a = 0; a < f.dft_index.size(); ++a) x[static_cast<Eigen::Index>(a)] = c[f.dft_index[a]];
      detail::ComplexVector y = f.vectors.adjoint() * x;
      for (Eigen::Index b = 0; b < y.size(); ++b) y[b] *= g(f.values[b]);
      x = f.vectors * y;
      for (std::size_t a = 0; a < f.dft_index.size(); ++a) out[f.dft_index[a]] = x[static_cast<Eigen::Index>(a)];
    }
    return inverse_fourier_transform(grid_, std::move(out));
  }

  /// P^-_k r: component in the negative spectral subspace.
  PeriodicField negative_part(const PeriodicField& r) const {
    return apply_function(r, [](double l) { return l < 0.0 ? 1.0 : 0.0; });
  }

  /// |L_k|^{-1} r: Riesz map of the split inner product (.,.)_k.
  PeriodicField riesz(const PeriodicField& r) const {
    return apply_function(r, [](double l) { return 1.0 / std::abs(l); });
  }

  /// |L_k| r
  PeriodicField abs_operator(const PeriodicField& r) const {
    return apply_function(r, [](double l) { return std::abs(l); });
  }

 private:
  friend SpectralDecomposition eigendecompose(const PotentialSpec&, const GridSpec&,
                                              const EigenOptions&);

  struct Fiber {
    std::array<int, 2> j{0, 0};
    std::vector<Eigen::Index> dft_index;
    Eigen::VectorXd values;
    Eigen::MatrixXcd vectors;
  };

  GridSpec grid_{};
  Eigen::VectorXd v_;
  EigenMethod method_ = EigenMethod::floquet;
  std::vector<double> eigenvalues_;
  std::size_t split_ = 0;
  std::vector<PeriodicField> vectors_;
  std::vector<Fiber> fibers_;
  Eigen::MatrixXd dense_vectors_;  // Euclidean-orthonormal columns
  Eigen::VectorXd dense_values_;
};

namespace detail {

inline void check_zero_free(const std::vector<double>& values) {
  for (double l : values)
    if (std::abs(l) < kSpectrumZeroTolerance)
      throw Error(ErrorCode::ZeroInSpectrum,
                  "eigenvalue " + std::to_string(l) + " of L_k lies within " +
                      std::to_string(kSpectrumZeroTolerance) + " of 0; " +
                      std::string(hypothesis::spectral_gap) + " fails at this discretization");
}

inline std::size_t pairs_to_keep(const EigenOptions& o, std::size_t split, std::size_t total) {
  std::size_t want = split + o.buffer;
  if (o.n_pairs) want = (*o.n_pairs == EigenOptions::all) ? total : std::max(*o.n_pairs, want);
  return std::min(want, total);
}

}  // namespace detail

inline SpectralDecomposition eigendecompose(const PotentialSpec& V, const GridSpec& grid,
                                            const EigenOptions& options) {
  SpectralDecomposition dec;
  dec.grid_ = grid;
  dec.v_ = V.sample(grid);
  dec.method_ = options.method;
  const std::size_t total = grid.size();
  const double h_scale = 1.0 / std::sqrt(grid.node_weight());  // Euclidean -> L^2 orthonormal

  if (options.method == EigenMethod::dense) {
    if (total > options.dense_limit)
      fail(ErrorCode::InvalidArgument, "dense eigensolve limited to " +
                                           std::to_string(options.dense_limit) + " dof");
    const int m = grid.points_per_axis();
    Eigen::VectorXd symbol(m);
    {
      detail::ComplexVector s(m);
      for (int i = 0; i < m; ++i) {
        const double p = 2.0 * M_PI * detail::signed_frequency(i, m) / grid.k;
        s[i] = p * p;
      }
      detail::fft_inplace(s, 1, m, true);
      symbol = s.real();  // circulant stencil of -d^2/dx^2
    }
    Eigen::MatrixXd k1(m, m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) k1(i, j) = symbol[((i - j) % m + m) % m];
    Eigen::MatrixXd a;
    if (grid.dim == 1) {
      a = k1;
    } else {
      const Eigen::Index big = static_cast<Eigen::Index>(total);
      a = Eigen::MatrixXd::Zero(big, big);
      for (int i0 = 0; i0 < m; ++i0)
        for (int i1 = 0; i1 < m; ++i1)
          for (int t = 0; t < m; ++t) {
            a(i0 * m + i1, t * m + i1) += k1(i0, t);
            a(i0 * m + i1, i0 * m + t) += k1(i1, t);
          }
    }
    a.diagonal() += dec.v_;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
    dec.dense_values_ = es.eigenvalues();
    dec.dense_vectors_ = es.eigenvectors();
    dec.eigenvalues_.assign(dec.dense_values_.data(), dec.dense_values_.data() + dec.dense_values_.size());
    detail::check_zero_free(dec.eigenvalues_);
    dec.split_ = static_cast<std::size_t>(
        std::count_if(dec.eigenvalues_.begin(), dec.eigenvalues_.end(), [](double l) { return l < 0; }));
    const std::size_t keep = detail::pairs_to_keep(options, dec.split_, total);
    for (std::size_t i = 0; i < keep; ++i)
      dec.vectors_.emplace_back(grid, dec.dense_vectors_.col(static_cast<Eigen::Index>(i)) * h_scale);
    return dec;
  }

  // Floquet blocks.
  const int n = grid.n;
  const int k = grid.k;
  const int m = grid.points_per_axis();
  const detail::ComplexVector vhat = detail::cell_fourier(V, grid.dim, n);
  const std::size_t fiber_size = detail::ipow(n, grid.dim);
  const std::size_t n_fibers = detail::ipow(k, grid.dim);
  auto wrap_m = [m](long long p) { return static_cast<Eigen::Index>(((p % m) + m) % m); };

  dec.fibers_.reserve(n_fibers);
  for (std::size_t f = 0; f < n_fibers; ++f) {
    SpectralDecomposition::Fiber fib;
    fib.j = grid.dim == 1 ? std::array<int, 2>{static_cast<int>(f), 0}
                          : std::array<int, 2>{static_cast<int>(f / k), static_cast<int>(f % k)};
    const std::array<double, 2> theta{2.0 * M_PI * fib.j[0] / k, 2.0 * M_PI * fib.j[1] / k};
    fib.dft_index.resize(fiber_size);
    for (std::size_t a = 0; a < fiber_size; ++a) {
      const auto mode = detail::fiber_mode(a, grid.dim, n);
      Eigen::Index idx = wrap_m(static_cast<long long>(k) * mode[0] + fib.j[0]);
      if (grid.dim == 2) idx = idx * m + wrap_m(static_cast<long long>(k) * mode[1] + fib.j[1]);
      fib.dft_index[a] = idx;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(detail::fiber_matrix(vhat, grid.dim, n, theta));
    fib.values = es.eigenvalues();
    fib.vectors = es.eigenvectors();
    dec.fibers_.push_back(std::move(fib));
  }

  struct Item {
    double lambda;
    std::size_t fiber;
    Eigen::Index band;
  };
  std::vector<Item> items;
  items.reserve(total);
  for (std::size_t f = 0; f < n_fibers; ++f)
    for (Eigen::Index b = 0; b < dec.fibers_[f].values.size(); ++b)
      items.push_back({dec.fibers_[f].values[b], f, b});
  std::stable_sort(items.begin(), items.end(), [](const Item& a, const Item& b) { return a.lambda < b.lambda; });
  dec.eigenvalues_.reserve(total);
  for (const auto& it : items) dec.eigenvalues_.push_back(it.lambda);
  detail::check_zero_free(dec.eigenvalues_);
  dec.split_ = static_cast<std::size_t>(
      std::count_if(dec.eigenvalues_.begin(), dec.eigenvalues_.end(), [](double l) { return l < 0; }));

  // Select pairs; close the selection under complex conjugation (fiber j <-> -j)
  // and under degeneracy inside self-conjugate fibers so real eigenvectors exist.
  const std::size_t keep = detail::pairs_to_keep(options, dec.split_, total);
  auto partner = [&](std::size_t f) {
    const auto& j = dec.fibers_[f].j;
    std::size_t p = static_cast<std::size_t>((k - j[0]) % k);
    if (grid.dim == 2) p = p * k + static_cast<std::size_t>((k - j[1]) % k);
    return p;
  };
  std::vector<std::vector<bool>> marked(n_fibers, std::vector<bool>(fiber_size, false));
  for (std::size_t i = 0; i < keep; ++i) marked[items[i].fiber][static_cast<std::size_t>(items[i].band)] = true;
  for (std::size_t f = 0; f < n_fibers; ++f) {
    const std::size_t pf = partner(f);
    for (std::size_t b = 0; b < fiber_size; ++b)
      if (marked[f][b]) marked[pf][b] = true;
  }
  auto cluster_tol = [](double l) { return 1e-9 * std::max(1.0, std::abs(l)); };
  for (std::size_t f = 0; f < n_fibers; ++f) {
    if (partner(f) != f) continue;
    const auto& w = dec.fibers_[f].values;
    for (std::size_t b = 0; b < fiber_size; ++b) {
      if (!marked[f][b]) continue;
      for (std::size_t c = 0; c < fiber_size; ++c)
        if (std::abs(w[static_cast<Eigen::Index>(c)] - w[static_cast<Eigen::Index>(b)]) <=
            cluster_tol(w[static_cast<Eigen::Index>(b)]))
          marked[f][c] = true;
    }
  }

  auto nodal = [&](std::size_t f, std::size_t b) {
    detail::ComplexVector c = detail::ComplexVector::Zero(static_cast<Eigen::Index>(total));
    const auto& fib = dec.fibers_[f];
    for (std::size_t a = 0; a < fiber_size; ++a)
      c[fib.dft_index[a]] = fib.vectors(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
    detail::fft_inplace(c, grid.dim, m, true);
    return c;
  };
  auto normalized = [&](Eigen::VectorXd v) {
    v /= std::sqrt(v.squaredNorm() * grid.node_weight());
    return PeriodicField(grid, std::move(v));
  };

  std::vector<std::pair<double, PeriodicField>> pairs;
  for (std::size_t f = 0; f < n_fibers; ++f) {
    const std::size_t pf = partner(f);
    if (pf < f) continue;
    const auto& w = dec.fibers_[f].values;
    if (pf > f) {
      for (std::size_t b = 0; b < fiber_size; ++b) {
        if (!marked[f][b]) continue;
        const detail::ComplexVector psi = nodal(f, b);
        pairs.emplace_back(w[static_cast<Eigen::Index>(b)], normalized(psi.real()));
        pairs.emplace_back(w[static_cast<Eigen::Index>(b)], normalized(psi.imag()));
      }
      continue;
    }
    // Self-conjugate fiber: real and imaginary parts of an eigenspace span it over R.
    std::size_t b = 0;
    while (b < fiber_size) {
      if (!marked[f][b]) {
        ++b;
        continue;
      }
      std::size_t e = b + 1;
      while (e < fiber_size && marked[f][e] &&
             std::abs(w[static_cast<Eigen::Index>(e)] - w[static_cast<Eigen::Index>(b)]) <=
                 cluster_tol(w[static_cast<Eigen::Index>(b)]))
        ++e;
      const Eigen::Index d = static_cast<Eigen::Index>(e - b);
      Eigen::MatrixXd span(static_cast<Eigen::Index>(total), 2 * d);
      for (Eigen::Index c = 0; c < d; ++c) {
        const detail::ComplexVector psi = nodal(f, b + static_cast<std::size_t>(c));
        span.col(c) = psi.real();
        span.col(d + c) = psi.imag();
      }
      Eigen::BDCSVD<Eigen::MatrixXd> svd(span, Eigen::ComputeThinU);
      for (Eigen::Index c = 0; c < d; ++c)
        pairs.emplace_back(w[static_cast<Eigen::Index>(b + static_cast<std::size_t>(c))],
                           normalized(svd.matrixU().col(c)));
      b = e;
    }
  }
  std::stable_sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  dec.vectors_.reserve(pairs.size());
  for (auto& p : pairs) dec.vectors_.push_back(std::move(p.second));
  return dec;
}

/// Gap (-alpha_minus, alpha_plus) of sigma(L) around 0.
struct SpectralGap {
  double alpha_minus = std::numeric_limits<double>::infinity();
  double alpha_plus = 0.0;

  double alpha() const { return std::min(alpha_minus, alpha_plus); }
  bool finite_below() const { return std::isfinite(alpha_minus); }
};

struct BlochOptions {
  /// Fourier modes per axis of the fiber basis (points per unit cell).
  int resolution = 32;
  bool refine_edges = true;
  int refine_rounds = 3;
  int golden_iterations = 40;
};

/// Sampled Bloch eigenvalues lambda_j(theta) and the band intervals.
struct BlochBands {
  int dim = 1;
  int n_theta = 0;
  int n_bands = 0;
  int resolution = 0;
  std::vector<std::array<double, 2>> thetas;
  Eigen::MatrixXd values;  ///< rows: theta samples, cols: bands
  std::vector<std::pair<double, double>> intervals;
};

namespace detail {

// Golden-section minimization of fn on [a, b].
template <class Fn>
std::pair<double, double> golden_minimize(Fn&& fn, double a, double b, int iterations) {
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - r * (b - a);
  double d = a + r * (b - a);
  double fc = fn(c);
  double fd = fn(d);
  for (int i = 0; i < iterations; ++i) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = fn(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = fn(d);
    }
  }
  return fc < fd ? std::pair{c, fc} : std::pair{d, fd};
}

}  // namespace detail

inline BlochBands bloch_bands(const PotentialSpec& V, int dim, int n_theta, int n_bands,
                              const BlochOptions& options = {}) {
  if (dim != 1 && dim != 2) fail(ErrorCode::InvalidArgument, "dimension must be 1 or 2");
  if (n_theta < 16) fail(ErrorCode::InvalidArgument, "n_theta must be at least 16");
  if (n_bands < 4) fail(ErrorCode::InvalidArgument, "n_bands must be at least 4");
  BlochBands out;
  out.dim = dim;
  out.n_theta = n_theta;
  out.n_bands = n_bands;
  out.resolution = V.table_resolution().value_or(options.resolution);
  const int res = out.resolution;
  if (static_cast<std::size_t>(n_bands) > detail::ipow(res, dim))
    fail(ErrorCode::InvalidArgument, "more bands requested than fiber modes");
  const detail::ComplexVector vhat = detail::cell_fourier(V, dim, res);

  const std::size_t samples = detail::ipow(n_theta, dim);
  out.values.resize(static_cast<Eigen::Index>(samples), n_bands);
  for (std::size_t s = 0; s < samples; ++s) {
    std::array<double, 2> th{0.0, 0.0};
    if (dim == 1) {
      th[0] = 2.0 * M_PI * static_cast<double>(s) / n_theta;
    } else {
      th[0] = 2.0 * M_PI * static_cast<double>(s / n_theta) / n_theta;
      th[1] = 2.0 * M_PI * static_cast<double>(s % n_theta) / n_theta;
    }
    out.thetas.push_back(th);
    const Eigen::VectorXd w = detail::fiber_eigenvalues(vhat, dim, res, th);
    out.values.row(static_cast<Eigen::Index>(s)) = w.head(n_bands).transpose();
  }

  const double step = 2.0 * M_PI / n_theta;
  for (int j = 0; j < n_bands; ++j) {
    Eigen::Index imin = 0, imax = 0;
    double lo = out.values.col(j).minCoeff(&imin);
    double hi = out.values.col(j).maxCoeff(&imax);
    if (options.refine_edges) {
      auto band_at = [&](std::array<double, 2> th) {
        return detail::fiber_eigenvalues(vhat, dim, res, th)[j];
      };
      auto refine = [&](std::array<double, 2> start, double sign) {
        std::array<double, 2> th = start;
        double best = sign * band_at(th);
        for (int round = 0; round < (dim == 1 ? 1 : options.refine_rounds); ++round)
          for (int ax = 0; ax < dim; ++ax) {
            auto along = [&](double t) {
              auto q = th;
              q[static_cast<std::size_t>(ax)] = t;
              return sign * band_at(q);
            };
            const double c = th[static_cast<std::size_t>(ax)];
            auto [t, v] = detail::golden_minimize(along, c - step, c + step, options.golden_iterations);
            if (v < best) {
              best = v;
              th[static_cast<std::size_t>(ax)] = t;
            }
          }
        return sign * best;
      };
      lo = std::min(lo, refine(out.thetas[static_cast<std::size_t>(imin)], 1.0));
      hi = std::max(hi, refine(out.thetas[static_cast<std::size_t>(imax)], -1.0));
    }
    out.intervals.emplace_back(lo, hi);
  }
  return out;
}

/// Locates the spectral gap containing 0 from band intervals.
inline SpectralGap find_gap_at_zero(const BlochBands& bands, Sign sign = Sign::plus) {
  SpectralGap gap;
  bool above = false;
  double top_below = -std::numeric_limits<double>::infinity();
  for (const auto& [lo, hi] : bands.intervals) {
    if (lo - kSpectrumZeroTolerance <= 0.0 && 0.0 <= hi + kSpectrumZeroTolerance)
      throw Error(ErrorCode::GapContainsZero,
                  "0 lies in the band [" + std::to_string(lo) + ", " + std::to_string(hi) + "]; " +
                      std::string(hypothesis::spectral_gap));
    if (lo > 0.0) {
      if (!above || lo < gap.alpha_plus) gap.alpha_plus = lo;
      above = true;
    } else {
      top_below = std::max(top_below, hi);
    }
  }
  if (!above)
    fail(ErrorCode::NoSpectrumAbove,
         "no computed band lies above 0; increase n_bands to bracket the gap");
  gap.alpha_minus = std::isfinite(top_below) ? -top_below : std::numeric_limits<double>::infinity();
  if (sign == Sign::minus && !gap.finite_below())
    throw Error(ErrorCode::SignIllegal,
                "spectrum of L starts at " + std::to_string(gap.alpha_plus) + " > 0; " +
                    std::string(hypothesis::defocusing_needs_spectrum_below));
  return gap;
}

struct GapOptions {
  int n_theta = 32;
  int initial_bands = 4;
  BlochOptions bloch{};
};

/// Bloch bands with enough bands to bracket 0, then the gap at 0.
inline SpectralGap gap_for_potential(const PotentialSpec& V, int dim, Sign sign = Sign::plus,
                                     const GapOptions& options = {}) {
  const int res = V.table_resolution().value_or(options.bloch.resolution);
  const int max_bands = static_cast<int>(detail::ipow(res, dim));
  for (int nb = options.initial_bands;; nb = std::min(2 * nb, max_bands)) {
    try {
      return find_gap_at_zero(bloch_bands(V, dim, options.n_theta, nb, options.bloch), sign);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoSpectrumAbove || nb == max_bands) throw;
    }
  }
}

struct SplitFields {
  PeriodicField plus;
  PeriodicField minus;
};

inline SplitFields project_split(const SpectralDecomposition& dec, const PeriodicField& u) {
  if (dec.retained() < dec.split_index())
    fail(ErrorCode::IncompleteDecomposition, "negative spectral subspace is not fully retained");
  PeriodicField minus = dec.negative_part(u);
  PeriodicField plus = u - minus;
  return {std::move(plus), std::move(minus)};
}

/// (||P+u||_k, ||P-u||_k) from the quadratic form of L_k on each part.
inline std::pair<double, double> split_norm(const SpectralDecomposition& dec, const PeriodicField& u) {
  const auto parts = project_split(dec, u);
  const double sq_plus = inner(parts.plus, dec.apply_operator(parts.plus));
  const double sq_minus = -inner(parts.minus, dec.apply_operator(parts.minus));
  if (sq_plus < -1e-9 || sq_minus < -1e-9)
    fail(ErrorCode::NegativeSquare, "split norm squares (" + std::to_string(sq_plus) + ", " +
                                        std::to_string(sq_minus) + ") are inconsistent");
  return {std::sqrt(std::max(sq_plus, 0.0)), std::sqrt(std::max(sq_minus, 0.0))};
}

}  // namespace gapsol
