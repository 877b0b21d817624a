// Complex FFTs on 1D/2D periodic grids, row-major with axis 0 slowest.
#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Core>
#include <unsupported/Eigen/FFT>

namespace gapsol::detail {

using Complex = std::complex<double>;
using ComplexVector = Eigen::VectorXcd;

inline Eigen::FFT<double>& fft_engine() {
  // kissfft caches twiddles per size; one engine per thread.
  thread_local Eigen::FFT<double> engine;
  return engine;
}

/// In-place transform of a dim-dimensional cube with `m` points per axis.
/// Forward is unscaled; inverse divides by the total number of points.
inline void fft_inplace(ComplexVector& data, int dim, int m, bool inverse) {
  auto& engine = fft_engine();
  std::vector<Complex> in(static_cast<std::size_t>(m));
  std::vector<Complex> out(static_cast<std::size_t>(m));
  auto run = [&]() {
    if (inverse)
      engine.inv(out, in);
    else
      engine.fwd(out, in);
  };
  if (dim == 1) {
    for (int i = 0; i < m; ++i) in[i] = data[i];
    run();
    for (int i = 0; i < m; ++i) data[i] = out[i];
    return;
  }
  // axis 1 (contiguous rows)
  for (int r = 0; r < m; ++r) {
    const std::ptrdiff_t base = static_cast<std::ptrdiff_t>(r) * m;
    for (int i = 0; i < m; ++i) in[i] = data[base + i];
    run();
    for (int i = 0; i < m; ++i) data[base + i] = out[i];
  }
  // axis 0 (strided columns)
  for (int c = 0; c < m; ++c) {
    for (int i = 0; i < m; ++i) in[i] = data[static_cast<std::ptrdiff_t>(i) * m + c];
    run();
    for (int i = 0; i < m; ++i) data[static_cast<std::ptrdiff_t>(i) * m + c] = out[i];
  }
}

inline ComplexVector forward(const Eigen::VectorXd& real, int dim, int m) {
  ComplexVector data = real.cast<Complex>();
  fft_inplace(data, dim, m, false);
  return data;
}

inline Eigen::VectorXd inverse_real(ComplexVector data, int dim, int m) {
  fft_inplace(data, dim, m, true);
  return data.real();
}

/// Signed frequency of DFT index i on an m-point axis, in (-m/2, m/2].
inline int signed_frequency(int i, int m) { return i <= m / 2 ? i : i - m; }

}  // namespace gapsol::detail
