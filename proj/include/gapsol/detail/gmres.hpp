// Restarted right-preconditioned GMRES on plain vectors with operator callbacks.
#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Core>

namespace gapsol::detail {

using LinearMap = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct GmresResult {
  Eigen::VectorXd x;
  double residual = 0.0;  ///< final ||b - A x||
  int iterations = 0;
  bool converged = false;
};

/// Solves A x = b as A M^{-1} y = b, x = M^{-1} y.
inline GmresResult gmres(const LinearMap& A, const LinearMap& Minv, const Eigen::VectorXd& b, double rtol,
                         double atol, int restart = 60, int max_iter = 400) {
  GmresResult out;
  out.x = Eigen::VectorXd::Zero(b.size());
  const double bnorm = b.norm();
  const double target = std::max(rtol * bnorm, atol);
  Eigen::VectorXd r = b;
  double beta = r.norm();
  out.residual = beta;
  if (beta <= target) {
    out.converged = true;
    return out;
  }
  while (out.iterations < max_iter) {
    std::vector<Eigen::VectorXd> V;
    V.push_back(r / beta);
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(restart + 1, restart);
    Eigen::VectorXd cs = Eigen::VectorXd::Zero(restart), sn = Eigen::VectorXd::Zero(restart);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(restart + 1);
    g[0] = beta;
    int j = 0;
    for (; j < restart && out.iterations < max_iter; ++j, ++out.iterations) {
      Eigen::VectorXd w = A(Minv(V[static_cast<std::size_t>(j)]));
      for (int i = 0; i <= j; ++i) {
        H(i, j) = w.dot(V[static_cast<std::size_t>(i)]);
        w -= H(i, j) * V[static_cast<std::size_t>(i)];
      }
      H(j + 1, j) = w.norm();
      for (int i = 0; i < j; ++i) {
        const double t = cs[i] * H(i, j) + sn[i] * H(i + 1, j);
        H(i + 1, j) = -sn[i] * H(i, j) + cs[i] * H(i + 1, j);
        H(i, j) = t;
      }
      const double denom = std::hypot(H(j, j), H(j + 1, j));
      cs[j] = denom == 0.0 ? 1.0 : H(j, j) / denom;
      sn[j] = denom == 0.0 ? 0.0 : H(j + 1, j) / denom;
      H(j, j) = denom;
      H(j + 1, j) = 0.0;
      g[j + 1] = -sn[j] * g[j];
      g[j] = cs[j] * g[j];
      const bool breakdown = w.norm() <= 1e-300;
      if (!breakdown) V.push_back(w / w.norm());
      if (std::abs(g[j + 1]) <= target || breakdown) {
        ++j;
        ++out.iterations;
        break;
      }
    }
    Eigen::VectorXd y = H.topLeftCorner(j, j).triangularView<Eigen::Upper>().solve(g.head(j));
    Eigen::VectorXd update = Eigen::VectorXd::Zero(b.size());
    for (int i = 0; i < j; ++i) update += y[i] * V[static_cast<std::size_t>(i)];
    out.x += Minv(update);
    r = b - A(out.x);
    beta = r.norm();
    out.residual = beta;
    if (beta <= target) {
      out.converged = true;
      break;
    }
  }
  return out;
}

}  // namespace gapsol::detail
