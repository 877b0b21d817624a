// Passage k -> infinity: integer recentering, embedding into larger cells,
// m_k sweeps under cell growth, exponential decay fits and near-edge scaling.
#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gapsol/solver.hpp"

namespace gapsol {

struct Recentered {
  PeriodicField u;
  std::vector<int> b;
};

/// Shift by the integer vector b that brings the unit cell of max |u| to the
/// centre. Among exactly tied maxima the smallest |b| wins, then the
/// lexicographically smallest b; this keeps recenter idempotent.
inline Recentered recenter(const PeriodicField& u) {
  const GridSpec& g = u.grid();
  const double peak = u.values().cwiseAbs().maxCoeff();
  std::optional<std::vector<int>> best;
  long long best_norm = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (std::abs(u[i]) != peak) continue;
    const auto x = centered_coordinate(g, i);
    std::vector<int> b;
    long long norm = 0;
    for (int a = 0; a < g.dim; ++a) {
      b.push_back(static_cast<int>(std::floor(x[static_cast<std::size_t>(a)] + 0.5)));
      norm += static_cast<long long>(b.back()) * b.back();
    }
    if (!best || norm < best_norm || (norm == best_norm && b < *best)) {
      best = b;
      best_norm = norm;
    }
  }
  if (!best) best = std::vector<int>(static_cast<std::size_t>(g.dim), 0);
  return {translate_field(u, std::span<const int>(*best)), *best};
}

/// Places u centrally in Q_{k_new} (k_new a multiple of k), zero elsewhere.
inline PeriodicField extend_to_cell(const PeriodicField& u, int k_new) {
  const GridSpec& g = u.grid();
  if (k_new < g.k || k_new % g.k != 0)
    fail(ErrorCode::InvalidArgument, "target cell edge must be a multiple of " + std::to_string(g.k));
  const GridSpec big = make_grid(g.dim, k_new, g.n);
  const int offset = g.n * (k_new - g.k) / 2;
  const int m_big = big.points_per_axis();
  PeriodicField out(big);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(big.size()));
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto j = node_multi_index(g, i);
    std::size_t dst = static_cast<std::size_t>(j[0] + offset);
    if (g.dim == 2) dst = dst * m_big + static_cast<std::size_t>(j[1] + offset);
    v[static_cast<Eigen::Index>(dst)] = u[i];
  }
  return PeriodicField(big, std::move(v));
}

inline PeriodicField extend_to_doubled_cell(const PeriodicField& u, std::optional<GridSpec> target = std::nullopt) {
  const GridSpec& g = u.grid();
  if (target && !(*target == GridSpec{g.dim, 2 * g.k, g.n}))
    fail(ErrorCode::GridMismatch, "doubled cell must be " + describe(GridSpec{g.dim, 2 * g.k, g.n}) + ", got " +
                                      describe(*target));
  return extend_to_cell(u, 2 * g.k);
}

/// M(r) = max |u(x)| over r <= |x| < r+1, |x| in centred coordinates.
inline std::vector<double> shell_maxima(const PeriodicField& u) {
  const GridSpec& g = u.grid();
  std::vector<double> m;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto x = centered_coordinate(g, i);
    const double r = std::hypot(x[0], x[1]);
    const std::size_t shell = static_cast<std::size_t>(std::floor(r));
    if (shell >= m.size()) m.resize(shell + 1, 0.0);
    m[shell] = std::max(m[shell], std::abs(u[i]));
  }
  return m;
}

/// Least-squares fit of log M(r) over shells with M in [1e-8, 1e-2] * sup, 1 <= r <= k/2 - 1.
inline DecayFit fit_decay_rate(const PeriodicField& u, const SpectralGap& gap) {
  const double sup = u.sup_norm();
  if (!(sup > 0.0)) fail(ErrorCode::InvalidArgument, "decay fit needs a nonzero field");
  DecayFit fit;
  fit.shell_max = shell_maxima(u);
  const int r_max = u.grid().k / 2 - 1;
  std::vector<double> rs, ls;
  for (int r = 1; r <= r_max && r < static_cast<int>(fit.shell_max.size()); ++r) {
    const double m = fit.shell_max[static_cast<std::size_t>(r)];
    if (m >= 1e-8 * sup && m <= 1e-2 * sup) {
      rs.push_back(r);
      ls.push_back(std::log(m));
    }
  }
  if (rs.size() < 4)
    fail(ErrorCode::WindowTooSmall, std::to_string(rs.size()) +
                                        " shells in the decay window; enlarge k to measure the tail");
  const Eigen::Index n = static_cast<Eigen::Index>(rs.size());
  Eigen::MatrixXd A(n, 2);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    A(i, 0) = 1.0;
    A(i, 1) = rs[static_cast<std::size_t>(i)];
    y[i] = ls[static_cast<std::size_t>(i)];
  }
  const Eigen::Vector2d c = A.colPivHouseholderQr().solve(y);
  const double mean = y.mean();
  const double ss_tot = (y.array() - mean).square().sum();
  const double ss_res = (y - A * c).squaredNorm();
  fit.lambda = -c[1];
  fit.prefactor = std::exp(c[0]);
  fit.r_lo = static_cast<int>(rs.front());
  fit.r_hi = static_cast<int>(rs.back());
  fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  fit.lambda_vs_gap = fit.lambda / std::sqrt(gap.alpha());
  return fit;
}

/// max |u| on the outer shell k/2 - 1 <= |x| < k/2 relative to sup |u|.
inline double boundary_ratio(const PeriodicField& u) {
  const auto m = shell_maxima(u);
  const std::size_t r = static_cast<std::size_t>(std::max(0, u.grid().k / 2 - 1));
  return r < m.size() ? m[r] / u.sup_norm() : 0.0;
}

struct SweepProblem {
  PotentialSpec potential;
  NonlinearitySpec nonlinearity;
  Sign sign = Sign::plus;
  int dim = 1;
  int n = 16;
  ContextOptions context{};
};

struct KSweepRecord {
  int k = 0;
  double value = 0.0;
  double sup_norm = 0.0;
  double h1_norm = 0.0;
  double lambda = std::numeric_limits<double>::quiet_NaN();
  double r_squared = std::numeric_limits<double>::quiet_NaN();
  bool converged = false;
  bool k_too_small = false;  ///< outer-shell max above 1e-5 * sup
  double wall_time = 0.0;    ///< seconds; never written to deterministic outputs
  SolveResult result;
};

struct KSweepResult {
  std::vector<KSweepRecord> records;
  bool sequence_converged = false;  ///< last |m_{k+1} - m_k| below tolerance
  std::string failure;              ///< empty unless the sweep stopped early
};

inline void validate_k_list(const std::vector<int>& ks) {
  if (ks.empty()) fail(ErrorCode::InvalidSweep, "k_list is empty");
  for (std::size_t i = 0; i < ks.size(); ++i) {
    if (ks[i] < 1) fail(ErrorCode::InvalidSweep, "k_list entries must be positive");
    if (i > 0 && ks[i] <= ks[i - 1]) fail(ErrorCode::InvalidSweep, "k_list must be strictly increasing");
    if (i > 0 && ks[i] % ks[i - 1] != 0)
      fail(ErrorCode::InvalidSweep, "each k must divide the next (" + std::to_string(ks[i - 1]) + ", " +
                                        std::to_string(ks[i]) + ")");
  }
}

/// Solves on growing cells; later cells start from the recentred, extended previous state.
inline KSweepResult k_sweep(const SweepProblem& problem, const std::vector<int>& k_list, const SolveConfig& cfg = {},
                            double k_conv_tol = 1e-4) {
  validate_k_list(k_list);
  KSweepResult out;
  ContextOptions opts = problem.context;
  std::optional<PeriodicField> previous;
  for (int k : k_list) {
    const auto start = std::chrono::steady_clock::now();
    try {
      const GridSpec grid = make_grid(problem.dim, k, problem.n);
      const ActionContext ctx = make_context(problem.potential, problem.nonlinearity, problem.sign, grid, opts);
      opts.gap = ctx.gap;
      SolveResult res = previous ? minimize_from(ctx, extend_to_cell(*previous, k), cfg)
                                 : minimize_ground_state(ctx, cfg);
      Recentered rc = recenter(res.u);
      res.u = std::move(rc.u);
      res.recenter_b = std::move(rc.b);
      KSweepRecord rec;
      rec.k = k;
      rec.value = res.value;
      rec.sup_norm = res.sup_norm;
      rec.h1_norm = res.h1_norm;
      rec.converged = res.converged;
      try {
        res.decay = fit_decay_rate(res.u, ctx.gap);
        rec.lambda = res.decay->lambda;
        rec.r_squared = res.decay->r_squared;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::WindowTooSmall) throw;
      }
      rec.k_too_small = boundary_ratio(res.u) > 1e-5;
      previous = res.u;
      rec.result = std::move(res);
      rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      out.records.push_back(std::move(rec));
    } catch (const Error& e) {
      out.failure = "k=" + std::to_string(k) + ": " + e.what();
      break;
    }
  }
  const auto& r = out.records;
  if (r.size() >= 2)
    out.sequence_converged =
        std::abs(r.back().value - r[r.size() - 2].value) < k_conv_tol * std::abs(r.back().value);
  return out;
}

struct ScalingRecord {
  double alpha = 0.0;
  double alpha_minus = std::numeric_limits<double>::infinity();
  double alpha_plus = 0.0;
  double h1_norm = 0.0;
  double sup_norm = 0.0;
};

struct ScalingFit {
  double slope = std::numeric_limits<double>::quiet_NaN();
  double intercept = std::numeric_limits<double>::quiet_NaN();
  double stderr_slope = std::numeric_limits<double>::quiet_NaN();
  double band_lo = std::numeric_limits<double>::quiet_NaN();  ///< slope -+ 2 standard errors
  double band_hi = std::numeric_limits<double>::quiet_NaN();
  bool available = false;
};

struct EdgeScalingReport {
  ScalingFit vs_alpha;
  ScalingFit vs_alpha_minus;
  ScalingFit vs_alpha_plus;
  bool sup_monotone = false;    ///< sup|u| decreases toward the edge, 5% slack
  double reference_exponent = 0.0;  ///< q / (2(q - 2)), reported for comparison only
};

/// Least-squares line through (log x, log y).
inline ScalingFit loglog_fit(const std::vector<double>& x, const std::vector<double>& y) {
  ScalingFit fit;
  const Eigen::Index n = static_cast<Eigen::Index>(x.size());
  if (n < 3) return fit;
  Eigen::MatrixXd A(n, 2);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    A(i, 0) = 1.0;
    A(i, 1) = std::log(x[static_cast<std::size_t>(i)]);
    b[i] = std::log(y[static_cast<std::size_t>(i)]);
  }
  const Eigen::Vector2d c = A.colPivHouseholderQr().solve(b);
  const double ss_res = (b - A * c).squaredNorm();
  const double xm = A.col(1).mean();
  const double sxx = (A.col(1).array() - xm).square().sum();
  fit.intercept = c[0];
  fit.slope = c[1];
  fit.stderr_slope = sxx > 0.0 ? std::sqrt(ss_res / static_cast<double>(n - 2) / sxx) : 0.0;
  fit.band_lo = fit.slope - 2.0 * fit.stderr_slope;
  fit.band_hi = fit.slope + 2.0 * fit.stderr_slope;
  fit.available = true;
  return fit;
}

/// log-log slope of ||u||_H1 against alpha (and each gap edge); reported, never asserted.
inline EdgeScalingReport edge_scaling_probe(const std::vector<ScalingRecord>& records, double q = 4.0) {
  if (records.size() < 4) fail(ErrorCode::InsufficientSpan, "need at least 4 records");
  std::vector<double> alphas;
  for (const auto& r : records) alphas.push_back(r.alpha);
  std::sort(alphas.begin(), alphas.end());
  const auto distinct = std::unique(alphas.begin(), alphas.end()) - alphas.begin();
  if (distinct < 4) fail(ErrorCode::InsufficientSpan, "need at least 4 distinct alpha values");
  if (!(alphas.front() > 0.0) || alphas[static_cast<std::size_t>(distinct - 1)] < 10.0 * alphas.front())
    fail(ErrorCode::InsufficientSpan, "alpha values must span at least one decade");

  EdgeScalingReport rep;
  rep.reference_exponent = q / (2.0 * (q - 2.0));
  std::vector<double> a, am, ap, h, hm;
  for (const auto& r : records) {
    a.push_back(r.alpha);
    h.push_back(r.h1_norm);
    ap.push_back(r.alpha_plus);
    if (std::isfinite(r.alpha_minus)) {
      am.push_back(r.alpha_minus);
      hm.push_back(r.h1_norm);
    }
  }
  rep.vs_alpha = loglog_fit(a, h);
  rep.vs_alpha_plus = loglog_fit(ap, h);
  if (am.size() == records.size()) rep.vs_alpha_minus = loglog_fit(am, hm);

  std::vector<const ScalingRecord*> order;
  for (const auto& r : records) order.push_back(&r);
  std::sort(order.begin(), order.end(), [](auto* x, auto* y) { return x->alpha > y->alpha; });
  rep.sup_monotone = true;
  for (std::size_t i = 1; i < order.size(); ++i)
    if (order[i]->sup_norm > 1.05 * order[i - 1]->sup_norm) rep.sup_monotone = false;
  return rep;
}

}  // namespace gapsol
