// Kerr photonic crystals in the E-mode reduction
//   -Laplacian u - omega^2 eps(x) u + beta^2 u = omega^2 chi(x) u^3,
// frequency gap maps, gap solitons and bifurcation sweeps toward a gap edge.
#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "gapsol/continuation.hpp"

namespace gapsol {

struct PhotonicMedium {
  CellFunction epsilon = CellFunction::constant(1.0);
  CellFunction chi = CellFunction::constant(1.0);
  double omega = 1.0;
  double beta = 0.0;
  int dim = 1;
};

struct NlsProblem {
  PotentialSpec potential;
  NonlinearitySpec nonlinearity;
  Sign sign = Sign::plus;
};

/// V = beta^2 - omega^2 eps, f = omega^2 |chi| u^3, sign from the sign of chi.
inline NlsProblem reduce_to_nls(const PhotonicMedium& m) {
  if (!(m.omega > 0.0)) fail(ErrorCode::InvalidArgument, "omega must be positive");
  if (!(m.beta >= 0.0)) fail(ErrorCode::InvalidArgument, "beta must be non-negative");
  if (m.dim != 1 && m.dim != 2) fail(ErrorCode::InvalidArgument, "dimension must be 1 or 2");
  const auto [eps_lo, eps_hi] = m.epsilon.sampled_range(m.dim);
  if (!(eps_lo > 0.0) || !std::isfinite(eps_hi))
    fail(ErrorCode::InvalidArgument, "permittivity must be bounded and positive (min " + std::to_string(eps_lo) + ")");
  const auto [chi_lo, chi_hi] = m.chi.sampled_range(m.dim);
  NlsProblem out;
  if (chi_lo > 0.0) {
    out.sign = Sign::plus;
  } else if (chi_hi < 0.0) {
    out.sign = Sign::minus;
  } else {
    throw Error(ErrorCode::MixedSignChi, "chi ranges over [" + std::to_string(chi_lo) + ", " +
                                             std::to_string(chi_hi) + "]; " +
                                             std::string(hypothesis::sign_definite_kerr));
  }
  const double w2 = m.omega * m.omega;
  out.potential = m.epsilon.affine(-w2, m.beta * m.beta);
  out.nonlinearity = NonlinearitySpec::kerr(m.chi.affine(out.sign == Sign::plus ? w2 : -w2, 0.0));
  return out;
}

enum class GapStatus { gap, band };

inline std::string to_string(GapStatus s) { return s == GapStatus::gap ? "gap" : "band"; }

struct GapMapRow {
  double omega = 0.0;
  GapStatus status = GapStatus::band;
  double alpha_minus = std::numeric_limits<double>::quiet_NaN();
  double alpha_plus = std::numeric_limits<double>::quiet_NaN();
};

struct GapEdge {
  double omega = 0.0;
  bool gap_below = false;  ///< the gap lies on the low-omega side of this edge
};

struct GapMap {
  std::vector<GapMapRow> rows;
  std::vector<GapEdge> edges;
};

struct GapMapOptions {
  int dim = 1;
  double edge_rtol = 1e-4;
  GapOptions gap{};
};

inline GapMapRow classify_frequency(const CellFunction& epsilon, double beta, double omega, const GapMapOptions& o) {
  GapMapRow row;
  row.omega = omega;
  const PotentialSpec V = epsilon.affine(-omega * omega, beta * beta);
  try {
    const SpectralGap g = gap_for_potential(V, o.dim, Sign::plus, o.gap);
    row.status = GapStatus::gap;
    row.alpha_minus = g.alpha_minus;
    row.alpha_plus = g.alpha_plus;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::GapContainsZero) throw;
  }
  return row;
}

/// Gap classification at n_samples frequencies in [omega_min, omega_max], with
/// every status change bisected to a relative bracket of edge_rtol.
inline GapMap frequency_gap_map(const CellFunction& epsilon, double beta, double omega_min, double omega_max,
                                int n_samples, const GapMapOptions& options = {}) {
  if (!(omega_min > 0.0) || !(omega_max > omega_min))
    fail(ErrorCode::InvalidArgument, "omega range must satisfy 0 < omega_min < omega_max");
  if (n_samples < 16) fail(ErrorCode::InvalidArgument, "n_samples must be at least 16");
  GapMap map;
  for (int i = 0; i < n_samples; ++i) {
    const double w = omega_min + (omega_max - omega_min) * i / (n_samples - 1);
    map.rows.push_back(classify_frequency(epsilon, beta, w, options));
  }
  for (std::size_t i = 1; i < map.rows.size(); ++i) {
    if (map.rows[i].status == map.rows[i - 1].status) continue;
    double lo = map.rows[i - 1].omega, hi = map.rows[i].omega;
    const GapStatus s_lo = map.rows[i - 1].status;
    while (hi - lo > options.edge_rtol * hi) {
      const double mid = 0.5 * (lo + hi);
      (classify_frequency(epsilon, beta, mid, options).status == s_lo ? lo : hi) = mid;
    }
    map.edges.push_back({0.5 * (lo + hi), s_lo == GapStatus::gap});
  }
  return map;
}

struct GapSolitonOptions {
  SolveConfig solve{};
  ContextOptions context{};
  bool fit_decay = true;
};

/// reduce -> gap -> decompose -> minimize -> recenter -> decay, errors labelled by stage.
inline SolveResult solve_gap_soliton(const PhotonicMedium& m, const GridSpec& grid,
                                     const GapSolitonOptions& options = {}) {
  auto stage = [](const char* name, auto&& fn) {
    try {
      return fn();
    } catch (const Error& e) {
      throw e.at_stage(name);
    }
  };
  const NlsProblem p = stage("reduce", [&] { return reduce_to_nls(m); });
  ContextOptions copts = options.context;
  if (!copts.gap)
    copts.gap = stage("gap", [&] {
      SpectralGap g = gap_for_potential(p.potential, m.dim, p.sign, copts.gap_options);
      return std::optional<SpectralGap>(g);
    });
  const ActionContext ctx =
      stage("decompose", [&] { return make_context(p.potential, p.nonlinearity, p.sign, grid, copts); });
  SolveResult res = stage("minimize", [&] { return minimize_ground_state(ctx, options.solve); });
  Recentered rc = stage("recenter", [&] { return recenter(res.u); });
  res.u = std::move(rc.u);
  res.recenter_b = std::move(rc.b);
  if (options.fit_decay) {
    try {
      res.decay = fit_decay_rate(res.u, ctx.gap);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::WindowTooSmall) throw e.at_stage("decay");
    }
  }
  return res;
}

struct BifurcationRecord {
  double omega = 0.0;
  double alpha = std::numeric_limits<double>::quiet_NaN();
  double alpha_minus = std::numeric_limits<double>::quiet_NaN();
  double alpha_plus = std::numeric_limits<double>::quiet_NaN();
  std::optional<SolveResult> result;
  std::string refusal;  ///< set when this frequency was refused (e.g. in a band)
};

struct BifurcationSweep {
  std::vector<BifurcationRecord> records;
  std::optional<EdgeScalingReport> scaling;
  std::string scaling_failure;
  bool sup_decreasing = false;  ///< strictly, in list order toward the edge
};

/// Solves at each omega in list order (toward the edge) and fits the edge scaling.
inline BifurcationSweep bifurcation_sweep(const CellFunction& epsilon, const CellFunction& chi, double beta,
                                          const std::vector<double>& omega_list, const GridSpec& grid,
                                          const GapSolitonOptions& options = {}) {
  BifurcationSweep out;
  std::vector<ScalingRecord> scaling;
  for (double w : omega_list) {
    BifurcationRecord rec;
    rec.omega = w;
    const PhotonicMedium m{epsilon, chi, w, beta, grid.dim};
    try {
      const NlsProblem p = reduce_to_nls(m);
      const SpectralGap gap = gap_for_potential(p.potential, grid.dim, p.sign, options.context.gap_options);
      rec.alpha = gap.alpha();
      rec.alpha_minus = gap.alpha_minus;
      rec.alpha_plus = gap.alpha_plus;
      if (gap.alpha() < 10.0 * kSpectrumZeroTolerance)
        fail(ErrorCode::EdgeTooClose, "alpha = " + std::to_string(gap.alpha()) +
                                          " is below the resolvable gap width");
      GapSolitonOptions o = options;
      o.context.gap = gap;
      rec.result = solve_gap_soliton(m, grid, o);
      if (rec.result->converged)
        scaling.push_back({gap.alpha(), gap.alpha_minus, gap.alpha_plus, rec.result->h1_norm, rec.result->sup_norm});
    } catch (const Error& e) {
      if (!is_refusal(e.code())) throw;
      rec.refusal = e.what();
    }
    out.records.push_back(std::move(rec));
  }
  out.sup_decreasing = true;
  double last = std::numeric_limits<double>::infinity();
  for (const auto& r : out.records) {
    if (!r.result) continue;
    if (!(r.result->sup_norm < last)) out.sup_decreasing = false;
    last = r.result->sup_norm;
  }
  try {
    out.scaling = edge_scaling_probe(scaling, 4.0);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::InsufficientSpan) throw;
    out.scaling_failure = e.what();
  }
  return out;
}

}  // namespace gapsol
