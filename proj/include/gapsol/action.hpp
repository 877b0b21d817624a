// The action J_k(u) = 1/2 <L_k u, u> -+ int F(x,u) on Q_k, its derivatives,
// and the generalized Nehari residual.
//
// Internally the solver works with the oriented functional Phi = sigma*J_k
// (sigma = +1 for the '+' equation, -1 for '-'), so that ground states are
// minimizers of Phi on the manifold in both cases:
//   Phi(u) = 1/2 <L_sigma u, u> - int F,   L_sigma = sigma * L_k,
// and the constrained subspace is the negative spectral subspace of L_sigma.
#pragma once

#include <array>
#include <cmath>
#include <memory>
#include <optional>
#include <utility>

#include "gapsol/nonlinear.hpp"
#include "gapsol/spectral.hpp"

namespace gapsol {

/// Everything fixed for a problem on one cell: V, f, sign, gap, L_k eigendata.
struct ActionContext {
  GridSpec grid;
  PotentialSpec potential;
  std::shared_ptr<const SpectralDecomposition> decomposition;
  SpectralGap gap;
  NonlinearitySpec nonlinearity;
  Sign sign = Sign::plus;
  NodalNonlinearity nodal;

  double sigma() const { return orientation(sign); }
  const SpectralDecomposition& dec() const { return *decomposition; }
};

struct ContextOptions {
  /// Supply a known gap to skip the Bloch computation.
  std::optional<SpectralGap> gap;
  EigenOptions eigen{};
  GapOptions gap_options{};
  bool validate_nonlinearity = true;
};

inline ActionContext make_context(const PotentialSpec& V, const NonlinearitySpec& f, Sign sign,
                                  const GridSpec& grid, const ContextOptions& options = {}) {
  if (options.validate_nonlinearity) check_assumptions(f, grid.dim);
  ActionContext ctx;
  ctx.grid = grid;
  ctx.potential = V;
  ctx.nonlinearity = f;
  ctx.sign = sign;
  ctx.gap = options.gap ? *options.gap : gap_for_potential(V, grid.dim, sign, options.gap_options);
  if (sign == Sign::minus && !ctx.gap.finite_below())
    throw Error(ErrorCode::SignIllegal, std::string(hypothesis::defocusing_needs_spectrum_below));
  ctx.decomposition = std::make_shared<const SpectralDecomposition>(eigendecompose(V, grid, options.eigen));
  ctx.nodal = NodalNonlinearity(f, grid);
  return ctx;
}

/// J_k(u) from the quadratic form and quadrature of F.
inline double energy(const ActionContext& ctx, const PeriodicField& u) {
  const double quad = 0.5 * inner(u, ctx.dec().apply_operator(u));
  const double nl = ctx.nodal.F(u.values()).sum() * ctx.grid.node_weight();
  return quad - ctx.sigma() * nl;
}

/// J_k(u) = 1/2(||P+u||_k^2 - ||P-u||_k^2) -+ int F.
inline double energy_split(const ActionContext& ctx, const PeriodicField& u) {
  auto [np, nm] = split_norm(ctx.dec(), u);
  const double nl = ctx.nodal.F(u.values()).sum() * ctx.grid.node_weight();
  return 0.5 * (np * np - nm * nm) - ctx.sigma() * nl;
}

/// L^2 representative r = -Laplacian u + V u -+ f(x,u) of J_k'(u).
inline PeriodicField gradient(const ActionContext& ctx, const PeriodicField& u) {
  PeriodicField lu = ctx.dec().apply_operator(u);
  return PeriodicField(ctx.grid, lu.values() - ctx.sigma() * ctx.nodal.f(u.values()));
}

/// J_k''(u) w = -Laplacian w + V w -+ f'_u(x,u) w.
inline PeriodicField hessian_apply(const ActionContext& ctx, const PeriodicField& u, const PeriodicField& w) {
  PeriodicField lw = ctx.dec().apply_operator(w);
  return PeriodicField(ctx.grid, lw.values() - ctx.sigma() * ctx.nodal.fprime(u.values()).cwiseProduct(w.values()));
}

/// Phi = sigma * J_k.
inline double oriented_energy(const ActionContext& ctx, const PeriodicField& u) {
  return ctx.sigma() * energy(ctx, u);
}

/// L^2 representative of Phi'(u).
inline PeriodicField oriented_gradient(const ActionContext& ctx, const PeriodicField& u) {
  return ctx.sigma() * gradient(ctx, u);
}

/// Phi''(u) w.
inline PeriodicField oriented_hessian_apply(const ActionContext& ctx, const PeriodicField& u,
                                            const PeriodicField& w) {
  return ctx.sigma() * hessian_apply(ctx, u, w);
}

/// Projection onto the constrained subspace: E^- for '+', E^+ for '-'.
inline PeriodicField constrained_part(const ActionContext& ctx, const PeriodicField& r) {
  PeriodicField minus = ctx.dec().negative_part(r);
  return ctx.sign == Sign::plus ? minus : r - minus;
}

/// Dual k-norm of a functional given by its L^2 representative: <r, |L_k|^{-1} r>^{1/2}.
inline double dual_norm(const ActionContext& ctx, const PeriodicField& r) {
  return std::sqrt(std::max(0.0, inner(r, ctx.dec().riesz(r))));
}

struct NehariResidual {
  double I = 0.0;              ///< <J_k'(u), u>
  PeriodicField g_minus;       ///< L^2 representative of the constrained component of J_k'(u)
  double g_minus_norm = 0.0;   ///< its dual k-norm
  double norm = 0.0;           ///< (I^2 + g_minus_norm^2)^{1/2}
};

inline NehariResidual nehari_residual(const ActionContext& ctx, const PeriodicField& u) {
  NehariResidual res;
  const PeriodicField r = gradient(ctx, u);
  res.I = inner(r, u);
  res.g_minus = constrained_part(ctx, r);
  res.g_minus_norm = dual_norm(ctx, res.g_minus);
  res.norm = std::hypot(res.I, res.g_minus_norm);
  return res;
}

struct ValueIdentity {
  double value = 0.0;  ///< int (1/2 f u - F)
  bool zero_field = false;
};

/// int (1/2 f(x,u) u - F(x,u)); equals +-J_k(u) on the manifold.
inline ValueIdentity nehari_value_identity(const ActionContext& ctx, const PeriodicField& u,
                                           double tolerance = 1e-6) {
  if (u.sup_norm() == 0.0) return {0.0, true};
  const NehariResidual res = nehari_residual(ctx, u);
  if (res.norm > tolerance * std::max(1.0, h1_norm(u)))
    fail(ErrorCode::OffManifold, "Nehari residual " + std::to_string(res.norm) + " exceeds tolerance");
  const Eigen::VectorXd f = ctx.nodal.f(u.values());
  const Eigen::VectorXd F = ctx.nodal.F(u.values());
  const double v = (0.5 * f.cwiseProduct(u.values()) - F).sum() * ctx.grid.node_weight();
  return {v, false};
}

namespace detail {
// 8-point Gauss-Legendre nodes and weights on [0, 1].
inline constexpr std::array<double, 8> gl_nodes{0.019855071751231856, 0.10166676129318664, 0.2372337950418355,
                                                0.4082826787521751,   0.5917173212478249,  0.7627662049581645,
                                                0.8983332387068134,   0.9801449282487681};
inline constexpr std::array<double, 8> gl_weights{0.05061426814518813, 0.11119051722668724, 0.15685332293894363,
                                                  0.18134189168918100, 0.18134189168918100, 0.15685332293894363,
                                                  0.11119051722668724, 0.05061426814518813};
}  // namespace detail

/// Phi(t) - Phi(u) evaluated from d = t - u without cancellation in the large terms.
inline double oriented_energy_difference(const ActionContext& ctx, const PeriodicField& u, const PeriodicField& t) {
  const PeriodicField d = t - u;
  const double quad = 0.5 * ctx.sigma() * inner(ctx.dec().apply_operator(d), t + u);
  double nl = 0.0;
  for (std::size_t i = 0; i < detail::gl_nodes.size(); ++i) {
    const Eigen::VectorXd x = u.values() + detail::gl_nodes[i] * d.values();
    nl += detail::gl_weights[i] * ctx.nodal.f(x).dot(d.values());
  }
  return quad - nl * ctx.grid.node_weight();
}

}  // namespace gapsol
