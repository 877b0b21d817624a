// Ground states on Q_k: linking seed, Newton projection onto the generalized
// Nehari manifold, projected-gradient descent with restarts, and a posteriori
// verification.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gapsol/action.hpp"
#include "gapsol/detail/gmres.hpp"

namespace gapsol {

struct SolveConfig {
  double newton_tol = 1e-10;
  int newton_max_iter = 50;
  double newton_step_floor = 1e-4;
  double descent_tol = 1e-8;
  int descent_max_iter = 5000;
  double armijo = 1e-4;
  double initial_step = 1.0;
  int restarts = 3;
  std::uint64_t seed = 1;
  /// Converged also requires ||PDE residual||_L2 < pde_relative_tol * ||u||_H1.
  double pde_relative_tol = 1e-6;
  /// Largest constrained subspace solved in explicit eigen-coordinates; GMRES above.
  std::size_t dense_transverse_limit = 200;

  void validate() const {
    if (!(newton_tol > 0 && descent_tol > 0 && armijo > 0 && initial_step > 0 && newton_step_floor > 0 &&
          pde_relative_tol > 0))
      fail(ErrorCode::InvalidArgument, "solver tolerances and steps must be positive");
    if (newton_max_iter < 1 || descent_max_iter < 1)
      fail(ErrorCode::InvalidArgument, "solver iteration caps must be at least 1");
    if (restarts < 0) fail(ErrorCode::InvalidArgument, "restarts must be non-negative");
  }
};

/// Exponential fit |u(x)| ~ C exp(-lambda |x|) on shell maxima.
struct DecayFit {
  double lambda = 0.0;
  double prefactor = 0.0;
  int r_lo = 0;
  int r_hi = 0;
  double r_squared = 0.0;
  double lambda_vs_gap = 0.0;  ///< lambda / alpha^{1/2}
  std::vector<double> shell_max;  ///< M(r) for r = 0, 1, ...
};

struct SolveResult {
  PeriodicField u;
  double value = 0.0;  ///< +-J_k(u): the candidate m_k for the chosen sign
  NehariResidual residual;
  double pde_residual_l2 = 0.0;
  double gradient_norm = 0.0;  ///< dual k-norm of the full derivative
  int iterations = 0;
  bool converged = false;
  std::vector<int> recenter_b;
  double sup_norm = 0.0;
  double h1_norm = 0.0;
  std::uint64_t seed = 0;
  int restart_index = 0;
  /// Phi decrements of accepted descent steps (all negative).
  std::vector<double> decrements;
  double max_manifold_residual = 0.0;
  std::string status;
  std::optional<DecayFit> decay;
};

namespace detail {

inline double ray_derivative(const ActionContext& ctx, const PeriodicField& z, double lz, double s) {
  const Eigen::VectorXd sz = s * z.values();
  return s * lz - ctx.nodal.f(sz).dot(z.values()) * ctx.grid.node_weight();
}

/// Root s > 0 of d/ds Phi(s z) when <L_sigma z, z> = lz > 0; nullopt if none below s_max.
inline std::optional<double> ray_maximizer(const ActionContext& ctx, const PeriodicField& z, double lz,
                                           double s_max = 1e8) {
  if (!(lz > 0.0)) return std::nullopt;
  double lo = 0.0, hi = 1.0;
  while (ray_derivative(ctx, z, lz, hi) > 0.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > s_max) return std::nullopt;
  }
  for (int i = 0; i < 200 && hi - lo > 1e-16 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (ray_derivative(ctx, z, lz, mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

inline double quadratic_form(const ActionContext& ctx, const PeriodicField& u) {
  return ctx.sigma() * inner(u, ctx.dec().apply_operator(u));
}

}  // namespace detail

/// Sign of the mean when it is resolvable, else of the largest entry (first on ties).
inline double seed_orientation(const Eigen::VectorXd& z) {
  const double total = z.sum();
  if (std::abs(total) > 1e-8 * z.lpNorm<1>()) return total > 0.0 ? 1.0 : -1.0;
  Eigen::Index imax = 0;
  z.cwiseAbs().maxCoeff(&imax);
  return z[imax] >= 0.0 ? 1.0 : -1.0;
}

/// t * z0 with z0 the eigenvector of L_k nearest 0 on the positive side of
/// L_sigma, and t the maximizer of s -> Phi(s z0).
inline PeriodicField linking_seed(const ActionContext& ctx) {
  const auto& dec = ctx.dec();
  const std::size_t split = dec.split_index();
  std::size_t idx = 0;
  if (ctx.sign == Sign::plus) {
    if (dec.retained() <= split)
      fail(ErrorCode::IncompleteDecomposition, "no positive eigenvector retained for the seed");
    idx = split;
  } else {
    if (split == 0) throw Error(ErrorCode::SignIllegal, std::string(hypothesis::defocusing_needs_spectrum_below));
    idx = split - 1;
  }
  PeriodicField z = dec.eigenvectors()[idx];
  if (seed_orientation(z.values()) < 0.0) z *= -1.0;
  const double lz = detail::quadratic_form(ctx, z);
  const auto t = detail::ray_maximizer(ctx, z, lz);
  if (!t) fail(ErrorCode::SeedDegenerate, "s -> J(s z0) has no interior maximum; the nonlinearity is not superlinear here");
  return *t * z;
}

namespace detail {

// One transverse Newton system G'(u)[tau u + h] = -G(u), h in the constrained subspace.
class TransverseNewton {
 public:
  TransverseNewton(const ActionContext& ctx, const SolveConfig& cfg) : ctx_(ctx), cfg_(cfg) {
    const auto& dec = ctx.dec();
    dense_ = ctx.sign == Sign::plus && dec.split_index() <= cfg.dense_transverse_limit &&
             dec.retained() >= dec.split_index();
    if (dense_) {
      const std::size_t m = dec.split_index();
      basis_.resize(static_cast<Eigen::Index>(ctx.grid.size()), static_cast<Eigen::Index>(m));
      lambda_.resize(static_cast<Eigen::Index>(m));
      for (std::size_t j = 0; j < m; ++j) {
        basis_.col(static_cast<Eigen::Index>(j)) = dec.eigenvectors()[j].values();
        lambda_[static_cast<Eigen::Index>(j)] = dec.eigenvalues()[j];
      }
    }
  }

  /// sqrt(I^2 + ||P phi||_*^2) for phi = Phi'(u).
  double merit(const PeriodicField& u) const {
    const PeriodicField phi = oriented_gradient(ctx_, u);
    return merit(u, phi);
  }

  double merit(const PeriodicField& u, const PeriodicField& phi) const {
    const double I = inner(phi, u);
    return std::hypot(I, dual_norm(ctx_, constrained_part(ctx_, phi)));
  }

  PeriodicField step(const PeriodicField& u, const PeriodicField& phi) const {
    return dense_ ? dense_step(u, phi) : krylov_step(u, phi);
  }

 private:
  PeriodicField dense_step(const PeriodicField& u, const PeriodicField& phi) const {
    const double w = ctx_.grid.node_weight();
    const Eigen::Index m = basis_.cols();
    const Eigen::VectorXd fp = ctx_.nodal.fprime(u.values());
    const PeriodicField hu = oriented_hessian_apply(ctx_, u, u);
    Eigen::MatrixXd A(m + 1, m + 1);
    Eigen::VectorXd rhs(m + 1);
    A(0, 0) = inner(hu, u) + inner(phi, u);
    rhs[0] = -inner(phi, u);
    if (m > 0) {
      const Eigen::VectorXd e_hu = basis_.transpose() * hu.values() * w;
      const Eigen::VectorXd e_phi = basis_.transpose() * phi.values() * w;
      A.block(0, 1, 1, m) = (e_hu + e_phi).transpose();
      A.block(1, 0, m, 1) = e_hu;
      const Eigen::MatrixXd weighted = basis_.array().colwise() * fp.array();
      Eigen::MatrixXd block = -(basis_.transpose() * weighted) * w;
      block.diagonal() += ctx_.sigma() * lambda_;
      A.block(1, 1, m, m) = block;
      rhs.tail(m) = -e_phi;
    }
    const Eigen::VectorXd x = A.colPivHouseholderQr().solve(rhs);
    Eigen::VectorXd v = x[0] * u.values();
    if (m > 0) v += basis_ * x.tail(m);
    return PeriodicField(ctx_.grid, std::move(v));
  }

  PeriodicField krylov_step(const PeriodicField& u, const PeriodicField& phi) const {
    const GridSpec& g = ctx_.grid;
    const double sw = std::sqrt(g.node_weight());
    const Eigen::Index D = static_cast<Eigen::Index>(g.size());
    const bool plus = ctx_.sign == Sign::plus;
    auto in_constrained = [plus](double l) { return plus ? l < 0.0 : l > 0.0; };
    auto project = [&](const Eigen::VectorXd& scaled) {
      PeriodicField f(g, scaled / sw);
      return ctx_.dec().apply_function(f, [&](double l) { return in_constrained(l) ? 1.0 : 0.0; });
    };
    const double d0 = inner(oriented_hessian_apply(ctx_, u, u), u) + inner(phi, u);
    const double d0_safe = std::abs(d0) > 1e-300 ? d0 : 1.0;

    LinearMap A = [&](const Eigen::VectorXd& x) {
      const PeriodicField h = project(x.tail(D));
      const PeriodicField v = x[0] * u + h;
      const PeriodicField hv = oriented_hessian_apply(ctx_, u, v);
      Eigen::VectorXd out(D + 1);
      out[0] = inner(hv, u) + inner(phi, v);
      out.tail(D) = constrained_part(ctx_, hv).values() * sw;
      return out;
    };
    LinearMap Minv = [&](const Eigen::VectorXd& y) {
      Eigen::VectorXd out(D + 1);
      out[0] = y[0] / d0_safe;
      const PeriodicField r(g, y.tail(D) / sw);
      const PeriodicField z =
          ctx_.dec().apply_function(r, [&](double l) { return in_constrained(l) ? -1.0 / std::abs(l) : 0.0; });
      out.tail(D) = z.values() * sw;
      return out;
    };
    Eigen::VectorXd b(D + 1);
    b[0] = -inner(phi, u);
    b.tail(D) = -constrained_part(ctx_, phi).values() * sw;
    const GmresResult sol = gmres(A, Minv, b, 1e-12, 1e-3 * cfg_.newton_tol);
    const PeriodicField h = project(sol.x.tail(D));
    return sol.x[0] * u + h;
  }

  const ActionContext& ctx_;
  const SolveConfig& cfg_;
  bool dense_ = false;
  Eigen::MatrixXd basis_;
  Eigen::VectorXd lambda_;
};

inline void check_collapse(const PeriodicField& u) {
  if (l2_norm(u) < 1e-12) fail(ErrorCode::CollapsedToZero, "iterate collapsed to the zero field");
}

}  // namespace detail

/// Newton on G(u) = (<Phi'(u),u>, P Phi'(u)) over the transverse space R u + E_constrained.
inline PeriodicField project_to_manifold(const ActionContext& ctx, const PeriodicField& u0,
                                         const SolveConfig& cfg = {}) {
  require_same_grid(ctx.grid, u0.grid());
  detail::check_collapse(u0);
  PeriodicField u = u0;

  // Far from the manifold along the ray: rescale first.
  {
    const double a = detail::quadratic_form(ctx, u);
    const double b = ctx.nodal.f(u.values()).dot(u.values()) * ctx.grid.node_weight();
    if (a > 0.0 && std::abs(a - b) > 0.25 * std::max(std::abs(a), std::abs(b))) {
      if (auto t = detail::ray_maximizer(ctx, u, a)) u *= *t;
    }
  }

  const detail::TransverseNewton newton(ctx, cfg);
  PeriodicField phi = oriented_gradient(ctx, u);
  double merit = newton.merit(u, phi);
  for (int it = 0; it < cfg.newton_max_iter; ++it) {
    if (merit < cfg.newton_tol) return u;
    const PeriodicField v = newton.step(u, phi);
    double s = 1.0;
    while (true) {
      PeriodicField trial = u + s * v;
      if (l2_norm(trial) >= 1e-12) {
        PeriodicField phi_t = oriented_gradient(ctx, trial);
        const double m_t = newton.merit(trial, phi_t);
        if (m_t < (1.0 - 1e-4 * s) * merit || m_t < cfg.newton_tol) {
          u = std::move(trial);
          phi = std::move(phi_t);
          merit = m_t;
          break;
        }
      }
      s *= 0.5;
      if (s < cfg.newton_step_floor) {
        detail::check_collapse(u + v);
        fail(ErrorCode::ProjectionDiverged,
             "Newton line search hit the step floor with residual " + std::to_string(merit));
      }
    }
    detail::check_collapse(u);
  }
  if (merit < cfg.newton_tol) return u;
  fail(ErrorCode::ProjectionDiverged, "Newton projection did not converge in " + std::to_string(cfg.newton_max_iter) +
                                          " iterations (residual " + std::to_string(merit) + ")");
}

namespace detail {

inline void finalize(const ActionContext& ctx, SolveResult& res) {
  res.residual = nehari_residual(ctx, res.u);
  const PeriodicField r = gradient(ctx, res.u);
  res.pde_residual_l2 = l2_norm(r);
  res.gradient_norm = dual_norm(ctx, r);
  res.value = oriented_energy(ctx, res.u);
  res.sup_norm = res.u.sup_norm();
  res.h1_norm = h1_norm(res.u);
}

}  // namespace detail

/// Projected-gradient descent on the manifold from one initial guess.
inline SolveResult minimize_from(const ActionContext& ctx, const PeriodicField& initial, const SolveConfig& cfg = {}) {
  cfg.validate();
  SolveResult res;
  res.seed = cfg.seed;
  PeriodicField u = project_to_manifold(ctx, initial, cfg);
  res.max_manifold_residual = nehari_residual(ctx, u).norm;
  double s_last = cfg.initial_step;
  res.status = "iteration cap reached";
  int it = 0;
  for (; it < cfg.descent_max_iter; ++it) {
    const PeriodicField phi = oriented_gradient(ctx, u);
    const PeriodicField g = ctx.dec().riesz(phi);
    const double gsq = std::max(0.0, inner(phi, g));
    const double gnorm = std::sqrt(gsq);
    if (gnorm < cfg.descent_tol && l2_norm(phi) < cfg.pde_relative_tol * h1_norm(u)) {
      res.converged = true;
      res.status = "converged";
      break;
    }
    double s = std::min(cfg.initial_step, 2.0 * s_last);
    bool accepted = false;
    while (s >= 1e-12) {
      try {
        PeriodicField t = project_to_manifold(ctx, u - s * g, cfg);
        const double dphi = oriented_energy_difference(ctx, u, t);
        if (dphi <= -cfg.armijo * s * gsq && dphi < 0.0) {
          res.decrements.push_back(dphi);
          res.max_manifold_residual = std::max(res.max_manifold_residual, nehari_residual(ctx, t).norm);
          u = std::move(t);
          accepted = true;
          break;
        }
      } catch (const Error& e) {
        if (e.code() != ErrorCode::ProjectionDiverged && e.code() != ErrorCode::CollapsedToZero) throw;
      }
      s *= 0.5;
    }
    if (!accepted) {
      res.status = "line search stalled";
      break;
    }
    s_last = s;
  }
  res.iterations = it;
  res.u = std::move(u);
  detail::finalize(ctx, res);
  return res;
}

namespace detail {

/// seed * sech(dist(x, c)/w) * (1 + 0.1 * smooth noise), c and noise from rng.
inline PeriodicField localized_perturbation(const PeriodicField& seed, std::mt19937_64& rng) {
  const GridSpec& g = seed.grid();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::array<double, 2> c{unit(rng) * g.k, unit(rng) * g.k};
  const double w = std::max(1.0, g.k / 8.0);
  constexpr int modes = 4;
  std::array<std::array<double, modes>, 2> amp{}, phase{};
  for (int a = 0; a < 2; ++a)
    for (int m = 0; m < modes; ++m) {
      amp[a][m] = 0.25 * normal(rng);
      phase[a][m] = 2.0 * M_PI * unit(rng);
    }
  Eigen::VectorXd v(seed.values().size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto x = node_position(g, i);
    double dist2 = 0.0, noise = 0.0;
    for (int a = 0; a < g.dim; ++a) {
      double d = std::fmod(std::abs(x[a] - c[a]), static_cast<double>(g.k));
      d = std::min(d, g.k - d);
      dist2 += d * d;
      for (int m = 0; m < modes; ++m) noise += amp[a][m] * std::cos(2.0 * M_PI * (m + 1) * x[a] / g.k + phase[a][m]);
    }
    v[static_cast<Eigen::Index>(i)] = seed[i] / std::cosh(std::sqrt(dist2) / w) * (1.0 + 0.1 * noise);
  }
  return PeriodicField(g, std::move(v));
}

inline bool better(const SolveResult& a, const SolveResult& b) {
  if (a.converged != b.converged) return a.converged;
  if (std::abs(a.value - b.value) > 1e-9) return a.value < b.value;
  return a.h1_norm < b.h1_norm - 1e-12;
}

}  // namespace detail

/// Best of the pure linking seed and `restarts` localized perturbations of it.
inline SolveResult minimize_ground_state(const ActionContext& ctx, const SolveConfig& cfg = {}) {
  cfg.validate();
  PeriodicField seed;
  try {
    seed = linking_seed(ctx);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::SeedDegenerate) throw;
    fail(ErrorCode::AllRestartsCollapsed,
         "no nontrivial state: the linking seed is degenerate (" + std::string(e.detail()) + ")");
  }
  std::mt19937_64 rng(cfg.seed);
  std::optional<SolveResult> best;
  std::string failures;
  for (int r = 0; r <= cfg.restarts; ++r) {
    const PeriodicField init = r == 0 ? seed : detail::localized_perturbation(seed, rng);
    try {
      SolveResult res = minimize_from(ctx, init, cfg);
      res.restart_index = r;
      if (!best || detail::better(res, *best)) best = std::move(res);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::ProjectionDiverged && e.code() != ErrorCode::CollapsedToZero) throw;
      failures += " run " + std::to_string(r) + ": " + std::string(to_string(e.code())) + ";";
    }
  }
  if (!best) fail(ErrorCode::AllRestartsCollapsed, "every run failed:" + failures);
  best->seed = cfg.seed;
  return *best;
}

struct VerificationReport {
  double pde_residual_l2 = 0.0;
  double h1_norm = 0.0;
  double value = 0.0;
  double identity_value = 0.0;
  double identity_error = 0.0;
  double bound_ratio = 0.0;  ///< ||u||_H1 alpha^{1/2} / (|c|^{1/2} + |c|^{1/p'})
  double gradient_norm = 0.0;
  bool nontrivial = false;
  bool pde_ok = false;
  bool value_positive = false;
  bool identity_ok = false;
  bool ratio_finite = false;
  bool gradient_ok = false;

  bool passed() const { return nontrivial && pde_ok && value_positive && identity_ok && ratio_finite && gradient_ok; }
  std::string first_failure() const {
    if (!nontrivial) return "nontriviality";
    if (!pde_ok) return "pde_residual";
    if (!value_positive) return "value positivity";
    if (!identity_ok) return "value identity";
    if (!ratio_finite) return "norm bound ratio";
    if (!gradient_ok) return "full gradient";
    return "";
  }
};

/// Substitution checks on a candidate solution; no exception.
inline VerificationReport assess_critical_point(const ActionContext& ctx, const PeriodicField& u,
                                                const SolveConfig& cfg = {}) {
  VerificationReport rep;
  rep.nontrivial = l2_norm(u) >= 1e-12;
  if (!rep.nontrivial) return rep;
  const PeriodicField r = gradient(ctx, u);
  rep.pde_residual_l2 = l2_norm(r);
  rep.h1_norm = h1_norm(u);
  rep.pde_ok = rep.pde_residual_l2 < cfg.pde_relative_tol * rep.h1_norm;
  rep.value = oriented_energy(ctx, u);
  rep.value_positive = rep.value > 0.0;
  const Eigen::VectorXd f = ctx.nodal.f(u.values());
  rep.identity_value = (0.5 * f.cwiseProduct(u.values()) - ctx.nodal.F(u.values())).sum() * ctx.grid.node_weight();
  rep.identity_error = std::abs(rep.identity_value - rep.value);
  rep.identity_ok = rep.identity_error <= 1e-8 * std::max(1.0, std::abs(rep.value));
  const double pconj = ctx.nonlinearity.p / (ctx.nonlinearity.p - 1.0);
  const double c = std::abs(rep.value);
  rep.bound_ratio = rep.h1_norm * std::sqrt(ctx.gap.alpha()) / (std::sqrt(c) + std::pow(c, 1.0 / pconj));
  rep.ratio_finite = std::isfinite(rep.bound_ratio);
  rep.gradient_norm = dual_norm(ctx, r);
  rep.gradient_ok = rep.gradient_norm <= 10.0 * cfg.descent_tol;
  return rep;
}

/// Throws VerificationFailed naming the first failing check.
inline VerificationReport verify_critical_point(const ActionContext& ctx, const PeriodicField& u,
                                                const SolveConfig& cfg = {}) {
  VerificationReport rep = assess_critical_point(ctx, u, cfg);
  if (!rep.passed())
    fail(ErrorCode::VerificationFailed,
         "check '" + rep.first_failure() + "' failed (pde residual " + std::to_string(rep.pde_residual_l2) +
             ", H1 " + std::to_string(rep.h1_norm) + ", value " + std::to_string(rep.value) + ")");
  return rep;
}

inline VerificationReport verify_critical_point(const ActionContext& ctx, const SolveResult& result,
                                                const SolveConfig& cfg = {}) {
  return verify_critical_point(ctx, result.u, cfg);
}

}  // namespace gapsol
