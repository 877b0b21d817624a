// Power-type nonlinearities f(x,u) = h(x)|u|^{p-2}u, their primitives and
// u-derivatives, and sampled checks of the structural hypotheses on f.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "gapsol/cell_function.hpp"
#include "gapsol/grid.hpp"

namespace gapsol {

enum class NonlinearityKind { power, kerr };

inline std::string to_string(NonlinearityKind k) { return k == NonlinearityKind::kerr ? "kerr" : "power"; }

/// f = h|u|^{p-2}u with the declared constants q, theta, gamma of the growth,
/// ratio and Holder hypotheses. Kerr is the p = 4 case with h the coupling.
struct NonlinearitySpec {
  NonlinearityKind kind = NonlinearityKind::kerr;
  CellFunction weight = CellFunction::constant(1.0);
  double p = 4.0;
  double q = 4.0;
  double theta = 1.0 / 3.0;
  double gamma = 1.0;

  static NonlinearitySpec power(CellFunction h, double p) {
    NonlinearitySpec s;
    s.kind = NonlinearityKind::power;
    s.weight = std::move(h);
    s.p = p;
    s.q = p;
    s.theta = 1.0 / (p - 1.0);
    s.gamma = std::min(1.0, p - 2.0);
    return s;
  }

  static NonlinearitySpec kerr(CellFunction coupling) {
    NonlinearitySpec s = power(std::move(coupling), 4.0);
    s.kind = NonlinearityKind::kerr;
    return s;
  }

  /// Same exponents, weight multiplied by c (c = 0 gives the linear problem).
  NonlinearitySpec scaled(double c) const {
    NonlinearitySpec s = *this;
    s.weight = weight.affine(c, 0.0);
    return s;
  }
};

namespace detail {

// |u|^{p-2} with exact small-integer cases.
inline double abs_pow_m2(double u, double p) {
  const double a = std::abs(u);
  if (p == 4.0) return a * a;
  if (p == 3.0) return a;
  if (a == 0.0) return 0.0;
  return std::pow(a, p - 2.0);
}

inline double scalar_f(double h, double p, double u) { return h * abs_pow_m2(u, p) * u; }
inline double scalar_F(double h, double p, double u) { return h * abs_pow_m2(u, p) * u * u / p; }
inline double scalar_fprime(double h, double p, double u) { return h * (p - 1.0) * abs_pow_m2(u, p); }

}  // namespace detail

/// Node values of f, F and f'_u for a weight already sampled on the grid.
struct NodalNonlinearity {
  Eigen::VectorXd h;
  double p = 4.0;

  NodalNonlinearity() = default;
  NodalNonlinearity(const NonlinearitySpec& spec, const GridSpec& g) : h(spec.weight.sample(g)), p(spec.p) {}

  Eigen::VectorXd f(const Eigen::VectorXd& u) const {
    Eigen::VectorXd out(u.size());
    for (Eigen::Index i = 0; i < u.size(); ++i) out[i] = detail::scalar_f(h[i], p, u[i]);
    return out;
  }
  Eigen::VectorXd F(const Eigen::VectorXd& u) const {
    Eigen::VectorXd out(u.size());
    for (Eigen::Index i = 0; i < u.size(); ++i) out[i] = detail::scalar_F(h[i], p, u[i]);
    return out;
  }
  Eigen::VectorXd fprime(const Eigen::VectorXd& u) const {
    Eigen::VectorXd out(u.size());
    for (Eigen::Index i = 0; i < u.size(); ++i) out[i] = detail::scalar_fprime(h[i], p, u[i]);
    return out;
  }
};

inline PeriodicField eval_f(const NonlinearitySpec& spec, const PeriodicField& u) {
  return PeriodicField(u.grid(), NodalNonlinearity(spec, u.grid()).f(u.values()));
}
inline PeriodicField eval_F(const NonlinearitySpec& spec, const PeriodicField& u) {
  return PeriodicField(u.grid(), NodalNonlinearity(spec, u.grid()).F(u.values()));
}
inline PeriodicField eval_fprime(const NonlinearitySpec& spec, const PeriodicField& u) {
  return PeriodicField(u.grid(), NodalNonlinearity(spec, u.grid()).fprime(u.values()));
}

struct AssumptionCheck {
  std::string name;
  bool passed = true;
  std::string detail;
};

struct AssumptionReport {
  std::vector<AssumptionCheck> checks;
  double growth_constant = 0.0;       ///< C in |f| <= C(1 + |u|^{p-1})
  std::vector<double> small_ratios;   ///< sup_x |f|/|u| at u = 10^0 .. 10^-6
  double best_theta = 0.0;            ///< sup of (f/u) / f'_u
  std::vector<double> holder_constants;  ///< at separations 1e-4, 1e-6, 1e-8
  double weight_min = 0.0;

  bool passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
  }
  const AssumptionCheck* first_failure() const {
    for (const auto& c : checks)
      if (!c.passed) return &c;
    return nullptr;
  }
};

/// Sampled checks on unit-cell nodes (resolution `cell_n`) and `samples`
/// amplitudes in [-u_range, u_range] \ {0}. Essential-sup conditions are only
/// probed at finitely many x.
inline AssumptionReport assess_assumptions(const NonlinearitySpec& spec, int dim, double u_range = 10.0,
                                           int samples = 200, int cell_n = 16) {
  AssumptionReport rep;
  const GridSpec cell{dim, 1, cell_n};
  const Eigen::VectorXd h = spec.weight.sample(cell);
  const double p = spec.p;
  std::ostringstream os;
  os.precision(6);
  auto where = [&](Eigen::Index i, double u) {
    std::ostringstream w;
    w.precision(6);
    auto x = node_position(cell, static_cast<std::size_t>(i));
    w << "x=(" << x[0];
    if (dim == 2) w << "," << x[1];
    w << ") u=" << u;
    return w.str();
  };

  std::vector<double> us;
  for (int s = 1; s <= samples; ++s) {
    const double u = u_range * (2.0 * s / samples - 1.0 - 1.0 / samples);
    if (u != 0.0) us.push_back(u);
  }

  {
    AssumptionCheck c{"exponents", true, ""};
    std::ostringstream d;
    if (!(p > 2.0)) d << "p=" << p << " must exceed 2; ";
    if (!(spec.q > 2.0 && spec.q <= p)) d << "q=" << spec.q << " must lie in (2, p]; ";
    if (!(spec.theta > 0.0 && spec.theta < 1.0)) d << "theta=" << spec.theta << " must lie in (0,1); ";
    if (!(spec.gamma > 0.0 && spec.gamma <= 1.0)) d << "gamma=" << spec.gamma << " must lie in (0,1]; ";
    c.detail = d.str();
    c.passed = c.detail.empty();
    rep.checks.push_back(c);
  }
  {
    Eigen::Index imin = 0;
    rep.weight_min = h.minCoeff(&imin);
    AssumptionCheck c{"positivity", rep.weight_min > 0.0, ""};
    if (!c.passed) c.detail = "weight " + std::to_string(rep.weight_min) + " <= 0 at " + where(imin, 0.0) +
                              "; " + std::string(hypothesis::sign_definite_kerr);
    rep.checks.push_back(c);
  }
  {
    double cmax = 0.0;
    for (Eigen::Index i = 0; i < h.size(); ++i)
      for (double u : us)
        cmax = std::max(cmax, std::abs(detail::scalar_f(h[i], p, u)) / (1.0 + std::pow(std::abs(u), p - 1.0)));
    rep.growth_constant = cmax;
    rep.checks.push_back({"growth", std::isfinite(cmax), "C=" + std::to_string(cmax)});
  }
  {
    bool ok = true;
    for (int d = 0; d <= 6; ++d) {
      const double u = std::pow(10.0, -d);
      double r = 0.0;
      for (Eigen::Index i = 0; i < h.size(); ++i) r = std::max(r, std::abs(detail::scalar_f(h[i], p, u)) / u);
      if (!rep.small_ratios.empty() && !(r < rep.small_ratios.back() || r == 0.0)) ok = false;
      rep.small_ratios.push_back(r);
    }
    if (!(rep.small_ratios.back() <= 0.1 * rep.small_ratios.front())) ok = false;
    rep.checks.push_back({"small amplitude", ok, ok ? "" : "sup|f|/|u| does not vanish as u -> 0"});
  }
  {
    AssumptionCheck c{"superlinearity", true, ""};
    for (Eigen::Index i = 0; i < h.size() && c.passed; ++i)
      for (double u : us) {
        const double F = detail::scalar_F(h[i], p, u);
        const double uf = u * detail::scalar_f(h[i], p, u);
        if (!(spec.q * F > 0.0) || spec.q * F > uf * (1.0 + 1e-12)) {
          c.passed = false;
          c.detail = "0 < qF <= uf fails at " + where(i, u) + " (qF=" + std::to_string(spec.q * F) +
                     ", uf=" + std::to_string(uf) + ")";
          break;
        }
      }
    rep.checks.push_back(c);
  }
  {
    AssumptionCheck c{"monotone ratio", true, ""};
    double best = 0.0;
    for (Eigen::Index i = 0; i < h.size(); ++i)
      for (double u : us) {
        const double ratio = detail::scalar_f(h[i], p, u) / u;
        const double fp = detail::scalar_fprime(h[i], p, u);
        if (!(ratio > 0.0) || !(fp > 0.0)) {
          if (c.passed) c.detail = "f/u > 0 fails at " + where(i, u);
          c.passed = false;
          continue;
        }
        best = std::max(best, ratio / fp);
      }
    rep.best_theta = best;
    if (c.passed && (best > spec.theta * (1.0 + 1e-12) || best >= 1.0)) {
      c.passed = false;
      c.detail = "best theta " + std::to_string(best) + " exceeds declared " + std::to_string(spec.theta);
    }
    rep.checks.push_back(c);
  }
  {
    AssumptionCheck c{"holder", true, ""};
    for (double delta : {1e-4, 1e-6, 1e-8}) {
      double cmax = 0.0;
      for (Eigen::Index i = 0; i < h.size(); ++i)
        for (double u : us) {
          const double u2 = u + delta;
          const double diff = std::abs(detail::scalar_fprime(h[i], p, u) - detail::scalar_fprime(h[i], p, u2));
          const double scale = std::pow(1.0 + std::abs(u) + std::abs(u2), p - 2.0 - spec.gamma) *
                               std::pow(delta, spec.gamma);
          cmax = std::max(cmax, diff / scale);
        }
      rep.holder_constants.push_back(cmax);
    }
    if (!(rep.holder_constants.back() <= 10.0 * rep.holder_constants.front() + 1e-300)) {
      c.passed = false;
      c.detail = "Holder constant grows from " + std::to_string(rep.holder_constants.front()) + " to " +
                 std::to_string(rep.holder_constants.back()) + " as separations shrink";
    }
    rep.checks.push_back(c);
  }
  return rep;
}

/// Throws AssumptionViolated naming the first failing hypothesis and a witness.
inline AssumptionReport check_assumptions(const NonlinearitySpec& spec, int dim, double u_range = 10.0,
                                          int samples = 200, int cell_n = 16) {
  AssumptionReport rep = assess_assumptions(spec, dim, u_range, samples, cell_n);
  if (const auto* bad = rep.first_failure())
    fail(ErrorCode::AssumptionViolated, "nonlinearity hypothesis '" + bad->name + "' fails: " + bad->detail);
  return rep;
}

}  // namespace gapsol
