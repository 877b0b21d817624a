// Command pipelines behind the gapsol CLI. Every artifact carries the config
// hash; numbers are written with 17 significant digits and no timestamps, so
// a rerun with the same config and seed is bit-identical.
#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gapsol/config.hpp"

namespace gapsol {

namespace detail {

inline std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

inline nlohmann::json jnum(double v) {
  if (std::isfinite(v)) return v;
  return num(v);
}

inline nlohmann::json gap_json(const SpectralGap& g) {
  return {{"alpha_minus", jnum(g.alpha_minus)}, {"alpha_plus", jnum(g.alpha_plus)}, {"alpha", jnum(g.alpha())}};
}

class Artifacts {
 public:
  Artifacts(const RunConfig& cfg, std::string command)
      : cfg_(cfg), command_(std::move(command)), hash_(config_hash_hex(cfg)) {
    std::filesystem::create_directories(cfg.output_dir);
  }

  const std::string& hash() const { return hash_; }
  std::filesystem::path path(const std::string& name) const { return cfg_.output_dir / name; }

  std::ofstream csv(const std::string& name, const std::string& header) {
    std::ofstream out(path(name), std::ios::trunc);
    if (!out) fail(ErrorCode::IoError, "cannot write " + path(name).string());
    out << "# gapsol " << command_ << "\n# config_hash=" << hash_ << "\n" << header << "\n";
    written_.push_back(path(name));
    return out;
  }

  void json(const std::string& name, nlohmann::json body) {
    body["config_hash"] = hash_;
    body["command"] = command_;
    std::ofstream out(path(name), std::ios::trunc);
    if (!out) fail(ErrorCode::IoError, "cannot write " + path(name).string());
    out << body.dump(2) << "\n";
    written_.push_back(path(name));
  }

  void field(const std::string& name, const PeriodicField& u) {
    write_field_dump(path(name), u, {{"config_hash", hash_}, {"command", command_}});
    written_.push_back(path(name));
  }

  const std::vector<std::filesystem::path>& written() const { return written_; }

 private:
  const RunConfig& cfg_;
  std::string command_;
  std::string hash_;
  std::vector<std::filesystem::path> written_;
};

/// Midpoint of the gap above band `j` (1-based) of V.
inline double gap_midpoint(const PotentialSpec& V, int dim, int j, const RunConfig& cfg) {
  BlochOptions bo;
  bo.resolution = cfg.bloch_resolution;
  const int nb = std::max(cfg.n_bands, j + 1);
  const BlochBands b = bloch_bands(V, dim, cfg.n_theta, nb, bo);
  const double top = b.intervals[static_cast<std::size_t>(j - 1)].second;
  const double bottom = b.intervals[static_cast<std::size_t>(j)].first;
  if (!(bottom > top)) fail(ErrorCode::ValidationError, "bands " + std::to_string(j) + " and " +
                                                            std::to_string(j + 1) + " overlap; no gap to center");
  return 0.5 * (top + bottom);
}

inline NlsProblem resolve_problem(const RunConfig& cfg) {
  if (cfg.medium) return reduce_to_nls(*cfg.medium);
  NlsProblem p;
  p.potential = *cfg.potential;
  if (cfg.center_gap) p.potential = p.potential.affine(1.0, -gap_midpoint(p.potential, cfg.dim, *cfg.center_gap, cfg));
  p.nonlinearity = cfg.nonlinearity;
  p.sign = cfg.sign.value_or(Sign::plus);
  return p;
}

inline ContextOptions context_options(const RunConfig& cfg) {
  ContextOptions o;
  o.gap_options.n_theta = cfg.n_theta;
  o.gap_options.bloch.resolution = cfg.bloch_resolution;
  return o;
}

inline nlohmann::json solve_json(const ActionContext& ctx, const SolveResult& r) {
  nlohmann::json j;
  j["value"] = jnum(r.value);
  j["sup_norm"] = jnum(r.sup_norm);
  j["h1_norm"] = jnum(r.h1_norm);
  j["residuals"] = {{"nehari", jnum(r.residual.norm)},
                    {"nehari_I", jnum(r.residual.I)},
                    {"pde_l2", jnum(r.pde_residual_l2)},
                    {"gradient_dual", jnum(r.gradient_norm)},
                    {"max_manifold", jnum(r.max_manifold_residual)}};
  j["iterations"] = r.iterations;
  j["converged"] = r.converged;
  j["status"] = r.status;
  j["seed"] = r.seed;
  j["restart_index"] = r.restart_index;
  j["alpha"] = gap_json(ctx.gap);
  j["sign"] = to_string(ctx.sign);
  j["grid"] = {{"dim", ctx.grid.dim}, {"k", ctx.grid.k}, {"n", ctx.grid.n}};
  j["recenter_b"] = r.recenter_b;
  j["split_index"] = ctx.dec().split_index();
  if (r.decay)
    j["decay"] = {{"lambda", jnum(r.decay->lambda)},
                  {"prefactor", jnum(r.decay->prefactor)},
                  {"window", {r.decay->r_lo, r.decay->r_hi}},
                  {"r_squared", jnum(r.decay->r_squared)},
                  {"lambda_vs_gap", jnum(r.decay->lambda_vs_gap)}};
  else
    j["decay"] = nullptr;
  return j;
}

inline void write_profile(Artifacts& art, const PeriodicField& u) {
  if (u.grid().dim != 1) return;
  auto out = art.csv("profile.csv", "x,u");
  for (std::size_t i = 0; i < u.size(); ++i) out << num(centered_coordinate(u.grid(), i)[0]) << "," << num(u[i]) << "\n";
}

inline void write_decay(Artifacts& art, const PeriodicField& u) {
  auto out = art.csv("decay.csv", "r,shell_max");
  const auto m = shell_maxima(u);
  for (std::size_t r = 0; r < m.size(); ++r) out << r << "," << num(m[r]) << "\n";
}

inline int cmd_band(const RunConfig& cfg, std::ostream& log) {
  Artifacts art(cfg, "band");
  const NlsProblem p = resolve_problem(cfg);
  BlochOptions bo;
  bo.resolution = cfg.bloch_resolution;
  const BlochBands bands = bloch_bands(p.potential, cfg.dim, cfg.n_theta, cfg.n_bands, bo);
  if (cfg.wants("csv")) {
    auto out = art.csv("bands.csv", cfg.dim == 1 ? "theta_0,band_index,lambda" : "theta_0,theta_1,band_index,lambda");
    for (std::size_t s = 0; s < bands.thetas.size(); ++s)
      for (int j = 0; j < bands.n_bands; ++j) {
        out << num(bands.thetas[s][0]) << ",";
        if (cfg.dim == 2) out << num(bands.thetas[s][1]) << ",";
        out << j << "," << num(bands.values(static_cast<Eigen::Index>(s), j)) << "\n";
      }
  }
  nlohmann::json j;
  j["intervals"] = nlohmann::json::array();
  for (const auto& [lo, hi] : bands.intervals) j["intervals"].push_back({jnum(lo), jnum(hi)});
  try {
    const SpectralGap gap = find_gap_at_zero(bands, p.sign);
    j["gap"] = gap_json(gap);
    log << "gap at 0: alpha_minus=" << num(gap.alpha_minus) << " alpha_plus=" << num(gap.alpha_plus) << "\n";
  } catch (const Error& e) {
    j["gap"] = nullptr;
    j["gap_status"] = std::string(to_string(e.code()));
    log << "no gap at 0: " << e.what() << "\n";
  }
  if (cfg.wants("json")) art.json("bands.json", j);
  return 0;
}

inline int cmd_gapmap(const RunConfig& cfg, std::ostream& log) {
  if (!cfg.medium) fail(ErrorCode::ValidationError, "gapmap needs a [medium] section");
  Artifacts art(cfg, "gapmap");
  GapMapOptions o;
  o.dim = cfg.dim;
  o.gap.n_theta = cfg.n_theta;
  o.gap.bloch.resolution = cfg.bloch_resolution;
  const GapMap map = frequency_gap_map(cfg.medium->epsilon, cfg.medium->beta, cfg.omega_min, cfg.omega_max,
                                       cfg.n_samples, o);
  if (cfg.wants("csv")) {
    auto out = art.csv("gapmap.csv", "omega,status,alpha_minus,alpha_plus");
    for (const auto& r : map.rows)
      out << num(r.omega) << "," << to_string(r.status) << "," << num(r.alpha_minus) << "," << num(r.alpha_plus)
          << "\n";
  }
  nlohmann::json j;
  j["edges"] = nlohmann::json::array();
  for (const auto& e : map.edges) {
    j["edges"].push_back({{"omega", e.omega}, {"gap_below", e.gap_below}});
    log << "gap edge at omega=" << num(e.omega) << (e.gap_below ? " (gap below)" : " (gap above)") << "\n";
  }
  if (cfg.wants("json")) art.json("gapmap.json", j);
  return 0;
}

inline int cmd_solve(const RunConfig& cfg, std::ostream& log) {
  Artifacts art(cfg, "solve");
  const GridSpec grid = make_grid(cfg.dim, cfg.k, cfg.n);
  const NlsProblem p = resolve_problem(cfg);
  ContextOptions copts = context_options(cfg);
  copts.gap = gap_for_potential(p.potential, cfg.dim, p.sign, copts.gap_options);
  const ActionContext ctx = make_context(p.potential, p.nonlinearity, p.sign, grid, copts);
  SolveResult r = minimize_ground_state(ctx, cfg.solver);
  Recentered rc = recenter(r.u);
  r.u = std::move(rc.u);
  r.recenter_b = std::move(rc.b);
  try {
    r.decay = fit_decay_rate(r.u, ctx.gap);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::WindowTooSmall) throw;
    log << "decay fit skipped: " << e.detail() << "\n";
  }
  if (cfg.wants("json")) art.json("solve.json", solve_json(ctx, r));
  if (cfg.wants("field")) art.field("field.bin", r.u);
  if (cfg.wants("csv")) {
    write_profile(art, r.u);
    write_decay(art, r.u);
  }
  log << "value=" << num(r.value) << " sup=" << num(r.sup_norm) << " h1=" << num(r.h1_norm)
      << " converged=" << (r.converged ? "yes" : "no") << "\n";
  if (!r.converged) {
    log << "solver did not converge: " << r.status << "\n";
    return 1;
  }
  return 0;
}

inline int cmd_ksweep(const RunConfig& cfg, std::ostream& log) {
  if (cfg.k_list.empty()) fail(ErrorCode::ValidationError, "ksweep needs 'grid.k_list'");
  Artifacts art(cfg, "ksweep");
  const NlsProblem p = resolve_problem(cfg);
  SweepProblem sp{p.potential, p.nonlinearity, p.sign, cfg.dim, cfg.n, context_options(cfg)};
  const KSweepResult res = k_sweep(sp, cfg.k_list, cfg.solver, cfg.k_conv_tol);
  if (cfg.wants("csv")) {
    auto out = art.csv("sweep.csv", "k,m_k,sup_norm,h1_norm,lambda,r2,converged");
    for (const auto& r : res.records)
      out << r.k << "," << num(r.value) << "," << num(r.sup_norm) << "," << num(r.h1_norm) << "," << num(r.lambda)
          << "," << num(r.r_squared) << "," << (r.converged ? 1 : 0) << "\n";
  }
  nlohmann::json j;
  j["sequence_converged"] = res.sequence_converged;
  j["failure"] = res.failure;
  j["k_too_small"] = nlohmann::json::array();
  for (const auto& r : res.records)
    if (r.k_too_small) j["k_too_small"].push_back(r.k);
  if (cfg.wants("json")) art.json("sweep.json", j);
  for (const auto& r : res.records) log << "k=" << r.k << " m_k=" << num(r.value) << "\n";
  if (!res.failure.empty()) {
    log << "sweep stopped: " << res.failure << "\n";
    return 1;
  }
  return 0;
}

inline int cmd_bifurcate(const RunConfig& cfg, std::ostream& log) {
  if (!cfg.medium) fail(ErrorCode::ValidationError, "bifurcate needs a [medium] section");
  if (cfg.omega_list.empty()) fail(ErrorCode::ValidationError, "bifurcate needs 'bifurcate.omega_list'");
  Artifacts art(cfg, "bifurcate");
  GapSolitonOptions o;
  o.solve = cfg.solver;
  o.context = context_options(cfg);
  const BifurcationSweep sweep = bifurcation_sweep(cfg.medium->epsilon, cfg.medium->chi, cfg.medium->beta,
                                                   cfg.omega_list, make_grid(cfg.dim, cfg.k, cfg.n), o);
  if (cfg.wants("csv")) {
    auto out = art.csv("bifurcation.csv", "omega,alpha,h1_norm,sup_norm,value,lambda,converged");
    for (const auto& r : sweep.records) {
      const double nan = std::numeric_limits<double>::quiet_NaN();
      const bool ok = r.result.has_value();
      out << num(r.omega) << "," << num(r.alpha) << "," << num(ok ? r.result->h1_norm : nan) << ","
          << num(ok ? r.result->sup_norm : nan) << "," << num(ok ? r.result->value : nan) << ","
          << num(ok && r.result->decay ? r.result->decay->lambda : nan) << "," << (ok && r.result->converged ? 1 : 0)
          << "\n";
    }
  }
  nlohmann::json j;
  j["sup_decreasing"] = sweep.sup_decreasing;
  j["refusals"] = nlohmann::json::array();
  for (const auto& r : sweep.records)
    if (!r.refusal.empty()) j["refusals"].push_back({{"omega", r.omega}, {"reason", r.refusal}});
  if (sweep.scaling) {
    auto fit = [](const ScalingFit& f) -> nlohmann::json {
      if (!f.available) return nullptr;
      return {{"slope", jnum(f.slope)}, {"stderr", jnum(f.stderr_slope)}, {"band", {jnum(f.band_lo), jnum(f.band_hi)}}};
    };
    j["scaling"] = {{"vs_alpha", fit(sweep.scaling->vs_alpha)},
                    {"vs_alpha_minus", fit(sweep.scaling->vs_alpha_minus)},
                    {"vs_alpha_plus", fit(sweep.scaling->vs_alpha_plus)},
                    {"sup_monotone", sweep.scaling->sup_monotone},
                    {"reference_exponent", sweep.scaling->reference_exponent}};
    log << "H1 scaling exponent vs alpha: " << num(sweep.scaling->vs_alpha.slope) << " (reference exponent "
        << num(sweep.scaling->reference_exponent) << ", not asserted)\n";
  } else {
    j["scaling"] = nullptr;
    j["scaling_failure"] = sweep.scaling_failure;
  }
  if (cfg.wants("json")) art.json("bifurcation.json", j);
  return 0;
}

inline int cmd_verify(const RunConfig& cfg, const std::filesystem::path& field, std::ostream& log) {
  const PeriodicField u = read_field_dump(field);
  if (u.grid().dim != cfg.dim) fail(ErrorCode::ValidationError, "field dimension differs from problem.dimension");
  Artifacts art(cfg, "verify");
  const NlsProblem p = resolve_problem(cfg);
  const ActionContext ctx = make_context(p.potential, p.nonlinearity, p.sign, u.grid(), context_options(cfg));
  const VerificationReport rep = assess_critical_point(ctx, u, cfg.solver);
  nlohmann::json j{{"passed", rep.passed()},
                   {"first_failure", rep.first_failure()},
                   {"pde_residual_l2", jnum(rep.pde_residual_l2)},
                   {"h1_norm", jnum(rep.h1_norm)},
                   {"value", jnum(rep.value)},
                   {"identity_error", jnum(rep.identity_error)},
                   {"bound_ratio", jnum(rep.bound_ratio)},
                   {"gradient_dual", jnum(rep.gradient_norm)},
                   {"field", field.filename().string()}};
  if (cfg.wants("json")) art.json("verify.json", j);
  verify_critical_point(ctx, u, cfg.solver);
  log << "verified: pde residual " << num(rep.pde_residual_l2) << ", value " << num(rep.value) << "\n";
  return 0;
}

}  // namespace detail

inline const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"band", "gapmap", "solve", "ksweep", "bifurcate", "verify"};
  return names;
}

struct CommandOptions {
  std::optional<std::filesystem::path> field;
};

/// Runs one command; returns 0 on success, 2 on a domain refusal, 1 otherwise.
inline int run_command(const std::string& cmd, const RunConfig& cfg, const CommandOptions& opts, std::ostream& log,
                       std::ostream& err) {
  try {
    if (cmd == "band") return detail::cmd_band(cfg, log);
    if (cmd == "gapmap") return detail::cmd_gapmap(cfg, log);
    if (cmd == "solve") return detail::cmd_solve(cfg, log);
    if (cmd == "ksweep") return detail::cmd_ksweep(cfg, log);
    if (cmd == "bifurcate") return detail::cmd_bifurcate(cfg, log);
    if (cmd == "verify") {
      if (!opts.field) fail(ErrorCode::ValidationError, "verify needs --field");
      return detail::cmd_verify(cfg, *opts.field, log);
    }
    fail(ErrorCode::InvalidArgument, "unknown command '" + cmd + "'");
  } catch (const Error& e) {
    err << "gapsol " << cmd << ": " << e.what() << "\n";
    return is_refusal(e.code()) ? 2 : 1;
  } catch (const std::exception& e) {
    err << "gapsol " << cmd << ": internal error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace gapsol
