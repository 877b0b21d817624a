// Run configuration: an INI file with [problem], [potential] or [medium],
// [nonlinearity], [grid], [solver], [bands], [gapmap], [bifurcate], [sweep]
// and [output] sections. Unknown keys are errors.
//
// Coefficient functions use "c; a1:m[,m2]; a2:..." meaning
// c + a1 cos(2 pi m.x) + ..., e.g. "1; 0.5:1" is 1 + cos(2 pi x)/2.
#pragma once

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "gapsol/field_io.hpp"
#include "gapsol/photonic.hpp"

namespace gapsol {

/// Environment variable overriding output.directory.
inline constexpr const char* kOutputDirEnv = "GAPSOL_OUTPUT_DIR";

struct RunConfig {
  std::filesystem::path source;
  std::map<std::string, std::string> entries;  ///< flattened "section.key" -> value, as read

  int dim = 1;
  std::optional<Sign> sign;
  std::optional<PotentialSpec> potential;
  std::optional<int> center_gap;
  std::optional<PhotonicMedium> medium;
  NonlinearitySpec nonlinearity = NonlinearitySpec::kerr(CellFunction::constant(1.0));

  int k = 16;
  std::vector<int> k_list;
  int n = 16;

  SolveConfig solver{};
  double k_conv_tol = 1e-4;

  int n_theta = 32;
  int n_bands = 8;
  int bloch_resolution = 32;

  double omega_min = 0.1;
  double omega_max = 2.0;
  int n_samples = 64;
  std::vector<double> omega_list;

  std::filesystem::path output_dir = "gapsol-out";
  std::set<std::string> formats{"csv", "json", "field"};

  bool wants(const std::string& format) const { return formats.count(format) > 0; }
};

namespace detail {

inline const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "problem.dimension",       "problem.sign",
      "potential.V",             "potential.file",           "potential.center_gap",
      "medium.epsilon",          "medium.chi",               "medium.omega",          "medium.beta",
      "nonlinearity.kind",       "nonlinearity.p",           "nonlinearity.q",        "nonlinearity.theta",
      "nonlinearity.gamma",      "nonlinearity.h",
      "grid.k",                  "grid.k_list",              "grid.n",
      "solver.newton_tol",       "solver.newton_max_iter",   "solver.newton_step_floor",
      "solver.descent_tol",      "solver.descent_max_iter",  "solver.armijo",         "solver.initial_step",
      "solver.restarts",         "solver.seed",              "solver.pde_relative_tol",
      "solver.dense_transverse_limit",
      "sweep.k_conv_tol",
      "bands.n_theta",           "bands.n_bands",            "bands.resolution",
      "gapmap.omega_min",        "gapmap.omega_max",         "gapmap.n_samples",
      "bifurcate.omega_list",
      "output.directory",        "output.formats",
  };
  return keys;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, sep)) out.push_back(trim(item));
  return out;
}

inline double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (trim(v.substr(pos)).empty()) return d;
  } catch (const std::exception&) {
  }
  fail(ErrorCode::ValidationError, "key '" + key + "': expected a number, got '" + v + "'");
}

inline long long parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long long d = std::stoll(v, &pos);
    if (trim(v.substr(pos)).empty()) return d;
  } catch (const std::exception&) {
  }
  fail(ErrorCode::ValidationError, "key '" + key + "': expected an integer, got '" + v + "'");
}

}  // namespace detail

/// Parses "c; a:m[,m2]; ..." into a cosine series.
inline CellFunction parse_cell_function(const std::string& key, const std::string& text) {
  const auto parts = detail::split(text, ';');
  if (parts.empty() || parts[0].empty())
    fail(ErrorCode::ValidationError, "key '" + key + "': empty coefficient function");
  const double c = detail::parse_double(key, parts[0]);
  std::vector<CosineTerm> terms;
  for (std::size_t i = 1; i < parts.size(); ++i) {
    const auto colon = parts[i].find(':');
    if (colon == std::string::npos)
      fail(ErrorCode::ValidationError, "key '" + key + "': cosine term '" + parts[i] + "' must be amplitude:mode");
    CosineTerm t;
    t.amplitude = detail::parse_double(key, parts[i].substr(0, colon));
    const auto modes = detail::split(parts[i].substr(colon + 1), ',');
    if (modes.empty() || modes.size() > 2)
      fail(ErrorCode::ValidationError, "key '" + key + "': mode must have 1 or 2 components");
    for (std::size_t a = 0; a < modes.size(); ++a)
      t.mode[a] = static_cast<int>(detail::parse_int(key, modes[a]));
    terms.push_back(t);
  }
  return CellFunction::cosine_series(c, std::move(terms));
}

/// FNV-1a 64 over the canonical "key=value\n" listing.
inline std::uint64_t config_hash(const RunConfig& cfg) {
  std::uint64_t h = 1469598103934665603ull;
  for (const auto& [k, v] : cfg.entries)
    for (char ch : k + "=" + v + "\n") {
      h ^= static_cast<unsigned char>(ch);
      h *= 1099511628211ull;
    }
  return h;
}

inline std::string config_hash_hex(const RunConfig& cfg) {
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << config_hash(cfg);
  return os.str();
}

/// Applies the flattened entries to a RunConfig; shared by file parsing and tests.
inline RunConfig build_config(const std::map<std::string, std::string>& entries,
                              const std::filesystem::path& base_dir = ".") {
  using detail::parse_double;
  using detail::parse_int;
  RunConfig cfg;
  cfg.entries = entries;
  for (const auto& [key, value] : entries)
    if (!detail::known_keys().count(key)) fail(ErrorCode::ParseError, "unknown key '" + key + "'");

  auto get = [&](const std::string& key) -> std::optional<std::string> {
    auto it = entries.find(key);
    if (it == entries.end()) return std::nullopt;
    return it->second;
  };
  auto has_section = [&](const std::string& s) {
    for (const auto& [key, v] : entries)
      if (key.rfind(s + ".", 0) == 0) return true;
    return false;
  };

  if (auto v = get("problem.dimension")) cfg.dim = static_cast<int>(parse_int("problem.dimension", *v));
  if (cfg.dim != 1 && cfg.dim != 2) fail(ErrorCode::ValidationError, "key 'problem.dimension' must be 1 or 2");
  if (auto v = get("problem.sign")) {
    if (*v == "plus" || *v == "+")
      cfg.sign = Sign::plus;
    else if (*v == "minus" || *v == "-")
      cfg.sign = Sign::minus;
    else
      fail(ErrorCode::ValidationError, "key 'problem.sign' must be plus or minus");
  }

  const bool has_potential = has_section("potential");
  const bool has_medium = has_section("medium");
  if (has_potential == has_medium)
    fail(ErrorCode::ValidationError, "exactly one of [potential] and [medium] must be given");

  if (has_potential) {
    const auto V = get("potential.V");
    const auto file = get("potential.file");
    if (V.has_value() == file.has_value())
      fail(ErrorCode::ValidationError, "[potential] needs exactly one of 'potential.V' and 'potential.file'");
    if (V) {
      cfg.potential = parse_cell_function("potential.V", *V);
    } else {
      std::filesystem::path p = *file;
      if (p.is_relative()) p = base_dir / p;
      if (!std::filesystem::exists(p))
        fail(ErrorCode::ValidationError, "key 'potential.file': " + p.string() + " does not exist");
      const PeriodicField cell = read_field_dump(p);
      if (cell.grid().dim != cfg.dim)
        fail(ErrorCode::ValidationError, "key 'potential.file': dimension differs from problem.dimension");
      cfg.potential = CellFunction::tabulated(cell);
    }
    if (auto v = get("potential.center_gap")) {
      cfg.center_gap = static_cast<int>(parse_int("potential.center_gap", *v));
      if (*cfg.center_gap < 1) fail(ErrorCode::ValidationError, "key 'potential.center_gap' must be >= 1");
    }
  } else {
    PhotonicMedium m;
    m.dim = cfg.dim;
    if (auto v = get("medium.epsilon")) m.epsilon = parse_cell_function("medium.epsilon", *v);
    if (auto v = get("medium.chi")) m.chi = parse_cell_function("medium.chi", *v);
    if (auto v = get("medium.omega")) m.omega = parse_double("medium.omega", *v);
    if (auto v = get("medium.beta")) m.beta = parse_double("medium.beta", *v);
    if (has_section("nonlinearity"))
      fail(ErrorCode::ValidationError, "[nonlinearity] is derived from chi when [medium] is given");
    if (cfg.sign) fail(ErrorCode::ValidationError, "key 'problem.sign' is derived from chi when [medium] is given");
    cfg.medium = m;
  }

  {
    const std::string kind = get("nonlinearity.kind").value_or("kerr");
    const CellFunction h = get("nonlinearity.h") ? parse_cell_function("nonlinearity.h", *get("nonlinearity.h"))
                                                 : CellFunction::constant(1.0);
    if (kind == "kerr") {
      if (get("nonlinearity.p") && parse_double("nonlinearity.p", *get("nonlinearity.p")) != 4.0)
        fail(ErrorCode::ValidationError, "key 'nonlinearity.p' must be 4 for kind kerr");
      cfg.nonlinearity = NonlinearitySpec::kerr(h);
    } else if (kind == "power") {
      const auto p = get("nonlinearity.p");
      if (!p) fail(ErrorCode::ValidationError, "key 'nonlinearity.p' is required for kind power");
      cfg.nonlinearity = NonlinearitySpec::power(h, parse_double("nonlinearity.p", *p));
    } else {
      fail(ErrorCode::ValidationError, "key 'nonlinearity.kind' must be kerr or power");
    }
    if (auto v = get("nonlinearity.q")) cfg.nonlinearity.q = parse_double("nonlinearity.q", *v);
    if (auto v = get("nonlinearity.theta")) cfg.nonlinearity.theta = parse_double("nonlinearity.theta", *v);
    if (auto v = get("nonlinearity.gamma")) cfg.nonlinearity.gamma = parse_double("nonlinearity.gamma", *v);
  }

  if (auto v = get("grid.k")) cfg.k = static_cast<int>(parse_int("grid.k", *v));
  if (auto v = get("grid.n")) cfg.n = static_cast<int>(parse_int("grid.n", *v));
  if (auto v = get("grid.k_list"))
    for (const auto& s : detail::split(*v, ',')) cfg.k_list.push_back(static_cast<int>(parse_int("grid.k_list", s)));
  try {
    make_grid(cfg.dim, cfg.k, cfg.n);
  } catch (const Error& e) {
    fail(ErrorCode::ValidationError, "[grid]: " + e.detail());
  }

  auto& s = cfg.solver;
  if (auto v = get("solver.newton_tol")) s.newton_tol = parse_double("solver.newton_tol", *v);
  if (auto v = get("solver.newton_max_iter")) s.newton_max_iter = static_cast<int>(parse_int("solver.newton_max_iter", *v));
  if (auto v = get("solver.newton_step_floor")) s.newton_step_floor = parse_double("solver.newton_step_floor", *v);
  if (auto v = get("solver.descent_tol")) s.descent_tol = parse_double("solver.descent_tol", *v);
  if (auto v = get("solver.descent_max_iter"))
    s.descent_max_iter = static_cast<int>(parse_int("solver.descent_max_iter", *v));
  if (auto v = get("solver.armijo")) s.armijo = parse_double("solver.armijo", *v);
  if (auto v = get("solver.initial_step")) s.initial_step = parse_double("solver.initial_step", *v);
  if (auto v = get("solver.restarts")) s.restarts = static_cast<int>(parse_int("solver.restarts", *v));
  if (auto v = get("solver.seed")) s.seed = static_cast<std::uint64_t>(parse_int("solver.seed", *v));
  if (auto v = get("solver.pde_relative_tol")) s.pde_relative_tol = parse_double("solver.pde_relative_tol", *v);
  if (auto v = get("solver.dense_transverse_limit"))
    s.dense_transverse_limit = static_cast<std::size_t>(parse_int("solver.dense_transverse_limit", *v));
  try {
    s.validate();
  } catch (const Error& e) {
    fail(ErrorCode::ValidationError, "[solver]: " + e.detail());
  }
  if (auto v = get("sweep.k_conv_tol")) cfg.k_conv_tol = parse_double("sweep.k_conv_tol", *v);

  if (auto v = get("bands.n_theta")) cfg.n_theta = static_cast<int>(parse_int("bands.n_theta", *v));
  if (auto v = get("bands.n_bands")) cfg.n_bands = static_cast<int>(parse_int("bands.n_bands", *v));
  if (auto v = get("bands.resolution")) cfg.bloch_resolution = static_cast<int>(parse_int("bands.resolution", *v));
  if (cfg.n_theta < 16) fail(ErrorCode::ValidationError, "key 'bands.n_theta' must be at least 16");
  if (cfg.n_bands < 4) fail(ErrorCode::ValidationError, "key 'bands.n_bands' must be at least 4");

  if (auto v = get("gapmap.omega_min")) cfg.omega_min = parse_double("gapmap.omega_min", *v);
  if (auto v = get("gapmap.omega_max")) cfg.omega_max = parse_double("gapmap.omega_max", *v);
  if (auto v = get("gapmap.n_samples")) cfg.n_samples = static_cast<int>(parse_int("gapmap.n_samples", *v));
  if (auto v = get("bifurcate.omega_list"))
    for (const auto& t : detail::split(*v, ',')) cfg.omega_list.push_back(parse_double("bifurcate.omega_list", t));

  if (auto v = get("output.directory")) cfg.output_dir = *v;
  if (auto v = get("output.formats")) {
    cfg.formats.clear();
    for (const auto& f : detail::split(*v, ',')) {
      if (f != "csv" && f != "json" && f != "field")
        fail(ErrorCode::ValidationError, "key 'output.formats': unknown format '" + f + "'");
      cfg.formats.insert(f);
    }
  }
  if (const char* env = std::getenv(kOutputDirEnv); env && *env) cfg.output_dir = env;
  return cfg;
}

inline RunConfig parse_config(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) fail(ErrorCode::IoError, "config " + path.string() + " does not exist");
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(path.string(), tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    fail(ErrorCode::ParseError, path.string() + " line " + std::to_string(e.line()) + ": " + e.message());
  }
  std::map<std::string, std::string> entries;
  for (const auto& [name, node] : tree) {
    if (node.empty()) {
      entries[name] = detail::trim(node.data());
      continue;
    }
    for (const auto& [key, leaf] : node) entries[name + "." + key] = detail::trim(leaf.data());
  }
  RunConfig cfg = build_config(entries, path.parent_path());
  cfg.source = path;
  return cfg;
}

}  // namespace gapsol
