// Field dumps: flat little-endian float64 values (row-major) plus a JSON
// sidecar {dim, k, n, ...}. Round trips are bit-exact.
#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "gapsol/grid.hpp"

namespace gapsol {

inline std::filesystem::path sidecar_path(const std::filesystem::path& bin) {
  auto p = bin;
  p.replace_extension(".json");
  return p;
}

namespace detail {
inline std::uint64_t to_little_endian(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    std::uint64_t r = 0;
    for (int i = 0; i < 8; ++i) r |= ((v >> (8 * i)) & 0xffu) << (8 * (7 - i));
    return r;
  }
  return v;
}
}  // namespace detail

/// Writes `<bin>` and its sidecar; `extra` keys are merged into the sidecar.
inline void write_field_dump(const std::filesystem::path& bin, const PeriodicField& u,
                             const nlohmann::json& extra = nlohmann::json::object()) {
  std::ofstream out(bin, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::IoError, "cannot open " + bin.string() + " for writing");
  for (std::size_t i = 0; i < u.size(); ++i) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(u[i]);
    bits = detail::to_little_endian(bits);
    out.write(reinterpret_cast<const char*>(&bits), sizeof bits);
  }
  if (!out) fail(ErrorCode::IoError, "write failed for " + bin.string());

  nlohmann::json meta = extra.is_object() ? extra : nlohmann::json::object();
  meta["dim"] = u.grid().dim;
  meta["k"] = u.grid().k;
  meta["n"] = u.grid().n;
  std::ofstream side(sidecar_path(bin), std::ios::trunc);
  if (!side) fail(ErrorCode::IoError, "cannot write sidecar for " + bin.string());
  side << meta.dump(2) << "\n";
}

inline PeriodicField read_field_dump(const std::filesystem::path& bin) {
  const auto side_path = sidecar_path(bin);
  std::ifstream side(side_path);
  if (!side) fail(ErrorCode::IoError, "missing sidecar " + side_path.string());
  nlohmann::json meta;
  try {
    side >> meta;
  } catch (const std::exception& e) {
    fail(ErrorCode::IoError, "malformed sidecar " + side_path.string() + ": " + e.what());
  }
  GridSpec g;
  try {
    g = make_grid(meta.at("dim").get<int>(), meta.at("k").get<int>(), meta.at("n").get<int>());
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    fail(ErrorCode::IoError, "sidecar lacks dim/k/n: " + std::string(e.what()));
  }

  std::ifstream in(bin, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open " + bin.string());
  in.seekg(0, std::ios::end);
  const auto bytes = static_cast<std::uintmax_t>(in.tellg());
  in.seekg(0);
  if (bytes != g.size() * sizeof(double))
    fail(ErrorCode::IoError, "field dump " + bin.string() + " has " + std::to_string(bytes) +
                                 " bytes, expected " + std::to_string(g.size() * sizeof(double)) +
                                 " (truncated or wrong grid)");
  Eigen::VectorXd v(static_cast<Eigen::Index>(g.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    std::uint64_t bits = 0;
    in.read(reinterpret_cast<char*>(&bits), sizeof bits);
    v[i] = std::bit_cast<double>(detail::to_little_endian(bits));
  }
  if (!in) fail(ErrorCode::IoError, "read failed for " + bin.string());
  return PeriodicField(g, std::move(v));
}

}  // namespace gapsol
