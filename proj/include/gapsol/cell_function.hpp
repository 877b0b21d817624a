// 1-periodic coefficient functions (potential V, weight h, permittivity,
// Kerr coefficient): a constant plus cosine terms, or a tabulated unit cell.
#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "gapsol/grid.hpp"

namespace gapsol {

/// amplitude * cos(2*pi*(mode . x))
struct CosineTerm {
  double amplitude = 0.0;
  std::array<int, 2> mode{0, 0};
};

class CellFunction {
 public:
  CellFunction() = default;

  static CellFunction constant(double c) {
    CellFunction f;
    f.constant_ = c;
    return f;
  }

  static CellFunction cosine_series(double c, std::vector<CosineTerm> terms) {
    CellFunction f;
    f.constant_ = c;
    f.terms_ = std::move(terms);
    return f;
  }

  /// Unit-cell samples at x = j/n; `cell` must live on a k = 1 grid.
  static CellFunction tabulated(const PeriodicField& cell) {
    if (cell.grid().k != 1) fail(ErrorCode::GridMismatch, "tabulated cell data needs k = 1");
    CellFunction f;
    f.table_ = cell;
    return f;
  }

  bool is_tabulated() const { return table_.has_value(); }
  bool is_constant() const { return !table_ && terms_.empty(); }
  double constant_term() const { return constant_; }
  const std::vector<CosineTerm>& terms() const { return terms_; }
  const std::optional<PeriodicField>& table() const { return table_; }

  /// Resolution forced by tabulated data, if any.
  std::optional<int> table_resolution() const {
    if (table_) return table_->grid().n;
    return std::nullopt;
  }

  /// Samples at x = j/n on the unit cell (n^dim values, row-major).
  Eigen::VectorXd cell_samples(int dim, int n) const {
    if (table_) {
      if (table_->grid().dim != dim || table_->grid().n != n)
        fail(ErrorCode::GridMismatch, "tabulated cell data has resolution n=" +
                                          std::to_string(table_->grid().n) + ", requested n=" +
                                          std::to_string(n));
      return table_->values() * scale_ + Eigen::VectorXd::Constant(table_->values().size(), constant_);
    }
    const GridSpec cell{dim, 1, n};
    Eigen::VectorXd v(static_cast<Eigen::Index>(cell.size()));
    for (std::size_t i = 0; i < cell.size(); ++i) {
      auto x = node_position(cell, i);
      double s = constant_;
      for (const auto& t : terms_)
        s += t.amplitude * std::cos(2.0 * M_PI * (t.mode[0] * x[0] + (dim == 2 ? t.mode[1] * x[1] : 0.0)));
      v[static_cast<Eigen::Index>(i)] = s;
    }
    return v;
  }

  /// Tiles the unit-cell samples over a grid.
  Eigen::VectorXd sample(const GridSpec& g) const {
    const Eigen::VectorXd cell = cell_samples(g.dim, g.n);
    Eigen::VectorXd out(static_cast<Eigen::Index>(g.size()));
    for (std::size_t i = 0; i < g.size(); ++i) {
      auto j = node_multi_index(g, i);
      std::size_t c = static_cast<std::size_t>(j[0] % g.n);
      if (g.dim == 2) c = c * g.n + static_cast<std::size_t>(j[1] % g.n);
      out[static_cast<Eigen::Index>(i)] = cell[static_cast<Eigen::Index>(c)];
    }
    return out;
  }

  PeriodicField sample_field(const GridSpec& g) const { return PeriodicField(g, sample(g)); }

  /// a*f + c
  CellFunction affine(double a, double c) const {
    CellFunction f = *this;
    f.constant_ = a * constant_ + c;
    f.scale_ = a * scale_;
    for (auto& t : f.terms_) t.amplitude *= a;
    return f;
  }

  /// Extreme sampled values; closed forms are probed at `probe_n` points per axis.
  std::pair<double, double> sampled_range(int dim, int probe_n = 64) const {
    Eigen::VectorXd v = table_ ? cell_samples(dim, table_->grid().n) : cell_samples(dim, probe_n);
    return {v.minCoeff(), v.maxCoeff()};
  }

  double sup_norm(int dim) const {
    auto [lo, hi] = sampled_range(dim);
    return std::max(std::abs(lo), std::abs(hi));
  }

  std::string describe() const {
    std::ostringstream os;
    os.precision(17);
    os << constant_;
    for (const auto& t : terms_) os << " + " << t.amplitude << "*cos(" << t.mode[0] << "," << t.mode[1] << ")";
    if (table_) os << " + " << scale_ << "*table(n=" << table_->grid().n << ")";
    return os.str();
  }

 private:
  double constant_ = 0.0;
  double scale_ = 1.0;  // multiplies table values
  std::vector<CosineTerm> terms_;
  std::optional<PeriodicField> table_;
};

/// The 1-periodic potential V.
using PotentialSpec = CellFunction;

}  // namespace gapsol
