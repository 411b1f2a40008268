#pragma once

// Uniform cell-centered 1D grids and cell-averaged scalar fields.

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace nltaxis {

/// Raised for invalid user-supplied parameters (grid sizes, coefficients,
/// configuration files).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when two objects that must share a grid do not.
class GridMismatch : public std::logic_error {
 public:
  GridMismatch() : std::logic_error("fields live on different grids") {}
};

/// Uniform cell-centered mesh over [0, L] with N cells of width h = L/N.
class Grid1D {
 public:
  static constexpr std::size_t kMinCells = 4;

  Grid1D(double length, std::size_t cells) : length_(length), cells_(cells) {
    if (!(length > 0.0) || !std::isfinite(length))
      throw ConfigError("grid length must be positive, got " + std::to_string(length));
    if (cells < kMinCells)
      throw ConfigError("grid needs at least 4 cells, got " + std::to_string(cells));
    spacing_ = length_ / static_cast<double>(cells_);
  }

  double length() const { return length_; }
  std::size_t size() const { return cells_; }
  double spacing() const { return spacing_; }

  double center(std::size_t i) const { return (static_cast<double>(i) + 0.5) * spacing_; }
  /// Left face of cell i; face(N) is the right boundary.
  double face(std::size_t i) const { return static_cast<double>(i) * spacing_; }

  std::vector<double> centers() const {
    std::vector<double> x(cells_);
    for (std::size_t i = 0; i < cells_; ++i) x[i] = center(i);
    return x;
  }

  /// Index of the cell containing x in [0, L]. A point on an interior face
  /// belongs to the cell on its left; x = 0 belongs to cell 0.
  std::size_t locate(double x) const {
    if (x <= spacing_) return 0;
    auto j = static_cast<std::size_t>(std::ceil(x / spacing_)) - 1;
    return j >= cells_ ? cells_ - 1 : j;
  }

  friend bool operator==(const Grid1D& a, const Grid1D& b) {
    return a.length_ == b.length_ && a.cells_ == b.cells_;
  }

 private:
  double length_;
  std::size_t cells_;
  double spacing_ = 0.0;
};

inline Grid1D make_grid(double length, std::size_t cells) { return Grid1D(length, cells); }

/// Cell averages on a grid. Outside [0, L] the field is zero.
class ScalarField {
 public:
  explicit ScalarField(Grid1D grid, double fill = 0.0)
      : grid_(std::move(grid)), values_(grid_.size(), fill) {}

  ScalarField(Grid1D grid, std::vector<double> values)
      : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.size() != grid_.size())
      throw ConfigError("field has " + std::to_string(values_.size()) + " values for " +
                        std::to_string(grid_.size()) + " cells");
  }

  template <class F>
  static ScalarField from_function(const Grid1D& grid, F&& f) {
    ScalarField out(grid);
    for (std::size_t i = 0; i < grid.size(); ++i) out.values_[i] = f(grid.center(i));
    return out;
  }

  const Grid1D& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }

  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  bool all_finite() const {
    for (double v : values_)
      if (!std::isfinite(v)) return false;
    return true;
  }

 private:
  Grid1D grid_;
  std::vector<double> values_;
};

inline void require_same_grid(const ScalarField& a, const ScalarField& b) {
  if (!(a.grid() == b.grid())) throw GridMismatch();
}

/// Piecewise-constant evaluation with extension by zero.
inline double eval_extended(const ScalarField& f, double x) {
  const Grid1D& g = f.grid();
  if (x < 0.0 || x > g.length()) return 0.0;
  return f[g.locate(x)];
}

/// Cells whose full sensing window of radius r lies inside the domain.
struct InteriorMask {
  Grid1D grid;
  double radius;
  std::vector<bool> flags;

  std::size_t count() const {
    std::size_t n = 0;
    for (bool b : flags) n += b ? 1 : 0;
    return n;
  }
};

inline InteriorMask interior_mask(const Grid1D& grid, double r) {
  if (r < 0.0) throw ConfigError("mask radius must be nonnegative");
  InteriorMask m{grid, r, std::vector<bool>(grid.size(), false)};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double x = grid.center(i);
    m.flags[i] = (r < x) && (x < grid.length() - r);
  }
  return m;
}

/// Midpoint rule h * sum(values); exact for cell averages.
inline double integrate(const ScalarField& f) {
  double s = 0.0;
  for (double v : f.values()) s += v;
  return s * f.grid().spacing();
}

}  // namespace nltaxis
