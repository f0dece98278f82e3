#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rotwave {

/// Truncated tensor-product box [-L_j, L_j) with n_j uniform points per axis.
/// Point counts must be powers of two (>= 8) so transforms stay simple.
struct GridSpec {
  int dim = 2;
  std::vector<double> half_widths;  // L_j
  std::vector<int> points;          // n_j

  void validate() const {
    if (dim < 2 || dim > 3)
      throw std::invalid_argument("GridSpec: dim must be 2 or 3, got " + std::to_string(dim));
    if (static_cast<int>(half_widths.size()) != dim || static_cast<int>(points.size()) != dim)
      throw std::invalid_argument("GridSpec: half_widths/points must have dim entries");
    for (int j = 0; j < dim; ++j) {
      if (!(half_widths[j] > 0.0))
        throw std::invalid_argument("GridSpec: half_widths[" + std::to_string(j) + "] must be > 0");
      const int n = points[j];
      if (n < 8 || (n & (n - 1)) != 0)
        throw std::invalid_argument("GridSpec: points[" + std::to_string(j) +
                                    "] must be a power of two >= 8, got " + std::to_string(n));
    }
  }
};

/// Physical coordinates, Fourier multipliers and quadrature weight for a GridSpec.
///
/// Coordinates: x_j[k] = -L_j + k h_j with h_j = 2 L_j / n_j.
/// Wavenumbers follow the standard DFT ordering (0..n/2-1, -n/2..-1), so the
/// Nyquist mode sits at index n/2 with xi = -pi n_j / (2 L_j) ... i.e. -pi/h.
class Grid {
 public:
  explicit Grid(GridSpec spec) : spec_(std::move(spec)) {
    spec_.validate();
    const int d = spec_.dim;
    coords_.resize(d);
    wavenumbers_.resize(d);
    strides_.assign(d, 1);
    size_ = 1;
    cell_volume_ = 1.0;
    for (int j = 0; j < d; ++j) {
      const int n = spec_.points[j];
      const double L = spec_.half_widths[j];
      const double h = 2.0 * L / n;
      coords_[j].resize(n);
      wavenumbers_[j].resize(n);
      for (int k = 0; k < n; ++k) {
        coords_[j][k] = -L + k * h;
        const int m = (k < n / 2) ? k : k - n;
        wavenumbers_[j][k] = std::numbers::pi / L * m;
      }
      size_ *= static_cast<std::size_t>(n);
      cell_volume_ *= h;
    }
    for (int j = d - 2; j >= 0; --j)
      strides_[j] = strides_[j + 1] * static_cast<std::size_t>(spec_.points[j + 1]);
  }

  const GridSpec& spec() const { return spec_; }
  int dim() const { return spec_.dim; }
  std::size_t size() const { return size_; }
  int points(int axis) const { return spec_.points[axis]; }
  double half_width(int axis) const { return spec_.half_widths[axis]; }
  double spacing(int axis) const { return 2.0 * spec_.half_widths[axis] / spec_.points[axis]; }
  double cell_volume() const { return cell_volume_; }
  std::size_t stride(int axis) const { return strides_[axis]; }

  std::span<const double> coords(int axis) const { return coords_[axis]; }
  std::span<const double> wavenumbers(int axis) const { return wavenumbers_[axis]; }

  /// Index along `axis` of the flattened (row-major) linear index.
  int axis_index(std::size_t linear, int axis) const {
    return static_cast<int>((linear / strides_[axis]) % static_cast<std::size_t>(spec_.points[axis]));
  }

  bool compatible_with(const Grid& other) const {
    if (dim() != other.dim()) return false;
    for (int j = 0; j < dim(); ++j)
      if (points(j) != other.points(j) || half_width(j) != other.half_width(j)) return false;
    return true;
  }

 private:
  GridSpec spec_;
  std::vector<std::vector<double>> coords_;
  std::vector<std::vector<double>> wavenumbers_;
  std::vector<std::size_t> strides_;
  std::size_t size_ = 0;
  double cell_volume_ = 0.0;
};

inline std::shared_ptr<const Grid> build_grid(GridSpec spec) {
  return std::make_shared<const Grid>(std::move(spec));
}

}  // namespace rotwave
