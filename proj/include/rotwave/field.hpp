#pragma once

#include <cmath>
#include <complex>
#include <span>
#include <stdexcept>
#include <vector>

#include "rotwave/grid.hpp"

namespace rotwave {

using cplx = std::complex<double>;

/// Compensated (Kahan) accumulator; reductions use it in a fixed sequential
/// order so results are bit-reproducible run to run.
struct KahanSum {
  double sum = 0.0;
  double comp = 0.0;
  void add(double x) {
    const double y = x - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  double value() const { return sum; }
};

/// Discretized complex wave function on a Grid. Value-semantic; safe to share
/// read-only across threads.
class ComplexField {
 public:
  ComplexField() = default;
  explicit ComplexField(std::shared_ptr<const Grid> grid, cplx fill = cplx{0.0, 0.0})
      : grid_(std::move(grid)), values_(grid_->size(), fill) {}

  const Grid& grid() const { return *grid_; }
  const std::shared_ptr<const Grid>& grid_ptr() const { return grid_; }
  std::size_t size() const { return values_.size(); }

  std::span<cplx> values() { return values_; }
  std::span<const cplx> values() const { return values_; }
  cplx& operator[](std::size_t i) { return values_[i]; }
  const cplx& operator[](std::size_t i) const { return values_[i]; }

  cplx* data() { return values_.data(); }
  const cplx* data() const { return values_.data(); }

  bool all_finite() const {
    for (const cplx& z : values_)
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
    return true;
  }

  ComplexField& operator*=(double s) {
    for (cplx& z : values_) z *= s;
    return *this;
  }
  ComplexField& operator*=(cplx s) {
    for (cplx& z : values_) z *= s;
    return *this;
  }
  ComplexField& operator+=(const ComplexField& other) {
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
    return *this;
  }
  ComplexField& operator-=(const ComplexField& other) {
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
    return *this;
  }

 private:
  std::shared_ptr<const Grid> grid_;
  std::vector<cplx> values_;
};

inline void require_same_grid(const ComplexField& a, const ComplexField& b) {
  if (!a.grid().compatible_with(b.grid()))
    throw std::invalid_argument("fields live on incompatible grids");
}

inline void require_finite(const ComplexField& f, const char* what) {
  if (!f.all_finite())
    throw std::runtime_error(std::string(what) + ": field contains non-finite values");
}

/// Rectangle-rule quadrature: sum(density) * cell volume. Spectrally accurate
/// for smooth fields that decay below rounding at the box boundary.
inline double integrate(const Grid& grid, std::span<const double> density) {
  if (density.size() != grid.size())
    throw std::invalid_argument("integrate: density length does not match grid");
  KahanSum acc;
  for (double v : density) acc.add(v);
  return acc.value() * grid.cell_volume();
}

inline double integrate_abs2(const ComplexField& f) {
  KahanSum acc;
  for (const cplx& z : f.values()) acc.add(std::norm(z));
  return acc.value() * f.grid().cell_volume();
}

inline double mass(const ComplexField& f) { return integrate_abs2(f); }

inline double l2_norm(const ComplexField& f) { return std::sqrt(integrate_abs2(f)); }

/// <f, g> = integral f conj(g) dx.
inline cplx inner(const ComplexField& f, const ComplexField& g) {
  require_same_grid(f, g);
  KahanSum re, im;
  const auto fv = f.values();
  const auto gv = g.values();
  for (std::size_t i = 0; i < fv.size(); ++i) {
    const cplx z = fv[i] * std::conj(gv[i]);
    re.add(z.real());
    im.add(z.imag());
  }
  const double w = f.grid().cell_volume();
  return {re.value() * w, im.value() * w};
}

/// |a|^q with fast paths for the small integer exponents of the common models.
inline double abs_pow(double a, double q) {
  if (q == 2.0) return a * a;
  if (q == 3.0) return a * a * a;
  if (q == 4.0) {
    const double s = a * a;
    return s * s;
  }
  if (q == 1.0) return a;
  return std::pow(a, q);
}

/// integral |f|^q dx.
inline double lp_integral(const ComplexField& f, double q) {
  KahanSum acc;
  for (const cplx& z : f.values()) acc.add(abs_pow(std::abs(z), q));
  return acc.value() * f.grid().cell_volume();
}

inline std::vector<double> density(const ComplexField& f) {
  std::vector<double> d(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) d[i] = std::norm(f[i]);
  return d;
}

/// Rescales f so that mass(f) = c exactly (up to rounding).
inline void normalize_mass(ComplexField& f, double c) {
  const double m = mass(f);
  if (!(m > 0.0)) throw std::runtime_error("normalize_mass: zero field");
  f *= std::sqrt(c / m);
}

/// y += a x
inline void axpy(cplx a, const ComplexField& x, ComplexField& y) {
  require_same_grid(x, y);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

}  // namespace rotwave
