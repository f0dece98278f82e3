#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "rotwave/fft.hpp"
#include "rotwave/field.hpp"

namespace rotwave {

/// Spectral derivative along one axis; exact for band-limited fields.
inline ComplexField fourier_derivative(const ComplexField& f, int axis) {
  const Grid& g = f.grid();
  if (axis < 0 || axis >= g.dim()) throw std::invalid_argument("fourier_derivative: bad axis");
  ComplexField out = f;
  const int axes[1] = {axis};
  fft::forward(out, axes);
  const auto xi = g.wavenumbers(axis);
  const double scale = fft::inverse_scale(g, axes);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double k = xi[g.axis_index(i, axis)];
    out[i] *= cplx{0.0, k * scale};
  }
  fft::transform(out, axes, FFTW_BACKWARD);
  return out;
}

/// Pointwise multiply by the physical coordinate of one axis.
inline ComplexField coordinate_multiply(const ComplexField& f, int axis) {
  const Grid& g = f.grid();
  ComplexField out = f;
  const auto x = g.coords(axis);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= x[g.axis_index(i, axis)];
  return out;
}

/// Components of (grad - iA) f with A = gamma (-x2, x1, 0, ..., 0).
/// Components j >= 2 are plain spectral derivatives.
inline std::vector<ComplexField> magnetic_gradient(const ComplexField& f, double gamma) {
  const Grid& g = f.grid();
  if (g.dim() < 2) throw std::invalid_argument("magnetic_gradient: dim >= 2 required");
  std::vector<ComplexField> out;
  out.reserve(g.dim());
  for (int j = 0; j < g.dim(); ++j) out.push_back(fourier_derivative(f, j));
  if (gamma != 0.0) {
    const auto x1 = g.coords(0);
    const auto x2 = g.coords(1);
    for (std::size_t i = 0; i < f.size(); ++i) {
      // A1 = -gamma x2, A2 = gamma x1; D_j = d_j - i A_j
      out[0][i] += cplx{0.0, gamma * x2[g.axis_index(i, 1)]} * f[i];
      out[1][i] -= cplx{0.0, gamma * x1[g.axis_index(i, 0)]} * f[i];
    }
  }
  return out;
}

/// L_z f = i (x2 d1 f - x1 d2 f); derivatives spectral, coordinates pointwise.
inline ComplexField apply_angular_operator(const ComplexField& f) {
  const Grid& g = f.grid();
  if (g.dim() < 2) throw std::invalid_argument("apply_angular_operator: dim >= 2 required");
  ComplexField d1 = fourier_derivative(f, 0);
  const ComplexField d2 = fourier_derivative(f, 1);
  const auto x1 = g.coords(0);
  const auto x2 = g.coords(1);
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double a = x2[g.axis_index(i, 1)];
    const double b = x1[g.axis_index(i, 0)];
    d1[i] = cplx{0.0, 1.0} * (a * d1[i] - b * d2[i]);
  }
  return d1;
}

/// u(x + y) via Fourier phase shift (exact for band-limited fields).
inline ComplexField translate(const ComplexField& f, std::span<const double> shift) {
  const Grid& g = f.grid();
  ComplexField out = f;
  std::vector<int> axes;
  for (int j = 0; j < g.dim() && j < static_cast<int>(shift.size()); ++j)
    if (shift[j] != 0.0) axes.push_back(j);
  if (axes.empty()) return out;
  fft::forward(out, axes);
  const double scale = fft::inverse_scale(g, axes);
  for (std::size_t i = 0; i < out.size(); ++i) {
    double phase = 0.0;
    for (int a : axes) phase += g.wavenumbers(a)[g.axis_index(i, a)] * shift[a];
    out[i] *= std::polar(scale, phase);
  }
  fft::transform(out, axes, FFTW_BACKWARD);
  return out;
}

/// Magnetic translation e^{-i A(y).x} u(x + y) for planar y = (y1, y2).
/// This twist makes the translation an isometry of ||(grad - iA) . ||.
inline ComplexField gauged_translate(const ComplexField& f, double y1, double y2, double gamma) {
  const Grid& g = f.grid();
  const std::array<double, 3> y{y1, y2, 0.0};
  ComplexField out = translate(f, std::span<const double>(y.data(), g.dim()));
  const auto x1 = g.coords(0);
  const auto x2 = g.coords(1);
  for (std::size_t i = 0; i < out.size(); ++i) {
    // -A(y).x = gamma (y2 x1 - y1 x2)
    const double phase =
        gamma * (y2 * x1[g.axis_index(i, 0)] - y1 * x2[g.axis_index(i, 1)]);
    out[i] *= std::polar(1.0, phase);
  }
  return out;
}

/// Density centroid along the first two axes.
inline std::array<double, 2> density_centroid(const ComplexField& f) {
  const Grid& g = f.grid();
  KahanSum m, mx1, mx2;
  const auto x1 = g.coords(0);
  const auto x2 = g.coords(1);
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double d = std::norm(f[i]);
    m.add(d);
    mx1.add(d * x1[g.axis_index(i, 0)]);
    mx2.add(d * x2[g.axis_index(i, 1)]);
  }
  const double total = m.value();
  if (total <= 0.0) return {0.0, 0.0};
  return {mx1.value() / total, mx2.value() / total};
}

/// 2/3-rule dealiasing: zero all modes with |m| > n/3 on any axis. Off the
/// default paths (smooth decaying states keep aliasing below quadrature
/// error); available for stress tests of the nonlinear term.
inline void dealias_two_thirds(ComplexField& f) {
  const Grid& g = f.grid();
  fft::forward(f);
  const double scale = fft::inverse_scale(g, fft::all_axes(g));
  for (std::size_t i = 0; i < f.size(); ++i) {
    bool keep = true;
    for (int j = 0; j < g.dim(); ++j) {
      const int n = g.points(j);
      const int k = g.axis_index(i, j);
      const int m = (k < n / 2) ? k : k - n;
      if (std::abs(m) > n / 3) keep = false;
    }
    f[i] *= keep ? scale : 0.0;
  }
  fft::transform(f, fft::all_axes(g), FFTW_BACKWARD);
}

/// Mass sitting in the outer 10% shell of the box (per axis). Emitted as a
/// boundary-contamination diagnostic with every result.
inline double boundary_mass(const ComplexField& f) {
  const Grid& g = f.grid();
  KahanSum acc;
  for (std::size_t i = 0; i < f.size(); ++i) {
    bool outer = false;
    for (int j = 0; j < g.dim(); ++j) {
      const double x = g.coords(j)[g.axis_index(i, j)];
      if (std::abs(x) >= 0.9 * g.half_width(j)) {
        outer = true;
        break;
      }
    }
    if (outer) acc.add(std::norm(f[i]));
  }
  return acc.value() * g.cell_volume();
}

}  // namespace rotwave
