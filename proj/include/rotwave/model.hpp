#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "rotwave/grid.hpp"

namespace rotwave {

/// Model parameters: dimension, nonlinearity exponent p, rotation speed Omega,
/// per-axis trap frequencies gamma_j, interaction switch.
///
/// gamma is stored per axis so anisotropic planar traps (gamma1 != gamma2,
/// Omega < min gamma) remain expressible for the dynamics; everything built on
/// the magnetic reformulation requires gamma1 == gamma2 and asks for it via
/// gamma_perp().
struct ModelParams {
  int dim = 2;
  double p = 2.0;
  double omega = 1.0;
  std::vector<double> gamma = {1.0, 1.0};
  bool interaction_on = true;

  void validate() const {
    if (dim < 2 || dim > 3) throw std::invalid_argument("model.dim: must be 2 or 3");
    if (static_cast<int>(gamma.size()) != dim)
      throw std::invalid_argument("model.gamma: must have dim entries");
    for (double gj : gamma)
      if (!(gj > 0.0)) throw std::invalid_argument("model.gamma: entries must be > 0");
    if (!(p > 1.0)) throw std::invalid_argument("model.p: must be > 1");
    if (dim >= 3 && !(p < 1.0 + 4.0 / (dim - 2)))
      throw std::invalid_argument("model.p: must be < 1 + 4/(N-2) for N >= 3");
    if (omega < 0.0) throw std::invalid_argument("model.omega: must be >= 0");
    if (omega > std::min(gamma[0], gamma[1]) + 1e-12)
      throw std::invalid_argument("model.omega: must be <= min(gamma1, gamma2)");
  }

  bool axisymmetric() const { return gamma[0] == gamma[1]; }

  double gamma_perp() const {
    if (!axisymmetric())
      throw std::invalid_argument("gamma_perp: requires gamma1 == gamma2");
    return gamma[0];
  }

  /// Critical rotation: Omega = gamma1 = gamma2.
  bool critical_rotation() const {
    return axisymmetric() && std::abs(omega - gamma[0]) <= 1e-12 * gamma[0];
  }

  void require_critical_rotation(const char* what) const {
    if (!critical_rotation())
      throw std::invalid_argument(std::string(what) + ": requires the critical-rotation mode Omega = gamma1 = gamma2");
  }

  /// omega^0 = (1/2) sum_j gamma_j, the harmonic-oscillator ground eigenvalue.
  double omega0() const {
    double s = 0.0;
    for (double gj : gamma) s += gj;
    return 0.5 * s;
  }

  /// Full trap V(x) at a point.
  double potential(std::span<const double> x) const {
    double v = 0.0;
    for (int j = 0; j < dim; ++j) v += gamma[j] * gamma[j] * x[j] * x[j];
    return 0.5 * v;
  }

  /// Partial confinement V_gamma(x) = (1/2) sum_{j>=3} gamma_j^2 x_j^2.
  double potential_partial(std::span<const double> x) const {
    double v = 0.0;
    for (int j = 2; j < dim; ++j) v += gamma[j] * gamma[j] * x[j] * x[j];
    return 0.5 * v;
  }

  double mass_critical_p() const { return 1.0 + 4.0 / dim; }
  bool mass_subcritical() const { return p < mass_critical_p() - 1e-12; }
  bool mass_critical() const { return std::abs(p - mass_critical_p()) <= 1e-12; }
  bool mass_supercritical() const { return p > mass_critical_p() + 1e-12; }
};

/// Default box: L_j = 8 max_j gamma_j^{-1/2} on every axis. Confined states of
/// width gamma^{-1/2} then decay far below rounding at the boundary.
inline GridSpec default_grid_spec(const ModelParams& params, int points_per_axis) {
  double width = 0.0;
  for (double gj : params.gamma) width = std::max(width, 1.0 / std::sqrt(gj));
  GridSpec spec;
  spec.dim = params.dim;
  spec.half_widths.assign(params.dim, 8.0 * width);
  spec.points.assign(params.dim, points_per_axis);
  return spec;
}

/// Tabulated V and V_gamma on a grid.
struct PotentialTables {
  std::vector<double> full;
  std::vector<double> partial;
};

inline PotentialTables tabulate_potentials(const Grid& g, const ModelParams& params) {
  PotentialTables t;
  t.full.resize(g.size());
  t.partial.resize(g.size());
  std::vector<double> x(g.dim());
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (int j = 0; j < g.dim(); ++j) x[j] = g.coords(j)[g.axis_index(i, j)];
    t.full[i] = params.potential(x);
    t.partial[i] = params.potential_partial(x);
  }
  return t;
}

}  // namespace rotwave
