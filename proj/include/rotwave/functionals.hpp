#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "rotwave/model.hpp"
#include "rotwave/operators.hpp"

namespace rotwave {

/// Itemized functional values of a field under a model.
///
/// Identities (up to rounding):
///   e_rot   = kinetic + potential_full - angular - interaction
///   e_mag   = magnetic_kinetic + potential_partial - interaction
///   h_gamma = 2 magnetic_kinetic + 2 potential_partial
/// and e_rot == e_mag exactly when Omega = gamma1 = gamma2.
///
/// For anisotropic planar traps the magnetic reformulation does not exist;
/// magnetic quantities are then reported with A = 0 (plain derivatives).
struct EnergyBreakdown {
  double mass = 0.0;
  double kinetic = 0.0;            // (1/2) ||grad f||^2
  double magnetic_kinetic = 0.0;   // (1/2) ||(grad - iA) f||^2
  double potential_full = 0.0;     // int V |f|^2
  double potential_partial = 0.0;  // int V_gamma |f|^2
  double interaction = 0.0;        // (2/(p+1)) ||f||_{p+1}^{p+1}
  double angular = 0.0;            // Re L_Omega(f)
  double h_gamma = 0.0;
  double e_rot = 0.0;
  double e_mag = 0.0;
  double angular_im_residual = 0.0;  // imaginary part discarded from L_Omega
  double boundary_mass = 0.0;        // mass in the outer 10% shell
};

inline EnergyBreakdown evaluate(const ComplexField& f, const ModelParams& params) {
  const Grid& g = f.grid();
  if (g.dim() != params.dim)
    throw std::invalid_argument("evaluate: grid dimension does not match model");
  require_finite(f, "evaluate");

  EnergyBreakdown out;
  out.mass = mass(f);
  out.boundary_mass = boundary_mass(f);

  std::vector<ComplexField> grad;
  grad.reserve(g.dim());
  for (int j = 0; j < g.dim(); ++j) grad.push_back(fourier_derivative(f, j));

  KahanSum kin;
  for (int j = 0; j < g.dim(); ++j)
    for (const cplx& z : grad[j].values()) kin.add(std::norm(z));
  out.kinetic = 0.5 * kin.value() * g.cell_volume();

  // Magnetic kinetic term: reuse the plain derivatives, add -iA_j f pointwise.
  const double ga = params.axisymmetric() ? params.gamma[0] : 0.0;
  const auto x1 = g.coords(0);
  const auto x2 = g.coords(1);
  KahanSum mag;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double a1 = -ga * x2[g.axis_index(i, 1)];
    const double a2 = ga * x1[g.axis_index(i, 0)];
    mag.add(std::norm(grad[0][i] - cplx{0.0, a1} * f[i]));
    mag.add(std::norm(grad[1][i] - cplx{0.0, a2} * f[i]));
  }
  for (int j = 2; j < g.dim(); ++j)
    for (const cplx& z : grad[j].values()) mag.add(std::norm(z));
  out.magnetic_kinetic = 0.5 * mag.value() * g.cell_volume();

  const PotentialTables pot = tabulate_potentials(g, params);
  KahanSum pf, pp;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double d = std::norm(f[i]);
    pf.add(pot.full[i] * d);
    pp.add(pot.partial[i] * d);
  }
  out.potential_full = pf.value() * g.cell_volume();
  out.potential_partial = pp.value() * g.cell_volume();

  if (params.interaction_on)
    out.interaction = 2.0 / (params.p + 1.0) * lp_integral(f, params.p + 1.0);

  // L_Omega(f) = Omega int conj(f) i (x2 d1 - x1 d2) f; real part kept, the
  // imaginary residual reported as a correctness diagnostic.
  KahanSum ang_re, ang_im;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double a = x2[g.axis_index(i, 1)];
    const double b = x1[g.axis_index(i, 0)];
    const cplx lz = cplx{0.0, 1.0} * (a * grad[0][i] - b * grad[1][i]);
    const cplx z = std::conj(f[i]) * lz;
    ang_re.add(z.real());
    ang_im.add(z.imag());
  }
  out.angular = params.omega * ang_re.value() * g.cell_volume();
  out.angular_im_residual = std::abs(params.omega * ang_im.value() * g.cell_volume());

  out.h_gamma = 2.0 * out.magnetic_kinetic + 2.0 * out.potential_partial;
  out.e_rot = out.kinetic + out.potential_full - out.angular - out.interaction;
  out.e_mag = out.magnetic_kinetic + out.potential_partial - out.interaction;

  for (double v : {out.kinetic, out.magnetic_kinetic, out.potential_full, out.potential_partial,
                   out.interaction, out.angular, out.e_rot, out.e_mag})
    if (!std::isfinite(v))
      throw std::runtime_error("evaluate: non-finite functional value (boundary contamination?)");
  return out;
}

/// ||f||_{Sigma_gamma}^2 = ||(grad - iA) f||^2 + int V_gamma |f|^2 + ||f||^2.
inline double sigma_gamma_norm_sq(const ComplexField& f, const ModelParams& params) {
  params.require_critical_rotation("sigma_gamma_norm_sq");
  const EnergyBreakdown b = evaluate(f, params);
  return 2.0 * b.magnetic_kinetic + b.potential_partial + b.mass;
}

/// Explicit norm-equivalence constants for Omega < gamma:
///   C1 = 2 + max{gamma^2 + Omega^2, gamma_3^2, ..., gamma_N^2}
///   C2 = min{(gamma^2-Omega^2)/(gamma^2+Omega^2), (gamma^2-Omega^2)/2, gamma_3^2, ...}
struct NormEquivalenceConstants {
  double c1 = 0.0;
  double c2 = 0.0;
};

inline NormEquivalenceConstants norm_equivalence_constants(const ModelParams& params) {
  const double ga = params.gamma_perp();
  if (!(params.omega < ga))
    throw std::invalid_argument(
        "norm_equivalence_constants: requires Omega < gamma (the equivalence fails at critical speed)");
  const double om = params.omega;
  double hi = ga * ga + om * om;
  double lo = std::min((ga * ga - om * om) / (ga * ga + om * om), (ga * ga - om * om) / 2.0);
  for (int j = 2; j < params.dim; ++j) {
    hi = std::max(hi, params.gamma[j] * params.gamma[j]);
    lo = std::min(lo, params.gamma[j] * params.gamma[j]);
  }
  return {2.0 + hi, lo};
}

/// Pointwise diamagnetic check |grad |f|| <= |(grad - iA) f|.
///
/// grad |f| is evaluated through the a.e. identity Re(conj(f) grad f)/|f| on
/// {f != 0} (the modulus itself is not smooth enough for spectral
/// differentiation at its zeros).
struct DiamagneticReport {
  double max_excess = 0.0;     // max over grid of |grad|f|| - |(grad-iA)f|
  double tolerance = 0.0;      // tol_factor * max |grad f|
  double max_grad = 0.0;
  bool pass = true;
};

inline DiamagneticReport check_diamagnetic(const ComplexField& f, const ModelParams& params,
                                           double tol_factor = 1e-8) {
  const Grid& g = f.grid();
  const double ga = params.axisymmetric() ? params.gamma[0] : 0.0;
  std::vector<ComplexField> grad;
  for (int j = 0; j < g.dim(); ++j) grad.push_back(fourier_derivative(f, j));
  const auto x1 = g.coords(0);
  const auto x2 = g.coords(1);

  DiamagneticReport rep;
  rep.max_excess = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < f.size(); ++i) {
    double grad_abs2 = 0.0;
    double re_fbar_grad2 = 0.0;
    double mag_abs2 = 0.0;
    for (int j = 0; j < g.dim(); ++j) {
      const cplx dj = grad[j][i];
      grad_abs2 += std::norm(dj);
      const double re = (std::conj(f[i]) * dj).real();
      re_fbar_grad2 += re * re;
      cplx mj = dj;
      if (j == 0) mj -= cplx{0.0, -ga * x2[g.axis_index(i, 1)]} * f[i];
      if (j == 1) mj -= cplx{0.0, ga * x1[g.axis_index(i, 0)]} * f[i];
      mag_abs2 += std::norm(mj);
    }
    rep.max_grad = std::max(rep.max_grad, std::sqrt(grad_abs2));
    const double fa = std::abs(f[i]);
    const double lhs = fa > 0.0 ? std::sqrt(re_fbar_grad2) / fa : 0.0;
    rep.max_excess = std::max(rep.max_excess, lhs - std::sqrt(mag_abs2));
  }
  rep.tolerance = tol_factor * rep.max_grad;
  rep.pass = rep.max_excess < rep.tolerance;
  return rep;
}

/// Sigma_gamma inner product <u, phi> (sesquilinear, conjugate on phi).
inline cplx sigma_gamma_inner(const ComplexField& u, const ComplexField& phi,
                              const ModelParams& params) {
  require_same_grid(u, phi);
  const double ga = params.gamma_perp();
  const auto du = magnetic_gradient(u, ga);
  const auto dphi = magnetic_gradient(phi, ga);
  cplx acc{0.0, 0.0};
  for (int j = 0; j < u.grid().dim(); ++j) acc += inner(du[j], dphi[j]);
  const Grid& g = u.grid();
  const PotentialTables pot = tabulate_potentials(g, params);
  KahanSum re, im;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const cplx z = (1.0 + pot.partial[i]) * u[i] * std::conj(phi[i]);
    re.add(z.real());
    im.add(z.imag());
  }
  return acc + cplx{re.value(), im.value()} * g.cell_volume();
}

namespace detail {

/// Gram image G phi = -(grad - iA)^2 phi + V_gamma phi + phi, so that
/// <u, phi>_{Sigma_gamma} = <u, G phi>_{L^2}. Precomputing it makes the
/// shift search below one FFT pair per candidate.
inline ComplexField sigma_gram_image(const ComplexField& phi, const ModelParams& params) {
  const Grid& g = phi.grid();
  const double ga = params.gamma_perp();
  ComplexField hat = phi;
  fft::forward(hat);
  ComplexField lap = hat;  // -Delta phi
  ComplexField d1 = hat;   // d1 phi
  ComplexField d2 = hat;   // d2 phi
  for (std::size_t i = 0; i < hat.size(); ++i) {
    double k2 = 0.0;
    for (int j = 0; j < g.dim(); ++j) {
      const double k = g.wavenumbers(j)[g.axis_index(i, j)];
      k2 += k * k;
    }
    lap[i] *= k2;
    d1[i] *= cplx{0.0, g.wavenumbers(0)[g.axis_index(i, 0)]};
    d2[i] *= cplx{0.0, g.wavenumbers(1)[g.axis_index(i, 1)]};
  }
  fft::backward(lap);
  fft::backward(d1);
  fft::backward(d2);
  const PotentialTables pot = tabulate_potentials(g, params);
  const auto x1 = g.coords(0);
  const auto x2 = g.coords(1);
  ComplexField out = lap;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double a1 = -ga * x2[g.axis_index(i, 1)];
    const double a2 = ga * x1[g.axis_index(i, 0)];
    // -(grad-iA)^2 = -Delta + 2i A.grad + |A|^2
    out[i] += 2.0 * cplx{0.0, 1.0} * (a1 * d1[i] + a2 * d2[i]) +
              (a1 * a1 + a2 * a2) * phi[i] + (pot.partial[i] + 1.0) * phi[i];
  }
  return out;
}

}  // namespace detail

/// Distance to phi modulo the symmetry group: gauged planar translations
/// (search restricted to |y| <= L/2) and the global phase.
struct SymmetryDistanceResult {
  double distance = 0.0;
  std::array<double, 2> shift{0.0, 0.0};
  bool boundary_warning = false;
  int evaluations = 0;
};

inline SymmetryDistanceResult symmetry_distance(
    const ComplexField& u, const ComplexField& phi, const ModelParams& params,
    std::optional<std::array<double, 2>> initial_shift = std::nullopt, double shift_tol = 1e-6) {
  require_same_grid(u, phi);
  params.require_critical_rotation("symmetry_distance");
  const Grid& g = u.grid();
  const double ga = params.gamma_perp();
  const double radius = 0.5 * std::min(g.half_width(0), g.half_width(1));

  const double nu = sigma_gamma_norm_sq(u, params);
  const double nphi = sigma_gamma_norm_sq(phi, params);
  const ComplexField gram_phi = detail::sigma_gram_image(phi, params);

  int evals = 0;
  auto dist_sq = [&](const std::array<double, 2>& y) {
    ++evals;
    const ComplexField w = gauged_translate(u, y[0], y[1], ga);
    // min over the global phase: ||e^{it}w - phi||^2 = ||w||^2 + ||phi||^2 - 2|<w,phi>|
    const double cross = std::abs(inner(w, gram_phi));
    return std::max(nu + nphi - 2.0 * cross, 0.0);
  };
  auto clamp = [&](std::array<double, 2> y) {
    const double r = std::hypot(y[0], y[1]);
    if (r > radius) {
      y[0] *= radius / r;
      y[1] *= radius / r;
    }
    return y;
  };

  std::array<double, 2> y{0.0, 0.0};
  if (initial_shift) {
    y = clamp(*initial_shift);
  } else {
    const auto cu = density_centroid(u);
    const auto cphi = density_centroid(phi);
    y = clamp({cu[0] - cphi[0], cu[1] - cphi[1]});
  }

  double best = dist_sq(y);
  {
    const std::array<double, 2> origin{0.0, 0.0};
    if (y[0] != 0.0 || y[1] != 0.0) {
      const double d0 = dist_sq(origin);
      if (d0 < best) {
        best = d0;
        y = origin;
      }
    }
  }

  // Compass pattern search; the objective is smooth and unimodal near a match.
  double step = std::max(g.spacing(0), g.spacing(1));
  while (step > shift_tol) {
    bool improved = false;
    const std::array<std::array<double, 2>, 4> dirs{{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};
    for (const auto& d : dirs) {
      const std::array<double, 2> cand = clamp({y[0] + step * d[0], y[1] + step * d[1]});
      const double v = dist_sq(cand);
      if (v < best * (1.0 - 1e-14) ) {
        best = v;
        y = cand;
        improved = true;
      }
    }
    if (!improved) step *= 0.5;
  }

  // Final value through the explicit difference field: the quick formula
  // ||u||^2 + ||phi||^2 - 2|<u,phi>| cancels catastrophically near a match.
  {
    ComplexField w = gauged_translate(u, y[0], y[1], ga);
    const cplx z = inner(w, gram_phi);
    if (std::abs(z) > 0.0) w *= std::conj(z) / std::abs(z);
    w -= phi;
    best = sigma_gamma_norm_sq(w, params);
  }

  SymmetryDistanceResult res;
  res.distance = std::sqrt(best);
  res.shift = y;
  res.boundary_warning = std::hypot(y[0], y[1]) >= 0.999 * radius;
  res.evaluations = evals;
  return res;
}

}  // namespace rotwave
