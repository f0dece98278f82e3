#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rotwave/functionals.hpp"
#include "rotwave/qsolver.hpp"

namespace rotwave {

enum class InitKind { GaussianProduct, VortexSeeded, Concentration, Dilation };

struct InitSpec {
  InitKind kind = InitKind::GaussianProduct;
  double lambda = 1.0;            // concentration / dilation scale
  std::string base = "gaussian";  // dilation base: "gaussian" or "townes"
};

struct MinimizeSpec {
  double c = 1.0;                   // prescribed mass
  std::optional<double> m;          // ball radius for H_gamma <= m
  double step = 1e-2;               // initial flow step tau
  int max_iters = 100000;
  double tol_residual = 1e-8;
  double tol_energy = 1e-13;        // |dE| window criterion
  InitSpec init;

  void validate() const {
    if (!(c > 0.0)) throw std::invalid_argument("minimize.c: must be > 0");
    if (m && !(*m > 0.0)) throw std::invalid_argument("minimize.m: must be > 0");
    if (!(step > 0.0) || !(tol_residual > 0.0) || !(tol_energy > 0.0))
      throw std::invalid_argument("minimize: step and tolerances must be > 0");
  }
};

enum class MinimizeStatus { Converged, NoMinimizerEvidence, BoundaryAttached, IterationLimit };

inline const char* to_string(MinimizeStatus s) {
  switch (s) {
    case MinimizeStatus::Converged: return "converged";
    case MinimizeStatus::NoMinimizerEvidence: return "no_minimizer_evidence";
    case MinimizeStatus::BoundaryAttached: return "boundary_attached";
    case MinimizeStatus::IterationLimit: return "iteration_limit";
  }
  return "?";
}

struct TracePoint {
  double energy = 0.0;
  double residual = 0.0;
};

struct MinimizerResult {
  ComplexField field;
  double energy = 0.0;
  double mass = 0.0;
  double multiplier = 0.0;  // omega of the stationary equation
  double residual = 0.0;
  double h_gamma = 0.0;
  double boundary_mass = 0.0;
  bool boundary_flag = false;  // H_gamma within 5% of m
  MinimizeStatus status = MinimizeStatus::IterationLimit;
  std::string message;
  int iterations = 0;
  std::vector<TracePoint> trace;
};

/// omega = (||phi||_{p+1}^{p+1} - (1/2)||(grad-iA)phi||^2 - int V_gamma |phi|^2) / M(phi).
inline double lagrange_multiplier(const ComplexField& phi, const ModelParams& params) {
  const EnergyBreakdown b = evaluate(phi, params);
  if (!(b.mass > 0.0)) throw std::invalid_argument("lagrange_multiplier: zero mass");
  const double pnorm =
      params.interaction_on ? (params.p + 1.0) / 2.0 * b.interaction : 0.0;  // ||phi||_{p+1}^{p+1}
  return (pnorm - b.magnetic_kinetic - b.potential_partial) / b.mass;
}

namespace mdetail {

/// One application of the quadratic Hamiltonian H = -(1/2)(grad-iA)^2 + V_gamma
/// = -(1/2)Delta + V - gamma L_z (at Omega = gamma), together with the
/// quadratic-form pieces needed for energy/residual bookkeeping.
struct HamiltonianApply {
  ComplexField Hf;
  double quad_form = 0.0;   // <Hf, f> = mk + pp
  double pp = 0.0;          // int V_gamma |f|^2
  double pnorm = 0.0;       // int |f|^{p+1}
  double mass = 0.0;
};

inline HamiltonianApply apply_quadratic(const ComplexField& f, const ModelParams& params,
                                        const PotentialTables& pot) {
  const Grid& g = f.grid();
  const double ga = params.gamma_perp();
  ComplexField hat = f;
  fft::forward(hat);
  ComplexField kin = hat, d1 = hat, d2 = hat;
  for (std::size_t i = 0; i < hat.size(); ++i) {
    double k2 = 0.0;
    for (int j = 0; j < g.dim(); ++j) {
      const double k = g.wavenumbers(j)[g.axis_index(i, j)];
      k2 += k * k;
    }
    kin[i] *= 0.5 * k2;
    d1[i] *= cplx{0.0, g.wavenumbers(0)[g.axis_index(i, 0)]};
    d2[i] *= cplx{0.0, g.wavenumbers(1)[g.axis_index(i, 1)]};
  }
  fft::backward(kin);
  fft::backward(d1);
  fft::backward(d2);

  HamiltonianApply out;
  out.Hf = ComplexField(f.grid_ptr());
  const auto x1 = g.coords(0);
  const auto x2 = g.coords(1);
  KahanSum quad_re, pp_acc, pn_acc, m_acc;
  const double pexp = params.p + 1.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double a = x2[g.axis_index(i, 1)];
    const double b = x1[g.axis_index(i, 0)];
    const cplx lz = cplx{0.0, 1.0} * (a * d1[i] - b * d2[i]);
    out.Hf[i] = kin[i] + pot.full[i] * f[i] - ga * lz;
    const double d = std::norm(f[i]);
    quad_re.add((std::conj(f[i]) * out.Hf[i]).real());
    pp_acc.add(pot.partial[i] * d);
    pn_acc.add(abs_pow(std::abs(f[i]), pexp));
    m_acc.add(d);
  }
  const double w = g.cell_volume();
  out.quad_form = quad_re.value() * w;
  out.pp = pp_acc.value() * w;
  out.pnorm = pn_acc.value() * w;
  out.mass = m_acc.value() * w;
  return out;
}

struct FlowState {
  double energy = 0.0;
  double residual = 0.0;
  double mu = 0.0;          // Rayleigh multiplier (= -omega)
  double h_gamma = 0.0;
  double sigma_sq = 0.0;
  ComplexField gradient;    // Hf - |f|^{p-1} f - mu f
};

inline FlowState flow_state(const ComplexField& f, const HamiltonianApply& H,
                            const ModelParams& params) {
  FlowState st;
  const double inter = params.interaction_on ? 2.0 / (params.p + 1.0) * H.pnorm : 0.0;
  st.energy = H.quad_form - inter;
  st.mu = (H.quad_form - (params.interaction_on ? H.pnorm : 0.0)) / H.mass;
  st.gradient = H.Hf;
  KahanSum r2;
  for (std::size_t i = 0; i < f.size(); ++i) {
    cplx r = st.gradient[i] - st.mu * f[i];
    if (params.interaction_on) r -= abs_pow(std::abs(f[i]), params.p - 1.0) * f[i];
    st.gradient[i] = r;
    r2.add(std::norm(r));
  }
  st.sigma_sq = H.quad_form + H.pp + H.mass;  // mk + 2pp + mass... see below
  // quad_form = mk + pp, so sigma^2 = 2 mk + pp + mass = quad_form + (mk) ...
  // assemble from pieces instead:
  const double mk = H.quad_form - H.pp;
  st.sigma_sq = 2.0 * mk + H.pp + H.mass;
  st.h_gamma = 2.0 * mk + 2.0 * H.pp;
  st.residual = std::sqrt(r2.value() * f.grid().cell_volume() / st.sigma_sq);
  return st;
}

/// Preconditioned step d = (1 + tau V)^{-1} F^{-1} (1 + tau |xi|^2/2)^{-1} F r.
/// The split preconditioner absorbs the stiff quadratic parts while keeping
/// the exact Euler-Lagrange fixed point.
inline ComplexField precondition(const ComplexField& r, double tau, const PotentialTables& pot) {
  const Grid& g = r.grid();
  ComplexField d = r;
  fft::forward(d);
  const double scale = fft::inverse_scale(g, fft::all_axes(g));
  for (std::size_t i = 0; i < d.size(); ++i) {
    double k2 = 0.0;
    for (int j = 0; j < g.dim(); ++j) {
      const double k = g.wavenumbers(j)[g.axis_index(i, j)];
      k2 += k * k;
    }
    d[i] *= scale / (1.0 + 0.5 * tau * k2);
  }
  fft::transform(d, fft::all_axes(g), FFTW_BACKWARD);
  for (std::size_t i = 0; i < d.size(); ++i) d[i] /= 1.0 + tau * pot.full[i];
  return d;
}

/// Separable Catmull-Rom resampling of f(lambda x), used by the ball
/// retraction. Accuracy is uncritical there (the flow re-converges after).
inline ComplexField dilate(const ComplexField& f, double lambda) {
  const Grid& g = f.grid();
  ComplexField out(f.grid_ptr());
  const int dim = g.dim();
  std::vector<int> idx(dim);
  for (std::size_t i = 0; i < out.size(); ++i) {
    // fractional source coordinates
    bool outside = false;
    std::vector<double> tpos(dim);
    for (int j = 0; j < dim; ++j) {
      const double x = g.coords(j)[g.axis_index(i, j)] * lambda;
      if (std::abs(x) >= g.half_width(j)) {
        outside = true;
        break;
      }
      tpos[j] = (x + g.half_width(j)) / g.spacing(j);
    }
    if (outside) {
      out[i] = 0.0;
      continue;
    }
    // separable cubic over the 4^dim neighborhood
    cplx acc{0.0, 0.0};
    const int m = 1 << (2 * dim);  // 4^dim
    for (int corner = 0; corner < m; ++corner) {
      double weight = 1.0;
      std::size_t lin = 0;
      int cc = corner;
      for (int j = 0; j < dim; ++j) {
        const int o = (cc & 3) - 1;
        cc >>= 2;
        const int base = static_cast<int>(std::floor(tpos[j]));
        const double t = tpos[j] - base;
        int k = base + o;
        const int n = g.points(j);
        k = std::clamp(k, 0, n - 1);
        // Catmull-Rom weights
        double wj = 0.0;
        switch (o) {
          case -1: wj = 0.5 * (-t * (1 - t) * (1 - t)); break;
          case 0: wj = 0.5 * ((2 - 5 * t * t + 3 * t * t * t) ); break;
          case 1: wj = 0.5 * (t * (1 + 4 * t - 3 * t * t)); break;
          case 2: wj = 0.5 * (-t * t * (1 - t)); break;
        }
        weight *= wj;
        lin += static_cast<std::size_t>(k) * g.stride(j);
      }
      acc += weight * f[lin];
    }
    out[i] = acc * std::pow(lambda, dim / 2.0);
  }
  return out;
}

}  // namespace mdetail

/// Test-function families. All outputs are normalized to mass c on the grid.
inline ComplexField make_initial(const InitSpec& init, double c, const ModelParams& params,
                                 std::shared_ptr<const Grid> grid) {
  const Grid& g = *grid;
  if (g.dim() != params.dim) throw std::invalid_argument("make_initial: grid/model dim mismatch");
  const double ga = params.gamma[0];
  ComplexField f(grid);
  switch (init.kind) {
    case InitKind::GaussianProduct:
    case InitKind::VortexSeeded: {
      // g(x_perp) h(x_rest): planar Gaussian of width gamma^{-1/2} times the
      // transverse harmonic ground state.
      for (std::size_t i = 0; i < f.size(); ++i) {
        double e = ga * (std::pow(g.coords(0)[g.axis_index(i, 0)], 2) +
                         std::pow(g.coords(1)[g.axis_index(i, 1)], 2));
        for (int j = 2; j < g.dim(); ++j)
          e += params.gamma[j] * std::pow(g.coords(j)[g.axis_index(i, j)], 2);
        f[i] = std::exp(-0.5 * e);
        if (init.kind == InitKind::VortexSeeded)
          f[i] *= cplx{g.coords(0)[g.axis_index(i, 0)], g.coords(1)[g.axis_index(i, 1)]};
      }
      break;
    }
    case InitKind::Concentration: {
      // lambda^{N/2} A_lambda Q0(lambda x) built from the mass-critical ground
      // profile; the box plays the role of the cutoff.
      const RadialProfile prof = solve_ground_profile(params.dim, 2.0 + 4.0 / params.dim);
      double lmin_width = prof.r_nodes.back();
      for (int j = 0; j < g.dim(); ++j) lmin_width = std::min(lmin_width, g.half_width(j));
      if (prof.value_at(init.lambda * lmin_width) > 1e-8 * prof.w0)
        throw std::invalid_argument("make_initial: concentration profile does not fit the box");
      f = sample_radial(prof, grid, init.lambda);
      break;
    }
    case InitKind::Dilation: {
      if (init.base == "gaussian") {
        const double width_sq_arg = init.lambda * init.lambda;
        for (std::size_t i = 0; i < f.size(); ++i) {
          double r2 = 0.0;
          for (int j = 0; j < g.dim(); ++j) r2 += std::pow(g.coords(j)[g.axis_index(i, j)], 2);
          f[i] = std::exp(-0.5 * width_sq_arg * r2);
        }
        double lmin = g.half_width(0);
        for (int j = 1; j < g.dim(); ++j) lmin = std::min(lmin, g.half_width(j));
        if (std::exp(-0.5 * width_sq_arg * lmin * lmin) > 1e-8)
          throw std::invalid_argument("make_initial: dilated support exceeds the box");
      } else if (init.base == "townes") {
        const RadialProfile prof = solve_ground_profile(params.dim, 2.0 + 4.0 / params.dim);
        if (prof.value_at(init.lambda * g.half_width(0)) > 1e-8 * prof.w0)
          throw std::invalid_argument("make_initial: dilated support exceeds the box");
        f = sample_radial(prof, grid, init.lambda);
      } else {
        throw std::invalid_argument("make_initial: unknown dilation base '" + init.base + "'");
      }
      break;
    }
  }
  normalize_mass(f, c);
  return f;
}

/// L2 residual of -(1/2)(grad-iA)^2 phi + V_gamma phi - |phi|^{p-1} phi +
/// omega phi, normalized by ||phi||_{Sigma_gamma}.
inline double euler_lagrange_residual(const ComplexField& phi, double omega,
                                      const ModelParams& params) {
  const PotentialTables pot = tabulate_potentials(phi.grid(), params);
  const auto H = mdetail::apply_quadratic(phi, params, pot);
  KahanSum r2;
  for (std::size_t i = 0; i < phi.size(); ++i) {
    cplx r = H.Hf[i] + omega * phi[i];
    if (params.interaction_on) r -= abs_pow(std::abs(phi[i]), params.p - 1.0) * phi[i];
    r2.add(std::norm(r));
  }
  const double mk = H.quad_form - H.pp;
  const double sigma_sq = 2.0 * mk + H.pp + H.mass;
  return std::sqrt(r2.value() * phi.grid().cell_volume() / sigma_sq);
}

/// Closed-form pieces of the analytic certificates: omega^0_gamma, the
/// Gaussian-product upper bound, the g_c/h_c sandwich and its m/4 vs (m/2, m)
/// gap condition, and the multiplier window.
struct BoundsReport {
  double omega0 = 0.0;
  double upper_I = 0.0;           // Gaussian-product energy (closed form)
  double B_const = 0.0;           // 2 C_{p+1} / (p+1)
  double alpha = 0.0;             // N(p-1)/4
  double beta = 0.0;              // (4-(N-2)(p-1))/4
  double c = 0.0, m = 0.0;
  bool gap_holds = false;
  double c0 = 0.0;                // largest c for which the gap condition holds
  double omega_window_lo = 0.0, omega_window_hi = 0.0;

  double g(double lambda) const {
    return 0.5 * lambda - B_const * std::pow(c, beta) * std::pow(lambda, alpha);
  }
  double h(double lambda) const { return 0.5 * lambda; }
};

/// Gaussian-product test energy, evaluated in closed form.
inline double gaussian_product_energy(double c, const ModelParams& params) {
  const double ga = params.gamma[0];
  const double p = params.p;
  double lead = ga;
  for (int j = 2; j < params.dim; ++j) lead += 0.5 * params.gamma[j];
  if (!params.interaction_on) return lead * c;
  // ||g||_{p+1}^{p+1} for the planar Gaussian, ||h||_{p+1}^{p+1} transverse
  double gp = std::pow(ga / std::numbers::pi, (p - 1.0) / 2.0) * 2.0 / (p + 1.0);
  double hp = std::pow(c, (p + 1.0) / 2.0);
  for (int j = 2; j < params.dim; ++j)
    hp *= std::pow(params.gamma[j] / std::numbers::pi, (p - 1.0) / 4.0) *
          std::sqrt(2.0 / (p + 1.0));
  return lead * c - 2.0 / (p + 1.0) * gp * hp;
}

inline BoundsReport analytic_bounds(double c, double m, const ModelParams& params) {
  if (!params.mass_supercritical())
    throw std::invalid_argument("analytic_bounds: requires a mass-supercritical exponent");
  BoundsReport rep;
  rep.omega0 = params.omega0();
  rep.c = c;
  rep.m = m;
  rep.alpha = params.dim * (params.p - 1.0) / 4.0;
  rep.beta = (4.0 - (params.dim - 2.0) * (params.p - 1.0)) / 4.0;
  rep.B_const = 2.0 * sharp_gn_constant(params.dim, params.p + 1.0) / (params.p + 1.0);
  rep.upper_I = gaussian_product_energy(c, params);

  auto gap_at = [&](double cc) {
    BoundsReport tmp = rep;
    tmp.c = cc;
    double inf_g = std::min(tmp.g(m / 2.0), tmp.g(m));  // g_c is concave in lambda
    return tmp.h(m / 4.0) < inf_g;
  };
  rep.gap_holds = gap_at(c);

  double chi = 1.0;
  int grow = 0;
  while (gap_at(chi) && grow++ < 60) chi *= 2.0;
  if (grow >= 60) {
    rep.c0 = chi;
  } else {
    double clo = 0.0;
    for (int it = 0; it < 200 && chi - clo > 1e-12 * chi; ++it) {
      const double mid = 0.5 * (clo + chi);
      (gap_at(mid) ? clo : chi) = mid;
    }
    rep.c0 = 0.5 * (clo + chi);
  }

  const double factor =
      1.0 - rep.B_const * std::pow(m, (params.dim * (params.p - 1.0) - 4.0) / 4.0) *
                std::pow(c, rep.beta);
  rep.omega_window_lo = -rep.omega0;
  rep.omega_window_hi = -rep.omega0 * factor;
  return rep;
}

namespace mdetail {

struct FlowOptions {
  bool ball = false;
  double m = 0.0;
  double divergence_energy = -1e6;
  double divergence_h = 1e6;
  std::function<void(const ComplexField&)> on_accept;
};

inline MinimizerResult run_flow(const MinimizeSpec& spec, const ModelParams& params,
                                std::shared_ptr<const Grid> grid, const FlowOptions& fo) {
  const PotentialTables pot = tabulate_potentials(*grid, params);
  ComplexField f = make_initial(spec.init, spec.c, params, grid);
  if (fo.ball) {
    // start inside the constraint set
    EnergyBreakdown b0 = evaluate(f, params);
    if (b0.h_gamma > fo.m) {
      double lam = 1.0;
      for (int it = 0; it < 60 && evaluate(f, params).h_gamma > 0.95 * fo.m; ++it) {
        lam *= 0.8;
        ComplexField cand = dilate(f, lam);
        normalize_mass(cand, spec.c);
        if (evaluate(cand, params).h_gamma <= 0.95 * fo.m) {
          f = std::move(cand);
          break;
        }
      }
    }
  }

  MinimizerResult res;
  double tau = spec.step;
  auto H = apply_quadratic(f, params, pot);
  FlowState st = flow_state(f, H, params);
  res.trace.push_back({st.energy, st.residual});

  int stable_window = 0;
  double last_energy = st.energy;
  int iter = 0;
  for (; iter < spec.max_iters; ++iter) {
    if (st.energy < fo.divergence_energy || st.h_gamma > fo.divergence_h) {
      res.status = MinimizeStatus::NoMinimizerEvidence;
      res.message = "divergence detected (energy " + std::to_string(st.energy) + ", H_gamma " +
                    std::to_string(st.h_gamma) + ")";
      break;
    }
    if (st.residual < spec.tol_residual && stable_window >= 50) {
      res.status = MinimizeStatus::Converged;
      break;
    }

    bool accepted = false;
    while (tau > 1e-9) {
      ComplexField trial = f;
      const ComplexField d = precondition(st.gradient, tau, pot);
      axpy(cplx{-tau, 0.0}, d, trial);
      normalize_mass(trial, spec.c);

      bool ball_rescued = true;
      auto Ht = apply_quadratic(trial, params, pot);
      FlowState stt = flow_state(trial, Ht, params);
      if (fo.ball && stt.h_gamma > fo.m) {
        // backtrack; if the step keeps violating at the smallest tau, dilate
        // back onto H_gamma = 0.95 m.
        if (tau > 2e-9) {
          tau *= 0.5;
          continue;
        }
        double llo = 0.3, lhi = 1.0;
        ComplexField cand = trial;
        for (int it2 = 0; it2 < 40; ++it2) {
          const double lam = 0.5 * (llo + lhi);
          cand = dilate(trial, lam);
          normalize_mass(cand, spec.c);
          const double hg = evaluate(cand, params).h_gamma;
          if (hg > 0.95 * fo.m)
            lhi = lam;
          else
            llo = lam;
          if (std::abs(hg - 0.95 * fo.m) < 0.01 * fo.m) break;
        }
        trial = std::move(cand);
        Ht = apply_quadratic(trial, params, pot);
        stt = flow_state(trial, Ht, params);
        ball_rescued = stt.h_gamma <= fo.m;
        if (!ball_rescued) {
          res.status = MinimizeStatus::BoundaryAttached;
          res.message = "persistent boundary attachment; consider reducing c";
          break;
        }
      }

      if (stt.energy <= st.energy + 1e-14 * std::abs(st.energy)) {
        f = std::move(trial);
        H = std::move(Ht);
        st = std::move(stt);
        tau = std::min(tau * 1.1, 1.0);
        accepted = true;
        break;
      }
      tau *= 0.5;
    }
    if (res.status == MinimizeStatus::BoundaryAttached) break;
    if (!accepted) {
      // stagnated at the rounding floor
      res.status = st.residual < spec.tol_residual ? MinimizeStatus::Converged
                                                   : MinimizeStatus::IterationLimit;
      res.message = "step size underflow";
      break;
    }

    res.trace.push_back({st.energy, st.residual});
    if (fo.on_accept) fo.on_accept(f);
    if (std::abs(st.energy - last_energy) < spec.tol_energy)
      ++stable_window;
    else
      stable_window = 0;
    last_energy = st.energy;
  }
  if (iter >= spec.max_iters) res.status = MinimizeStatus::IterationLimit;

  // Canonicalize: center the density centroid with the gauged translation
  // (the plain shift is not a symmetry at critical rotation), then rotate the
  // global phase so the value at the density maximum is real positive.
  if (res.status == MinimizeStatus::Converged) {
    const auto cen = density_centroid(f);
    if (std::hypot(cen[0], cen[1]) > 1e-12) {
      f = gauged_translate(f, cen[0], cen[1], params.gamma_perp());
      normalize_mass(f, spec.c);
    }
    std::size_t imax = 0;
    double dmax = -1.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      const double d = std::norm(f[i]);
      if (d > dmax) {
        dmax = d;
        imax = i;
      }
    }
    const double ph = std::arg(f[imax]);
    if (ph != 0.0) f *= std::polar(1.0, -ph);
  }

  const EnergyBreakdown b = evaluate(f, params);
  res.field = std::move(f);
  res.energy = b.e_mag;
  res.mass = b.mass;
  res.h_gamma = b.h_gamma;
  res.boundary_mass = b.boundary_mass;
  res.multiplier = lagrange_multiplier(res.field, params);
  res.residual = euler_lagrange_residual(res.field, res.multiplier, params);
  res.iterations = iter;
  if (fo.ball) {
    res.boundary_flag = b.h_gamma >= 0.95 * fo.m;
    if (res.boundary_flag && res.status == MinimizeStatus::Converged) {
      res.status = MinimizeStatus::BoundaryAttached;
      res.message = "converged onto the ball boundary; consider reducing c";
    }
  }
  return res;
}

}  // namespace mdetail

/// Energies along the non-existence families: the concentration family
/// lambda^{N/2} A_lambda Q0(lambda x) at the mass-critical exponent, the
/// dilation family lambda^{N/2} f(lambda x) for supercritical p.
struct ProbePoint {
  double lambda = 0.0;
  double energy = 0.0;
  bool truncation_warning = false;
};

inline std::vector<ProbePoint> nonexistence_probe(double c, const ModelParams& params,
                                                  std::span<const double> lambdas,
                                                  std::shared_ptr<const Grid> grid) {
  if (!params.mass_critical() && !params.mass_supercritical())
    throw std::invalid_argument("nonexistence_probe: requires p >= 1 + 4/N");
  std::vector<ProbePoint> out;
  const double h = grid->spacing(0);
  for (double lam : lambdas) {
    InitSpec init;
    init.lambda = lam;
    init.kind = params.mass_critical() ? InitKind::Concentration : InitKind::Dilation;
    init.base = "gaussian";
    ComplexField f = make_initial(init, c, params, grid);
    ProbePoint pt;
    pt.lambda = lam;
    pt.energy = evaluate(f, params).e_mag;
    // decay scale of the profile ~ 1/(sqrt(2) lambda); flag when the grid
    // resolves it with fewer than ~4 points
    pt.truncation_warning = lam * h > 0.35;
    out.push_back(pt);
  }
  return out;
}

/// Least-squares fit of E(lambda) = kappa lambda^2 + beta lambda^{-2}.
inline double fit_lambda_sq_coefficient(std::span<const ProbePoint> pts) {
  double a11 = 0, a12 = 0, a22 = 0, b1 = 0, b2 = 0;
  for (const auto& p : pts) {
    const double u = p.lambda * p.lambda;
    const double v = 1.0 / (p.lambda * p.lambda);
    a11 += u * u;
    a12 += u * v;
    a22 += v * v;
    b1 += u * p.energy;
    b2 += v * p.energy;
  }
  const double det = a11 * a22 - a12 * a12;
  return (b1 * a22 - b2 * a12) / det;
}

/// Global minimization of E_gamma on S(c) by the normalized gradient flow.
/// Outside the existence regime the concentration/dilation families already
/// certify I = -infinity; that evidence is reported instead of a flow run.
inline MinimizerResult minimize_global(const MinimizeSpec& spec, const ModelParams& params,
                                       std::shared_ptr<const Grid> grid,
                                       std::function<void(const ComplexField&)> on_accept = {}) {
  spec.validate();
  params.require_critical_rotation("minimize_global");
  if (params.interaction_on &&
      (params.mass_supercritical() ||
       (params.mass_critical() && spec.c >= critical_mass(params.dim)))) {
    MinimizerResult res;
    std::vector<double> lams{2.0, 4.0, 8.0};
    const auto pts = nonexistence_probe(spec.c, params, lams, grid);
    res.status = MinimizeStatus::NoMinimizerEvidence;
    res.message = "family energies decrease without lower bound:";
    for (const auto& p : pts)
      res.message += " E(" + std::to_string(p.lambda) + ")=" + std::to_string(p.energy);
    res.field = make_initial(spec.init, spec.c, params, grid);
    const EnergyBreakdown b = evaluate(res.field, params);
    res.energy = b.e_mag;
    res.mass = b.mass;
    res.h_gamma = b.h_gamma;
    return res;
  }
  mdetail::FlowOptions fo;
  fo.on_accept = std::move(on_accept);
  return mdetail::run_flow(spec, params, grid, fo);
}

/// Local minimization on S(c) intersected with the ball H_gamma <= m.
inline MinimizerResult minimize_local_ball(const MinimizeSpec& spec, const ModelParams& params,
                                           std::shared_ptr<const Grid> grid,
                                           std::function<void(const ComplexField&)> on_accept = {}) {
  spec.validate();
  params.require_critical_rotation("minimize_local_ball");
  if (!spec.m) throw std::invalid_argument("minimize_local_ball: spec.m required");
  if (!params.mass_supercritical())
    throw std::invalid_argument("minimize_local_ball: requires 1 + 4/N < p < 1 + 4/(N-2)");
  mdetail::FlowOptions fo;
  fo.ball = true;
  fo.m = *spec.m;
  fo.on_accept = std::move(on_accept);
  return mdetail::run_flow(spec, params, grid, fo);
}

}  // namespace rotwave
