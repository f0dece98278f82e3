#pragma once

#include <cstdint>
#include <functional>
#include <numbers>
#include <vector>

#include "rotwave/functionals.hpp"
#include "rotwave/minimizer.hpp"
#include "rotwave/random_fields.hpp"

namespace rotwave {

enum class PropagationMethod { RotatingFrame, DirectSplit };

struct PropagateOptions {
  double T = 1.0;
  double dt = 1e-3;
  PropagationMethod method = PropagationMethod::RotatingFrame;
  int samples = 50;
  bool store_snapshots = false;
  bool dealias = false;        // 2/3-rule after each step (stress tests)
  double blowup_factor = 1e6;  // halt when ||u||_Sigma exceeds this times initial
  /// Called at every sample with (t, state). For the rotating-frame method the
  /// state is the co-rotating v; map through rotate_frame for lab-frame views.
  std::function<void(double, const ComplexField&)> observer;
};

struct EvolutionTrace {
  std::vector<double> times;
  std::vector<double> mass_series, energy_series, angular_series, h_gamma_series;
  std::vector<double> momentum_identity_residual;
  std::vector<double> boundary_mass_series;
  std::vector<ComplexField> field_snapshots;
  PropagationMethod method = PropagationMethod::RotatingFrame;
  double p = 2.0;
  bool blew_up = false;
  double blowup_time = 0.0;
};

/// Resample f on coordinates rotated by angle omega*t in the (x1,x2) plane:
/// out(x) = f(R_{omega t} x). Exact quarter turns are index permutations; the
/// remainder is three Fourier shears, so Lebesgue norms are preserved to
/// rounding. Requires a square planar box.
inline ComplexField rotate_frame(const ComplexField& f, double t, double omega) {
  const Grid& g = f.grid();
  if (g.dim() < 2) throw std::invalid_argument("rotate_frame: dim >= 2 required");
  if (g.points(0) != g.points(1) || g.half_width(0) != g.half_width(1))
    throw std::invalid_argument("rotate_frame: requires a square planar box");

  double theta = std::fmod(omega * t, 2.0 * std::numbers::pi);
  if (theta > std::numbers::pi) theta -= 2.0 * std::numbers::pi;
  if (theta < -std::numbers::pi) theta += 2.0 * std::numbers::pi;

  ComplexField out = f;
  const int n = g.points(0);
  auto quarter_turn = [&](const ComplexField& in, int sign) {
    // out(x) = in(R_{sign pi/2} x); R_{pi/2} x = (-x2, x1)
    ComplexField q(in.grid_ptr());
    for (std::size_t i = 0; i < q.size(); ++i) {
      const int i1 = g.axis_index(i, 0);
      const int i2 = g.axis_index(i, 1);
      std::size_t rest = i - static_cast<std::size_t>(i1) * g.stride(0) -
                         static_cast<std::size_t>(i2) * g.stride(1);
      int j1, j2;
      if (sign > 0) {
        j1 = (n - i2) % n;  // -x2
        j2 = i1;            //  x1
      } else {
        j1 = i2;
        j2 = (n - i1) % n;
      }
      q[i] = in[rest + static_cast<std::size_t>(j1) * g.stride(0) +
                static_cast<std::size_t>(j2) * g.stride(1)];
    }
    return q;
  };
  while (theta > std::numbers::pi / 4.0 + 1e-15) {
    out = quarter_turn(out, +1);
    theta -= std::numbers::pi / 2.0;
  }
  while (theta < -std::numbers::pi / 4.0 - 1e-15) {
    out = quarter_turn(out, -1);
    theta += std::numbers::pi / 2.0;
  }
  if (theta == 0.0) return out;

  const double a = -std::tan(0.5 * theta);
  const double b = std::sin(theta);
  auto shear = [&](ComplexField& w, int axis, double s) {
    // (S w)(x) = w(x_axis + s * x_other, x_other)
    const int other = 1 - axis;
    const int axes[1] = {axis};
    fft::forward(w, axes);
    const double scale = fft::inverse_scale(g, axes);
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double xi = g.wavenumbers(axis)[g.axis_index(i, axis)];
      const double xo = g.coords(other)[g.axis_index(i, other)];
      w[i] *= std::polar(scale, xi * s * xo);
    }
    fft::transform(w, axes, FFTW_BACKWARD);
  };
  shear(out, 0, a);
  shear(out, 1, b);
  shear(out, 0, a);
  return out;
}

namespace ddetail {

inline double nonlinear_term(const cplx& v, double p) {
  if (p == 3.0) return std::norm(v);
  if (p == 2.0) return std::abs(v);
  return std::pow(std::abs(v), p - 1.0);
}

/// i u_t = -1/2 Delta u + V u - Omega L_z u - |u|^{p-1} u, stepped by a
/// symmetric composition of diagonal pieces:
///   rotating frame (Omega = gamma1 = gamma2): gauge the rotation away, plain
///   trapped NLS by Strang splitting (kinetic in Fourier, potential+nonlinear
///   phase pointwise), observables read in the co-rotating variables;
///   direct split: the planar kinetic+rotation pieces (1/2) d_11 + i Omega x2 d1
///   and its x2 counterpart are diagonal after a one-axis transform.
struct Stepper {
  const Grid& g;
  const ModelParams& params;
  PropagationMethod method;
  double dt;
  PotentialTables pot;
  std::vector<double> kin_phase;     // rotating frame: dt |xi|^2 / 2
  std::vector<double> x1_phase;      // direct split: (dt/2)(xi1^2/2 + Omega x2 xi1 + rest)
  std::vector<double> x2_phase;      // direct split: dt (xi2^2/2 - Omega x1 xi2)
  std::vector<int> axes_x1, axes_x2;
  double scale_x1 = 1.0, scale_x2 = 1.0, scale_full = 1.0;

  Stepper(const ComplexField& f, const ModelParams& prm, PropagationMethod m, double step)
      : g(f.grid()), params(prm), method(m), dt(step), pot(tabulate_potentials(g, prm)) {
    if (method == PropagationMethod::RotatingFrame) {
      if (!prm.axisymmetric())
        throw std::invalid_argument("propagate: rotating_frame requires gamma1 == gamma2");
      kin_phase.resize(g.size());
      for (std::size_t i = 0; i < g.size(); ++i) {
        double k2 = 0.0;
        for (int j = 0; j < g.dim(); ++j) {
          const double k = g.wavenumbers(j)[g.axis_index(i, j)];
          k2 += k * k;
        }
        kin_phase[i] = 0.5 * dt * k2;
      }
      scale_full = fft::inverse_scale(g, fft::all_axes(g));
    } else {
      axes_x1.push_back(0);
      for (int j = 2; j < g.dim(); ++j) axes_x1.push_back(j);
      axes_x2.push_back(1);
      x1_phase.resize(g.size());
      x2_phase.resize(g.size());
      const double om = params.omega;
      for (std::size_t i = 0; i < g.size(); ++i) {
        const double k1 = g.wavenumbers(0)[g.axis_index(i, 0)];
        const double x2 = g.coords(1)[g.axis_index(i, 1)];
        double rest = 0.0;
        for (int j = 2; j < g.dim(); ++j) {
          const double kj = g.wavenumbers(j)[g.axis_index(i, j)];
          rest += kj * kj;
        }
        x1_phase[i] = 0.5 * dt * (0.5 * k1 * k1 + om * x2 * k1 + 0.5 * rest);
        const double k2 = g.wavenumbers(1)[g.axis_index(i, 1)];
        const double x1 = g.coords(0)[g.axis_index(i, 0)];
        x2_phase[i] = dt * (0.5 * k2 * k2 - om * x1 * k2);
      }
      scale_x1 = fft::inverse_scale(g, axes_x1);
      scale_x2 = fft::inverse_scale(g, axes_x2);
    }
  }

  void potential_half(ComplexField& v) const {
    const double half = 0.5 * dt;
    const double p = params.p;
    const bool nl = params.interaction_on;
    for (std::size_t i = 0; i < v.size(); ++i) {
      double w = pot.full[i];
      if (nl) w -= nonlinear_term(v[i], p);
      v[i] *= std::polar(1.0, -half * w);
    }
  }

  void step(ComplexField& v, fft::Plan& fwd, fft::Plan& bwd, fft::Plan& fwd1, fft::Plan& bwd1,
            fft::Plan& fwd2, fft::Plan& bwd2) const {
    potential_half(v);
    if (method == PropagationMethod::RotatingFrame) {
      fwd.execute();
      for (std::size_t i = 0; i < v.size(); ++i) v[i] *= std::polar(scale_full, -kin_phase[i]);
      bwd.execute();
    } else {
      fwd1.execute();
      for (std::size_t i = 0; i < v.size(); ++i) v[i] *= std::polar(scale_x1, -x1_phase[i]);
      bwd1.execute();
      fwd2.execute();
      for (std::size_t i = 0; i < v.size(); ++i) v[i] *= std::polar(scale_x2, -x2_phase[i]);
      bwd2.execute();
      fwd1.execute();
      for (std::size_t i = 0; i < v.size(); ++i) v[i] *= std::polar(scale_x1, -x1_phase[i]);
      bwd1.execute();
    }
    potential_half(v);
  }
};

}  // namespace ddetail

inline EvolutionTrace propagate(const ComplexField& u0, const ModelParams& params,
                                const PropagateOptions& opts) {
  if (opts.dt == 0.0 || opts.T == 0.0 || (opts.T > 0) != (opts.dt > 0))
    throw std::invalid_argument("propagate: T and dt must be nonzero with matching signs");
  if (u0.grid().dim() != params.dim)
    throw std::invalid_argument("propagate: grid/model dim mismatch");
  require_finite(u0, "propagate");

  const long n_steps = std::lround(opts.T / opts.dt);
  const long sample_every = std::max<long>(1, n_steps / std::max(1, opts.samples));

  ComplexField v = u0;
  ddetail::Stepper stepper(v, params, opts.method, opts.dt);
  auto fwd = fft::Plan::make(v, fft::all_axes(v.grid()), FFTW_FORWARD);
  auto bwd = fft::Plan::make(v, fft::all_axes(v.grid()), FFTW_BACKWARD);
  fft::Plan fwd1, bwd1, fwd2, bwd2;
  if (opts.method == PropagationMethod::DirectSplit) {
    fwd1 = fft::Plan::make(v, stepper.axes_x1, FFTW_FORWARD);
    bwd1 = fft::Plan::make(v, stepper.axes_x1, FFTW_BACKWARD);
    fwd2 = fft::Plan::make(v, stepper.axes_x2, FFTW_FORWARD);
    bwd2 = fft::Plan::make(v, stepper.axes_x2, FFTW_BACKWARD);
  }

  EvolutionTrace trace;
  trace.method = opts.method;
  trace.p = params.p;

  // Running correction integral of the momentum identity; identically zero
  // for the axially symmetric trap (L_z V = 0).
  const bool anisotropic = !params.axisymmetric();
  double correction = 0.0;  // int_0^t C(s) ds with C = -(g1^2-g2^2) Omega int x1 x2 |u|^2
  double c_prev = 0.0;
  const double g1sq_g2sq =
      params.gamma[0] * params.gamma[0] - params.gamma[1] * params.gamma[1];
  auto correction_rate = [&](const ComplexField& w) {
    KahanSum acc;
    const Grid& g = w.grid();
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double x1 = g.coords(0)[g.axis_index(i, 0)];
      const double x2 = g.coords(1)[g.axis_index(i, 1)];
      acc.add(x1 * x2 * std::norm(w[i]));
    }
    return -params.omega * g1sq_g2sq * acc.value() * g.cell_volume();
  };

  double sigma0 = 0.0;
  double angular0 = 0.0;
  auto record = [&](double t) {
    const EnergyBreakdown b = evaluate(v, params);
    trace.times.push_back(t);
    trace.mass_series.push_back(b.mass);
    trace.energy_series.push_back(b.e_rot);
    trace.angular_series.push_back(b.angular);
    trace.h_gamma_series.push_back(b.h_gamma);
    trace.boundary_mass_series.push_back(b.boundary_mass);
    trace.momentum_identity_residual.push_back(b.angular + correction - angular0);
    if (opts.store_snapshots) trace.field_snapshots.push_back(v);
    if (opts.observer) opts.observer(t, v);
    const double sigma = std::sqrt(2.0 * b.magnetic_kinetic + b.potential_partial + b.mass);
    if (sigma0 == 0.0) {
      sigma0 = sigma;
      angular0 = b.angular;
      trace.momentum_identity_residual.back() = 0.0;
    }
    return sigma < opts.blowup_factor * sigma0;
  };

  if (anisotropic) c_prev = correction_rate(v);
  record(0.0);
  for (long k = 0; k < n_steps; ++k) {
    stepper.step(v, fwd, bwd, fwd1, bwd1, fwd2, bwd2);
    if (opts.dealias) dealias_two_thirds(v);
    if (anisotropic) {
      const double c_now = correction_rate(v);
      correction += 0.5 * opts.dt * (c_prev + c_now);
      c_prev = c_now;
    }
    if ((k + 1) % sample_every == 0 || k + 1 == n_steps) {
      const double t = (k + 1 == n_steps) ? opts.T : (k + 1) * opts.dt;
      if (!record(t)) {
        trace.blew_up = true;
        trace.blowup_time = t;
        break;
      }
      if (k + 1 == n_steps) break;
    }
  }
  return trace;
}

struct ConservationSummary {
  double mass_drift = 0.0;          // max relative
  double energy_drift = 0.0;        // max relative
  double angular_drift = 0.0;       // max absolute
  double max_identity_residual = 0.0;
};

inline ConservationSummary conservation_report(const EvolutionTrace& trace,
                                               const ModelParams& params) {
  (void)params;
  if (trace.times.empty()) throw std::invalid_argument("conservation_report: empty trace");
  ConservationSummary s;
  const double m0 = trace.mass_series.front();
  const double e0 = trace.energy_series.front();
  const double a0 = trace.angular_series.front();
  const double escale = std::max(std::abs(e0), 1e-12);
  for (std::size_t i = 0; i < trace.times.size(); ++i) {
    s.mass_drift = std::max(s.mass_drift, std::abs(trace.mass_series[i] - m0) / m0);
    s.energy_drift = std::max(s.energy_drift, std::abs(trace.energy_series[i] - e0) / escale);
    s.angular_drift = std::max(s.angular_drift, std::abs(trace.angular_series[i] - a0));
    s.max_identity_residual =
        std::max(s.max_identity_residual, std::abs(trace.momentum_identity_residual[i]));
  }
  return s;
}

enum class StabilityVerdict { StableAtScale, GrowthDetected };

struct StabilityReport {
  double delta = 0.0;
  double max_distance = 0.0;
  double initial_distance = 0.0;
  double ratio = 0.0;
  StabilityVerdict verdict = StabilityVerdict::StableAtScale;
  std::uint64_t seed = 0;
  std::vector<double> times;
  std::vector<double> distances;
  double max_h_gamma = 0.0;
};

/// Perturb a converged minimizer by a seeded band-limited random field of
/// relative size delta, evolve, and track the distance to the minimizer
/// modulo gauged translations and phase. The 10x threshold is an
/// implementation choice; the analytic statement is qualitative.
inline StabilityReport stability_experiment(const MinimizerResult& phi, double delta, double T,
                                            const ModelParams& params, std::uint64_t seed,
                                            double dt = 1e-3, int samples = 50) {
  if (!(delta <= 0.1)) throw std::invalid_argument("stability_experiment: delta must be <= 0.1");
  params.require_critical_rotation("stability_experiment");
  const double c = phi.mass;

  ComplexField u0 = phi.field;
  if (delta > 0.0) {
    ComplexField zeta = random_smooth_field(phi.field.grid_ptr(), seed);
    normalize_mass(zeta, c);
    axpy(cplx{delta, 0.0}, zeta, u0);
    normalize_mass(u0, c);
  }

  StabilityReport rep;
  rep.delta = delta;
  rep.seed = seed;

  std::optional<std::array<double, 2>> warm;
  auto measure = [&](double t, const ComplexField& state) {
    const ComplexField u =
        (t == 0.0) ? state : rotate_frame(state, t, params.omega);
    const auto d = symmetry_distance(u, phi.field, params, warm);
    warm = d.shift;
    rep.times.push_back(t);
    rep.distances.push_back(d.distance);
    rep.max_distance = std::max(rep.max_distance, d.distance);
  };

  PropagateOptions opts;
  opts.T = T;
  opts.dt = dt;
  opts.samples = samples;
  opts.method = PropagationMethod::RotatingFrame;
  opts.observer = measure;
  const EvolutionTrace trace = propagate(u0, params, opts);

  rep.initial_distance = rep.distances.empty() ? 0.0 : rep.distances.front();
  for (double h : trace.h_gamma_series) rep.max_h_gamma = std::max(rep.max_h_gamma, h);
  rep.ratio = delta > 0.0 ? rep.max_distance / delta : 0.0;
  const bool stable = !trace.blew_up && (delta == 0.0 || rep.max_distance <= 10.0 * delta);
  rep.verdict = stable ? StabilityVerdict::StableAtScale : StabilityVerdict::GrowthDetected;
  return rep;
}

enum class MonitorStatus { Pass, Fail, Skipped };

/// Global-existence certificate for supercritical data:
///   a = 2|E_gamma(u0)| + (1/2) H_gamma(u0), b = B M(u0)^{(4-(N-2)(p-1))/4},
/// PASS when H_gamma(u(t)) <= 2a along the trace; b < b0 is the threshold that
/// makes the bound self-consistent.
struct GlobalExistenceCheck {
  MonitorStatus status = MonitorStatus::Skipped;
  double a = 0.0, b = 0.0, b0 = 0.0;
  double max_h_gamma = 0.0;
  bool b_below_threshold = false;
};

inline GlobalExistenceCheck global_existence_monitor(const EvolutionTrace& trace,
                                                     const ModelParams& params) {
  GlobalExistenceCheck chk;
  if (!params.mass_supercritical()) return chk;  // Skipped
  if (trace.times.empty()) throw std::invalid_argument("global_existence_monitor: empty trace");
  const double e0 = trace.energy_series.front();
  const double h0 = trace.h_gamma_series.front();
  const double m0 = trace.mass_series.front();
  const double N = params.dim, p = params.p;
  chk.a = 2.0 * std::abs(e0) + 0.5 * h0;
  const double B = 4.0 * sharp_gn_constant(params.dim, p + 1.0) / (p + 1.0);
  chk.b = B * std::pow(m0, (4.0 - (N - 2.0) * (p - 1.0)) / 4.0);
  chk.b0 = 1.0 / (std::pow(2.0, N * (p - 1.0) / 4.0) * std::pow(chk.a, (N * (p - 1.0) - 4.0) / 4.0));
  chk.b_below_threshold = chk.b < chk.b0;
  for (double h : trace.h_gamma_series) chk.max_h_gamma = std::max(chk.max_h_gamma, h);
  chk.status = (chk.max_h_gamma <= 2.0 * chk.a + 1e-9) ? MonitorStatus::Pass : MonitorStatus::Fail;
  return chk;
}

}  // namespace rotwave
