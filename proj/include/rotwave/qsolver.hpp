#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "rotwave/field.hpp"

namespace rotwave {

/// Positive radial ground state W of
///   -(1/2) Delta W + W - W^{r-1} = 0  on R^N,
/// i.e. W'' + (N-1) W'/r = 2 (W - W^{r-1}), computed by shooting on W(0).
/// Quadratures (mass, |grad|^2, L^r norm, second moment) are integrated along
/// with the ODE so they carry the integrator's accuracy.
struct RadialProfile {
  int dim = 2;
  double exponent = 4.0;  // r in W^{r-1}
  std::vector<double> r_nodes;
  std::vector<double> values;
  std::vector<double> derivs;
  double w0 = 0.0;               // W(0)
  double mass = 0.0;             // ||W||_2^2
  double grad_sq = 0.0;          // ||grad W||_2^2
  double lp_norm = 0.0;          // ||W||_r^r
  double second_moment = 0.0;    // int |x|^2 W^2
  double pohozaev_res1 = 0.0;    // pairing with W
  double pohozaev_res2 = 0.0;    // pairing with x . grad W
  int bisections = 0;

  /// Cubic Hermite interpolation; zero beyond the last node.
  double value_at(double r) const {
    if (r <= r_nodes.front()) return values.front();
    if (r >= r_nodes.back()) return 0.0;
    auto it = std::upper_bound(r_nodes.begin(), r_nodes.end(), r);
    const std::size_t k = static_cast<std::size_t>(it - r_nodes.begin()) - 1;
    const double h = r_nodes[k + 1] - r_nodes[k];
    const double t = (r - r_nodes[k]) / h;
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * values[k] + (t3 - 2 * t2 + t) * h * derivs[k] +
           (-2 * t3 + 3 * t2) * values[k + 1] + (t3 - t2) * h * derivs[k + 1];
  }
};

namespace qdetail {

enum class ShotOutcome { Overshoot, Undershoot, Decayed };

struct ShotResult {
  ShotOutcome outcome = ShotOutcome::Decayed;
  std::array<double, 4> quad{};  // mass, grad_sq, lp, second moment (radial, no surface factor)
  std::vector<double> r, w, wp;
};

// Cash-Karp embedded 4(5) pair.
struct RkStep {
  std::array<double, 6> k_w{}, k_u{};
};

template <typename Rhs>
inline bool rk45_step(const Rhs& rhs, double r, std::array<double, 6>& y, double h,
                      std::array<double, 6>& y_out, double& err) {
  static constexpr double a[6] = {0.0, 1.0 / 5, 3.0 / 10, 3.0 / 5, 1.0, 7.0 / 8};
  static constexpr double b[6][5] = {
      {},
      {1.0 / 5},
      {3.0 / 40, 9.0 / 40},
      {3.0 / 10, -9.0 / 10, 6.0 / 5},
      {-11.0 / 54, 5.0 / 2, -70.0 / 27, 35.0 / 27},
      {1631.0 / 55296, 175.0 / 512, 575.0 / 13824, 44275.0 / 110592, 253.0 / 4096}};
  static constexpr double c5[6] = {37.0 / 378, 0.0, 250.0 / 621, 125.0 / 594, 0.0, 512.0 / 1771};
  static constexpr double c4[6] = {2825.0 / 27648, 0.0,           18575.0 / 48384,
                                   13525.0 / 55296, 277.0 / 14336, 1.0 / 4};
  std::array<std::array<double, 6>, 6> k;
  for (int s = 0; s < 6; ++s) {
    std::array<double, 6> ys = y;
    for (int j = 0; j < s; ++j)
      for (int c = 0; c < 6; ++c) ys[c] += h * b[s][j] * k[j][c];
    if (!rhs(r + a[s] * h, ys, k[s])) return false;
  }
  err = 0.0;
  for (int c = 0; c < 6; ++c) {
    double y5 = y[c], y4 = y[c];
    for (int s = 0; s < 6; ++s) {
      y5 += h * c5[s] * k[s][c];
      y4 += h * c4[s] * k[s][c];
    }
    y_out[c] = y5;
    err = std::max(err, std::abs(y5 - y4));
  }
  return true;
}

/// Integrate one shot from the series start; classify overshoot/undershoot.
/// State: (W, W', mass, grad, lp, moment).
inline ShotResult integrate_shot(double s, int N, double rexp, double r_max, double h_max,
                                 bool record) {
  const double atol = 1e-14, rtol = 1e-12;
  auto rhs = [&](double r, const std::array<double, 6>& y, std::array<double, 6>& dy) -> bool {
    const double W = y[0], U = y[1];
    if (!std::isfinite(W) || std::abs(W) > 1e6) return false;
    const double Wr1 = (W > 0.0) ? std::pow(W, rexp - 1.0) : -std::pow(-W, rexp - 1.0);
    dy[0] = U;
    dy[1] = 2.0 * (W - Wr1) - (N - 1) * U / r;
    const double rn = std::pow(r, N - 1);
    dy[2] = W * W * rn;
    dy[3] = U * U * rn;
    const double aw = std::abs(W);
    dy[4] = std::pow(aw, rexp) * rn;
    dy[5] = r * r * W * W * rn;
    return true;
  };

  // Series start: W(r) = s + a r^2 + O(r^4) with a = (s - s^{r-1})/N handles
  // the coordinate singularity at r = 0.
  const double a2 = (s - std::pow(s, rexp - 1.0)) / N;
  const double r0 = 1e-6;
  double r = r0;
  std::array<double, 6> y{s + a2 * r0 * r0, 2.0 * a2 * r0, 0.0, 0.0, 0.0, 0.0};
  // quadrature contribution of [0, r0] is O(r0^N) and below rounding

  ShotResult res;
  if (record) {
    res.r.push_back(0.0);
    res.w.push_back(s);
    res.wp.push_back(0.0);
  }
  double h = 1e-4;
  while (r < r_max) {
    h = std::min({h, h_max, r_max - r});
    std::array<double, 6> ynew;
    double err = 0.0;
    if (!rk45_step(rhs, r, y, h, ynew, err)) {
      res.outcome = ShotOutcome::Undershoot;  // numeric blow-up counts as growth
      return res;
    }
    const double tol = atol + rtol * std::max(std::abs(y[0]), 1.0);
    if (err > tol) {
      h *= std::max(0.2, 0.9 * std::pow(tol / err, 0.25));
      continue;
    }
    r += h;
    y = ynew;
    if (err > 0.0) h *= std::min(5.0, 0.9 * std::pow(tol / err, 0.2));
    if (record) {
      res.r.push_back(r);
      res.w.push_back(y[0]);
      res.wp.push_back(y[1]);
    }
    if (y[0] < 0.0) {
      res.outcome = ShotOutcome::Overshoot;
      return res;
    }
    if (y[1] > 0.0 || y[0] > 1.5 * s) {
      res.outcome = ShotOutcome::Undershoot;
      return res;
    }
    // The bracket separation grows like e^{sqrt(2) r}, so the trajectory can
    // follow the decaying manifold only down to ~bracket_width/W. Stopping at
    // 1e-9 W(0) leaves a tail quadrature error ~ W(r*)^2 ~ 1e-16.
    if (y[0] < 1e-9 * s) break;
  }
  res.outcome = ShotOutcome::Decayed;
  res.quad = {y[2], y[3], y[4], y[5]};
  return res;
}

inline double surface_area(int N) {
  // |S^{N-1}|: 2 pi (N=2), 4 pi (N=3)
  return 2.0 * std::pow(std::numbers::pi, N / 2.0) / std::tgamma(N / 2.0);
}

}  // namespace qdetail

/// Shooting with bisection on W(0): overshoot = W crosses zero, undershoot =
/// W' turns positive. Admissible exponents: 2 < r < 2N/(N-2) (any r > 2 for
/// N = 2).
inline RadialProfile solve_ground_profile(int N, double rexp, double tol = 1e-13,
                                          double r_max = 30.0, double h_max = 0.01) {
  if (N < 2) throw std::invalid_argument("solve_ground_profile: N >= 2 required");
  if (!(rexp > 2.0) || (N >= 3 && !(rexp < 2.0 * N / (N - 2))))
    throw std::invalid_argument("solve_ground_profile: exponent out of the admissible range");
  if (!(tol > 0.0)) throw std::invalid_argument("solve_ground_profile: tol must be > 0");

  using qdetail::ShotOutcome;
  double lo = 1.0 + 1e-9;  // W(0) <= 1 cannot decay
  if (qdetail::integrate_shot(lo, N, rexp, r_max, h_max, false).outcome == ShotOutcome::Overshoot)
    throw std::runtime_error("solve_ground_profile: bracket failure at the lower end");
  double hi = 2.0;
  int grow = 0;
  while (qdetail::integrate_shot(hi, N, rexp, r_max, h_max, false).outcome !=
         ShotOutcome::Overshoot) {
    lo = hi;
    hi *= 2.0;
    if (++grow > 12)
      throw std::runtime_error("solve_ground_profile: no overshoot up to W(0) = " +
                               std::to_string(hi));
  }

  int iters = 0;
  while (hi - lo > tol * lo) {
    const double mid = 0.5 * (lo + hi);
    const auto out = qdetail::integrate_shot(mid, N, rexp, r_max, h_max, false).outcome;
    if (out == ShotOutcome::Decayed) break;  // on the manifold to working precision
    if (out == ShotOutcome::Overshoot)
      hi = mid;
    else
      lo = mid;
    if (++iters > 200) break;
  }

  const double s = 0.5 * (lo + hi);
  auto shot = qdetail::integrate_shot(s, N, rexp, r_max, h_max, true);
  if (shot.outcome != ShotOutcome::Decayed)
    throw std::runtime_error(
        "solve_ground_profile: converged bracket did not decay; bracket = [" + std::to_string(lo) +
        ", " + std::to_string(hi) + "]");

  RadialProfile prof;
  prof.dim = N;
  prof.exponent = rexp;
  prof.w0 = s;
  prof.r_nodes = std::move(shot.r);
  prof.values = std::move(shot.w);
  prof.derivs = std::move(shot.wp);

  // Decay matching: the shot tracks the decaying manifold down to ~1e-9 W(0)
  // before the unstable mode takes over; continue the mesh with the matched
  // asymptote A r^{-(N-1)/2} e^{-sqrt(2) r}. The appended mass is ~1e-18 and
  // is not added to the quadratures.
  {
    const double r_end = prof.r_nodes.back();
    const double w_end = prof.values.back();
    const double amp = w_end * std::pow(r_end, 0.5 * (N - 1)) * std::exp(std::numbers::sqrt2 * r_end);
    double r = r_end;
    while (prof.values.back() > 1e-13 * s && r < 2.0 * r_max) {
      r += 0.25;
      const double w = amp * std::pow(r, -0.5 * (N - 1)) * std::exp(-std::numbers::sqrt2 * r);
      prof.r_nodes.push_back(r);
      prof.values.push_back(w);
      prof.derivs.push_back(w * (-std::numbers::sqrt2 - 0.5 * (N - 1) / r));
    }
  }

  const double area = qdetail::surface_area(N);
  prof.mass = area * shot.quad[0];
  prof.grad_sq = area * shot.quad[1];
  prof.lp_norm = area * shot.quad[2];
  prof.second_moment = area * shot.quad[3];
  prof.bisections = iters;

  // Pairing with W:        (1/2)||grad W||^2 + ||W||^2 - ||W||_r^r = 0
  // Pairing with x.grad W: ((N-2)/2)||grad W||^2 + N ||W||^2 - (2N/r)||W||_r^r = 0
  const double n1 = 0.5 * prof.grad_sq + prof.mass - prof.lp_norm;
  const double d1 = 0.5 * prof.grad_sq + prof.mass + prof.lp_norm;
  prof.pohozaev_res1 = std::abs(n1) / d1;
  const double n2 = 0.5 * (N - 2) * prof.grad_sq + N * prof.mass - 2.0 * N / rexp * prof.lp_norm;
  const double d2 = 0.5 * (N - 2) * prof.grad_sq + N * prof.mass + 2.0 * N / rexp * prof.lp_norm;
  prof.pohozaev_res2 = std::abs(n2) / d2;
  return prof;
}

/// M(Q): mass of the ground state at the mass-critical exponent r = 2 + 4/N.
inline double critical_mass(int N) {
  static std::mutex mu;
  static std::map<int, double> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(N);
  if (it != cache.end()) return it->second;
  const double m = solve_ground_profile(N, 2.0 + 4.0 / N).mass;
  cache.emplace(N, m);
  return m;
}

/// Sharp Gagliardo-Nirenberg constant: the quotient
///   ||W||_r^r / (||grad W||^{N(r-2)/2} ||W||^{(2r - N(r-2))/2})
/// evaluated at the optimizer W.
inline double sharp_gn_constant(int N, double rexp) {
  const RadialProfile prof = solve_ground_profile(N, rexp);
  const double alpha = N * (rexp - 2.0) / 2.0;
  const double beta = (2.0 * rexp - N * (rexp - 2.0)) / 2.0;
  return prof.lp_norm /
         (std::pow(std::sqrt(prof.grad_sq), alpha) * std::pow(std::sqrt(prof.mass), beta));
}

/// Field W(lambda |x|) sampled on a grid (radial in all N coordinates).
inline ComplexField sample_radial(const RadialProfile& prof, std::shared_ptr<const Grid> grid,
                                  double lambda = 1.0) {
  const Grid& g = *grid;
  ComplexField f(grid);
  for (std::size_t i = 0; i < f.size(); ++i) {
    double r2 = 0.0;
    for (int j = 0; j < g.dim(); ++j) {
      const double x = g.coords(j)[g.axis_index(i, j)];
      r2 += x * x;
    }
    f[i] = prof.value_at(lambda * std::sqrt(r2));
  }
  return f;
}

}  // namespace rotwave
