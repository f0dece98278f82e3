#pragma once

#include <cstdint>
#include <random>

#include "rotwave/fft.hpp"
#include "rotwave/field.hpp"

namespace rotwave {

/// Band-limited Gaussian random fields: complex-normal Fourier coefficients
/// with a Gaussian spectral envelope, hard cutoff at half-Nyquist, multiplied
/// by a Gaussian spatial envelope so the samples decay below rounding at the
/// box boundary. Seed-reproducible (coefficients drawn in linear index order).
struct RandomFieldOptions {
  double spectral_sigma = 2.0;   // envelope exp(-|xi|^2 / (2 sigma^2))
  double envelope_fraction = 0.15;  // spatial width = fraction * L; 0.15 L keeps
                                    // the boundary amplitude below ~3e-10
  bool real_valued = false;
};

inline ComplexField random_smooth_field(std::shared_ptr<const Grid> grid, std::uint64_t seed,
                                        const RandomFieldOptions& opts = {}) {
  const Grid& g = *grid;
  ComplexField f(grid);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t i = 0; i < f.size(); ++i) {
    bool in_band = true;
    double xi2 = 0.0;
    for (int j = 0; j < g.dim(); ++j) {
      const int k = g.axis_index(i, j);
      const int n = g.points(j);
      const int m = (k < n / 2) ? k : k - n;
      if (std::abs(m) > n / 4) in_band = false;  // half of the Nyquist index n/2
      const double xi = g.wavenumbers(j)[k];
      xi2 += xi * xi;
    }
    const double re = normal(rng);
    const double im = normal(rng);
    if (!in_band) continue;
    const double amp = std::exp(-0.5 * xi2 / (opts.spectral_sigma * opts.spectral_sigma));
    f[i] = cplx{re, im} * amp;
  }
  fft::backward(f);
  for (std::size_t i = 0; i < f.size(); ++i) {
    double e = 0.0;
    for (int j = 0; j < g.dim(); ++j) {
      const double x = g.coords(j)[g.axis_index(i, j)];
      const double w = opts.envelope_fraction * g.half_width(j);
      e += x * x / (2.0 * w * w);
    }
    f[i] *= std::exp(-e);
    if (opts.real_valued) f[i] = cplx{f[i].real(), 0.0};
  }
  return f;
}

/// Random field rescaled to unit mass.
inline ComplexField random_unit_mass_field(std::shared_ptr<const Grid> grid, std::uint64_t seed,
                                           const RandomFieldOptions& opts = {}) {
  ComplexField f = random_smooth_field(std::move(grid), seed, opts);
  normalize_mass(f, 1.0);
  return f;
}

}  // namespace rotwave
