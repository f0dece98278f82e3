#include <catch2/catch_amalgamated.hpp>

#include "rotwave/qsolver.hpp"
#include "support/oracles.hpp"

using namespace rotwave;
using Catch::Approx;

TEST_CASE("2D mass-critical profile: Townes-type mass and amplitude") {
  const RadialProfile prof = solve_ground_profile(2, 4.0);
  // One half of the Townes-soliton mass under the scaling Q(x) = R(sqrt(2) x).
  CHECK(prof.mass == Approx(5.85044).epsilon(1e-3));
  CHECK(prof.w0 > 1.0);
  CHECK(prof.values.back() < 1e-10 * prof.w0);  // decay-matched tail
  // strictly positive, strictly decreasing
  for (std::size_t i = 0; i + 1 < prof.values.size(); ++i) {
    CHECK(prof.values[i] > 0.0);
    CHECK(prof.values[i + 1] <= prof.values[i] + 1e-14);
  }
}

TEST_CASE("Pohozaev identities hold for every converged profile") {
  for (const auto& [N, r] : std::vector<std::pair<int, double>>{
           {2, 4.0}, {3, 10.0 / 3.0}, {3, 4.0}, {2, 3.0}}) {
    const RadialProfile prof = solve_ground_profile(N, r);
    INFO("N=" << N << " r=" << r);
    CHECK(prof.pohozaev_res1 < 1e-6);
    CHECK(prof.pohozaev_res2 < 1e-6);
  }
}

TEST_CASE("mass-critical Pohozaev ratios: grad_sq = N mass, lp = (N+2)/2 mass") {
  for (int N : {2, 3}) {
    const RadialProfile prof = solve_ground_profile(N, 2.0 + 4.0 / N);
    CHECK(prof.grad_sq == Approx(N * prof.mass).epsilon(1e-6));
    CHECK(prof.lp_norm == Approx((N + 2.0) / 2.0 * prof.mass).epsilon(1e-6));
  }
}

TEST_CASE("critical mass and the sharp constant identity") {
  for (int N : {2, 3}) {
    const double mq = critical_mass(N);
    const double cr = sharp_gn_constant(N, 2.0 + 4.0 / N);
    const double closed_form = (N + 2.0) / (2.0 * N) * std::pow(mq, -2.0 / N);
    INFO("N=" << N);
    CHECK(cr == Approx(closed_form).epsilon(1e-6));
  }
  CHECK(sharp_gn_constant(2, 4.0) == Approx(0.1709).epsilon(1e-3));
}

TEST_CASE("GN quotient of a Gaussian lies strictly below the sharp constant") {
  // J(f) = ||f||_4^4 / (||grad f||^2 ||f||^2) for f = e^{-r^2/2} in 2D:
  // closed forms: ||f||_4^4 = pi/2, ||grad f||^2 = pi, ||f||^2 = pi.
  const double quotient = (M_PI / 2.0) / (M_PI * M_PI);
  CHECK(quotient < sharp_gn_constant(2, 4.0));
}

TEST_CASE("profile quadratures are stable under mesh refinement") {
  const RadialProfile coarse = solve_ground_profile(2, 4.0, 1e-13, 30.0, 0.01);
  const RadialProfile fine = solve_ground_profile(2, 4.0, 1e-13, 30.0, 0.005);
  CHECK(std::abs(coarse.mass - fine.mass) < 1e-8);
  CHECK(std::abs(coarse.grad_sq - fine.grad_sq) < 1e-8);
}

TEST_CASE("solver rejects inadmissible exponents and dimensions") {
  CHECK_THROWS_AS(solve_ground_profile(2, 1.5), std::invalid_argument);
  CHECK_THROWS_AS(solve_ground_profile(3, 6.5), std::invalid_argument);
  CHECK_THROWS_AS(solve_ground_profile(1, 4.0), std::invalid_argument);
  CHECK_THROWS_AS(solve_ground_profile(2, 4.0, -1.0), std::invalid_argument);
}

TEST_CASE("radial interpolation reproduces the profile between nodes") {
  const RadialProfile prof = solve_ground_profile(2, 4.0);
  // interpolated mass via fine Simpson against the integrated quadrature
  const double mass_interp = oracles::radial_integral(
      [&](double r) {
        const double w = prof.value_at(r);
        return w * w;
      },
      2, prof.r_nodes.back(), 40000);
  CHECK(mass_interp == Approx(prof.mass).epsilon(1e-8));
}

TEST_CASE("independent gradient-flow oracle reproduces the 2D critical mass") {
  auto grid = build_grid(GridSpec{2, {8.0, 8.0}, {128, 128}});
  const double oracle = oracles::gn_quotient_flow_2d(grid);
  const double shooting = critical_mass(2);
  CHECK(oracle == Approx(shooting).epsilon(1e-3));
}
