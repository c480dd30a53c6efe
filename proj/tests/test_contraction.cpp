#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "polyattr/contraction.hpp"

using namespace polyattr::contraction;
using polyattr::solver::KernelFactor;
using polyattr::solver::SimParams;
using polyattr::spectral::SpectralSpace;
using polyattr::spectral::State;
using polyattr::spectral::zero_state;

namespace {

State random_state(const SpectralSpace& space, std::uint64_t seed,
                   double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  State s = zero_state(space);
  for (std::size_t j = 0; j < space.n_modes(); ++j) {
    s.a[j] = scale * gauss(rng) / static_cast<double>((j + 1) * (j + 1));
    s.b[j] = scale * gauss(rng) / static_cast<double>(j + 1);
  }
  return s;
}

SimParams bare_params(double dt = 1e-3) {
  SimParams params;
  params.k = 0.0;
  params.f = {0.0, 0.0};
  params.dt = dt;
  return params;
}

SimParams default_like(const SpectralSpace& space, double dt = 1e-3) {
  SimParams params = polyattr::solver::default_params(space);
  params.dt = dt;
  return params;
}

}  // namespace

TEST_CASE("identical pair: all diagnostics vanish") {
  const SpectralSpace space(std::numbers::pi, 8);
  const SimParams params = default_like(space);
  const State y = random_state(space, 5);
  const auto diag = pair_evolve(y, y, 0.2, space, params);
  for (double v : diag.Ez) CHECK(v == 0.0);
  CHECK(diag.rho1 == 0.0);
  CHECK(diag.rho2 == 0.0);
  CHECK(diag.velocity_integral == 0.0);
}

TEST_CASE("linear free pair: E_z constant") {
  const SpectralSpace space(std::numbers::pi, 8);
  const SimParams params = bare_params();
  const State y1 = random_state(space, 7);
  const State y2 = random_state(space, 8);
  const auto diag = pair_evolve(y1, y2, 1.0, space, params);
  for (double v : diag.Ez)
    CHECK(v == doctest::Approx(diag.Ez.front()).epsilon(1e-10));
}

TEST_CASE("pure damping pair: E_z non-increasing endpoint") {
  const SpectralSpace space(std::numbers::pi, 8);
  SimParams params = bare_params();
  params.k = 1.0;
  const State y1 = random_state(space, 9);
  const State y2 = random_state(space, 10);
  const auto diag = pair_evolve(y1, y2, 1.0, space, params);
  CHECK(diag.Ez.back() <= diag.Ez.front() + 1e-10);
}

TEST_CASE("energy identity residual") {
  const SpectralSpace space(std::numbers::pi, 8);

  SUBCASE("t = T gives exactly zero") {
    const SimParams params = default_like(space);
    const auto diag = pair_evolve(random_state(space, 1), random_state(space, 2),
                                  0.5, space, params);
    CHECK(energy_identity_residual(diag, diag.horizon()) == 0.0);
    CHECK_THROWS_AS(energy_identity_residual(diag, -1.0), std::domain_error);
    CHECK_THROWS_AS(energy_identity_residual(diag, diag.horizon() + 1.0),
                    std::domain_error);
  }

  SUBCASE("conservative pair: residual at tolerance") {
    const SimParams params = bare_params();
    const auto diag = pair_evolve(random_state(space, 3), random_state(space, 4),
                                  1.0, space, params);
    for (double t : {0.0, 0.25, 0.5})
      CHECK(std::abs(energy_identity_residual(diag, t)) <= 1e-10);
  }

  SUBCASE("order-2 self-convergence under dt halving") {
    const auto max_residual = [&](double dt) {
      const SimParams params = default_like(space, dt);
      const auto diag = pair_evolve(random_state(space, 5),
                                    random_state(space, 6), 1.0, space, params);
      double worst = 0.0;
      for (double t : {0.0, 0.2, 0.4, 0.6})
        worst = std::max(worst, std::abs(energy_identity_residual(diag, t)));
      return worst;
    };
    const double coarse = max_residual(4e-3);
    const double fine = max_residual(2e-3);
    CHECK(coarse / fine >= 3.0);
    CHECK(coarse / fine <= 5.0);
  }
}

TEST_CASE("cp_ratio spot values") {
  const double a1[] = {1.0};
  const double bm1[] = {-1.0};
  const double b0[] = {0.0};
  CHECK(cp_ratio(a1, bm1, 2.0) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(cp_ratio(a1, b0, 2.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(cp_ratio(a1, a1, 2.0) == -1.0);  // degenerate sentinel
}

TEST_CASE("estimate_cp converges to 1/4 for p = 2, dim = 1") {
  const double cp = estimate_cp(2.0, 1, 100000, 20240001);
  CHECK(cp >= 0.24);
  CHECK(cp <= 0.26);
}

TEST_CASE("sampled monotonicity ratios are non-negative") {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> gauss;
  for (double p : {1.0, 2.0, 3.0})
    for (std::size_t dim : {1u, 2u, 5u}) {
      const double cp_est = estimate_cp(p, dim, 2000, 4242);
      CHECK(cp_est >= 0.0);
      std::vector<double> a(dim), b(dim);
      for (int i = 0; i < 1000; ++i) {
        for (std::size_t j = 0; j < dim; ++j) {
          a[j] = gauss(rng);
          b[j] = gauss(rng);
        }
        const double r = cp_ratio(a, b, p);
        if (r >= 0.0) {
          // Monotonicity of s -> |s|^p s, and domination by the estimate.
          double sep = 0.0;
          for (std::size_t j = 0; j < dim; ++j)
            sep += (a[j] - b[j]) * (a[j] - b[j]);
          CHECK(r * std::pow(std::sqrt(sep), p + 2.0) >= -1e-15);
        }
      }
    }
}

TEST_CASE("planar estimate stays at 1/4 for p = 2") {
  // Any pair spans a plane, so dim = 2 sampling covers the constant used for
  // modal velocity differences.
  const double cp = estimate_cp(2.0, 2, 50000, 77);
  CHECK(cp >= 0.24);
  CHECK(cp <= 0.26);
}

TEST_CASE("velocity integral inequality") {
  const SpectralSpace space(std::numbers::pi, 8);

  SUBCASE("identical pair: zero on both sides") {
    const SimParams params = default_like(space);
    const auto diag = pair_evolve(random_state(space, 11), random_state(space, 11),
                                  0.5, space, params);
    const auto report = velocity_integral_check(diag, params, 0.25);
    CHECK(report.lhs == 0.0);
    CHECK(report.rhs == 0.0);
    CHECK(report.slack == 0.0);
    CHECK(!report.base_negative);
  }

  SUBCASE("pure damping pairs: slack >= -1e-8") {
    SimParams params = bare_params();
    params.k = 1.0;
    const double cp = estimate_cp(2.0, 2, 20000, 1);
    for (std::uint64_t seed : {21u, 22u, 23u}) {
      const State y1 = random_state(space, seed);
      State y2 = y1;
      for (double& v : y2.b) v = -v;  // antipodal velocities: tight pairing
      const auto diag = pair_evolve(y1, y2, 1.0, space, params);
      const auto report = velocity_integral_check(diag, params, cp);
      CHECK(report.slack >= -1e-8);
      CHECK(!report.base_negative);
    }
  }

  SUBCASE("negative base is flagged, not fatal") {
    PairDiagnostics diag;
    diag.times = {0.0, 0.5, 1.0};
    diag.Ez = {1.0, 1.5, 2.0};  // rising difference energy
    diag.fdiff_zt = {0.0, 0.0, 0.0};
    diag.psi_zt = {0.0, 0.0, 0.0};
    diag.zt_norm2 = {0.1, 0.1, 0.1};
    diag.velocity_integral = 0.1;
    SimParams params = default_like(space);
    const auto report = velocity_integral_check(diag, params, 0.25);
    CHECK(report.base_negative);
    CHECK(report.base < 0.0);
  }

  SUBCASE("20-pair default suite: slack >= -1e-6") {
    const SimParams params = default_like(space);
    const double cp = estimate_cp(params.p, 2, 20000, 1);
    for (std::uint64_t i = 0; i < 20; ++i) {
      const State y1 = random_state(space, 100 + i);
      State delta = random_state(space, 200 + i, 0.05);
      State y2 = y1;
      for (std::size_t j = 0; j < space.n_modes(); ++j) {
        y2.a[j] += delta.a[j];
        y2.b[j] += delta.b[j];
      }
      const auto diag = pair_evolve(y1, y2, 1.0, space, params);
      const auto report = velocity_integral_check(diag, params, cp);
      CHECK(report.slack >= -1e-6);
    }
  }
}

TEST_CASE("contraction report") {
  const SpectralSpace space(std::numbers::pi, 8);
  const SimParams params = default_like(space);
  const double cp = 0.25;

  SUBCASE("identical pair trivially satisfied") {
    const State y = random_state(space, 31);
    const auto report = contraction_report(y, y, 1.0, space, params, cp);
    CHECK(report.lhs == 0.0);
    CHECK(report.satisfied);
    CHECK(report.rho1 == 0.0);
    CHECK(report.rho2 == 0.0);
  }

  SUBCASE("pairs from the default ball satisfy the inequality") {
    for (std::uint64_t i = 0; i < 10; ++i) {
      const State y1 = random_state(space, 300 + i);
      const State y2 = random_state(space, 400 + i);
      const auto report = contraction_report(y1, y2, 1.0, space, params, cp);
      CHECK(report.satisfied);
      CHECK(report.rhs >= 0.0);
    }
  }

  SUBCASE("pseudometrics shrink along a homotopy sweep") {
    const State y1 = random_state(space, 51);
    const State dir = random_state(space, 52);
    double prev_rho1 = std::numeric_limits<double>::infinity();
    double prev_rho2 = std::numeric_limits<double>::infinity();
    for (int step = 0; step < 8; ++step) {
      const double scale = std::pow(0.5, step);
      State y2 = y1;
      for (std::size_t j = 0; j < space.n_modes(); ++j) {
        y2.a[j] += scale * dir.a[j];
        y2.b[j] += scale * dir.b[j];
      }
      const auto diag = pair_evolve(y1, y2, 0.5, space, params);
      CHECK(diag.rho1 <= prev_rho1 + 1e-15);
      CHECK(diag.rho2 <= prev_rho2 + 1e-15);
      prev_rho1 = diag.rho1;
      prev_rho2 = diag.rho2;
    }
    CHECK(prev_rho1 < 1e-2);
    CHECK(prev_rho2 < 1e-2);
  }
}

TEST_CASE("rho1 dominated by the kernel operator bound") {
  const SpectralSpace space(std::numbers::pi, 8);
  SimParams params = default_like(space);
  KernelFactor extra;
  extra.sigma = -0.03;
  extra.phi.assign(8, 0.0);
  extra.psi.assign(8, 0.0);
  extra.phi[2] = 1.0;
  extra.psi[1] = 1.0;
  params.kernel.push_back(extra);

  const double k_norm = polyattr::solver::kernel_l2_norm(params.kernel);
  CHECK(k_norm > 0.0);

  const auto diag = pair_evolve(random_state(space, 61), random_state(space, 62),
                                1.0, space, params);
  const double zt_l1 = trapezoid(diag.times, diag.zt_norm);
  CHECK(diag.rho1 <= k_norm * zt_l1 * (1.0 + 1e-12) + 1e-15);
}
