#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "polyattr/rates.hpp"

using namespace polyattr::rates;

namespace {

// For beta = 1/2, C = 1/3 the map is q(s) = s^2 + s, whose inverse has the
// closed form below.  The generic inverter must reproduce it; it is never
// special-cased in the implementation.
double quadratic_inverse(double y) { return 0.5 * (-1.0 + std::sqrt(1.0 + 4.0 * y)); }

const DecayParams kQuadratic{0.5, 1.0 / 3.0, 1.0};

const double kBetaGrid[] = {0.3, 0.5, 0.7};
const double kCGrid[] = {0.5, 1.0, 5.0};

}  // namespace

TEST_CASE("eval_q closed forms") {
  CHECK(eval_q(0.0, kQuadratic) == 0.0);
  CHECK(eval_q(2.0, kQuadratic) == doctest::Approx(6.0).epsilon(1e-15));
  CHECK(eval_q(1.0, kQuadratic) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK_THROWS_AS(eval_q(-1.0, kQuadratic), std::domain_error);
  CHECK_THROWS_AS(eval_q(1.0, DecayParams{1.5, 1.0, 1.0}), std::domain_error);
  CHECK_THROWS_AS(eval_q(1.0, DecayParams{0.5, -1.0, 1.0}), std::domain_error);
}

TEST_CASE("eval_q strictly increasing") {
  for (double beta : kBetaGrid)
    for (double c : kCGrid) {
      const DecayParams p{beta, c, 1.0};
      double prev = 0.0;
      for (double s = 0.125; s <= 16.0; s *= 2.0) {
        const double v = eval_q(s, p);
        CHECK(v > prev);
        prev = v;
      }
    }
}

TEST_CASE("eval_w inverts the quadratic case") {
  CHECK(eval_w(0.0, kQuadratic) == 0.0);
  CHECK(eval_w(6.0, kQuadratic) == doctest::Approx(2.0).epsilon(1e-12));
  const double golden = 0.5 * (std::sqrt(5.0) - 1.0);
  CHECK(eval_w(1.0, kQuadratic) == doctest::Approx(golden).epsilon(1e-12));
}

TEST_CASE("q(w(y)) round trip over the log grid") {
  for (double beta : kBetaGrid)
    for (double c : kCGrid) {
      const DecayParams p{beta, c, 1.0};
      for (double y = 1e-8; y <= 1.0001e8; y *= 10.0) {
        const double w = eval_w(y, p);
        CHECK(std::abs(eval_q(w, p) - y) <= 1e-10 * std::max(1.0, y));
        CHECK(w < y);
      }
    }
}

TEST_CASE("w monotone increasing") {
  for (double beta : kBetaGrid)
    for (double c : kCGrid) {
      const DecayParams p{beta, c, 1.0};
      double prev = 0.0;
      for (double y = 0.01; y <= 100.0; y *= 1.7) {
        const double w = eval_w(y, p);
        CHECK(w > prev);
        prev = w;
      }
    }
}

TEST_CASE("iterate_w reproduces the quadratic trace") {
  const auto trace = iterate_w(6.0, 3, kQuadratic);
  REQUIRE(trace.y.size() == 4);
  CHECK(trace.y[0] == 6.0);
  CHECK(trace.y[1] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(trace.y[2] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(trace.y[3] ==
        doctest::Approx(0.5 * (std::sqrt(5.0) - 1.0)).epsilon(1e-12));
}

TEST_CASE("iterate_w zero seed stays zero") {
  const auto trace = iterate_w(0.0, 5, kQuadratic);
  for (double v : trace.y) CHECK(v == 0.0);
}

TEST_CASE("one application strictly contracts") {
  for (double beta : kBetaGrid)
    for (double c : kCGrid) {
      const DecayParams p{beta, c, 1.0};
      for (double y0 : {0.1, 1.0, 10.0}) {
        const auto trace = iterate_w(y0, 1, p);
        CHECK(trace.y[1] < y0);
      }
    }
}

TEST_CASE("find_n0 quadratic case lands at 3") {
  // Differences 4, 1, 0.382...: the exact boundary hit at 1 must not qualify.
  auto trace = iterate_w(6.0, 3, kQuadratic);
  CHECK(find_n0(trace) == 3);
  CHECK(trace.n0 == 3);
  REQUIRE(trace.bound.size() == trace.y.size());
  for (std::size_t n = trace.n0; n < trace.y.size(); ++n)
    CHECK(trace.y[n] <= trace.bound[n] * (1.0 + 1e-12));
}

TEST_CASE("find_n0 first difference qualifying") {
  auto trace = iterate_w(0.5, 3, kQuadratic);
  CHECK(find_n0(trace) == 1);
}

TEST_CASE("find_n0 zero trace returns 0") {
  auto trace = iterate_w(0.0, 3, kQuadratic);
  CHECK(find_n0(trace) == 0);
}

TEST_CASE("find_n0 extends short traces on demand") {
  auto trace = iterate_w(1e6, 1, kQuadratic);
  const std::size_t n0 = find_n0(trace);
  CHECK(trace.y.size() >= n0 + 3);
  for (std::size_t m = n0; m + 1 < trace.y.size(); ++m) {
    const double d = trace.y[m] - trace.y[m + 1];
    CHECK(d > 0.0);
    CHECK(d < 1.0);
  }
}

TEST_CASE("closed_form_bound endpoint and derived value") {
  const double golden = 0.5 * (std::sqrt(5.0) - 1.0);
  CHECK(closed_form_bound(3, 3, golden, kQuadratic) == golden);

  // Direct evaluation: [(1)(1)(2)^-2 + golden^-1]^-1.
  const double expected = 1.0 / (0.25 + 1.0 / golden);
  CHECK(closed_form_bound(4, 3, golden, kQuadratic) ==
        doctest::Approx(expected).epsilon(1e-13));
  CHECK_THROWS_AS(closed_form_bound(2, 3, golden, kQuadratic),
                  std::domain_error);
}

TEST_CASE("closed_form_bound asymptotic order") {
  // bound(n) * n^(1/beta - 1) tends to a positive constant.
  const DecayParams p{0.5, 1.0, 1.0};
  const double order = p.beta / (p.beta - 1.0);
  const double b1 = closed_form_bound(1000, 0, 1.0, p);
  const double b2 = closed_form_bound(2000, 0, 1.0, p);
  CHECK(b2 / b1 == doctest::Approx(std::pow(2.0, order)).epsilon(1e-2));
}

TEST_CASE("sequence dominated by the closed-form bound") {
  for (double beta : kBetaGrid)
    for (double c : kCGrid)
      for (double y0 : {0.1, 1.0, 10.0}) {
        const DecayParams p{beta, c, 1.0};
        auto trace = iterate_w(y0, 60, p);
        const std::size_t n0 = find_n0(trace);
        double prev = trace.y.front();
        for (std::size_t n = 1; n < trace.y.size(); ++n) {
          if (trace.y[n] > 0.0) CHECK(trace.y[n] < prev);
          prev = trace.y[n];
        }
        for (std::size_t n = n0; n < trace.y.size(); ++n)
          CHECK(trace.y[n] <=
                closed_form_bound(n, n0, trace.y[n0], p) * (1.0 + 1e-12));
      }
}

TEST_CASE("alpha_decay_bound endpoints and derived value") {
  const std::size_t n0 = 2;
  const double alpha0 = 1.0;
  const double threshold = (static_cast<double>(n0) + 1.0) * kQuadratic.bigT;
  CHECK(alpha_decay_bound(threshold, n0, alpha0, kQuadratic) == 2.0 * alpha0);

  // One sampling period past the threshold: 2 (1/4 + 1)^(-1/2).
  const double expected = 2.0 * std::pow(1.25, -0.5);
  CHECK(alpha_decay_bound(threshold + kQuadratic.bigT, n0, alpha0, kQuadratic) ==
        doctest::Approx(expected).epsilon(1e-13));
  CHECK_THROWS_AS(alpha_decay_bound(threshold - 0.5, n0, alpha0, kQuadratic),
                  std::domain_error);
}

TEST_CASE("alpha_decay_bound non-increasing, continuous, vanishing") {
  for (double beta : kBetaGrid)
    for (double c : kCGrid) {
      const DecayParams p{beta, c, 2.0};
      const std::size_t n0 = 1;
      const double threshold = 2.0 * p.bigT;
      double prev = alpha_decay_bound(threshold, n0, 1.5, p);
      CHECK(prev == 3.0);
      // Continuity at the threshold.
      CHECK(alpha_decay_bound(threshold + 1e-9, n0, 1.5, p) ==
            doctest::Approx(3.0).epsilon(1e-6));
      for (double t = threshold; t <= threshold + 1000.0; t += 7.3) {
        const double v = alpha_decay_bound(t, n0, 1.5, p);
        CHECK(v <= prev * (1.0 + 1e-14));
        prev = v;
      }
      // Slow polynomial tails: huge horizons before the bound gets small.
      CHECK(alpha_decay_bound(threshold + 1e20, n0, 1.5, p) < 1e-2);
    }
}
