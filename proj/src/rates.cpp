#include "polyattr/rates.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace polyattr::rates {

namespace {

// A difference exactly on the boundary of (0,1) must not qualify; in floating
// point "exactly 1" lands within a few ulps, so we keep a small guard band and
// advance N0 past such hits.  Larger N0 is always a valid choice.
constexpr double kBoundaryGuard = 1e-9;

// Extension cap for find_n0; qualifying differences appear after a handful of
// steps for any valid parameters, so hitting this means broken inputs.
constexpr std::size_t kMaxTraceLength = 100000;

double coeff_3c(const DecayParams& p) {
  return std::pow(3.0 * p.bigC, -1.0 / p.beta);
}

bool diff_qualifies(double d) {
  return d > 0.0 && d < 1.0 - kBoundaryGuard;
}

}  // namespace

void DecayParams::validate() const {
  if (!(beta > 0.0 && beta < 1.0))
    throw std::domain_error("DecayParams: beta must lie in (0,1)");
  if (!(bigC > 0.0)) throw std::domain_error("DecayParams: C must be positive");
  if (!(bigT > 0.0)) throw std::domain_error("DecayParams: T must be positive");
}

double eval_q(double s, const DecayParams& p) {
  p.validate();
  if (s < 0.0) throw std::domain_error("eval_q: s must be non-negative");
  if (s == 0.0) return 0.0;
  return coeff_3c(p) * std::pow(s, 1.0 / p.beta) + s;
}

double eval_w(double y, const DecayParams& p) {
  p.validate();
  if (y < 0.0) throw std::domain_error("eval_w: y must be non-negative");
  if (y == 0.0) return 0.0;

  const double c = coeff_3c(p);
  const double inv_beta = 1.0 / p.beta;
  const auto residual = [&](double s) {
    return c * std::pow(s, inv_beta) + s - y;
  };

  // q(s) >= s, so the root lies in [0, y].
  double lo = 0.0, hi = y;
  double s = 0.5 * (lo + hi);
  const double floor_abs = 1e-14;
  const int max_iter = 200;
  int used = 0;
  for (; used < max_iter; ++used) {
    s = 0.5 * (lo + hi);
    const double r = residual(s);
    if (r > 0.0)
      hi = s;
    else
      lo = s;
    if (hi - lo <= floor_abs * std::max(1.0, y)) break;
  }

  // Newton polishing; q' >= 1 everywhere, so the update is well conditioned.
  for (int i = 0; i < 8 && used < max_iter; ++i, ++used) {
    const double r = residual(s);
    const double dq = c * inv_beta * std::pow(s, inv_beta - 1.0) + 1.0;
    const double next = s - r / dq;
    if (next <= lo || next >= hi) break;
    s = next;
  }

  if (std::abs(residual(s)) > 1e-10 * std::max(1.0, y))
    throw std::runtime_error("eval_w: inversion did not converge");
  return s;
}

IterationTrace iterate_w(double y0, std::size_t n, const DecayParams& p) {
  p.validate();
  if (y0 < 0.0) throw std::domain_error("iterate_w: y0 must be non-negative");
  if (n < 1) throw std::domain_error("iterate_w: n must be at least 1");

  IterationTrace trace;
  trace.params = p;
  trace.y.reserve(n + 1);
  trace.y.push_back(y0);
  for (std::size_t k = 1; k <= n; ++k)
    trace.y.push_back(eval_w(trace.y.back(), p));
  return trace;
}

std::size_t find_n0(IterationTrace& trace) {
  const DecayParams& p = trace.params;
  p.validate();
  if (trace.y.empty()) throw std::domain_error("find_n0: empty trace");

  if (trace.y.front() == 0.0) {
    trace.n0 = 0;
    trace.has_n0 = true;
    trace.bound.assign(trace.y.size(), 0.0);
    return 0;
  }

  // Grow until the last three differences all qualify.  The differences are
  // not provably monotone, so demand a stability window instead of trusting
  // the first qualifying index.
  auto tail_qualifies = [&]() {
    const std::size_t len = trace.y.size();
    if (len < 4) return false;
    for (std::size_t m = len - 3; m < len; ++m)
      if (!diff_qualifies(trace.y[m - 1] - trace.y[m])) return false;
    return true;
  };
  while (!tail_qualifies()) {
    if (trace.y.size() >= kMaxTraceLength)
      throw std::runtime_error("find_n0: no qualifying window found");
    trace.y.push_back(eval_w(trace.y.back(), p));
  }

  // Smallest n with every computed difference from n on qualifying.
  std::size_t n0 = 1;
  for (std::size_t m = 1; m < trace.y.size(); ++m)
    if (!diff_qualifies(trace.y[m - 1] - trace.y[m])) n0 = m + 1;

  trace.n0 = n0;
  trace.has_n0 = true;
  trace.bound.assign(trace.y.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t n = n0; n < trace.y.size(); ++n)
    trace.bound[n] = closed_form_bound(n, n0, trace.y[n0], p);
  return n0;
}

double closed_form_bound(std::size_t n, std::size_t n0, double y_n0,
                         const DecayParams& p) {
  p.validate();
  if (n < n0) throw std::domain_error("closed_form_bound: n < n0");
  if (y_n0 < 0.0)
    throw std::domain_error("closed_form_bound: y_n0 must be non-negative");
  if (y_n0 == 0.0) return 0.0;
  if (n == n0) return y_n0;

  const double slope = (1.0 / p.beta - 1.0) * std::pow(1.0 + 3.0 * p.bigC, -1.0 / p.beta);
  const double base = static_cast<double>(n - n0) * slope +
                      std::pow(y_n0, 1.0 - 1.0 / p.beta);
  return std::pow(base, p.beta / (p.beta - 1.0));
}

double alpha_decay_bound(double t, std::size_t n0, double alpha0,
                         const DecayParams& p) {
  p.validate();
  if (alpha0 < 0.0)
    throw std::domain_error("alpha_decay_bound: alpha0 must be non-negative");
  const double elapsed = (t - (static_cast<double>(n0) + 1.0) * p.bigT) / p.bigT;
  if (elapsed < 0.0)
    throw std::domain_error("alpha_decay_bound: t below (N0+1)T");
  if (elapsed == 0.0 || alpha0 == 0.0) return 2.0 * alpha0;

  const double slope = (1.0 / p.beta - 1.0) * std::pow(1.0 + 3.0 * p.bigC, -1.0 / p.beta);
  const double base = elapsed * slope +
                      std::pow(alpha0, 2.0 * (p.beta - 1.0) / p.beta);
  return 2.0 * std::pow(base, p.beta / (2.0 * (p.beta - 1.0)));
}

}  // namespace polyattr::rates
