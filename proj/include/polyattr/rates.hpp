// Abstract polynomial-decay engine: the auxiliary function q, its inverse w,
// the n-fold iteration y(n) = w(y(n-1)), the threshold index N0 and the two
// closed-form polynomial bounds that dominate the iteration tail.
#pragma once

#include <cstddef>
#include <vector>

namespace polyattr::rates {

/// Parameter triple (beta, C, T) of the discrete decay machinery.
/// beta in (0,1); bigC, bigT positive.
struct DecayParams {
  double beta;
  double bigC;
  double bigT;

  /// Throws std::domain_error when any range constraint is violated.
  void validate() const;
};

/// One run of the w-iteration together with its threshold index and the
/// closed-form bound values from that index on.
struct IterationTrace {
  DecayParams params{};
  std::vector<double> y;      // y(0..n), non-increasing
  std::size_t n0 = 0;         // valid after find_n0
  std::vector<double> bound;  // bound[i] dominates y[i] for i >= n0; empty before

  bool has_n0 = false;
};

/// q(s) = (3C)^(-1/beta) s^(1/beta) + s.  Strictly increasing, q(0) = 0.
double eval_q(double s, const DecayParams& p);

/// Inverse of q on [0, inf): the unique w with q(w) = y, computed by
/// bisection on [0, y] (valid since q(s) >= s) plus Newton polishing.
/// Relative residual |q(w) - y| <= 1e-10 * max(1, y).
double eval_w(double y, const DecayParams& p);

/// y(0) = y0, y(k) = w(y(k-1)) for k = 1..n.
IterationTrace iterate_w(double y0, std::size_t n, const DecayParams& p);

/// Smallest n such that every computed difference y(m-1) - y(m), m >= n,
/// lies strictly inside (0, 1).  Extends the trace on demand until the
/// condition has held for three consecutive indices; fills trace.bound.
/// Returns 0 for the all-zero trace.
std::size_t find_n0(IterationTrace& trace);

/// Closed-form tail bound
///   [(n - n0)(1/beta - 1)(1 + 3C)^(-1/beta) + y_n0^(1 - 1/beta)]^(beta/(beta-1)).
/// Equals y_n0 at n = n0 and decays like n^(beta/(beta-1)).
double closed_form_bound(std::size_t n, std::size_t n0, double y_n0,
                         const DecayParams& p);

/// Continuous-time noncompactness decay bound
///   2[(t/T - N0 - 1)(1/beta - 1)(1 + 3C)^(-1/beta)
///     + alpha0^(2(beta-1)/beta)]^(beta/(2(beta-1))),
/// valid for t >= (N0 + 1) T; equals 2 alpha0 at the left endpoint.
double alpha_decay_bound(double t, std::size_t n0, double alpha0,
                         const DecayParams& p);

}  // namespace polyattr::rates
