#include "polyattr/contraction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace polyattr::contraction {

namespace {

double dot(std::span<const double> x, std::span<const double> y) {
  double acc = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) acc += x[j] * y[j];
  return acc;
}

double norm(std::span<const double> x) { return std::sqrt(dot(x, x)); }

}  // namespace

double trapezoid(const std::vector<double>& times, const std::vector<double>& values) {
  double acc = 0.0;
  for (std::size_t i = 1; i < times.size(); ++i)
    acc += 0.5 * (times[i] - times[i - 1]) * (values[i] + values[i - 1]);
  return acc;
}

double trapezoid_tail_double(const std::vector<double>& times,
                             const std::vector<double>& values) {
  double acc = 0.0;
  for (std::size_t i = 1; i < times.size(); ++i)
    acc += 0.5 * (times[i] - times[i - 1]) *
           (times[i] * values[i] + times[i - 1] * values[i - 1]);
  return acc;
}

PairDiagnostics pair_evolve(const State& y1, const State& y2, double horizon,
                            const SpectralSpace& space, const SimParams& params,
                            std::size_t record_every) {
  params.validate(space);
  if (y1.a.size() != space.n_modes() || y2.a.size() != space.n_modes())
    throw std::invalid_argument("pair_evolve: states not on the given space");
  if (record_every == 0) record_every = 1;

  const auto n_steps =
      static_cast<std::size_t>(std::llround(horizon / params.dt));

  PairDiagnostics diag;
  diag.k_used = params.k;
  State w = y1;
  State v = y2;
  const std::size_t n = space.n_modes();
  std::vector<double> z(n), zt(n), fw(n), fv(n), fdiff(n), psi(n);

  const auto record = [&](const State& ws, const State& vs) {
    for (std::size_t j = 0; j < n; ++j) {
      z[j] = ws.a[j] - vs.a[j];
      zt[j] = ws.b[j] - vs.b[j];
    }
    const auto& lam = space.eigenvalues();
    double grad2 = 0.0;
    for (std::size_t j = 0; j < n; ++j) grad2 += lam[j] * z[j] * z[j];
    const double zt2 = dot(zt, zt);

    diag.times.push_back(ws.time);
    diag.Ez.push_back(0.5 * (zt2 + grad2));
    diag.zt_norm2.push_back(zt2);
    diag.zt_norm.push_back(std::sqrt(zt2));
    diag.z_norm.push_back(norm(z));

    // (|w_t|^p w_t - |v_t|^p v_t, .) pairings.
    const double wt_norm = spectral::norm_ut(ws);
    const double vt_norm = spectral::norm_ut(vs);
    const double wt_scale = std::pow(wt_norm, params.p);
    const double vt_scale = std::pow(vt_norm, params.p);
    double pair_zt = 0.0, pair_z = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double diff = wt_scale * ws.b[j] - vt_scale * vs.b[j];
      pair_zt += diff * zt[j];
      pair_z += diff * z[j];
    }
    diag.damp_pair_zt.push_back(pair_zt);
    diag.damp_pair_z.push_back(pair_z);

    solver::project_nonlinearity(ws, space, params.f, fw);
    solver::project_nonlinearity(vs, space, params.f, fv);
    for (std::size_t j = 0; j < n; ++j) fdiff[j] = fw[j] - fv[j];
    diag.fdiff_zt.push_back(dot(fdiff, zt));
    diag.fdiff_z.push_back(dot(fdiff, z));

    solver::apply_kernel(params.kernel, zt, psi);
    diag.psi_zt.push_back(dot(psi, zt));
    diag.psi_z.push_back(dot(psi, z));
    diag.psi_norm.push_back(norm(psi));
    diag.zt_dot_z.push_back(dot(zt, z));

    const double ball = std::max(spectral::energy_norm(ws, space),
                                 spectral::energy_norm(vs, space));
    diag.ball_norm_bound = std::max(diag.ball_norm_bound, ball);
  };

  const solver::Stepper stepper(space, params);
  record(w, v);
  for (std::size_t i = 1; i <= n_steps; ++i) {
    stepper.advance(w);
    stepper.advance(v);
    if (i % record_every == 0 || i == n_steps) record(w, v);
  }

  diag.rho1 = trapezoid(diag.times, diag.psi_norm);
  diag.rho2 = *std::max_element(diag.z_norm.begin(), diag.z_norm.end());
  diag.velocity_integral = trapezoid(diag.times, diag.zt_norm2);
  return diag;
}

double energy_identity_residual(const PairDiagnostics& diag, double t) {
  if (diag.times.empty())
    throw std::domain_error("energy_identity_residual: empty diagnostics");
  const double t0 = diag.times.front();
  const double t_end = diag.times.back();
  const double step = diag.times.size() > 1 ? diag.times[1] - diag.times[0] : 1.0;
  if (t < t0 - 0.5 * step || t > t_end + 0.5 * step)
    throw std::domain_error("energy_identity_residual: t outside the window");

  // Nearest stored sample.
  std::size_t idx = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < diag.times.size(); ++i) {
    const double d = std::abs(diag.times[i] - t);
    if (d < best) {
      best = d;
      idx = i;
    }
  }

  double damp = 0.0, fdiff = 0.0, psi = 0.0;
  for (std::size_t i = idx + 1; i < diag.times.size(); ++i) {
    const double h = diag.times[i] - diag.times[i - 1];
    damp += 0.5 * h * (diag.damp_pair_zt[i] + diag.damp_pair_zt[i - 1]);
    fdiff += 0.5 * h * (diag.fdiff_zt[i] + diag.fdiff_zt[i - 1]);
    psi += 0.5 * h * (diag.psi_zt[i] + diag.psi_zt[i - 1]);
  }
  return diag.Ez[idx] - diag.Ez.back() - diag.k_used * damp - fdiff + psi;
}

double cp_ratio(std::span<const double> a, std::span<const double> b, double p) {
  const double na = norm(a);
  const double nb = norm(b);
  double sep2 = 0.0, inner = 0.0;
  const double sa = std::pow(na, p);
  const double sb = std::pow(nb, p);
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double d = a[j] - b[j];
    sep2 += d * d;
    inner += (sa * a[j] - sb * b[j]) * d;
  }
  const double sep = std::sqrt(sep2);
  if (sep <= 1e-12 * std::max({na, nb, 1.0})) return -1.0;
  return inner / std::pow(sep, p + 2.0);
}

double estimate_cp(double p, std::size_t dim, std::size_t n_samples,
                   std::uint64_t seed) {
  if (dim < 1) throw std::domain_error("estimate_cp: dim must be >= 1");
  if (n_samples < 1) throw std::domain_error("estimate_cp: need samples");
  if (!(p > 0.0)) throw std::domain_error("estimate_cp: p must be positive");

  double best = std::numeric_limits<double>::infinity();
  const auto consider = [&](std::span<const double> a, std::span<const double> b) {
    const double r = cp_ratio(a, b, p);
    if (r >= 0.0) best = std::min(best, r);
  };

  std::vector<double> a(dim, 0.0), b(dim, 0.0);

  // Deterministic stress pairs along the first axis.
  a[0] = 1.0;
  b[0] = -1.0;
  consider(a, b);  // antipodal, the p = 2 minimizer
  b[0] = 1.0 + 1e-8;
  consider(a, b);  // near-equal
  b[0] = 0.0;
  consider(a, b);  // against the origin
  if (dim >= 2) {
    b[0] = 0.0;
    b[1] = 1.0;
    consider(a, b);  // orthogonal
    b[1] = 0.0;
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> log_scale(-2.0, 2.0);
  for (std::size_t i = 0; i < n_samples; ++i) {
    const double scale_a = std::exp(log_scale(rng));
    const double scale_b = std::exp(log_scale(rng));
    for (std::size_t j = 0; j < dim; ++j) {
      a[j] = scale_a * gauss(rng);
      b[j] = scale_b * gauss(rng);
    }
    consider(a, b);
  }
  return best;
}

VelocityIntegralReport velocity_integral_check(const PairDiagnostics& diag,
                                               const SimParams& params,
                                               double cp) {
  VelocityIntegralReport report;
  if (diag.times.empty()) return report;
  const double horizon = diag.horizon();
  const double p = params.p;

  report.lhs = diag.velocity_integral;
  report.base = diag.Ez.front() - diag.Ez.back() -
                trapezoid(diag.times, diag.fdiff_zt) +
                trapezoid(diag.times, diag.psi_zt);
  report.base_negative = report.base < -1e-9;

  const double kcp = params.k * cp;
  if (kcp <= 0.0) {
    report.rhs = report.lhs > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  } else {
    report.rhs = std::pow(kcp, -2.0 / (p + 2.0)) *
                 std::pow(horizon, p / (p + 2.0)) *
                 std::pow(std::max(report.base, 0.0), 2.0 / (p + 2.0));
  }
  report.slack = report.rhs - report.lhs;
  return report;
}

ContractionReport contraction_report(const State& y1, const State& y2,
                                     double horizon, const SpectralSpace& space,
                                     const SimParams& params, double cp) {
  const PairDiagnostics diag = pair_evolve(y1, y2, horizon, space, params);
  const double T = diag.horizon();
  const double p = params.p;

  ContractionReport report;
  report.lhs = T * diag.Ez.back();
  report.ball_constant = diag.ball_norm_bound;
  report.rho1 = diag.rho1;
  report.rho2 = diag.rho2;
  report.g1_term = report.ball_constant * (T + 1.0) * diag.rho2;
  report.g2_term = T * report.ball_constant * diag.rho1;
  report.psi1_term = std::abs(trapezoid_tail_double(diag.times, diag.fdiff_zt));
  report.psi2_term = std::abs(trapezoid(diag.times, diag.fdiff_zt));
  report.cross_term = -0.5 * (diag.zt_dot_z.back() - diag.zt_dot_z.front());

  report.hoelder_base = diag.Ez.front() - diag.Ez.back() + report.psi2_term +
                        report.ball_constant * diag.rho1;
  const double kcp = params.k * cp;
  if (kcp <= 0.0) {
    report.hoelder_term = report.hoelder_base > 0.0
                              ? std::numeric_limits<double>::infinity()
                              : 0.0;
  } else {
    report.hoelder_term = std::pow(kcp, -2.0 / (p + 2.0)) *
                          std::pow(T, p / (p + 2.0)) *
                          std::pow(std::max(report.hoelder_base, 0.0),
                                   2.0 / (p + 2.0));
  }
  report.rhs = report.g1_term + report.g2_term + report.psi1_term +
               report.hoelder_term;
  report.satisfied = report.lhs <= report.rhs + 1e-12;
  return report;
}

}  // namespace polyattr::contraction
