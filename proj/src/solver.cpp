#include "polyattr/solver.hpp"

#include <algorithm>
#include <cmath>

namespace polyattr::solver {

void SimParams::validate(const SpectralSpace& space) const {
  if (!(k >= 0.0)) throw std::domain_error("SimParams: k must be non-negative");
  if (!(p > 0.0)) throw std::domain_error("SimParams: p must be positive");
  if (!(dt > 0.0)) throw std::domain_error("SimParams: dt must be positive");
  const double lambda1 = space.eigenvalues().front();
  if (f.c3 < 0.0)
    throw std::domain_error("SimParams: cubic coefficient c3 must be >= 0");
  if (f.c3 == 0.0 && !(f.c1 > -lambda1))
    throw std::domain_error("SimParams: linear f needs c1 > -lambda_1");
  if (!h.empty() && h.size() != space.n_modes())
    throw std::invalid_argument("SimParams: forcing size mismatch");
  for (const auto& factor : kernel) {
    if (factor.phi.size() != space.n_modes() || factor.psi.size() != space.n_modes())
      throw std::invalid_argument("SimParams: kernel factor size mismatch");
  }
}

SimParams default_params(const SpectralSpace& space) {
  SimParams params;
  params.h.assign(space.n_modes(), 0.0);
  params.h[0] = 0.1;
  KernelFactor factor;
  factor.sigma = 0.05;
  factor.phi.assign(space.n_modes(), 0.0);
  factor.phi[0] = 1.0;
  factor.psi = factor.phi;
  params.kernel.push_back(std::move(factor));
  return params;
}

namespace {

// Shared by rotate_mode and the precomputed Stepper tables so both paths
// produce bit-identical states.
inline void apply_rotation(double& a, double& b, double omega, double c,
                           double s) {
  const double a_new = a * c + b * s / omega;
  const double b_new = -a * omega * s + b * c;
  a = a_new;
  b = b_new;
}

}  // namespace

void rotate_mode(double& a, double& b, double lambda, double dt) {
  if (lambda == 0.0) {
    a += b * dt;
    return;
  }
  const double omega = std::sqrt(lambda);
  apply_rotation(a, b, omega, std::cos(omega * dt), std::sin(omega * dt));
}

State linear_substep(const State& s, const SpectralSpace& space, double dt) {
  State out = s;
  const auto& lam = space.eigenvalues();
  for (std::size_t j = 0; j < out.a.size(); ++j)
    rotate_mode(out.a[j], out.b[j], lam[j], dt);
  return out;
}

State damping_substep(const State& s, double dt, double k, double p) {
  State out = s;
  if (k == 0.0) return out;
  double norm2 = 0.0;
  for (double v : out.b) norm2 += v * v;
  if (norm2 == 0.0) return out;
  const double norm = std::sqrt(norm2);
  const double factor = std::pow(1.0 + p * k * std::pow(norm, p) * dt, -1.0 / p);
  for (double& v : out.b) v *= factor;
  return out;
}

void apply_kernel(const std::vector<KernelFactor>& kernel,
                  std::span<const double> b, std::vector<double>& out) {
  out.assign(b.size(), 0.0);
  for (const auto& factor : kernel) {
    double inner = 0.0;
    for (std::size_t j = 0; j < b.size(); ++j) inner += factor.psi[j] * b[j];
    const double scale = factor.sigma * inner;
    if (scale == 0.0) continue;
    for (std::size_t j = 0; j < b.size(); ++j) out[j] += scale * factor.phi[j];
  }
}

double kernel_l2_norm(const std::vector<KernelFactor>& kernel) {
  // |K|^2 = sum_{r,s} sigma_r sigma_s (phi_r, phi_s)(psi_r, psi_s),
  // inner products taken in modal coordinates.
  double acc = 0.0;
  for (const auto& fr : kernel) {
    for (const auto& fs : kernel) {
      double phi_inner = 0.0, psi_inner = 0.0;
      for (std::size_t j = 0; j < fr.phi.size(); ++j) {
        phi_inner += fr.phi[j] * fs.phi[j];
        psi_inner += fr.psi[j] * fs.psi[j];
      }
      acc += fr.sigma * fs.sigma * phi_inner * psi_inner;
    }
  }
  return std::sqrt(std::max(acc, 0.0));
}

void project_nonlinearity(const State& s, const SpectralSpace& space,
                          const CubicNonlinearity& f, std::vector<double>& out) {
  if (f.is_zero()) {
    out.assign(space.n_modes(), 0.0);
    return;
  }
  if (f.c3 == 0.0) {
    // Purely linear f acts diagonally on the modes.
    out.resize(space.n_modes());
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = f.c1 * s.a[j];
    return;
  }
  thread_local std::vector<double> values;
  space.to_physical(s.a, values);
  for (double& v : values) v = f.f(v);
  space.to_modal(values, out);
}

namespace {

// RHS of the reaction subsystem: constant part c = -P[f(u)] + h plus the
// linear kernel term Psi(b).
struct ReactionRhs {
  std::vector<double> constant;
  const std::vector<KernelFactor>* kernel;

  void eval(std::span<const double> b, std::vector<double>& out) const {
    apply_kernel(*kernel, b, out);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += constant[j];
  }
};

}  // namespace

State reaction_substep(const State& s, const SpectralSpace& space,
                       const SimParams& params, double dt) {
  State out = s;
  const std::size_t n = space.n_modes();

  ReactionRhs rhs;
  project_nonlinearity(s, space, params.f, rhs.constant);
  for (double& v : rhs.constant) v = -v;
  if (!params.h.empty())
    for (std::size_t j = 0; j < n; ++j) rhs.constant[j] += params.h[j];
  rhs.kernel = &params.kernel;

  thread_local std::vector<double> slope, b_half;
  rhs.eval(out.b, slope);
  b_half.resize(n);
  for (std::size_t j = 0; j < n; ++j) b_half[j] = out.b[j] + 0.5 * dt * slope[j];
  rhs.eval(b_half, slope);
  for (std::size_t j = 0; j < n; ++j) out.b[j] += dt * slope[j];

  for (double v : out.b)
    if (!std::isfinite(v))
      throw NumericalFailure("reaction_substep: non-finite velocity");
  return out;
}

State step(const State& s, const SpectralSpace& space, const SimParams& params) {
  const double dt = params.dt;
  State out = linear_substep(s, space, 0.5 * dt);
  out = damping_substep(out, 0.5 * dt, params.k, params.p);
  out = reaction_substep(out, space, params, dt);
  out = damping_substep(out, 0.5 * dt, params.k, params.p);
  out = linear_substep(out, space, 0.5 * dt);
  out.time = s.time + dt;
  if (!spectral::all_finite(out))
    throw NumericalFailure("step: non-finite state");
  return out;
}

Stepper::Stepper(const SpectralSpace& space, const SimParams& params)
    : space_(&space), params_(params) {
  params_.validate(space);
  const auto& lam = space.eigenvalues();
  const double half = 0.5 * params_.dt;
  omega_.resize(lam.size());
  cos_half_.resize(lam.size());
  sin_half_.resize(lam.size());
  for (std::size_t j = 0; j < lam.size(); ++j) {
    omega_[j] = std::sqrt(lam[j]);
    cos_half_[j] = std::cos(omega_[j] * half);
    sin_half_[j] = std::sin(omega_[j] * half);
  }
}

void Stepper::advance(State& s) const {
  const double dt = params_.dt;
  const std::size_t n = omega_.size();

  const auto rotate_half = [&](State& st) {
    for (std::size_t j = 0; j < n; ++j)
      apply_rotation(st.a[j], st.b[j], omega_[j], cos_half_[j], sin_half_[j]);
  };
  const auto damp_half = [&](State& st) {
    if (params_.k == 0.0) return;
    double norm2 = 0.0;
    for (double v : st.b) norm2 += v * v;
    if (norm2 == 0.0) return;
    const double factor = std::pow(
        1.0 + params_.p * params_.k * std::pow(std::sqrt(norm2), params_.p) *
                  (0.5 * dt),
        -1.0 / params_.p);
    for (double& v : st.b) v *= factor;
  };

  const double time = s.time;
  rotate_half(s);
  damp_half(s);
  s = reaction_substep(s, *space_, params_, dt);
  damp_half(s);
  rotate_half(s);
  s.time = time + dt;
  if (!spectral::all_finite(s)) throw NumericalFailure("step: non-finite state");
}

double energy(const State& s, const SpectralSpace& space, const SimParams& params) {
  const auto& lam = space.eigenvalues();
  double quad = 0.0;
  for (std::size_t j = 0; j < s.a.size(); ++j)
    quad += s.b[j] * s.b[j] + lam[j] * s.a[j] * s.a[j];
  double e = 0.5 * quad;

  if (!params.f.is_zero()) {
    thread_local std::vector<double> values;
    space.to_physical(s.a, values);
    for (double& v : values) v = params.f.primitive(v);
    const double integral = space.integrate(values);
    if (!std::isfinite(integral))
      throw NumericalFailure("energy: non-finite nonlinearity integral");
    e += integral;
  }
  if (!params.h.empty())
    for (std::size_t j = 0; j < s.a.size(); ++j) e -= params.h[j] * s.a[j];
  return e;
}

namespace {

TrajectorySample make_sample(const State& s, const SpectralSpace& space,
                             const SimParams& params) {
  TrajectorySample rec;
  rec.t = s.time;
  rec.E = energy(s, space, params);
  rec.norm_u = spectral::norm_u(s);
  rec.norm_ut = spectral::norm_ut(s);
  rec.norm_grad_u = spectral::norm_grad_u(s, space);
  rec.energy_norm = std::sqrt(rec.norm_grad_u * rec.norm_grad_u +
                              rec.norm_ut * rec.norm_ut);
  rec.damping_power = std::pow(rec.norm_ut, params.p + 2.0);
  std::vector<double> psi;
  apply_kernel(params.kernel, s.b, psi);
  double inner = 0.0;
  for (std::size_t j = 0; j < psi.size(); ++j) inner += psi[j] * s.b[j];
  rec.kernel_power = inner;
  return rec;
}

}  // namespace

Trajectory simulate(const State& initial, const SpectralSpace& space,
                    const SimParams& params, std::size_t n_steps,
                    std::size_t record_every) {
  params.validate(space);
  if (record_every == 0) record_every = 1;

  const Stepper stepper(space, params);
  Trajectory traj;
  State current = initial;
  traj.samples.push_back(make_sample(current, space, params));
  for (std::size_t i = 1; i <= n_steps; ++i) {
    stepper.advance(current);
    if (i % record_every == 0 || i == n_steps)
      traj.samples.push_back(make_sample(current, space, params));
  }
  traj.final_state = std::move(current);
  return traj;
}

std::vector<double> energy_balance_residual(const Trajectory& traj,
                                            const SimParams& params) {
  const auto& samples = traj.samples;
  std::vector<double> residual(samples.size(), 0.0);
  if (samples.empty()) return residual;

  const double e0 = samples.front().E;
  double damping_integral = 0.0;
  double kernel_integral = 0.0;
  for (std::size_t i = 1; i < samples.size(); ++i) {
    const double dt = samples[i].t - samples[i - 1].t;
    damping_integral += 0.5 * dt * (samples[i].damping_power +
                                    samples[i - 1].damping_power);
    kernel_integral += 0.5 * dt * (samples[i].kernel_power +
                                   samples[i - 1].kernel_power);
    residual[i] = samples[i].E - e0 + params.k * damping_integral - kernel_integral;
  }
  return residual;
}

}  // namespace polyattr::solver
