// Time integration of  u_tt - u_xx + k |u_t|^p u_t + f(u) = Int K(x,y) u_t(y) dy + h
// on (0, L) with Dirichlet conditions, by Strang splitting with exact linear
// and exact norm-damping substeps and a midpoint reaction substep.
#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "polyattr/spectral.hpp"

namespace polyattr::solver {

using spectral::SpectralSpace;
using spectral::State;

/// Raised whenever a non-finite value appears in a state or functional.
struct NumericalFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// f(u) = c3 u^3 + c1 u with primitive F(u) = c3 u^4 / 4 + c1 u^2 / 2.
struct CubicNonlinearity {
  double c3 = 1.0;
  double c1 = -1.0;

  double f(double u) const { return (c3 * u * u + c1) * u; }
  double primitive(double u) const {
    const double u2 = u * u;
    return 0.25 * c3 * u2 * u2 + 0.5 * c1 * u2;
  }
  bool is_zero() const { return c3 == 0.0 && c1 == 0.0; }
};

/// One separable factor sigma * phi(x) psi(y) of the kernel, both profiles
/// stored as modal coefficient vectors.
struct KernelFactor {
  double sigma = 0.0;
  std::vector<double> phi;
  std::vector<double> psi;
};

struct SimParams {
  double k = 1.0;   // damping coefficient, >= 0 (0 = diagnostic conservative runs)
  double p = 2.0;   // damping exponent, > 0
  CubicNonlinearity f{};
  std::vector<double> h;              // modal forcing; empty means zero
  std::vector<KernelFactor> kernel;   // low-rank anti-damping kernel
  double dt = 1e-3;

  /// Range checks plus the dissipativity condition on the cubic family:
  /// c3 > 0, or c3 = 0 with c1 > -lambda_1.
  void validate(const SpectralSpace& space) const;
};

/// Default desk-scale configuration: k=1, p=2, f(u) = u^3 - u, h = 0.1 e_1,
/// kernel = 0.05 e_1 (x) e_1, dt = 1e-3.
SimParams default_params(const SpectralSpace& space);

/// Exact rotation of one oscillator mode (a, b) under a'' = -lambda a,
/// with the lambda -> 0 shear limit handled.
void rotate_mode(double& a, double& b, double lambda, double dt);

/// Exact flow of u_tt = u_xx per mode; preserves (b^2 + lambda a^2)/2 exactly.
State linear_substep(const State& s, const SpectralSpace& space, double dt);

/// Exact flow of b' = -k |b| ^p b with a frozen:
/// b <- b (1 + p k |b|^p dt)^(-1/p).
State damping_substep(const State& s, double dt, double k, double p);

/// One explicit midpoint step of b' = -P[f(u)] + Psi(b) + h with a frozen.
State reaction_substep(const State& s, const SpectralSpace& space,
                       const SimParams& params, double dt);

/// Strang composition L(dt/2) D(dt/2) N(dt) D(dt/2) L(dt/2); advances time
/// by params.dt and aborts on non-finite values.
State step(const State& s, const SpectralSpace& space, const SimParams& params);

/// Same composition with the half-step rotation coefficients precomputed;
/// bit-identical to step() and much cheaper in long runs.
class Stepper {
 public:
  Stepper(const SpectralSpace& space, const SimParams& params);

  /// Advances in place by params.dt.
  void advance(State& s) const;

  const SpectralSpace& space() const { return *space_; }
  const SimParams& params() const { return params_; }

 private:
  const SpectralSpace* space_;
  SimParams params_;
  std::vector<double> omega_, cos_half_, sin_half_;
};

/// Kernel image of a modal velocity vector: Psi(b)_j = sum_r sigma_r
/// phi_{r,j} <psi_r, b>.
void apply_kernel(const std::vector<KernelFactor>& kernel,
                  std::span<const double> b, std::vector<double>& out);

/// L2(Omega x Omega) norm of the low-rank kernel.
double kernel_l2_norm(const std::vector<KernelFactor>& kernel);

/// Modal projection of the pointwise nonlinearity, via the de-aliased grid.
void project_nonlinearity(const State& s, const SpectralSpace& space,
                          const CubicNonlinearity& f, std::vector<double>& out);

/// E = |u_t|^2/2 + |grad u|^2/2 + Int F(u) dx - (h, u).
double energy(const State& s, const SpectralSpace& space, const SimParams& params);

/// One record per sampled step boundary.
struct TrajectorySample {
  double t = 0.0;
  double E = 0.0;
  double norm_u = 0.0;
  double norm_ut = 0.0;
  double norm_grad_u = 0.0;
  double energy_norm = 0.0;   // sqrt(norm_grad_u^2 + norm_ut^2)
  double damping_power = 0.0; // |u_t|^(p+2)
  double kernel_power = 0.0;  // (Psi(u_t), u_t)
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
  State final_state;
};

/// Advances n_steps steps, recording every record_every-th boundary
/// (plus the initial and final ones).
Trajectory simulate(const State& initial, const SpectralSpace& space,
                    const SimParams& params, std::size_t n_steps,
                    std::size_t record_every = 1);

/// r(t) = E(t) - E(0) + k Int_0^t |u_t|^(p+2) - Int_0^t (Psi(u_t), u_t),
/// trapezoid quadrature on the recorded samples.  One value per sample.
std::vector<double> energy_balance_residual(const Trajectory& traj,
                                            const SimParams& params);

}  // namespace polyattr::solver
