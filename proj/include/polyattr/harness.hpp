// Cloud-level experiments: absorbing-ball calibration and entering times,
// reference-set construction, attraction distances, covering-based
// noncompactness proxies, polynomial rate fitting and the closed-form
// attraction bounds they are compared against.
#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "polyattr/solver.hpp"

namespace polyattr::harness {

using solver::SimParams;
using spectral::SpectralSpace;
using spectral::State;

inline constexpr double kNeverEnters = std::numeric_limits<double>::infinity();

/// First sampled time from which the radius series stays within `radius`
/// for a dwell window of `dwell` samples (clamped at the series end).
/// Returns kNeverEnters when no such window exists.
double find_entering_time(const std::vector<double>& times,
                          const std::vector<double>& radii, double radius,
                          std::size_t dwell = 10);

/// Advances every member independently by `duration` (rounded to whole
/// steps), fanning out over `n_threads`.  A numerical failure in any member
/// aborts the call naming the member index.
void evolve_cloud(std::vector<State>& cloud, double duration,
                  const SpectralSpace& space, const SimParams& params,
                  std::size_t n_threads = 0);

/// One-sided Hausdorff semidistance max_cloud min_ref in the phase-space
/// norm.  Empty cloud -> 0; empty reference -> domain error.
double semidistance(const std::vector<State>& cloud,
                    const std::vector<State>& reference,
                    const SpectralSpace& space);

/// Largest group diameter of the best greedy k-center cover with at most m
/// groups (a k-cover is an m-cover for k <= m, which also makes the proxy
/// monotone in m).  Within factor 2 of the optimal m-cover diameter.
/// Returns 0 when m >= cloud size.
double covering_diameter(const std::vector<State>& cloud, std::size_t m,
                         const SpectralSpace& space);

/// Attraction bound 2 { alpha0^-p + p k cp 6^(-(p+2)/2) (t - t_star - 1) }^(-1/p)
/// for t >= t_star + 1 (the endpoint returns exactly 2 alpha0).
double theoretical_bound(double t, double alpha0, double t_star, double k,
                         double p, double cp);

/// T-dependent pre-optimization bound
///   2 { alpha0^-p + (p/2)(t - t_star - (n0+1)T)
///       (T^(2/(p+2)) + 3 (k cp)^(-2/(p+2)) 2^(p/(p+2)))^(-(p+2)/2) }^(-1/p),
/// valid for t >= t_star + (n0+1) T; t_star = 0 recovers the plain form.
double t_bound_family(double t, double bigT, double alpha0, double t_star,
                      double k, double p, double cp, std::size_t n0);

struct FitWindow {
  double t_lo = 0.0;
  double t_hi = 0.0;
  double t0 = 0.0;  // fit origin; samples use log(t - t0)
};

struct RateFit {
  double exponent = 0.0;
  double amplitude = 0.0;
  double rss = 0.0;
  FitWindow window{};
};

/// Least-squares line through (log(t - t0), log d) for the positive samples
/// inside the window.  Fewer than 5 usable samples -> domain error.
RateFit fit_rate(const std::vector<double>& times,
                 const std::vector<double>& values, const FitWindow& window);

/// Seeded state inside the phase-space ball of the given radius: Gaussian
/// modal coefficients with a smooth per-mode envelope, rescaled to a radius
/// fraction drawn from U(0.25, 1).
State sample_state_in_ball(const SpectralSpace& space, double radius,
                           std::uint64_t seed);

/// Seeded cloud; member i uses the stream seed ^ (stream_offset + i).
std::vector<State> sample_cloud(const SpectralSpace& space, double radius,
                                std::size_t size, std::uint64_t seed,
                                std::uint64_t stream_offset = 0);

/// Knobs of the cloud experiment; defaults are the documented desk-scale
/// configuration.
struct CloudExperimentConfig {
  std::size_t cloud_size = 64;
  std::uint64_t seed = 42;
  double init_radius = 2.5;

  std::size_t ref_size = 256;
  double burn_in = 200.0;
  double ref_thin_eps = 1e-4;

  double horizon = 200.0;  // matches burn_in: the evolved cloud ends up
                           // distributed like the reference set
  double sample_dt = 0.5;
  std::size_t cover_m = 8;
  std::size_t dwell = 10;

  std::size_t calib_size = 16;
  double calib_radius = 5.0;
  double calib_horizon = 60.0;

  double fit_offset = 5.0;  // fit window starts at t_star + fit_offset
  double cp = 0.25;
  std::size_t n_threads = 0;  // 0 = hardware concurrency
};

/// Stream offsets separating the seeded member index spaces.
inline constexpr std::uint64_t kCloudStream = 0;
inline constexpr std::uint64_t kReferenceStream = std::uint64_t{1} << 40;
inline constexpr std::uint64_t kCalibrationStream = std::uint64_t{1} << 41;

struct CloudSummary {
  double absorbing_radius = 0.0;
  double t_star = kNeverEnters;
  double alpha0 = 0.0;
  double cp_used = 0.0;

  std::vector<double> times;
  std::vector<double> dist;         // semidistance to the reference set
  std::vector<double> alpha_proxy;  // covering diameter at cover_m
  std::vector<double> bound;        // theoretical bound; NaN before t_star+1
  std::vector<double> cloud_radius; // max member phase-space norm

  bool bound_satisfied = false;  // dist <= bound for all sampled t >= t_star+2
  std::size_t n_bound_checked = 0;

  RateFit fit{};
  bool fit_valid = false;
  std::size_t reference_size = 0;
};

/// Common eventual phase-space norm bound of calib_size trajectories started
/// from the large calibration ball, times 1.1.  The maximum is taken over the
/// last quarter of the calibration horizon.
double calibrate_absorbing_radius(const SpectralSpace& space,
                                  const SimParams& params,
                                  const CloudExperimentConfig& cfg);

/// Late-time cloud thinned by a greedy epsilon-net: the attractor surrogate.
std::vector<State> build_reference_set(const SpectralSpace& space,
                                       const SimParams& params,
                                       const CloudExperimentConfig& cfg);

/// Full experiment: calibration, reference set, cloud evolution with sampled
/// distance / proxy / bound series, entering time and rate fit.
CloudSummary run_cloud_experiment(const SpectralSpace& space,
                                  const SimParams& params,
                                  const CloudExperimentConfig& cfg);

}  // namespace polyattr::harness
