#include "polyattr/harness.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <thread>

namespace polyattr::harness {

namespace {

std::size_t resolve_threads(std::size_t requested, std::size_t work_items) {
  std::size_t n = requested;
  if (n == 0) n = std::max<std::size_t>(1, std::thread::hardware_concurrency());
  return std::min(n, std::max<std::size_t>(1, work_items));
}

/// Runs fn(i) for i in [0, n) across a fixed set of worker threads; the
/// first exception wins and is rethrown on the caller.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t n_threads, Fn&& fn) {
  n_threads = resolve_threads(n_threads, n);
  if (n_threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> workers;
  std::vector<std::exception_ptr> errors(n_threads);
  for (std::size_t w = 0; w < n_threads; ++w) {
    workers.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += n_threads) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : workers) t.join();
  for (auto& err : errors)
    if (err) std::rethrow_exception(err);
}

}  // namespace

double find_entering_time(const std::vector<double>& times,
                          const std::vector<double>& radii, double radius,
                          std::size_t dwell) {
  if (!(radius > 0.0))
    throw std::domain_error("find_entering_time: radius must be positive");
  if (times.size() != radii.size())
    throw std::invalid_argument("find_entering_time: series size mismatch");
  if (dwell == 0) dwell = 1;

  for (std::size_t i = 0; i < times.size(); ++i) {
    const std::size_t end = std::min(i + dwell, times.size());
    bool inside = true;
    for (std::size_t j = i; j < end && inside; ++j)
      inside = radii[j] <= radius;
    if (inside) return times[i];
  }
  return kNeverEnters;
}

void evolve_cloud(std::vector<State>& cloud, double duration,
                  const SpectralSpace& space, const SimParams& params,
                  std::size_t n_threads) {
  params.validate(space);
  const auto n_steps =
      static_cast<std::size_t>(std::llround(duration / params.dt));
  if (n_steps == 0) return;

  const solver::Stepper stepper(space, params);
  parallel_for(cloud.size(), n_threads, [&](std::size_t i) {
    try {
      State s = cloud[i];
      for (std::size_t step = 0; step < n_steps; ++step) stepper.advance(s);
      cloud[i] = std::move(s);
    } catch (const solver::NumericalFailure& e) {
      throw solver::NumericalFailure("cloud member " + std::to_string(i) +
                                     ": " + e.what());
    }
  });
}

double semidistance(const std::vector<State>& cloud,
                    const std::vector<State>& reference,
                    const SpectralSpace& space) {
  if (reference.empty())
    throw std::domain_error("semidistance: empty reference set");
  double worst = 0.0;
  for (const auto& member : cloud) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& ref : reference)
      best = std::min(best, spectral::energy_norm_distance(member, ref, space));
    worst = std::max(worst, best);
  }
  return worst;
}

namespace {

std::vector<double> pairwise_distances(const std::vector<State>& cloud,
                                       const SpectralSpace& space) {
  const std::size_t n = cloud.size();
  std::vector<double> d(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = spectral::energy_norm_distance(cloud[i], cloud[j], space);
      d[i * n + j] = v;
      d[j * n + i] = v;
    }
  return d;
}

// Max group diameter of the k-prefix of the greedy (farthest-point) centers.
double prefix_cover_diameter(const std::vector<double>& dist, std::size_t n,
                             const std::vector<std::size_t>& centers,
                             std::size_t k) {
  std::vector<std::size_t> owner(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) {
      const double v = dist[i * n + centers[c]];
      if (v < best) {
        best = v;
        owner[i] = c;
      }
    }
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (owner[i] == owner[j]) worst = std::max(worst, dist[i * n + j]);
  return worst;
}

}  // namespace

double covering_diameter(const std::vector<State>& cloud, std::size_t m,
                         const SpectralSpace& space) {
  if (m < 1) throw std::domain_error("covering_diameter: m must be >= 1");
  const std::size_t n = cloud.size();
  if (m >= n) return 0.0;

  const std::vector<double> dist = pairwise_distances(cloud, space);

  // Gonzalez farthest-point traversal; centers are nested across k.
  std::vector<std::size_t> centers{0};
  std::vector<double> nearest(n);
  for (std::size_t i = 0; i < n; ++i) nearest[i] = dist[i * n];
  while (centers.size() < m) {
    std::size_t farthest = 0;
    for (std::size_t i = 1; i < n; ++i)
      if (nearest[i] > nearest[farthest]) farthest = i;
    centers.push_back(farthest);
    for (std::size_t i = 0; i < n; ++i)
      nearest[i] = std::min(nearest[i], dist[i * n + farthest]);
  }

  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k <= m; ++k)
    best = std::min(best, prefix_cover_diameter(dist, n, centers, k));
  return best;
}

double theoretical_bound(double t, double alpha0, double t_star, double k,
                         double p, double cp) {
  if (alpha0 < 0.0)
    throw std::domain_error("theoretical_bound: alpha0 must be non-negative");
  if (!(k > 0.0) || !(p > 0.0) || !(cp > 0.0))
    throw std::domain_error("theoretical_bound: k, p, cp must be positive");
  const double elapsed = t - t_star - 1.0;
  if (elapsed < 0.0)
    throw std::domain_error("theoretical_bound: t below t_star + 1");
  if (elapsed == 0.0 || alpha0 == 0.0) return 2.0 * alpha0;
  const double rate = p * k * cp * std::pow(6.0, -(p + 2.0) / 2.0);
  return 2.0 * std::pow(std::pow(alpha0, -p) + rate * elapsed, -1.0 / p);
}

double t_bound_family(double t, double bigT, double alpha0, double t_star,
                      double k, double p, double cp, std::size_t n0) {
  if (alpha0 < 0.0)
    throw std::domain_error("t_bound_family: alpha0 must be non-negative");
  if (!(bigT > 0.0) || !(k > 0.0) || !(p > 0.0) || !(cp > 0.0))
    throw std::domain_error("t_bound_family: T, k, p, cp must be positive");
  const double elapsed = t - t_star - (static_cast<double>(n0) + 1.0) * bigT;
  if (elapsed < 0.0)
    throw std::domain_error("t_bound_family: t below t_star + (n0+1)T");
  if (elapsed == 0.0 || alpha0 == 0.0) return 2.0 * alpha0;
  const double inner = std::pow(bigT, 2.0 / (p + 2.0)) +
                       3.0 * std::pow(k * cp, -2.0 / (p + 2.0)) *
                           std::pow(2.0, p / (p + 2.0));
  const double rate = 0.5 * p * std::pow(inner, -(p + 2.0) / 2.0);
  return 2.0 * std::pow(std::pow(alpha0, -p) + rate * elapsed, -1.0 / p);
}

RateFit fit_rate(const std::vector<double>& times,
                 const std::vector<double>& values, const FitWindow& window) {
  if (times.size() != values.size())
    throw std::invalid_argument("fit_rate: series size mismatch");

  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double t = times[i];
    const double d = values[i];
    if (t < window.t_lo || t > window.t_hi) continue;
    if (!(d > 0.0) || !(t > window.t0)) continue;
    xs.push_back(std::log(t - window.t0));
    ys.push_back(std::log(d));
  }
  if (xs.size() < 5)
    throw std::domain_error("fit_rate: fewer than 5 positive samples in window");

  const double n = static_cast<double>(xs.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw std::domain_error("fit_rate: degenerate abscissae");
  const double slope = (n * sxy - sx * sy) / denom;
  const double intercept = (sy - slope * sx) / n;

  RateFit fit;
  fit.exponent = slope;
  fit.amplitude = std::exp(intercept);
  fit.window = window;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (intercept + slope * xs[i]);
    fit.rss += r * r;
  }
  return fit;
}

State sample_state_in_ball(const SpectralSpace& space, double radius,
                           std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> fraction(0.25, 1.0);

  State s = spectral::zero_state(space);
  for (std::size_t j = 0; j < space.n_modes(); ++j) {
    const double decay = 1.0 / static_cast<double>((j + 1) * (j + 1));
    s.a[j] = gauss(rng) * decay;
    s.b[j] = gauss(rng) * decay * static_cast<double>(j + 1);
  }
  const double r = spectral::energy_norm(s, space);
  const double target = radius * fraction(rng);
  if (r > 0.0) {
    const double scale = target / r;
    for (double& v : s.a) v *= scale;
    for (double& v : s.b) v *= scale;
  }
  return s;
}

std::vector<State> sample_cloud(const SpectralSpace& space, double radius,
                                std::size_t size, std::uint64_t seed,
                                std::uint64_t stream_offset) {
  std::vector<State> cloud;
  cloud.reserve(size);
  for (std::size_t i = 0; i < size; ++i)
    cloud.push_back(
        sample_state_in_ball(space, radius, seed ^ (stream_offset + i)));
  return cloud;
}

double calibrate_absorbing_radius(const SpectralSpace& space,
                                  const SimParams& params,
                                  const CloudExperimentConfig& cfg) {
  std::vector<State> cloud = sample_cloud(space, cfg.calib_radius,
                                          cfg.calib_size, cfg.seed,
                                          kCalibrationStream);
  const auto steps_per_sample =
      std::max<std::size_t>(1, static_cast<std::size_t>(
                                   std::llround(cfg.sample_dt / params.dt)));
  const auto total_steps =
      static_cast<std::size_t>(std::llround(cfg.calib_horizon / params.dt));
  const double tail_start = 0.75 * cfg.calib_horizon;

  const solver::Stepper stepper(space, params);
  std::vector<double> tail_max(cloud.size(), 0.0);
  parallel_for(cloud.size(), cfg.n_threads, [&](std::size_t i) {
    State s = cloud[i];
    double tail_worst = 0.0;
    for (std::size_t n = 1; n <= total_steps; ++n) {
      stepper.advance(s);
      if (n % steps_per_sample == 0 && s.time >= tail_start)
        tail_worst = std::max(tail_worst, spectral::energy_norm(s, space));
    }
    tail_max[i] = tail_worst;
  });
  const double bound = *std::max_element(tail_max.begin(), tail_max.end());
  return 1.1 * bound;
}

std::vector<State> build_reference_set(const SpectralSpace& space,
                                       const SimParams& params,
                                       const CloudExperimentConfig& cfg) {
  std::vector<State> cloud = sample_cloud(space, cfg.init_radius, cfg.ref_size,
                                          cfg.seed, kReferenceStream);
  evolve_cloud(cloud, cfg.burn_in, space, params, cfg.n_threads);

  // Greedy epsilon-net: keep a member only if it clears every kept one.
  std::vector<State> net;
  for (auto& member : cloud) {
    bool keep = true;
    for (const auto& kept : net) {
      if (spectral::energy_norm_distance(member, kept, space) <= cfg.ref_thin_eps) {
        keep = false;
        break;
      }
    }
    if (keep) net.push_back(std::move(member));
  }
  return net;
}

CloudSummary run_cloud_experiment(const SpectralSpace& space,
                                  const SimParams& params,
                                  const CloudExperimentConfig& cfg) {
  params.validate(space);
  CloudSummary summary;
  summary.cp_used = cfg.cp;

  summary.absorbing_radius = calibrate_absorbing_radius(space, params, cfg);
  std::vector<State> reference = build_reference_set(space, params, cfg);
  summary.reference_size = reference.size();

  std::vector<State> cloud = sample_cloud(space, cfg.init_radius,
                                          cfg.cloud_size, cfg.seed, kCloudStream);

  const auto n_samples =
      static_cast<std::size_t>(std::llround(cfg.horizon / cfg.sample_dt));
  const auto record = [&](const std::vector<State>& c, double t) {
    summary.times.push_back(t);
    summary.dist.push_back(semidistance(c, reference, space));
    summary.alpha_proxy.push_back(covering_diameter(c, cfg.cover_m, space));
    double worst = 0.0;
    for (const auto& member : c)
      worst = std::max(worst, spectral::energy_norm(member, space));
    summary.cloud_radius.push_back(worst);
  };

  record(cloud, 0.0);
  for (std::size_t i = 1; i <= n_samples; ++i) {
    evolve_cloud(cloud, cfg.sample_dt, space, params, cfg.n_threads);
    record(cloud, static_cast<double>(i) * cfg.sample_dt);
  }

  summary.t_star = find_entering_time(summary.times, summary.cloud_radius,
                                      summary.absorbing_radius, cfg.dwell);

  summary.bound.assign(summary.times.size(),
                       std::numeric_limits<double>::quiet_NaN());
  if (summary.t_star < kNeverEnters) {
    for (std::size_t i = 0; i < summary.times.size(); ++i) {
      if (summary.times[i] >= summary.t_star) {
        summary.alpha0 = summary.alpha_proxy[i];
        break;
      }
    }
    bool all_ok = true;
    for (std::size_t i = 0; i < summary.times.size(); ++i) {
      const double t = summary.times[i];
      if (t >= summary.t_star + 1.0)
        summary.bound[i] = theoretical_bound(t, summary.alpha0, summary.t_star,
                                             params.k, params.p, cfg.cp);
      if (t >= summary.t_star + 2.0) {
        ++summary.n_bound_checked;
        if (!(summary.dist[i] <= summary.bound[i])) all_ok = false;
      }
    }
    summary.bound_satisfied = all_ok && summary.n_bound_checked > 0;

    FitWindow window;
    window.t_lo = summary.t_star + cfg.fit_offset;
    window.t_hi = cfg.horizon;
    window.t0 = summary.t_star + 1.0;
    try {
      summary.fit = fit_rate(summary.times, summary.dist, window);
      summary.fit_valid = true;
    } catch (const std::domain_error&) {
      summary.fit_valid = false;
    }
  }
  return summary;
}

}  // namespace polyattr::harness
