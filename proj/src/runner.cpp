#include "polyattr/runner.hpp"

#include <cmath>
#include <cstdlib>
#include <iostream>
#include <random>

#include "polyattr/contraction.hpp"
#include "polyattr/harness.hpp"
#include "polyattr/io.hpp"
#include "polyattr/rates.hpp"
#include "polyattr/solver.hpp"

namespace polyattr::runner {

namespace {

namespace fs = std::filesystem;
using config::Config;
using config::ConfigError;

struct Context {
  const Config& cfg;
  fs::path out;
  std::uint64_t seed;
  bool svg_default;

  bool svg_enabled() const { return cfg.get_bool("out.svg", svg_default); }
};

spectral::SpectralSpace make_space(const Config& cfg) {
  return spectral::SpectralSpace(
      cfg.require_double("solver.length"),
      static_cast<std::size_t>(cfg.require_int("solver.n_modes")));
}

solver::SimParams make_params(const Config& cfg,
                              const spectral::SpectralSpace& space) {
  solver::SimParams params;
  params.k = cfg.require_double("solver.k");
  params.p = cfg.require_double("solver.p");
  params.dt = cfg.require_double("solver.dt");
  params.f.c3 = cfg.get_double("solver.f.c3", 1.0);
  params.f.c1 = cfg.get_double("solver.f.c1", -1.0);

  const auto h_mode = static_cast<std::size_t>(cfg.get_int("solver.h.mode", 1));
  const double h_amp = cfg.get_double("solver.h.amp", 0.1);
  if (h_mode > space.n_modes())
    throw ConfigError("config key 'solver.h.mode': exceeds solver.n_modes");
  params.h.assign(space.n_modes(), 0.0);
  params.h[h_mode - 1] = h_amp;

  const double sigma = cfg.get_double("solver.kernel.sigma", 0.05);
  if (sigma != 0.0) {
    const auto phi_mode =
        static_cast<std::size_t>(cfg.get_int("solver.kernel.phi_mode", 1));
    const auto psi_mode =
        static_cast<std::size_t>(cfg.get_int("solver.kernel.psi_mode", 1));
    if (phi_mode > space.n_modes() || psi_mode > space.n_modes())
      throw ConfigError("config key 'solver.kernel.*_mode': exceeds solver.n_modes");
    solver::KernelFactor factor;
    factor.sigma = sigma;
    factor.phi.assign(space.n_modes(), 0.0);
    factor.psi.assign(space.n_modes(), 0.0);
    factor.phi[phi_mode - 1] = 1.0;
    factor.psi[psi_mode - 1] = 1.0;
    params.kernel.push_back(std::move(factor));
  }

  try {
    params.validate(space);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("invalid solver parameters: ") + e.what());
  }
  return params;
}

spectral::State make_initial_state(const Context& ctx,
                                   const spectral::SpectralSpace& space) {
  const std::string kind = ctx.cfg.get_string("sim.init.kind", "random");
  if (kind == "mode") {
    const auto mode =
        static_cast<std::size_t>(ctx.cfg.get_int("sim.init.mode", 1));
    if (mode > space.n_modes())
      throw ConfigError("config key 'sim.init.mode': exceeds solver.n_modes");
    spectral::State s = spectral::zero_state(space);
    s.a[mode - 1] = ctx.cfg.get_double("sim.init.a", 1.0);
    s.b[mode - 1] = ctx.cfg.get_double("sim.init.b", 0.0);
    return s;
  }
  const double radius = ctx.cfg.get_double("sim.init.radius", 2.5);
  return harness::sample_state_in_ball(space, radius, ctx.seed);
}

rates::DecayParams make_decay_params(const Config& cfg) {
  rates::DecayParams p;
  p.beta = cfg.require_double("rates.beta");
  p.bigC = cfg.require_double("rates.bigC");
  p.bigT = cfg.get_double("rates.bigT", 1.0);
  return p;
}

void write_trace_csv(const fs::path& path, const rates::IterationTrace& trace) {
  io::CsvTable table;
  table.header = {"n", "y", "bound"};
  table.columns.resize(3);
  for (std::size_t n = 0; n < trace.y.size(); ++n) {
    table.columns[0].push_back(static_cast<double>(n));
    table.columns[1].push_back(trace.y[n]);
    table.columns[2].push_back(n < trace.bound.size()
                                   ? trace.bound[n]
                                   : std::numeric_limits<double>::quiet_NaN());
  }
  io::write_csv(path, table);
}

int run_iterate(const Context& ctx) {
  const auto params = make_decay_params(ctx.cfg);
  const double y0 = ctx.cfg.require_double("rates.y0");
  const auto n = static_cast<std::size_t>(ctx.cfg.get_int("rates.n", 40));

  auto trace = rates::iterate_w(y0, n, params);
  const std::size_t n0 = rates::find_n0(trace);
  write_trace_csv(ctx.out / "iterate_trace.csv", trace);

  io::TextRecord summary;
  summary.add("mode", std::string("iterate"));
  summary.add("beta", params.beta);
  summary.add("C", params.bigC);
  summary.add("T", params.bigT);
  summary.add("y0", y0);
  summary.add("n0", n0);
  summary.add("trace_length", trace.y.size());
  for (std::size_t i = 0; i < std::min<std::size_t>(trace.y.size(), 8); ++i)
    summary.add("y" + std::to_string(i), trace.y[i]);
  summary.add("y_final", trace.y.back());
  io::write_record(ctx.out / "summary.txt", summary);

  if (ctx.svg_enabled()) {
    io::Series ys{"y(n)", {}, {}};
    io::Series bs{"closed-form bound", {}, {}};
    for (std::size_t i = 0; i < trace.y.size(); ++i) {
      ys.x.push_back(static_cast<double>(i));
      ys.y.push_back(trace.y[i]);
      if (i >= n0 && i < trace.bound.size()) {
        bs.x.push_back(static_cast<double>(i));
        bs.y.push_back(trace.bound[i]);
      }
    }
    io::write_svg_chart(ctx.out / "iterate.svg", "w-iteration vs closed form",
                        {ys, bs}, false, true);
  }
  return kExitOk;
}

int run_bound(const Context& ctx) {
  const auto params = make_decay_params(ctx.cfg);
  const double y0 = ctx.cfg.require_double("rates.y0");
  const double alpha0 = ctx.cfg.get_double("bound.alpha0", 1.0);

  auto trace = rates::iterate_w(y0, 8, params);
  const std::size_t n0 = rates::find_n0(trace);
  write_trace_csv(ctx.out / "sequence_bound.csv", trace);

  const double t_lo = (static_cast<double>(n0) + 1.0) * params.bigT;
  const double t_max =
      ctx.cfg.get_double("bound.t_max", t_lo + 40.0 * params.bigT);
  io::CsvTable table;
  table.header = {"t", "alpha_decay_bound"};
  table.columns.resize(2);
  const std::size_t n_pts = 200;
  for (std::size_t i = 0; i <= n_pts; ++i) {
    const double t = t_lo + (t_max - t_lo) * static_cast<double>(i) /
                                static_cast<double>(n_pts);
    table.columns[0].push_back(t);
    table.columns[1].push_back(rates::alpha_decay_bound(t, n0, alpha0, params));
  }
  io::write_csv(ctx.out / "alpha_bound.csv", table);

  io::TextRecord summary;
  summary.add("mode", std::string("bound"));
  summary.add("beta", params.beta);
  summary.add("C", params.bigC);
  summary.add("T", params.bigT);
  summary.add("y0", y0);
  summary.add("n0", n0);
  summary.add("alpha0", alpha0);
  summary.add("bound_at_threshold", 2.0 * alpha0);
  summary.add("bound_at_t_max", table.columns[1].back());
  io::write_record(ctx.out / "summary.txt", summary);
  return kExitOk;
}

int run_simulate(const Context& ctx) {
  const auto space = make_space(ctx.cfg);
  const auto params = make_params(ctx.cfg, space);
  const auto initial = make_initial_state(ctx, space);

  const double t_end = ctx.cfg.get_double("sim.t_end", 10.0);
  const auto record_every =
      static_cast<std::size_t>(ctx.cfg.get_int("sim.record_every", 10));
  const auto n_steps =
      static_cast<std::size_t>(std::llround(t_end / params.dt));

  const bool snapshots = ctx.cfg.get_bool("sim.snapshots", false);
  const auto snapshot_every =
      static_cast<std::size_t>(ctx.cfg.get_int("sim.snapshot_every", 1000));
  std::vector<spectral::State> snaps;

  solver::Trajectory traj;
  if (!snapshots) {
    traj = solver::simulate(initial, space, params, n_steps, record_every);
  } else {
    // Re-run the recording loop here to harvest modal snapshots as well.
    spectral::State s = initial;
    traj.samples = solver::simulate(s, space, params, 0, 1).samples;
    snaps.push_back(s);
    for (std::size_t i = 1; i <= n_steps; ++i) {
      s = solver::step(s, space, params);
      if (i % record_every == 0 || i == n_steps) {
        auto piece = solver::simulate(s, space, params, 0, 1);
        traj.samples.push_back(piece.samples.front());
      }
      if (i % snapshot_every == 0 || i == n_steps) snaps.push_back(s);
    }
    traj.final_state = s;
  }

  io::CsvTable table;
  table.header = {"time", "E", "norm_u", "norm_ut", "norm_grad_u"};
  table.columns.resize(5);
  for (const auto& rec : traj.samples) {
    table.columns[0].push_back(rec.t);
    table.columns[1].push_back(rec.E);
    table.columns[2].push_back(rec.norm_u);
    table.columns[3].push_back(rec.norm_ut);
    table.columns[4].push_back(rec.norm_grad_u);
  }
  io::write_csv(ctx.out / "trajectory.csv", table);
  if (snapshots) io::write_snapshots(ctx.out / "snapshots.txt", snaps);

  const auto residual = solver::energy_balance_residual(traj, params);
  double max_residual = 0.0;
  for (double r : residual) max_residual = std::max(max_residual, std::abs(r));

  io::TextRecord summary;
  summary.add("mode", std::string("simulate"));
  summary.add("t_end", t_end);
  summary.add("steps", n_steps);
  summary.add("E_initial", traj.samples.front().E);
  summary.add("E_final", traj.samples.back().E);
  summary.add("max_balance_residual", max_residual);
  summary.add("final_energy_norm", traj.samples.back().energy_norm);
  io::write_record(ctx.out / "summary.txt", summary);
  return kExitOk;
}

int run_pair(const Context& ctx) {
  const auto space = make_space(ctx.cfg);
  const auto params = make_params(ctx.cfg, space);

  const double horizon = ctx.cfg.get_double("pair.T", 1.0);
  const double delta = ctx.cfg.get_double("pair.delta", 1e-2);
  const auto count = static_cast<std::size_t>(ctx.cfg.get_int("pair.count", 1));
  const auto record_every =
      static_cast<std::size_t>(ctx.cfg.get_int("pair.record_every", 1));
  const double init_radius = ctx.cfg.get_double("sim.init.radius", 2.5);

  const auto cp_samples =
      static_cast<std::size_t>(ctx.cfg.get_int("harness.cp_samples", 20000));
  const auto cp_dim =
      static_cast<std::size_t>(ctx.cfg.get_int("harness.cp_dim", 2));
  const double cp = contraction::estimate_cp(params.p, cp_dim, cp_samples, ctx.seed);

  io::CsvTable batch;
  batch.header = {"pair",       "Ez0",        "EzT",       "rho1",
                  "rho2",       "vel_lhs",    "vel_rhs",   "vel_slack",
                  "lhs",        "g1_term",    "g2_term",   "psi1_term",
                  "psi2_term",  "hoelder",    "rhs",       "cross_term",
                  "ball_const", "satisfied"};
  batch.columns.resize(batch.header.size());

  for (std::size_t i = 0; i < count; ++i) {
    const auto y1 = harness::sample_state_in_ball(space, init_radius,
                                                  ctx.seed ^ (2 * i));
    auto y2 = harness::sample_state_in_ball(space, delta, ctx.seed ^ (2 * i + 1));
    for (std::size_t j = 0; j < space.n_modes(); ++j) {
      y2.a[j] += y1.a[j];
      y2.b[j] += y1.b[j];
    }

    const auto diag =
        contraction::pair_evolve(y1, y2, horizon, space, params, record_every);
    const auto vel = contraction::velocity_integral_check(diag, params, cp);
    const auto report =
        contraction::contraction_report(y1, y2, horizon, space, params, cp);

    const double row[] = {static_cast<double>(i),
                          diag.Ez.front(),
                          diag.Ez.back(),
                          diag.rho1,
                          diag.rho2,
                          vel.lhs,
                          vel.rhs,
                          vel.slack,
                          report.lhs,
                          report.g1_term,
                          report.g2_term,
                          report.psi1_term,
                          report.psi2_term,
                          report.hoelder_term,
                          report.rhs,
                          report.cross_term,
                          report.ball_constant,
                          report.satisfied ? 1.0 : 0.0};
    for (std::size_t c = 0; c < batch.columns.size(); ++c)
      batch.columns[c].push_back(row[c]);

    if (i == 0) {
      io::CsvTable series;
      series.header = {"time", "Ez", "identity_residual", "z_norm", "zt_norm",
                       "psi_norm"};
      series.columns.resize(6);
      for (std::size_t s = 0; s < diag.times.size(); ++s) {
        series.columns[0].push_back(diag.times[s]);
        series.columns[1].push_back(diag.Ez[s]);
        series.columns[2].push_back(
            contraction::energy_identity_residual(diag, diag.times[s]));
        series.columns[3].push_back(diag.z_norm[s]);
        series.columns[4].push_back(diag.zt_norm[s]);
        series.columns[5].push_back(diag.psi_norm[s]);
      }
      io::write_csv(ctx.out / "pair_series.csv", series);

      io::TextRecord rec;
      rec.add("mode", std::string("pair"));
      rec.add("T", diag.horizon());
      rec.add("cp", cp);
      rec.add("Ez0", diag.Ez.front());
      rec.add("EzT", diag.Ez.back());
      rec.add("rho1", diag.rho1);
      rec.add("rho2", diag.rho2);
      rec.add("velocity_integral", diag.velocity_integral);
      rec.add("velocity_rhs", vel.rhs);
      rec.add("velocity_slack", vel.slack);
      rec.add("velocity_base_negative", vel.base_negative);
      rec.add("contraction_lhs", report.lhs);
      rec.add("contraction_rhs", report.rhs);
      rec.add("g1_term", report.g1_term);
      rec.add("g2_term", report.g2_term);
      rec.add("psi1_term", report.psi1_term);
      rec.add("psi2_term", report.psi2_term);
      rec.add("hoelder_term", report.hoelder_term);
      rec.add("cross_term", report.cross_term);
      rec.add("ball_constant", report.ball_constant);
      rec.add("satisfied", report.satisfied);
      io::write_record(ctx.out / "pair_report.txt", rec);
    }
  }
  if (count > 1) io::write_csv(ctx.out / "pair_terms.csv", batch);
  return kExitOk;
}

int run_cloud(const Context& ctx) {
  const auto space = make_space(ctx.cfg);
  const auto params = make_params(ctx.cfg, space);

  harness::CloudExperimentConfig hc;
  hc.cloud_size =
      static_cast<std::size_t>(ctx.cfg.get_int("harness.cloud_size", 64));
  hc.seed = ctx.seed;
  hc.burn_in = ctx.cfg.get_double("harness.burn_in", 200.0);
  hc.horizon = ctx.cfg.get_double("harness.horizon", 200.0);
  hc.sample_dt = ctx.cfg.get_double("harness.sample_dt", 0.5);
  hc.init_radius = ctx.cfg.get_double("harness.init_radius", 2.5);
  hc.ref_size = static_cast<std::size_t>(ctx.cfg.get_int("harness.ref_size", 256));
  hc.ref_thin_eps = ctx.cfg.get_double("harness.ref_thin_eps", 1e-4);
  hc.cover_m = static_cast<std::size_t>(ctx.cfg.get_int("harness.cover_m", 8));
  hc.calib_size =
      static_cast<std::size_t>(ctx.cfg.get_int("harness.calib_size", 16));
  hc.calib_radius = ctx.cfg.get_double("harness.calib_radius", 5.0);
  hc.calib_horizon = ctx.cfg.get_double("harness.calib_horizon", 60.0);
  hc.fit_offset = ctx.cfg.get_double("harness.fit_offset", 5.0);
  hc.n_threads = static_cast<std::size_t>(ctx.cfg.get_int("harness.threads", 0));

  const auto cp_samples =
      static_cast<std::size_t>(ctx.cfg.get_int("harness.cp_samples", 20000));
  const auto cp_dim =
      static_cast<std::size_t>(ctx.cfg.get_int("harness.cp_dim", 2));
  hc.cp = contraction::estimate_cp(params.p, cp_dim, cp_samples, ctx.seed);

  const auto summary = harness::run_cloud_experiment(space, params, hc);

  io::CsvTable table;
  table.header = {"t", "dist", "alpha_proxy", "bound"};
  table.columns = {summary.times, summary.dist, summary.alpha_proxy,
                   summary.bound};
  io::write_csv(ctx.out / "cloud_series.csv", table);

  io::TextRecord rec;
  rec.add("mode", std::string("cloud"));
  rec.add("cloud_size", hc.cloud_size);
  rec.add("seed", static_cast<std::size_t>(hc.seed));
  rec.add("absorbing_radius", summary.absorbing_radius);
  rec.add("t_star", summary.t_star);
  rec.add("alpha0", summary.alpha0);
  rec.add("cp", summary.cp_used);
  rec.add("reference_size", summary.reference_size);
  rec.add("bound_satisfied", summary.bound_satisfied);
  rec.add("bound_points_checked", summary.n_bound_checked);
  rec.add("fit_valid", summary.fit_valid);
  if (summary.fit_valid) {
    rec.add("fit_exponent", summary.fit.exponent);
    rec.add("fit_amplitude", summary.fit.amplitude);
    rec.add("fit_rss", summary.fit.rss);
    rec.add("fit_window_lo", summary.fit.window.t_lo);
    rec.add("fit_window_hi", summary.fit.window.t_hi);
  }
  io::write_record(ctx.out / "summary.txt", rec);

  if (ctx.svg_enabled()) {
    io::Series dist{"dist", summary.times, summary.dist};
    io::Series bound{"bound", summary.times, summary.bound};
    io::write_svg_chart(ctx.out / "cloud.svg", "attraction distance vs bound",
                        {dist, bound}, false, true);
  }
  return kExitOk;
}

int run_rates(const Context& ctx) {
  const auto space = make_space(ctx.cfg);
  const auto params = make_params(ctx.cfg, space);

  // Decay-rate measurement wants the free decaying system by default; the
  // config may still switch the terms back on explicitly.
  const double t_end = ctx.cfg.get_double("fit.t_end", 1e4);
  const double window_lo = ctx.cfg.get_double("fit.window_lo", 1e2);
  const double window_hi = ctx.cfg.get_double("fit.window_hi", t_end);
  const auto n_samples =
      static_cast<std::size_t>(ctx.cfg.get_int("fit.samples", 200));

  spectral::State s = [&] {
    if (ctx.cfg.get_string("sim.init.kind", "mode") == "random")
      return harness::sample_state_in_ball(
          space, ctx.cfg.get_double("sim.init.radius", 2.5), ctx.seed);
    auto st = spectral::zero_state(space);
    const auto mode = static_cast<std::size_t>(ctx.cfg.get_int("sim.init.mode", 1));
    if (mode > space.n_modes())
      throw ConfigError("config key 'sim.init.mode': exceeds solver.n_modes");
    st.a[mode - 1] = ctx.cfg.get_double("sim.init.a", 1.0);
    st.b[mode - 1] = ctx.cfg.get_double("sim.init.b", 0.0);
    return st;
  }();

  // Log-spaced sampling times.
  std::vector<double> times, amplitude;
  const double t_first = std::max(params.dt, t_end / 1e5);
  for (std::size_t i = 0; i < n_samples; ++i) {
    const double f = static_cast<double>(i) / static_cast<double>(n_samples - 1);
    times.push_back(t_first * std::pow(t_end / t_first, f));
  }

  std::size_t next = 0;
  const auto total =
      static_cast<std::size_t>(std::llround(t_end / params.dt));
  for (std::size_t n = 0; n <= total && next < times.size(); ++n) {
    if (n > 0) s = solver::step(s, space, params);
    while (next < times.size() && s.time >= times[next] - 0.5 * params.dt) {
      times[next] = s.time;
      amplitude.push_back(spectral::energy_norm(s, space));
      ++next;
    }
  }
  times.resize(amplitude.size());

  io::CsvTable table;
  table.header = {"t", "amplitude"};
  table.columns = {times, amplitude};
  io::write_csv(ctx.out / "rates_series.csv", table);

  harness::FitWindow window{window_lo, window_hi, 0.0};
  io::TextRecord rec;
  rec.add("mode", std::string("rates"));
  rec.add("t_end", t_end);
  rec.add("expected_exponent", -1.0 / params.p);
  try {
    const auto fit = harness::fit_rate(times, amplitude, window);
    rec.add("fit_exponent", fit.exponent);
    rec.add("fit_amplitude", fit.amplitude);
    rec.add("fit_rss", fit.rss);
    rec.add("fit_valid", true);
  } catch (const std::domain_error& e) {
    rec.add("fit_valid", false);
    rec.add("fit_error", std::string(e.what()));
  }
  io::write_record(ctx.out / "summary.txt", rec);
  return kExitOk;
}

}  // namespace

fs::path resolve_out_dir(const Config& cfg, const RunOptions& opts) {
  if (opts.out_override) return *opts.out_override;
  if (const char* env = std::getenv("POLYATTR_OUT"); env && *env) return env;
  return cfg.get_string("out.dir", "out");
}

int run(const Config& cfg, const RunOptions& opts) {
  try {
    config::validate_schema(cfg);
    std::string mode = opts.mode.empty() ? cfg.get_string("mode", "") : opts.mode;
    if (mode.empty())
      throw ConfigError("no mode given (subcommand or 'mode' config key)");
    config::validate_mode_requirements(cfg, mode);

    Context ctx{cfg, resolve_out_dir(cfg, opts),
                opts.seed_override ? *opts.seed_override
                                   : cfg.get_uint("seed", 42),
                mode == "iterate" || mode == "cloud"};
    std::filesystem::create_directories(ctx.out);

    if (mode == "iterate") return run_iterate(ctx);
    if (mode == "bound") return run_bound(ctx);
    if (mode == "simulate") return run_simulate(ctx);
    if (mode == "pair") return run_pair(ctx);
    if (mode == "cloud") return run_cloud(ctx);
    if (mode == "rates") return run_rates(ctx);
    throw ConfigError("unknown mode '" + mode + "'");
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const solver::NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumericalFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumericalFailure;
  }
}

}  // namespace polyattr::runner
