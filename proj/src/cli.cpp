#include <pathflow/cli.hpp>

#include <pathflow/builtin_manifolds.hpp>
#include <pathflow/convergence.hpp>
#include <pathflow/geometry.hpp>
#include <pathflow/girsanov.hpp>
#include <pathflow/parallel.hpp>

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

namespace pathflow::cli {

namespace {

std::vector<std::string> split_words(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

double to_number(const std::string& w) {
  const auto slash = w.find('/');
  if (slash != std::string::npos) return std::stod(w.substr(0, slash)) / std::stod(w.substr(slash + 1));
  return std::stod(w);
}

Vec to_vec(const std::vector<std::string>& words, std::size_t from, std::size_t to) {
  Vec v(static_cast<int>(to - from));
  for (std::size_t i = from; i < to; ++i) v(static_cast<int>(i - from)) = to_number(words[i]);
  return v;
}

/// rdot = zero | constant v.. | linear v.. | sin v.. | cells v.. ; v.. ; ...
/// Cells split [0, T] into equal blocks, one vector each.
CameronMartinPath make_rdot(const std::string& spec, const TimeGrid& grid, int dim) {
  std::string spaced;
  for (char c : spec) spaced += c == ';' ? std::string(" ; ") : std::string(1, c);
  const auto w = split_words(spaced);
  if (w.empty()) throw ConfigError("rdot: empty specification");
  const std::string& preset = w[0];
  try {
    if (preset == "zero") {
      if (w.size() != 1) throw ConfigError("rdot: 'zero' takes no values");
      return CameronMartinPath::zero(grid, dim);
    }
    if (preset == "constant" || preset == "linear" || preset == "sin") {
      if (static_cast<int>(w.size()) - 1 != dim)
        throw ConfigError("rdot: expected " + std::to_string(dim) + " values for this manifold");
      const Vec v = to_vec(w, 1, w.size());
      if (preset == "constant") return CameronMartinPath::constant(grid, v);
      if (preset == "linear") return CameronMartinPath::linear(grid, v);
      return CameronMartinPath::sine(grid, v);
    }
    if (preset == "cells") {
      std::vector<Vec> blocks;
      std::size_t start = 1;
      for (std::size_t i = 1; i <= w.size(); ++i) {
        if (i == w.size() || w[i] == ";") {
          if (static_cast<int>(i - start) != dim)
            throw ConfigError("rdot: every cell needs " + std::to_string(dim) + " values");
          blocks.push_back(to_vec(w, start, i));
          start = i + 1;
        }
      }
      const int nb = static_cast<int>(blocks.size());
      if (grid.steps() % nb != 0)
        throw ConfigError("rdot: number of cells must divide the number of steps");
      std::vector<Vec> cells;
      for (int k = 0; k < grid.steps(); ++k) cells.push_back(blocks[k / (grid.steps() / nb)]);
      return CameronMartinPath::from_cells(grid, std::move(cells));
    }
  } catch (const std::invalid_argument&) {
    throw ConfigError("rdot: non-numeric value in '" + spec + "'");
  } catch (const std::out_of_range&) {
    throw ConfigError("rdot: value out of range in '" + spec + "'");
  }
  throw ConfigError("rdot: unknown preset '" + preset + "'");
}

std::vector<int> phi_nodes(const ExperimentConfig& cfg, const TimeGrid& grid) {
  std::vector<int> nodes;
  if (cfg.phi_times.empty()) return {grid.steps()};
  for (double t : cfg.phi_times) nodes.push_back(grid.nearest_node(t));
  return nodes;
}

ResultRow base_row(const ExperimentConfig& cfg, const std::string& name) {
  ResultRow r;
  r.command = name;
  r.manifold = cfg.manifold;
  r.n_samples = cfg.samples;
  r.seed = cfg.seed;
  return r;
}

ResultRow mc_row(const ExperimentConfig& cfg, const std::string& name, const MCReport& rep) {
  ResultRow r = base_row(cfg, name);
  r.n_samples = rep.n_samples;
  r.lhs_mean = rep.lhs_mean;
  r.lhs_se = rep.lhs_se;
  r.rhs_mean = rep.rhs_mean;
  r.rhs_se = rep.rhs_se;
  r.diff_mean = rep.diff_mean;
  r.diff_se = rep.diff_se;
  r.z = rep.z_score;
  r.pass = rep.pass;
  return r;
}

// Deterministic check: pass iff value <= bound (or >= bound when `at_least`).
ResultRow bound_row(const ExperimentConfig& cfg, const std::string& name, double value,
                    double bound, bool at_least = false) {
  ResultRow r = base_row(cfg, name);
  r.lhs_mean = value;
  r.rhs_mean = bound;
  r.diff_mean = value - bound;
  r.pass = at_least ? value >= bound : value <= bound;
  return r;
}

Vec random_tangent(const Manifold& m, const Vec& x, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  for (;;) {
    Vec a(m.ambient_dim());
    for (int i = 0; i < a.size(); ++i) a(i) = g(rng);
    const Vec t = m.project(x, a);
    if (t.norm() > 1e-3) return t / t.norm();
  }
}


// ---------------------------------------------------------------------------

std::vector<ResultRow> geometry_check(const ExperimentConfig& cfg, const Manifold& m) {
  std::vector<ResultRow> rows;
  const FrameMetricReport fm = check_frame_metric(m, cfg.points, cfg.seed);
  rows.push_back(bound_row(cfg, "geometry-check/frame-metric", fm.max_discrepancy, kFrameMetricTol));
  rows.back().pass = fm.max_discrepancy < kFrameMetricTol;
  rows.push_back(bound_row(cfg, "geometry-check/ellipticity", fm.min_ellipticity, kEllipticityTol, true));

  const ConnectionAxiomReport ax = check_connection_axioms(m, cfg.points, cfg.seed + 1);
  rows.push_back(bound_row(cfg, "geometry-check/torsion", ax.max_torsion, 1e-6));
  rows.push_back(bound_row(cfg, "geometry-check/metric-compat", ax.max_metric_defect, 1e-6));

  std::mt19937_64 rng(cfg.seed + 2);
  double ricci_err = 0, ricci_sym = 0, b_err = 0;
  bool have_ricci = false, have_b = false;
  for (int p = 0; p < cfg.points; ++p) {
    const Vec x = p == 0 ? m.base_point() : m.random_point(rng);
    const CovariantTable table = covariant_table(m, x);
    const Vec u = random_tangent(m, x, rng);
    const Vec v = random_tangent(m, x, rng);
    const Vec ric_u = ricci_from_table(table, u);
    const Vec ric_v = ricci_from_table(table, v);
    ricci_sym = std::max(ricci_sym, std::abs(ric_u.dot(v) - u.dot(ric_v)));
    if (auto exact = m.analytic_ricci(x, v)) {
      have_ricci = true;
      ricci_err = std::max(ricci_err, (ric_v - *exact).norm());
    }
    if (auto exact = m.analytic_b(x)) {
      have_b = true;
      for (int j = 0; j < m.n_fields(); ++j)
        for (int k = 0; k < m.n_fields(); ++k)
          b_err = std::max(b_err, std::abs(b_terms(table, j, k).total - (*exact)(j, k)));
    }
  }
  rows.push_back(bound_row(cfg, "geometry-check/ricci-symmetry", ricci_sym, 1e-6));
  if (have_ricci) rows.push_back(bound_row(cfg, "geometry-check/ricci-closed-form", ricci_err, 1e-6));
  if (have_b) rows.push_back(bound_row(cfg, "geometry-check/b-closed-form", b_err, 1e-5));
  for (auto& r : rows) r.n_samples = static_cast<std::uint64_t>(cfg.points);
  return rows;
}

std::vector<ResultRow> simulate(const ExperimentConfig& cfg, const Manifold& m, int threads) {
  const TimeGrid grid(cfg.horizon, cfg.steps);
  const CylinderFunction phi = make_cylinder(cfg.phi, cfg.phi_params, phi_nodes(cfg, grid));
  struct Out {
    double violation = 0, value = 0;
  };
  const auto res = parallel_map(cfg.samples, threads, [&](std::size_t i) {
    const DiffusionPath x = integrate_diffusion(m, sample_brownian(grid, m.n_fields(), cfg.seed, i));
    return Out{max_constraint_violation(m, x.points), phi(x)};
  });
  double worst = 0;
  std::vector<double> values;
  for (const auto& o : res) {
    worst = std::max(worst, o.violation);
    values.push_back(o.value);
  }
  std::vector<ResultRow> rows{bound_row(cfg, "simulate/constraint", worst, 1e-9)};
  const auto exact = phi.nodes.size() == 1
                         ? flat_shifted_expectation(m, cfg.phi, cfg.phi_params, phi.nodes[0],
                                                    CameronMartinPath::zero(grid, m.n_fields()), 0.0)
                         : std::nullopt;
  if (exact) {
    rows.push_back(mc_row(cfg, "simulate/phi-exact", mean_check(values, *exact, cfg.threshold)));
  } else {
    // No reference: report the estimate alone.
    MCReport rep = mean_check(values, 0.0, cfg.threshold);
    ResultRow r = mc_row(cfg, "simulate/phi", rep);
    r.rhs_mean = r.lhs_mean;
    r.diff_mean = r.diff_se = r.z = 0;
    r.pass = true;
    rows.push_back(r);
  }
  return rows;
}

std::vector<ResultRow> divergence_cmd(const ExperimentConfig& cfg, const Manifold& m, int threads) {
  const TimeGrid grid(cfg.horizon, cfg.steps);
  const CameronMartinPath r = make_rdot(cfg.rdot, grid, m.n_fields());
  const LinearSystemSpec spec = make_admissible_system(m, r);
  struct Out {
    double div = 0, density = 1, split = 0;
  };
  const auto res = parallel_map(cfg.samples, threads, [&](std::size_t i) {
    const BrownianPath w = sample_brownian(grid, m.n_fields(), cfg.seed, i);
    const DiffusionPath x = integrate_diffusion(m, w);
    const CoefficientPath h = integrate_linear_system(m, x, w, spec);
    const DivergenceValue d = divergence(m, x, w, h, r);
    Out o{d.total, 1.0, std::abs(d.total - (d.forcing_part + d.curvature_part))};
    if (cfg.s != 0.0) o.density = rn_log_density(m, w, spec, r, cfg.s, cfg.ds, cfg.du, cfg.mode).density;
    return o;
  });
  std::vector<double> div, dens;
  double split = 0;
  for (const auto& o : res) {
    div.push_back(o.div);
    dens.push_back(o.density);
    split = std::max(split, o.split);
  }
  std::vector<ResultRow> rows;
  rows.push_back(mc_row(cfg, "divergence/mean", mean_check(div, 0.0, cfg.mean_threshold)));
  if (cfg.s != 0.0)
    rows.push_back(mc_row(cfg, "divergence/density-mean", mean_check(dens, 1.0, cfg.mean_threshold)));
  rows.push_back(bound_row(cfg, "divergence/decomposition", split, 0.0));
  return rows;
}

bool flat(const Manifold& m) { return m.name() == "torus1" || m.name() == "torus2"; }

std::vector<ResultRow> flow_cmd(const ExperimentConfig& cfg, const Manifold& m, int threads) {
  const TimeGrid grid(cfg.horizon, cfg.steps);
  const CameronMartinPath r = make_rdot(cfg.rdot, grid, m.n_fields());
  const LinearSystemSpec spec = make_admissible_system(m, r);
  const double s_max = std::abs(cfg.s);
  const double half = 0.5 * s_max;
  const bool group = std::abs(half / cfg.ds - std::round(half / cfg.ds)) < 1e-9;
  const std::vector<Vec> rv = r.values();
  struct Out {
    double constraint = 0, base = 0, picard = 0, regularity = 0, group = 0;
    double h_exact = 0, shift_exact = 0, density_exact = 0;
  };
  const auto res = parallel_map(cfg.samples, threads, [&](std::size_t i) {
    const BrownianPath w = sample_brownian(grid, m.n_fields(), cfg.seed, i);
    const DiffusionPath x = integrate_diffusion(m, w);
    const FlowResult fr = flow_integrate(m, x, w, spec, s_max, cfg.ds, cfg.mode);
    Out o;
    for (const auto& d : fr.diagnostics) o.constraint = std::max(o.constraint, d.max_constraint_violation);
    for (const auto& st : fr.snapshots) o.base = std::max(o.base, (st.path.points[0] - x.points[0]).norm());
    for (double p : picard_residual(m, fr, spec)) o.picard = std::max(o.picard, p);
    o.regularity = flow_regularity(fr).max_ratio;
    if (group) o.group = flow_group_check(m, x, w, spec, half, half, cfg.ds, cfg.mode);
    if (flat(m)) {
      const CoefficientPath h = integrate_linear_system(m, x, w, spec);
      for (int k = 0; k <= grid.steps(); ++k)
        o.h_exact = std::max(o.h_exact, (h.values[k] - rv[k]).cwiseAbs().maxCoeff());
      for (const auto& st : fr.snapshots)
        for (int k = 0; k <= grid.steps(); ++k)
          o.shift_exact = std::max(
              o.shift_exact, (st.path.points[k] - x.points[k] - st.s * rv[k]).cwiseAbs().maxCoeff());
      if (cfg.s != 0.0) {
        double forcing = 0;
        for (int k = 0; k < grid.steps(); ++k) forcing += r.rdot[k].dot(w.increment(k));
        const double closed = cfg.s * forcing - 0.5 * cfg.s * cfg.s * r.energy();
        o.density_exact = std::abs(density_from_flow(m, fr, r, cfg.s, cfg.du).log_density - closed);
      }
    }
    return o;
  });
  Out worst;
  for (const auto& o : res) {
    worst.constraint = std::max(worst.constraint, o.constraint);
    worst.base = std::max(worst.base, o.base);
    worst.picard = std::max(worst.picard, o.picard);
    worst.regularity = std::max(worst.regularity, o.regularity);
    worst.group = std::max(worst.group, o.group);
    worst.h_exact = std::max(worst.h_exact, o.h_exact);
    worst.shift_exact = std::max(worst.shift_exact, o.shift_exact);
    worst.density_exact = std::max(worst.density_exact, o.density_exact);
  }
  const double order = cfg.mode == FlowMode::Heun ? 2.0 : 1.0;
  std::vector<ResultRow> rows;
  rows.push_back(bound_row(cfg, "flow/constraint", worst.constraint, 1e-8));
  rows.push_back(bound_row(cfg, "flow/base-point", worst.base, 0.0));
  rows.push_back(bound_row(cfg, "flow/picard", worst.picard, 10 * std::pow(cfg.ds, order)));
  ResultRow reg = bound_row(cfg, "flow/regularity", worst.regularity,
                            std::numeric_limits<double>::infinity());
  reg.pass = std::isfinite(worst.regularity);
  rows.push_back(reg);
  if (group) rows.push_back(bound_row(cfg, "flow/group", worst.group, 10 * cfg.ds));
  if (flat(m)) {
    rows.push_back(bound_row(cfg, "flow/h-closed-form", worst.h_exact, 1e-12));
    rows.push_back(bound_row(cfg, "flow/shift-closed-form", worst.shift_exact, 1e-10));
    if (cfg.s != 0.0)
      rows.push_back(bound_row(cfg, "flow/density-closed-form", worst.density_exact, 1e-8));
  }
  return rows;
}

std::vector<ResultRow> ibp_cmd(const ExperimentConfig& cfg, const Manifold& m, int threads) {
  const TimeGrid grid(cfg.horizon, cfg.steps);
  const CameronMartinPath r = make_rdot(cfg.rdot, grid, m.n_fields());
  const CylinderFunction phi = make_cylinder(cfg.phi, cfg.phi_params, phi_nodes(cfg, grid));
  const auto exact = phi.nodes.size() == 1
                         ? flat_ibp_expectation(m, cfg.phi, cfg.phi_params, phi.nodes[0], r)
                         : std::nullopt;
  std::vector<ResultRow> rows;
  int passes = 0;
  for (int rep = 0; rep < cfg.repeats; ++rep) {
    const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(rep);
    const auto samples = ibp_samples(m, r, phi, cfg.samples, seed, threads);
    std::vector<std::pair<double, double>> pairs;
    std::vector<double> lhs, rhs, div;
    for (const auto& s : samples) {
      pairs.emplace_back(s.lhs, s.rhs);
      lhs.push_back(s.lhs);
      rhs.push_back(s.rhs);
      div.push_back(s.divergence);
    }
    ResultRow main = mc_row(cfg, "ibp", mc_stats(pairs, cfg.threshold));
    main.seed = seed;
    main.gating = cfg.repeats == 1;
    passes += main.pass;
    rows.push_back(main);
    if (rep > 0) continue;
    if (exact) {
      const double target = exact.value();
      rows.push_back(mc_row(cfg, "ibp/lhs-exact", mean_check(lhs, target, cfg.threshold)));
      rows.push_back(mc_row(cfg, "ibp/rhs-exact", mean_check(rhs, target, cfg.threshold)));
    }
    rows.push_back(mc_row(cfg, "ibp/divergence-mean", mean_check(div, 0.0, cfg.mean_threshold)));
  }
  if (cfg.repeats > 1) {
    ResultRow sum = bound_row(cfg, "ibp/repeats", passes, cfg.min_pass, true);
    sum.n_samples = cfg.samples * static_cast<std::uint64_t>(cfg.repeats);
    rows.push_back(sum);
  }
  return rows;
}

std::vector<ResultRow> qi_cmd(const ExperimentConfig& cfg, const Manifold& m, int threads) {
  const TimeGrid grid(cfg.horizon, cfg.steps);
  const CameronMartinPath r = make_rdot(cfg.rdot, grid, m.n_fields());
  const CylinderFunction phi = make_cylinder(cfg.phi, cfg.phi_params, phi_nodes(cfg, grid));
  const QiSettings settings{cfg.s, cfg.ds, cfg.du, cfg.mode};
  const auto samples = qi_samples(m, r, phi, settings, cfg.samples, cfg.seed, threads);
  std::vector<std::pair<double, double>> pairs;
  std::vector<double> lhs, rhs, dens;
  for (const auto& s : samples) {
    pairs.emplace_back(s.lhs, s.rhs);
    lhs.push_back(s.lhs);
    rhs.push_back(s.rhs);
    dens.push_back(s.density);
  }
  std::vector<ResultRow> rows{mc_row(cfg, "qi", mc_stats(pairs, cfg.threshold))};
  if (cfg.bias_check) {
    rows.back().gating = false;
    QiSettings half = settings;
    half.ds /= 2;
    half.du /= 2;
    const std::size_t n_fine = cfg.bias_samples == 0 ? cfg.samples : cfg.bias_samples;
    const auto fine = qi_samples(m, r, phi, half, n_fine, cfg.seed, threads);
    const QiBiasReport bias = qi_bias_from_samples(samples, fine, cfg.threshold);
    ResultRow fr = mc_row(cfg, "qi/fine", bias.fine);
    fr.gating = false;
    rows.push_back(fr);
    ResultRow br = bound_row(cfg, "qi/bias", std::abs(bias.coarse.diff_mean),
                             cfg.threshold * bias.coarse.diff_se + bias.bias_allowance);
    br.lhs_se = bias.coarse.diff_se;
    br.rhs_se = bias.bias_allowance;
    br.z = bias.coarse.z_score;
    rows.push_back(br);
  }
  if (phi.nodes.size() == 1) {
    if (auto exact = flat_shifted_expectation(m, cfg.phi, cfg.phi_params, phi.nodes[0], r, cfg.s)) {
      rows.push_back(mc_row(cfg, "qi/lhs-exact", mean_check(lhs, *exact, cfg.threshold)));
      rows.push_back(mc_row(cfg, "qi/rhs-exact", mean_check(rhs, *exact, cfg.threshold)));
    }
  }
  rows.push_back(mc_row(cfg, "qi/density-mean", mean_check(dens, 1.0, cfg.mean_threshold)));
  return rows;
}

std::vector<ResultRow> convergence_cmd(const ExperimentConfig& cfg, const Manifold& m, int threads) {
  std::vector<ResultRow> rows;
  for (const auto& target : cfg.targets) {
    ConvergenceReport rep;
    double required = cfg.min_order;
    if (target == "diffusion") {
      rep = diffusion_convergence(m, cfg.horizon, cfg.levels, cfg.reference_factor, cfg.samples,
                                  cfg.seed, threads, cfg.min_order);
    } else if (target == "hsystem") {
      const auto factory = [&](const TimeGrid& g) { return make_rdot(cfg.rdot, g, m.n_fields()); };
      rep = hsystem_convergence(m, cfg.horizon, cfg.levels, cfg.reference_factor, factory,
                                cfg.samples, cfg.seed, threads, cfg.min_order);
    } else {
      const FlowMode mode = target == "flow-heun" ? FlowMode::Heun : FlowMode::Euler;
      const TimeGrid grid(cfg.horizon, cfg.steps);
      rep = flow_convergence(m, grid, make_rdot(cfg.rdot, grid, m.n_fields()), std::abs(cfg.s),
                             cfg.ds_levels, cfg.ds_reference, mode, cfg.samples, cfg.seed, threads,
                             cfg.order_tolerance);
      required = mode == FlowMode::Heun ? 2.0 : 1.0;
    }
    for (const auto& l : rep.levels) {
      ResultRow lr = base_row(cfg, "convergence/" + target + "/level");
      lr.lhs_mean = l.error;
      lr.rhs_mean = l.step;
      lr.pass = std::isfinite(l.error);
      lr.gating = false;
      rows.push_back(lr);
    }
    ResultRow r = base_row(cfg, "convergence/" + target);
    r.lhs_mean = rep.order;
    r.rhs_mean = required;
    r.diff_mean = rep.order - required;
    r.pass = rep.pass;
    rows.push_back(r);
  }
  return rows;
}

}  // namespace

std::vector<ResultRow> execute(const ExperimentConfig& cfg, int threads) {
  const auto t0 = std::chrono::steady_clock::now();
  const ManifoldPtr m = make_manifold(cfg.manifold, cfg.drift);
  std::vector<ResultRow> rows;
  if (cfg.command == "geometry-check")
    rows = geometry_check(cfg, *m);
  else if (cfg.command == "simulate")
    rows = simulate(cfg, *m, threads);
  else if (cfg.command == "divergence")
    rows = divergence_cmd(cfg, *m, threads);
  else if (cfg.command == "flow")
    rows = flow_cmd(cfg, *m, threads);
  else if (cfg.command == "ibp")
    rows = ibp_cmd(cfg, *m, threads);
  else if (cfg.command == "qi")
    rows = qi_cmd(cfg, *m, threads);
  else if (cfg.command == "convergence")
    rows = convergence_cmd(cfg, *m, threads);
  else
    throw ConfigError("unknown command '" + cfg.command + "'");
  if (cfg.record_wall_time) {
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    for (auto& r : rows) r.wall_time_s = elapsed;
  }
  return rows;
}

bool all_pass(const std::vector<ResultRow>& rows) {
  for (const auto& r : rows)
    if (r.gating && !r.pass) return false;
  return true;
}

int run(const std::string& command, const std::string& config_path,
        const std::map<std::string, std::string>& overrides, const RunOptions& options) {
  ExperimentConfig cfg;
  try {
    cfg = load_config(config_path, command, overrides);
  } catch (const ConfigError& e) {
    std::cerr << "pathflow: configuration error: " << e.what() << "\n";
    return 2;
  }
  const int threads = resolve_thread_count(options.threads);
  const std::string out = options.out.empty() ? command + "_results.csv" : options.out;

  const auto t0 = std::chrono::steady_clock::now();
  std::vector<ResultRow> rows;
  try {
    rows = execute(cfg, threads);
  } catch (const ConfigError& e) {
    std::cerr << "pathflow: configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "pathflow: " << command << " failed: " << e.what() << "\n";
    return 1;
  }
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  try {
    emit_results(rows, out);
    std::ofstream man(out + ".manifest", std::ios::trunc);
    if (!man) throw Error("cannot write manifest '" + out + ".manifest'");
    man << "# pathflow run manifest\n"
        << "version = " << version() << "\n"
        << "config_path = " << config_path << "\n"
        << "results = " << out << "\n"
        << "threads = " << threads << "\n"
        << "wall_time_s = " << elapsed << "\n"
        << "[resolved]\n"
        << dump_config(cfg);
  } catch (const std::exception& e) {
    std::cerr << "pathflow: " << e.what() << "\n";
    return 2;
  }

  const bool ok = all_pass(rows);
  for (const auto& r : rows)
    if (r.gating)
      std::cerr << (r.pass ? "  pass  " : "  FAIL  ") << r.command << "  lhs=" << r.lhs_mean
                << " rhs=" << r.rhs_mean << " z=" << r.z << "\n";
  std::cerr << "pathflow: " << command << " on " << cfg.manifold << ": " << (ok ? "pass" : "FAIL")
            << " (" << elapsed << " s, " << threads << " threads) -> " << out << "\n";
  return ok ? 0 : 1;
}

}  // namespace pathflow::cli
