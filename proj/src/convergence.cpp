#include <pathflow/convergence.hpp>

#include <pathflow/parallel.hpp>

#include <algorithm>
#include <cmath>

namespace pathflow {

namespace {

void check_levels(const std::vector<int>& steps, int ref_factor) {
  if (steps.size() < 2) throw ConfigError("convergence: need at least two levels");
  if (ref_factor < 2) throw ConfigError("convergence: reference factor must be at least 2");
  for (std::size_t i = 1; i < steps.size(); ++i)
    if (steps[i] <= steps[i - 1] || steps.back() % steps[i - 1] != 0)
      throw ConfigError("convergence: levels must increase and divide the finest level");
}

// Trapezoidal L^2[0,T] distance between `coarse` and the fine values at the
// shared nodes.
double shared_node_error(const TimeGrid& grid, const std::vector<Vec>& coarse,
                         const std::vector<Vec>& fine) {
  const std::size_t stride = (fine.size() - 1) / (coarse.size() - 1);
  std::vector<Vec> sub;
  sub.reserve(coarse.size());
  for (std::size_t k = 0; k < coarse.size(); ++k) sub.push_back(fine[k * stride]);
  return l2_distance(grid, coarse, sub);
}

// Per path: errors of every level against the reference.
using LevelErrors = std::vector<double>;

ConvergenceReport summarize(std::string target, const std::vector<double>& steps,
                            const std::vector<LevelErrors>& per_path) {
  ConvergenceReport rep;
  rep.target = std::move(target);
  for (std::size_t l = 0; l < steps.size(); ++l) {
    std::vector<double> sq(per_path.size());
    for (std::size_t p = 0; p < per_path.size(); ++p) sq[p] = per_path[p][l] * per_path[p][l];
    rep.levels.push_back({steps[l], std::sqrt(pairwise_sum(sq) / static_cast<double>(sq.size()))});
  }
  return rep;
}

template <class LevelFn>
ConvergenceReport grid_study(std::string target, const Manifold& m, double horizon,
                             const std::vector<int>& steps, int ref_factor, std::size_t paths,
                             std::uint64_t seed, int threads, double min_order, LevelFn fn) {
  check_levels(steps, ref_factor);
  const TimeGrid ref_grid(horizon, steps.back() * ref_factor);
  const auto per_path = parallel_map(paths, threads, [&](std::size_t i) {
    const BrownianPath w = sample_brownian(ref_grid, m.n_fields(), seed, i);
    const std::vector<Vec> ref = fn(w);
    LevelErrors errs;
    for (int n : steps)
      errs.push_back(shared_node_error(TimeGrid(horizon, n), fn(w.coarsen(ref_grid.steps() / n)), ref));
    return errs;
  });
  std::vector<double> dts;
  for (int n : steps) dts.push_back(horizon / n);
  ConvergenceReport rep = summarize(std::move(target), dts, per_path);
  rep.order = fitted_order(rep.levels);
  rep.pass = rep.order >= min_order;
  return rep;
}

}  // namespace

double fitted_order(const std::vector<ConvergenceLevel>& levels) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(levels.size());
  for (const auto& l : levels) {
    const double x = std::log(l.step), y = std::log(l.error);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

double richardson_order(double h1, double e1, double h2, double e2, double href) {
  const double target = e1 / e2;
  auto ratio = [&](double p) {
    return (std::pow(h1, p) - std::pow(href, p)) / (std::pow(h2, p) - std::pow(href, p));
  };
  // ratio(p) is increasing in p.
  double lo = 1e-3, hi = 8.0;
  if (!(target > ratio(lo))) return lo;
  if (!(target < ratio(hi))) return hi;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (ratio(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

ConvergenceReport diffusion_convergence(const Manifold& m, double horizon,
                                        const std::vector<int>& steps, int ref_factor,
                                        std::size_t paths, std::uint64_t seed, int threads,
                                        double min_order) {
  return grid_study("diffusion", m, horizon, steps, ref_factor, paths, seed, threads, min_order,
                    [&](const BrownianPath& w) { return integrate_diffusion(m, w).points; });
}

ConvergenceReport hsystem_convergence(const Manifold& m, double horizon,
                                      const std::vector<int>& steps, int ref_factor,
                                      const CameronMartinFactory& rdot, std::size_t paths,
                                      std::uint64_t seed, int threads, double min_order) {
  return grid_study("hsystem", m, horizon, steps, ref_factor, paths, seed, threads, min_order,
                    [&](const BrownianPath& w) {
                      const DiffusionPath x = integrate_diffusion(m, w);
                      const LinearSystemSpec spec = make_admissible_system(m, rdot(w.grid));
                      return integrate_linear_system(m, x, w, spec).values;
                    });
}

ConvergenceReport flow_convergence(const Manifold& m, const TimeGrid& grid,
                                   const CameronMartinPath& r, double s_max,
                                   const std::vector<double>& ds, double ds_ref, FlowMode mode,
                                   std::size_t paths, std::uint64_t seed, int threads,
                                   double tolerance) {
  if (ds.size() < 2) throw ConfigError("flow convergence: need at least two ds levels");
  for (std::size_t i = 0; i < ds.size(); ++i)
    if (!(ds[i] > ds_ref) || (i > 0 && !(ds[i] < ds[i - 1])))
      throw ConfigError("flow convergence: ds levels must decrease and exceed the reference");
  const LinearSystemSpec spec = make_admissible_system(m, r);
  const auto per_path = parallel_map(paths, threads, [&](std::size_t i) {
    const BrownianPath w = sample_brownian(grid, m.n_fields(), seed, i);
    const DiffusionPath x = integrate_diffusion(m, w);
    auto end_point = [&](double h) {
      return flow_integrate(m, x, w, spec, s_max, h, mode, FlowSpan::Forward).at(s_max).path.points;
    };
    const auto ref = end_point(ds_ref);
    LevelErrors errs;
    for (double h : ds) errs.push_back(l2_distance(grid, end_point(h), ref));
    return errs;
  });
  ConvergenceReport rep = summarize("flow", ds, per_path);
  const double nominal = mode == FlowMode::Heun ? 2.0 : 1.0;
  rep.pass = true;
  double order_sum = 0;
  for (std::size_t l = 1; l < rep.levels.size(); ++l) {
    const auto& a = rep.levels[l - 1];
    const auto& b = rep.levels[l];
    const double expected = (std::pow(a.step, nominal) - std::pow(ds_ref, nominal)) /
                            (std::pow(b.step, nominal) - std::pow(ds_ref, nominal));
    const double measured = a.error / b.error;
    if (!(std::abs(measured - expected) <= tolerance * expected)) rep.pass = false;
    order_sum += richardson_order(a.step, a.error, b.step, b.error, ds_ref);
  }
  rep.order = order_sum / static_cast<double>(rep.levels.size() - 1);
  return rep;
}

}  // namespace pathflow
