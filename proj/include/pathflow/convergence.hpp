#pragma once

#include <pathflow/flow.hpp>
#include <pathflow/sde.hpp>

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace pathflow {

/// Builds the Cameron-Martin path for a given grid, so that every level of a
/// refinement study sees the same continuous-time rdot.
using CameronMartinFactory = std::function<CameronMartinPath(const TimeGrid&)>;

struct ConvergenceLevel {
  double step = 0;   // dt or ds
  double error = 0;  // root-mean-square over paths
};

struct ConvergenceReport {
  std::string target;  // "diffusion", "hsystem" or "flow"
  std::vector<ConvergenceLevel> levels;
  double order = 0;
  bool pass = false;
};

/// Least-squares slope of log(error) against log(step).
double fitted_order(const std::vector<ConvergenceLevel>& levels);

/// Order p with e1 / e2 = (h1^p - href^p) / (h2^p - href^p), i.e. the order
/// seen through errors measured against a finite reference.
double richardson_order(double h1, double e1, double h2, double e2, double href);

/// Strong self-convergence of integrate_diffusion. Each level N in `steps`
/// uses the coarsened increments of one path on N * ref_factor steps; the
/// error is the L^2[0,T] distance of x^N to x^ref over the shared nodes.
ConvergenceReport diffusion_convergence(const Manifold& m, double horizon,
                                        const std::vector<int>& steps, int ref_factor,
                                        std::size_t paths, std::uint64_t seed, int threads,
                                        double min_order);

/// Same study for the coefficient system h solved along each level's
/// own diffusion path.
ConvergenceReport hsystem_convergence(const Manifold& m, double horizon,
                                      const std::vector<int>& steps, int ref_factor,
                                      const CameronMartinFactory& rdot, std::size_t paths,
                                      std::uint64_t seed, int threads, double min_order);

/// Flow convergence in ds at fixed N_t: L^2 distance of x^{s_max} to a run
/// with ds_ref. Passes when each successive error ratio is within `tolerance`
/// (relative) of the Richardson ratio of the nominal order (1 euler, 2 heun).
ConvergenceReport flow_convergence(const Manifold& m, const TimeGrid& grid,
                                   const CameronMartinPath& r, double s_max,
                                   const std::vector<double>& ds, double ds_ref, FlowMode mode,
                                   std::size_t paths, std::uint64_t seed, int threads,
                                   double tolerance = 0.3);

}  // namespace pathflow
