#pragma once

#include <pathflow/manifold.hpp>

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace pathflow {

/// Uniform partition t_k = k T / N of [0, T].
class TimeGrid {
 public:
  explicit TimeGrid(double horizon = 1.0, int steps = 256);

  double horizon() const { return horizon_; }
  int steps() const { return steps_; }
  double dt() const { return horizon_ / steps_; }
  double node(int k) const { return horizon_ * k / steps_; }
  /// Index of the node closest to t.
  int nearest_node(double t) const;

  bool operator==(const TimeGrid&) const = default;

 private:
  double horizon_;
  int steps_;
};

/// Increments of an n-dimensional Wiener process on a grid, row k holding
/// w(t_{k+1}) - w(t_k).
struct BrownianPath {
  TimeGrid grid;
  int dim = 0;
  std::vector<double> increments;  // steps x dim, row-major
  std::uint64_t seed = 0;
  std::uint64_t sample_index = 0;

  Vec increment(int k) const;
  /// w(t_k) for k = 0..steps.
  Vec value(int k) const;
  /// Same path on a grid coarser by `factor` (increments summed).
  BrownianPath coarsen(int factor) const;
};

/// Deterministic in (seed, sample_index); independent of how samples are
/// distributed across workers.
BrownianPath sample_brownian(const TimeGrid& grid, int n, std::uint64_t seed,
                             std::uint64_t sample_index);

struct DiffusionPath {
  TimeGrid grid;
  std::vector<Vec> points;  // steps + 1 ambient points
};

/// Cameron-Martin path r with piecewise-constant derivative on grid cells.
struct CameronMartinPath {
  TimeGrid grid;
  int dim = 0;
  std::vector<Vec> rdot;  // one entry per cell

  static CameronMartinPath zero(const TimeGrid& grid, int dim);
  static CameronMartinPath constant(const TimeGrid& grid, const Vec& value);
  /// rdot(t) = value * t / T.
  static CameronMartinPath linear(const TimeGrid& grid, const Vec& value);
  /// rdot(t) = value * sin(2 pi t / T).
  static CameronMartinPath sine(const TimeGrid& grid, const Vec& value);
  /// One row of `values` per cell.
  static CameronMartinPath from_cells(const TimeGrid& grid, std::vector<Vec> values);

  /// r(t_k) by cumulative sum, r(0) = 0.
  Vec value(int k) const;
  std::vector<Vec> values() const;
  /// sum_k |rdot_k|^2 dt
  double energy() const;
};

/// eta (or h) at every grid node.
struct CoefficientPath {
  TimeGrid grid;
  std::vector<Vec> values;
};

/// Data (T^{ij}, f^{ij}, g^i) of the linear system
///   d eta^i = T^{ij}(o dx) eta^j + [f^{ij} eta^j + g^i] dt,  eta_0 = 0.
struct LinearSystemSpec {
  int dim = 0;
  /// (x, v) -> matrix with entries T^{ij}(v) for v tangent at x.
  std::function<Mat(const Vec&, const Vec&)> one_forms;
  /// x -> matrix with entries f^{ij}(x).
  std::function<Mat(const Vec&)> zero_order;
  /// g^i per cell, piecewise constant.
  std::vector<Vec> forcing;
};

/// Stratonovich Heun scheme with a retraction at every stage:
///   predictor  x~ = R_x(F(x) dW + Y(x) dt)
///   corrector  x' = R_x(1/2 [F(x) dW + Y(x) dt + tau(F(x~) dW + Y(x~) dt)])
/// where R is Manifold::step and tau is Manifold::transport.
DiffusionPath integrate_diffusion(const Manifold& m, const BrownianPath& w);

/// Midpoint-chord rule for the o dx coupling with a Heun corrector in eta.
CoefficientPath integrate_linear_system(const Manifold& m, const DiffusionPath& xpath,
                                        const BrownianPath& w, const LinearSystemSpec& spec);

/// T^{ij} = omega^{ji}, f^{ij} = B^{ji} + <grad_{X_j} Y, X_i>, g = rdot.
LinearSystemSpec make_admissible_system(const Manifold& m, const CameronMartinPath& r);

/// V_t = X_i(x_t) eta^i_t at every node.
std::vector<TangentVector> eval_field_along_path(const Manifold& m, const DiffusionPath& xpath,
                                                 const CoefficientPath& eta);

/// Trapezoidal L^2([0,T]) norm of node values.
double l2_norm(const TimeGrid& grid, std::span<const Vec> values);
double l2_distance(const TimeGrid& grid, std::span<const Vec> a, std::span<const Vec> b);

double max_constraint_violation(const Manifold& m, std::span<const Vec> points);

}  // namespace pathflow
