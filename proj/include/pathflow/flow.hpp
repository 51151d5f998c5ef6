#pragma once

#include <pathflow/sde.hpp>

#include <string>
#include <vector>

namespace pathflow {

enum class FlowMode { Euler, Heun };

FlowMode parse_flow_mode(const std::string& name);
std::string to_string(FlowMode mode);

/// Which side of s = 0 flow_integrate should cover.
enum class FlowSpan { Both, Forward, Backward };

/// One point x^s of the path-space flow together with the coefficient process
/// and the vector field V(x^s) evaluated along it.
struct FlowState {
  double s = 0;
  DiffusionPath path;
  CoefficientPath eta;
  std::vector<Vec> velocity;
};

struct FlowDiagnostics {
  double max_constraint_violation = 0;
  /// L^2([0,T]) distance to the neighbouring snapshot closer to s = 0.
  double l2_step = 0;
};

struct FlowResult {
  BrownianPath driving;
  double ds = 0;
  FlowMode mode = FlowMode::Euler;
  std::vector<FlowState> snapshots;  // ascending in s
  std::vector<FlowDiagnostics> diagnostics;
  int zero_index = 0;

  /// Snapshot whose s is within ds/2 of the request.
  const FlowState& at(double s) const;
};

struct FlowVelocity {
  CoefficientPath eta;
  std::vector<Vec> field;
};

/// V(x^s): re-solves the linear system along the current path with the
/// stored noise and evaluates V_t = X_i(x^s_t) eta^i_t.
FlowVelocity flow_derivative(const Manifold& m, const DiffusionPath& path, const BrownianPath& w,
                             const LinearSystemSpec& spec);

/// Steps dx^s/ds = V(x^s) on the s-grid 0, +-ds, ..., +-s_max.
FlowResult flow_integrate(const Manifold& m, const DiffusionPath& x0, const BrownianPath& w,
                          const LinearSystemSpec& spec, double s_max, double ds, FlowMode mode,
                          FlowSpan span = FlowSpan::Both);

/// |x^s - x^0 - int_0^s V(x^u) du| in L^2([0,T]) per snapshot, trapezoid in u.
std::vector<double> picard_residual(const Manifold& m, const FlowResult& result,
                                    const LinearSystemSpec& spec);

struct RegularityTable {
  std::vector<double> s;      // left end of each s-interval
  std::vector<double> delta;  // |x^{s+ds} - x^s|_{L^2}
  double max_ratio = 0;       // max delta / ds
};

RegularityTable flow_regularity(const FlowResult& result);

/// L^2 distance between x^{s+u} and the flow by u started from x^s.
double flow_group_check(const Manifold& m, const DiffusionPath& x0, const BrownianPath& w,
                        const LinearSystemSpec& spec, double s, double u, double ds,
                        FlowMode mode);

}  // namespace pathflow
