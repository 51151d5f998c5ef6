#pragma once

#include <pathflow/flow.hpp>
#include <pathflow/sde.hpp>

#include <vector>

namespace pathflow {

/// Div(Z) = int_0^T (rdot^i + 1/2 <Ric(Z_t), X_i(x_t)>) dw_i as a left-endpoint sum.
struct DivergenceValue {
  double total = 0;
  double forcing_part = 0;    // sum_i int rdot^i dw_i
  double curvature_part = 0;  // sum_i int 1/2 <Ric Z, X_i> dw_i
};

struct DensityValue {
  double log_density = 0;
  double density = 1;
  double du = 0;
};

/// Divergence against the increments of w.
DivergenceValue divergence(const Manifold& m, const DiffusionPath& xpath, const BrownianPath& w,
                           const CoefficientPath& h, const CameronMartinPath& r);

/// Divergence against explicit per-cell noise increments.
DivergenceValue divergence_with_increments(const Manifold& m, const DiffusionPath& xpath,
                                           const std::vector<Vec>& increments,
                                           const CoefficientPath& h, const CameronMartinPath& r);

/// Noise increments of a path y that was transported from the diffusion path x
/// (driven by w) along the flow:
///   dW~_k = Pi(x_k) dW_k + N(y_k, y_{k+1}) - N(x_k, x_{k+1})
/// with Pi the visible-noise projector and N the path-based noise estimate.
/// Reproduces Pi dW exactly when y = x, and the shifted noise dW - u rdot dt
/// exactly on flat manifolds.
std::vector<Vec> recovered_increments(const Manifold& m, const DiffusionPath& x,
                                      const BrownianPath& w, const DiffusionPath& y);

/// log drho_s/dnu = int_0^s Div(Z)(x^{-u}) du by the trapezoid rule on a
/// u-grid of spacing du, evaluated from an already computed flow.
DensityValue density_from_flow(const Manifold& m, const FlowResult& flow,
                               const CameronMartinPath& r, double s, double du);

/// Flows the diffusion driven by w and evaluates the density at x.
DensityValue rn_log_density(const Manifold& m, const BrownianPath& w, const LinearSystemSpec& spec,
                            const CameronMartinPath& r, double s, double ds, double du,
                            FlowMode mode = FlowMode::Euler);

}  // namespace pathflow
