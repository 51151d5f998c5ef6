#include <pathflow/girsanov.hpp>

#include <pathflow/geometry.hpp>

#include <cmath>

namespace pathflow {

namespace {

void check_grid(const DiffusionPath& xpath, const CoefficientPath& h, const CameronMartinPath& r,
                std::size_t n_increments) {
  const std::size_t steps = static_cast<std::size_t>(xpath.grid.steps());
  if (!(xpath.grid == h.grid) || !(xpath.grid == r.grid) || xpath.points.size() != steps + 1 ||
      h.values.size() != steps + 1 || r.rdot.size() != steps || n_increments != steps)
    throw GridMismatch("divergence: path, coefficients, Cameron-Martin path and noise must share a grid");
}

int multiple_of(double a, double b, const char* what) {
  const double ratio = a / b;
  const long k = std::lround(ratio);
  if (k < 0 || std::abs(ratio - static_cast<double>(k)) > 1e-9 * std::max(1.0, ratio))
    throw ConfigError(std::string(what));
  return static_cast<int>(k);
}

}  // namespace

DivergenceValue divergence_with_increments(const Manifold& m, const DiffusionPath& xpath,
                                           const std::vector<Vec>& increments,
                                           const CoefficientPath& h, const CameronMartinPath& r) {
  check_grid(xpath, h, r, increments.size());
  DivergenceValue out;
  for (std::size_t k = 0; k < increments.size(); ++k) {
    const Vec& x = xpath.points[k];
    const Vec& dw = increments[k];
    out.forcing_part += r.rdot[k].dot(dw);
    if (h.values[k].isZero(0.0)) continue;
    const Mat f = m.frame(x);
    const Vec z = f.lazyProduct(h.values[k]);
    const Vec ric = ricci(m, x, z).vec;
    out.curvature_part += 0.5 * ric.dot(f.lazyProduct(dw));
  }
  out.total = out.forcing_part + out.curvature_part;
  return out;
}

DivergenceValue divergence(const Manifold& m, const DiffusionPath& xpath, const BrownianPath& w,
                           const CoefficientPath& h, const CameronMartinPath& r) {
  if (!(w.grid == xpath.grid)) throw GridMismatch("divergence: noise lives on a different grid");
  std::vector<Vec> inc;
  inc.reserve(static_cast<std::size_t>(w.grid.steps()));
  for (int k = 0; k < w.grid.steps(); ++k) inc.push_back(w.increment(k));
  return divergence_with_increments(m, xpath, inc, h, r);
}

std::vector<Vec> recovered_increments(const Manifold& m, const DiffusionPath& x,
                                      const BrownianPath& w, const DiffusionPath& y) {
  if (!(x.grid == y.grid) || !(x.grid == w.grid) || x.points.size() != y.points.size())
    throw GridMismatch("recovered_increments: paths and noise must share a grid");
  const double dt = w.grid.dt();
  std::vector<Vec> out;
  out.reserve(static_cast<std::size_t>(w.grid.steps()));
  for (int k = 0; k < w.grid.steps(); ++k) {
    Vec inc = m.project_noise(x.points[k], w.increment(k));
    if (&x != &y) {  // identical paths contribute no correction
      inc += m.noise_increment(y.points[k], y.points[k + 1], dt) -
             m.noise_increment(x.points[k], x.points[k + 1], dt);
    }
    out.push_back(std::move(inc));
  }
  return out;
}

DensityValue density_from_flow(const Manifold& m, const FlowResult& flow,
                               const CameronMartinPath& r, double s, double du) {
  DensityValue out;
  out.du = du;
  if (s == 0.0) return out;
  if (!(du > 0.0)) throw ConfigError("density: du must be positive");
  multiple_of(du, flow.ds, "density: du must be a multiple of ds");
  const int nodes = multiple_of(std::abs(s), du, "density: s must be a multiple of du");
  const double sign = s > 0 ? 1.0 : -1.0;

  const FlowState& origin = flow.snapshots[flow.zero_index];
  double integral = 0;
  for (int j = 0; j <= nodes; ++j) {
    const FlowState& st = flow.at(-sign * j * du);
    const auto inc = recovered_increments(m, origin.path, flow.driving, st.path);
    const double div = divergence_with_increments(m, st.path, inc, st.eta, r).total;
    const double weight = (j == 0 || j == nodes) ? 0.5 : 1.0;
    integral += weight * div;
  }
  out.log_density = sign * du * integral;
  out.density = std::exp(out.log_density);
  return out;
}

DensityValue rn_log_density(const Manifold& m, const BrownianPath& w, const LinearSystemSpec& spec,
                            const CameronMartinPath& r, double s, double ds, double du,
                            FlowMode mode) {
  if (s == 0.0) return {0.0, 1.0, du};
  const DiffusionPath x = integrate_diffusion(m, w);
  const FlowResult flow = flow_integrate(m, x, w, spec, std::abs(s), ds, mode,
                                         s > 0 ? FlowSpan::Backward : FlowSpan::Forward);
  return density_from_flow(m, flow, r, s, du);
}

}  // namespace pathflow
