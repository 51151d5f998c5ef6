#include <pathflow/sde.hpp>

#include <pathflow/geometry.hpp>

#include <cmath>
#include <numbers>
#include <random>

namespace pathflow {

TimeGrid::TimeGrid(double horizon, int steps) : horizon_(horizon), steps_(steps) {
  if (!(horizon > 0.0)) throw ConfigError("time grid: horizon must be positive");
  if (steps < 2) throw ConfigError("time grid: need at least 2 steps");
}

int TimeGrid::nearest_node(double t) const {
  const long k = std::lround(t / horizon_ * steps_);
  return static_cast<int>(std::clamp<long>(k, 0, steps_));
}

// ---------------------------------------------------------------------------

Vec BrownianPath::increment(int k) const {
  return Eigen::Map<const Eigen::VectorXd>(increments.data() + static_cast<std::size_t>(k) * dim,
                                           dim);
}

Vec BrownianPath::value(int k) const {
  Vec w = Vec::Zero(dim);
  for (int j = 0; j < k; ++j) w += increment(j);
  return w;
}

BrownianPath BrownianPath::coarsen(int factor) const {
  if (factor < 1 || grid.steps() % factor != 0)
    throw GridMismatch("coarsen: factor must divide the number of steps");
  BrownianPath out{TimeGrid(grid.horizon(), grid.steps() / factor), dim, {}, seed, sample_index};
  out.increments.assign(static_cast<std::size_t>(out.grid.steps()) * dim, 0.0);
  for (int k = 0; k < grid.steps(); ++k)
    for (int i = 0; i < dim; ++i)
      out.increments[static_cast<std::size_t>(k / factor) * dim + i] +=
          increments[static_cast<std::size_t>(k) * dim + i];
  return out;
}

BrownianPath sample_brownian(const TimeGrid& grid, int n, std::uint64_t seed,
                             std::uint64_t sample_index) {
  if (n < 1) throw ConfigError("sample_brownian: need at least one noise component");
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(sample_index),
                    static_cast<std::uint32_t>(sample_index >> 32)};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> normal(0.0, std::sqrt(grid.dt()));
  BrownianPath w{grid, n, {}, seed, sample_index};
  w.increments.resize(static_cast<std::size_t>(grid.steps()) * n);
  for (double& v : w.increments) v = normal(rng);
  return w;
}

// ---------------------------------------------------------------------------

CameronMartinPath CameronMartinPath::zero(const TimeGrid& grid, int dim) {
  return {grid, dim, std::vector<Vec>(static_cast<std::size_t>(grid.steps()), Vec::Zero(dim))};
}

CameronMartinPath CameronMartinPath::constant(const TimeGrid& grid, const Vec& value) {
  return {grid, static_cast<int>(value.size()),
          std::vector<Vec>(static_cast<std::size_t>(grid.steps()), value)};
}

CameronMartinPath CameronMartinPath::linear(const TimeGrid& grid, const Vec& value) {
  CameronMartinPath r{grid, static_cast<int>(value.size()), {}};
  for (int k = 0; k < grid.steps(); ++k) {
    const double mid = (grid.node(k) + grid.node(k + 1)) * 0.5;
    r.rdot.push_back(value * (mid / grid.horizon()));
  }
  return r;
}

CameronMartinPath CameronMartinPath::sine(const TimeGrid& grid, const Vec& value) {
  CameronMartinPath r{grid, static_cast<int>(value.size()), {}};
  for (int k = 0; k < grid.steps(); ++k) {
    const double mid = (grid.node(k) + grid.node(k + 1)) * 0.5;
    r.rdot.push_back(value * std::sin(2 * std::numbers::pi * mid / grid.horizon()));
  }
  return r;
}

CameronMartinPath CameronMartinPath::from_cells(const TimeGrid& grid, std::vector<Vec> values) {
  if (static_cast<int>(values.size()) != grid.steps())
    throw GridMismatch("Cameron-Martin path: need one value per grid cell");
  const int dim = values.empty() ? 0 : static_cast<int>(values.front().size());
  for (const auto& v : values)
    if (v.size() != dim) throw ConfigError("Cameron-Martin path: inconsistent dimension");
  return {grid, dim, std::move(values)};
}

Vec CameronMartinPath::value(int k) const {
  Vec r = Vec::Zero(dim);
  for (int j = 0; j < k; ++j) r += rdot[j] * grid.dt();
  return r;
}

std::vector<Vec> CameronMartinPath::values() const {
  std::vector<Vec> out;
  out.reserve(rdot.size() + 1);
  Vec r = Vec::Zero(dim);
  out.push_back(r);
  for (const auto& v : rdot) {
    r += v * grid.dt();
    out.push_back(r);
  }
  return out;
}

double CameronMartinPath::energy() const {
  double e = 0;
  for (const auto& v : rdot) e += v.squaredNorm();
  return e * grid.dt();
}

// ---------------------------------------------------------------------------

DiffusionPath integrate_diffusion(const Manifold& m, const BrownianPath& w) {
  if (w.dim != m.n_fields())
    throw GridMismatch("integrate_diffusion: noise dimension differs from the number of fields");
  const double dt = w.grid.dt();
  const bool drift = m.has_drift();
  DiffusionPath path{w.grid, {}};
  path.points.reserve(static_cast<std::size_t>(w.grid.steps()) + 1);
  Vec x = m.base_point();
  path.points.push_back(x);
  for (int k = 0; k < w.grid.steps(); ++k) {
    const Vec dw = w.increment(k);
    Vec inc0 = m.frame(x) * dw;
    if (drift) inc0 += m.drift(x) * dt;
    const Vec predicted = m.step(x, inc0);
    Vec inc1 = m.frame(predicted) * dw;
    if (drift) inc1 += m.drift(predicted) * dt;
    x = m.step(x, 0.5 * (inc0 + m.transport(predicted, x, inc1)));
    path.points.push_back(x);
  }
  return path;
}

CoefficientPath integrate_linear_system(const Manifold& m, const DiffusionPath& xpath,
                                        const BrownianPath& w, const LinearSystemSpec& spec) {
  if (!(xpath.grid == w.grid))
    throw GridMismatch("integrate_linear_system: path and noise live on different grids");
  const int steps = xpath.grid.steps();
  if (static_cast<int>(xpath.points.size()) != steps + 1 ||
      static_cast<int>(spec.forcing.size()) != steps)
    throw GridMismatch("integrate_linear_system: path or forcing length does not match the grid");
  const double dt = xpath.grid.dt();

  CoefficientPath eta{xpath.grid, {}};
  eta.values.reserve(static_cast<std::size_t>(steps) + 1);
  Vec e = Vec::Zero(spec.dim);
  eta.values.push_back(e);
  for (int k = 0; k < steps; ++k) {
    const Vec& a = xpath.points[k];
    const Vec& b = xpath.points[k + 1];
    const Vec mid = m.retract(0.5 * (a + b));
    const Vec chord = m.project(mid, b - a);
    Mat step = spec.one_forms ? spec.one_forms(mid, chord) : Mat::Zero(spec.dim, spec.dim);
    if (spec.zero_order) step += spec.zero_order(mid) * dt;
    // Heun with coefficients frozen at the midpoint.
    const Vec k1 = step.lazyProduct(e) + spec.forcing[k] * dt;
    e += k1 + 0.5 * step.lazyProduct(k1);
    eta.values.push_back(e);
  }
  return eta;
}

LinearSystemSpec make_admissible_system(const Manifold& m, const CameronMartinPath& r) {
  const int n = m.n_fields();
  if (r.dim != n) throw ConfigError("admissible system: rdot dimension must equal n_fields");
  LinearSystemSpec spec;
  spec.dim = n;
  const Manifold* mp = &m;
  spec.one_forms = [mp](const Vec& x, const Vec& v) -> Mat {
    return mp->omega_matrix(x, v).transpose();
  };
  if (!m.has_drift()) {
    if (auto b = m.constant_b()) {
      const Mat bt = b->transpose();
      if (!bt.isZero(0.0)) spec.zero_order = [bt](const Vec&) { return bt; };
      spec.forcing = r.rdot;
      return spec;
    }
  }
  spec.zero_order = [mp](const Vec& x) -> Mat {
    Mat f = b_matrix(*mp, x).transpose();
    if (mp->has_drift()) {
      const Mat frame = mp->frame(x);
      const Mat nabla_y = mp->projector(x) * mp->drift_jacobian(x) * frame;  // column j: grad_{X_j} Y
      f += frame.transpose() * nabla_y;  // (i, j) = <grad_{X_j} Y, X_i>
    }
    return f;
  };
  spec.forcing = r.rdot;
  return spec;
}

std::vector<TangentVector> eval_field_along_path(const Manifold& m, const DiffusionPath& xpath,
                                                 const CoefficientPath& eta) {
  if (!(xpath.grid == eta.grid) || xpath.points.size() != eta.values.size())
    throw GridMismatch("eval_field_along_path: path and coefficients differ in length");
  std::vector<TangentVector> out;
  out.reserve(xpath.points.size());
  for (std::size_t k = 0; k < xpath.points.size(); ++k)
    out.push_back({xpath.points[k], m.frame(xpath.points[k]) * eta.values[k]});
  return out;
}

double l2_norm(const TimeGrid& grid, std::span<const Vec> values) {
  if (values.empty()) return 0.0;
  double s = 0.5 * (values.front().squaredNorm() + values.back().squaredNorm());
  for (std::size_t k = 1; k + 1 < values.size(); ++k) s += values[k].squaredNorm();
  return std::sqrt(s * grid.dt());
}

double l2_distance(const TimeGrid& grid, std::span<const Vec> a, std::span<const Vec> b) {
  if (a.size() != b.size()) throw GridMismatch("l2_distance: paths differ in length");
  std::vector<Vec> diff(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) diff[k] = a[k] - b[k];
  return l2_norm(grid, diff);
}

double max_constraint_violation(const Manifold& m, std::span<const Vec> points) {
  double worst = 0;
  for (const auto& p : points) worst = std::max(worst, m.constraint_violation(p));
  return worst;
}

}  // namespace pathflow
