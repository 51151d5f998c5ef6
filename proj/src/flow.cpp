#include <pathflow/flow.hpp>

#include <algorithm>
#include <cmath>

namespace pathflow {

namespace {

int steps_for(double span, double ds, const char* what) {
  if (!(ds > 0.0)) throw ConfigError(std::string(what) + ": ds must be positive");
  if (span < 0.0) throw ConfigError(std::string(what) + ": span must be non-negative");
  const double ratio = span / ds;
  const long k = std::lround(ratio);
  if (std::abs(ratio - static_cast<double>(k)) > 1e-9 * std::max(1.0, ratio))
    throw ConfigError(std::string(what) + ": s must be a multiple of ds");
  return static_cast<int>(k);
}

FlowState make_state(const Manifold& m, double s, DiffusionPath path, const BrownianPath& w,
                     const LinearSystemSpec& spec) {
  FlowVelocity v = flow_derivative(m, path, w, spec);
  return {s, std::move(path), std::move(v.eta), std::move(v.field)};
}

DiffusionPath advance(const Manifold& m, const DiffusionPath& path, const std::vector<Vec>& vel,
                      double h) {
  DiffusionPath out{path.grid, {}};
  out.points.reserve(path.points.size());
  for (std::size_t k = 0; k < path.points.size(); ++k) {
    try {
      out.points.push_back(m.step(path.points[k], h * vel[k]));
    } catch (const StepSizeError& e) {
      throw StepSizeError(std::string("flow: ") + e.what() + "; use a smaller ds");
    }
  }
  return out;
}

FlowState flow_step(const Manifold& m, const FlowState& cur, const BrownianPath& w,
                    const LinearSystemSpec& spec, double h, FlowMode mode) {
  DiffusionPath predicted = advance(m, cur.path, cur.velocity, h);
  if (mode == FlowMode::Euler) return make_state(m, cur.s + h, std::move(predicted), w, spec);

  const FlowVelocity v_pred = flow_derivative(m, predicted, w, spec);
  std::vector<Vec> avg(cur.velocity.size());
  for (std::size_t k = 0; k < avg.size(); ++k)
    avg[k] = 0.5 * (cur.velocity[k] +
                    m.transport(predicted.points[k], cur.path.points[k], v_pred.field[k]));
  return make_state(m, cur.s + h, advance(m, cur.path, avg, h), w, spec);
}

}  // namespace

FlowMode parse_flow_mode(const std::string& name) {
  if (name == "euler") return FlowMode::Euler;
  if (name == "heun") return FlowMode::Heun;
  throw ConfigError("unknown flow mode '" + name + "' (expected euler or heun)");
}

std::string to_string(FlowMode mode) { return mode == FlowMode::Euler ? "euler" : "heun"; }

const FlowState& FlowResult::at(double s) const {
  for (const auto& st : snapshots)
    if (std::abs(st.s - s) <= 0.5 * ds + 1e-12) return st;
  throw ConfigError("flow result has no snapshot at s = " + std::to_string(s));
}

FlowVelocity flow_derivative(const Manifold& m, const DiffusionPath& path, const BrownianPath& w,
                             const LinearSystemSpec& spec) {
  FlowVelocity out{integrate_linear_system(m, path, w, spec), {}};
  out.field.reserve(path.points.size());
  for (std::size_t k = 0; k < path.points.size(); ++k)
    out.field.push_back(m.frame(path.points[k]).lazyProduct(out.eta.values[k]));
  return out;
}

FlowResult flow_integrate(const Manifold& m, const DiffusionPath& x0, const BrownianPath& w,
                          const LinearSystemSpec& spec, double s_max, double ds, FlowMode mode,
                          FlowSpan span) {
  const int n_steps = steps_for(s_max, ds, "flow_integrate");
  FlowResult res;
  res.driving = w;
  res.ds = ds;
  res.mode = mode;

  const FlowState origin = make_state(m, 0.0, x0, w, spec);

  std::vector<FlowState> backward;
  if (span != FlowSpan::Forward) {
    const FlowState* cur = &origin;
    for (int i = 0; i < n_steps; ++i) {
      backward.push_back(flow_step(m, *cur, w, spec, -ds, mode));
      cur = &backward.back();
    }
  }
  std::vector<FlowState> forward;
  if (span != FlowSpan::Backward) {
    const FlowState* cur = &origin;
    for (int i = 0; i < n_steps; ++i) {
      forward.push_back(flow_step(m, *cur, w, spec, ds, mode));
      cur = &forward.back();
    }
  }

  res.zero_index = static_cast<int>(backward.size());
  for (auto it = backward.rbegin(); it != backward.rend(); ++it) res.snapshots.push_back(std::move(*it));
  res.snapshots.push_back(origin);
  for (auto& st : forward) res.snapshots.push_back(std::move(st));

  res.diagnostics.resize(res.snapshots.size());
  for (std::size_t i = 0; i < res.snapshots.size(); ++i) {
    const auto& st = res.snapshots[i];
    auto& diag = res.diagnostics[i];
    diag.max_constraint_violation = max_constraint_violation(m, st.path.points);
    const int z = res.zero_index;
    if (static_cast<int>(i) != z) {
      const std::size_t prev = static_cast<int>(i) < z ? i + 1 : i - 1;
      diag.l2_step = l2_distance(st.path.grid, st.path.points, res.snapshots[prev].path.points);
    }
  }
  return res;
}

std::vector<double> picard_residual(const Manifold& m, const FlowResult& result,
                                    const LinearSystemSpec& spec) {
  const auto& snaps = result.snapshots;
  const int z = result.zero_index;
  const TimeGrid& grid = snaps[z].path.grid;
  const std::size_t nodes = snaps[z].path.points.size();

  std::vector<std::vector<Vec>> vel(snaps.size());
  for (std::size_t i = 0; i < snaps.size(); ++i)
    vel[i] = flow_derivative(m, snaps[i].path, result.driving, spec).field;

  std::vector<double> out(snaps.size(), 0.0);
  for (int dir : {-1, 1}) {
    std::vector<Vec> integral(nodes, Vec::Zero(snaps[z].path.points[0].size()));
    for (int i = z + dir; i >= 0 && i < static_cast<int>(snaps.size()); i += dir) {
      const double h = snaps[i].s - snaps[i - dir].s;
      std::vector<Vec> resid(nodes);
      for (std::size_t k = 0; k < nodes; ++k) {
        integral[k] += 0.5 * h * (vel[i][k] + vel[i - dir][k]);
        resid[k] = snaps[i].path.points[k] - snaps[z].path.points[k] - integral[k];
      }
      out[i] = l2_norm(grid, resid);
    }
  }
  return out;
}

RegularityTable flow_regularity(const FlowResult& result) {
  RegularityTable t;
  const auto& snaps = result.snapshots;
  for (std::size_t i = 0; i + 1 < snaps.size(); ++i) {
    const double d =
        l2_distance(snaps[i].path.grid, snaps[i + 1].path.points, snaps[i].path.points);
    t.s.push_back(snaps[i].s);
    t.delta.push_back(d);
    t.max_ratio = std::max(t.max_ratio, d / result.ds);
  }
  return t;
}

double flow_group_check(const Manifold& m, const DiffusionPath& x0, const BrownianPath& w,
                        const LinearSystemSpec& spec, double s, double u, double ds,
                        FlowMode mode) {
  if (u == 0.0) return 0.0;
  const FlowResult direct = flow_integrate(m, x0, w, spec, s + u, ds, mode, FlowSpan::Forward);
  const FlowState& mid = direct.at(s);
  const FlowResult second = flow_integrate(m, mid.path, w, spec, u, ds, mode, FlowSpan::Forward);
  return l2_distance(x0.grid, direct.snapshots.back().path.points,
                     second.snapshots.back().path.points);
}

}  // namespace pathflow
