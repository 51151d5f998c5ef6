#include <pathflow/mcverify.hpp>

#include <pathflow/parallel.hpp>

#include <chrono>
#include <cmath>
#include <limits>

namespace pathflow {

namespace {

std::vector<Vec> slots(const CylinderFunction& phi, const DiffusionPath& x) {
  std::vector<Vec> pts;
  pts.reserve(phi.nodes.size());
  for (int k : phi.nodes) {
    if (k < 0 || k >= static_cast<int>(x.points.size()))
      throw GridMismatch("cylinder function node " + std::to_string(k) + " is off the grid");
    pts.push_back(x.points[k]);
  }
  return pts;
}

struct ScalarMap {
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> gradient;
};

Vec as_vec(const std::vector<double>& v) {
  Vec out(static_cast<int>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<int>(i)) = v[i];
  return out;
}

ScalarMap scalar_preset(const std::string& preset, const std::vector<double>& params) {
  if (preset == "linear") {
    const Vec a = as_vec(params);
    return {[a](const Vec& x) { return a.dot(x); }, [a](const Vec&) { return a; }};
  }
  if (preset == "quadratic") {
    const Vec a = as_vec(params);
    return {[a](const Vec& x) { return a.dot(x) * a.dot(x); },
            [a](const Vec& x) { return Vec(2 * a.dot(x) * a); }};
  }
  if (preset == "sin_angle" || preset == "cos_angle") {
    const bool is_sin = preset == "sin_angle";
    // sin(theta) = x2 / |x|, cos(theta) = x1 / |x|
    return {[is_sin](const Vec& x) { return (is_sin ? x(1) : x(0)) / x.norm(); },
            [is_sin](const Vec& x) {
              const double r = x.norm();
              const Vec unit = x / r;
              Vec e = Vec::Zero(2);
              e(is_sin ? 1 : 0) = 1.0;
              return Vec((e - unit * unit(is_sin ? 1 : 0)) / r);
            }};
  }
  if (preset == "cos_coord" || preset == "sin_coord") {
    if (params.size() != 1) throw ConfigError(preset + ": expects one coordinate index");
    const int c = static_cast<int>(params[0]);
    const bool is_sin = preset == "sin_coord";
    return {[c, is_sin](const Vec& x) { return is_sin ? std::sin(x(c)) : std::cos(x(c)); },
            [c, is_sin](const Vec& x) {
              Vec g = Vec::Zero(x.size());
              g(c) = is_sin ? std::cos(x(c)) : -std::sin(x(c));
              return g;
            }};
  }
  if (preset == "trig") {
    const Vec k = as_vec(params);
    return {[k](const Vec& x) { return std::cos(k.dot(x)); },
            [k](const Vec& x) { return Vec(-std::sin(k.dot(x)) * k); }};
  }
  throw ConfigError("unknown test function preset '" + preset + "'");
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double mean_of(std::span<const double> v) {
  return pairwise_sum(v) / static_cast<double>(v.size());
}

double se_of(std::span<const double> v, double mean) {
  std::vector<double> sq(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) sq[i] = (v[i] - mean) * (v[i] - mean);
  const double var = pairwise_sum(sq) / static_cast<double>(v.size() - 1);
  return std::sqrt(var / static_cast<double>(v.size()));
}

}  // namespace

double CylinderFunction::operator()(const DiffusionPath& x) const {
  const auto pts = slots(*this, x);
  return value(pts);
}

std::vector<Vec> CylinderFunction::grad(const DiffusionPath& x) const {
  const auto pts = slots(*this, x);
  return gradient(pts);
}

CylinderFunction cylinder_with_fd_gradient(std::string name, std::vector<int> nodes,
                                           CylinderFunction::ValueFn value) {
  auto grad = [value](std::span<const Vec> pts) {
    std::vector<Vec> work(pts.begin(), pts.end());
    std::vector<Vec> out;
    for (std::size_t j = 0; j < work.size(); ++j) {
      Vec g(work[j].size());
      for (int c = 0; c < work[j].size(); ++c) {
        const double orig = work[j](c);
        work[j](c) = orig + kCylinderFdStep;
        const double up = value(work);
        work[j](c) = orig - kCylinderFdStep;
        const double down = value(work);
        work[j](c) = orig;
        g(c) = (up - down) / (2 * kCylinderFdStep);
      }
      out.push_back(g);
    }
    return out;
  };
  return {std::move(name), std::move(nodes), std::move(value), std::move(grad)};
}

CylinderFunction make_cylinder(const std::string& preset, const std::vector<double>& params,
                               std::vector<int> nodes) {
  if (nodes.empty()) throw ConfigError("cylinder function needs at least one time node");
  const ScalarMap g = scalar_preset(preset, params);
  auto value = [g](std::span<const Vec> pts) {
    double p = 1.0;
    for (const auto& x : pts) p *= g.value(x);
    return p;
  };
  auto gradient = [g](std::span<const Vec> pts) {
    std::vector<double> vals;
    for (const auto& x : pts) vals.push_back(g.value(x));
    std::vector<Vec> out;
    for (std::size_t j = 0; j < pts.size(); ++j) {
      double others = 1.0;
      for (std::size_t l = 0; l < pts.size(); ++l)
        if (l != j) others *= vals[l];
      out.push_back(others * g.gradient(pts[j]));
    }
    return out;
  };
  return {preset, std::move(nodes), value, gradient};
}

std::optional<double> flat_shifted_expectation(const Manifold& m, const std::string& preset,
                                               const std::vector<double>& params, int node,
                                               const CameronMartinPath& r, double s) {
  if (m.has_drift()) return std::nullopt;
  int coord = 0;
  bool is_sin;
  if (m.name() == "circle" && (preset == "sin_angle" || preset == "cos_angle")) {
    is_sin = preset == "sin_angle";
  } else if ((m.name() == "torus1" || m.name() == "torus2") &&
             (preset == "sin_coord" || preset == "cos_coord")) {
    is_sin = preset == "sin_coord";
    coord = static_cast<int>(params.at(0));
  } else {
    return std::nullopt;
  }
  const double t = r.grid.node(node);
  const double shift = s * r.value(node)(coord);
  const double damp = std::exp(-0.5 * t);
  return damp * (is_sin ? std::sin(shift) : std::cos(shift));
}

std::optional<double> flat_ibp_expectation(const Manifold& m, const std::string& preset,
                                           const std::vector<double>& params, int node,
                                           const CameronMartinPath& r) {
  if (!flat_shifted_expectation(m, preset, params, node, r, 0.0)) return std::nullopt;
  const bool is_sin = preset == "sin_angle" || preset == "sin_coord";
  const int coord = m.name() == "circle" ? 0 : static_cast<int>(params.at(0));
  const double t = r.grid.node(node);
  return is_sin ? std::exp(-0.5 * t) * r.value(node)(coord) : 0.0;
}

MCReport mc_stats(std::span<const std::pair<double, double>> pairs, double threshold) {
  if (pairs.size() < 2) throw ConfigError("mc_stats: need at least two samples");
  const std::size_t n = pairs.size();
  std::vector<double> lhs(n), rhs(n), diff(n);
  for (std::size_t i = 0; i < n; ++i) {
    lhs[i] = pairs[i].first;
    rhs[i] = pairs[i].second;
    diff[i] = pairs[i].first - pairs[i].second;
  }
  MCReport rep;
  rep.n_samples = n;
  rep.threshold = threshold;
  rep.lhs_mean = mean_of(lhs);
  rep.rhs_mean = mean_of(rhs);
  rep.diff_mean = mean_of(diff);
  rep.lhs_se = se_of(lhs, rep.lhs_mean);
  rep.rhs_se = se_of(rhs, rep.rhs_mean);
  rep.diff_se = se_of(diff, rep.diff_mean);
  if (rep.diff_se > 0)
    rep.z_score = rep.diff_mean / rep.diff_se;
  else
    rep.z_score = rep.diff_mean == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), rep.diff_mean);
  rep.pass = std::abs(rep.z_score) <= threshold;
  return rep;
}

MCReport mean_check(std::span<const double> values, double target, double threshold) {
  std::vector<std::pair<double, double>> pairs;
  pairs.reserve(values.size());
  for (double v : values) pairs.emplace_back(v, target);
  return mc_stats(pairs, threshold);
}

double directional_derivative(const Manifold& m, const CylinderFunction& phi,
                              const DiffusionPath& xpath, std::span<const TangentVector> z) {
  const auto grads = phi.grad(xpath);
  double out = 0;
  for (std::size_t j = 0; j < phi.nodes.size(); ++j) {
    const int k = phi.nodes[j];
    const Vec& x = xpath.points[k];
    out += (m.projector(x) * grads[j]).dot(z[k].vec);
  }
  return out;
}

IbpSample ibp_sample(const Manifold& m, const LinearSystemSpec& spec, const CameronMartinPath& r,
                     const CylinderFunction& phi, const BrownianPath& w) {
  const DiffusionPath x = integrate_diffusion(m, w);
  const CoefficientPath h = integrate_linear_system(m, x, w, spec);
  const auto z = eval_field_along_path(m, x, h);
  const double div = divergence(m, x, w, h, r).total;
  return {directional_derivative(m, phi, x, z), phi(x) * div, div};
}

std::vector<IbpSample> ibp_samples(const Manifold& m, const CameronMartinPath& r,
                                   const CylinderFunction& phi, std::size_t n_samples,
                                   std::uint64_t seed, int threads) {
  const LinearSystemSpec spec = make_admissible_system(m, r);
  return parallel_map(n_samples, threads, [&](std::size_t i) {
    const BrownianPath w = sample_brownian(r.grid, m.n_fields(), seed, i);
    return ibp_sample(m, spec, r, phi, w);
  });
}

MCReport ibp_check(const Manifold& m, const CameronMartinPath& r, const CylinderFunction& phi,
                   std::size_t n_samples, std::uint64_t seed, int threads, double threshold) {
  if (n_samples < 100) throw ConfigError("ibp_check: need at least 100 samples");
  const auto t0 = std::chrono::steady_clock::now();
  const auto samples = ibp_samples(m, r, phi, n_samples, seed, threads);
  std::vector<std::pair<double, double>> pairs;
  pairs.reserve(samples.size());
  for (const auto& s : samples) pairs.emplace_back(s.lhs, s.rhs);
  MCReport rep = mc_stats(pairs, threshold);
  rep.wall_time = seconds_since(t0);
  return rep;
}

QiSample qi_sample(const Manifold& m, const LinearSystemSpec& spec, const CameronMartinPath& r,
                   const CylinderFunction& phi, const BrownianPath& w, const QiSettings& cfg) {
  const DiffusionPath x = integrate_diffusion(m, w);
  if (cfg.s == 0.0) {
    const double v = phi(x);
    return {v, v, 1.0};
  }
  const FlowResult flow = flow_integrate(m, x, w, spec, std::abs(cfg.s), cfg.ds, cfg.mode);
  const double lhs = phi(flow.at(cfg.s).path);
  const DensityValue rho = density_from_flow(m, flow, r, cfg.s, cfg.du);
  return {lhs, phi(x) * rho.density, rho.density};
}

std::vector<QiSample> qi_samples(const Manifold& m, const CameronMartinPath& r,
                                 const CylinderFunction& phi, const QiSettings& cfg,
                                 std::size_t n_samples, std::uint64_t seed, int threads) {
  if (std::abs(cfg.s) > 1.0) throw ConfigError("qi_check: |s| must not exceed 1");
  const LinearSystemSpec spec = make_admissible_system(m, r);
  return parallel_map(n_samples, threads, [&](std::size_t i) {
    const BrownianPath w = sample_brownian(r.grid, m.n_fields(), seed, i);
    return qi_sample(m, spec, r, phi, w, cfg);
  });
}

namespace {

MCReport qi_report(std::span<const QiSample> samples, double threshold) {
  std::vector<std::pair<double, double>> pairs;
  pairs.reserve(samples.size());
  for (const auto& s : samples) pairs.emplace_back(s.lhs, s.rhs);
  return mc_stats(pairs, threshold);
}

}  // namespace

MCReport qi_check(const Manifold& m, const CameronMartinPath& r, const CylinderFunction& phi,
                  const QiSettings& cfg, std::size_t n_samples, std::uint64_t seed, int threads,
                  double threshold) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto samples = qi_samples(m, r, phi, cfg, n_samples, seed, threads);
  MCReport rep = qi_report(samples, threshold);
  rep.wall_time = seconds_since(t0);
  return rep;
}

QiBiasReport qi_bias_from_samples(std::span<const QiSample> coarse, std::span<const QiSample> fine,
                                  double threshold) {
  if (fine.size() > coarse.size())
    throw ConfigError("qi bias: the halving run cannot have more samples than the main run");
  QiBiasReport out;
  out.coarse = qi_report(coarse, threshold);
  out.fine = qi_report(fine, threshold);
  const MCReport paired = qi_report(coarse.first(fine.size()), threshold);
  out.bias_allowance = 2.0 * std::abs(paired.diff_mean - out.fine.diff_mean);
  out.pass = std::abs(out.coarse.diff_mean) <= threshold * out.coarse.diff_se + out.bias_allowance;
  return out;
}

QiBiasReport qi_bias_check(const Manifold& m, const CameronMartinPath& r,
                           const CylinderFunction& phi, const QiSettings& cfg,
                           std::size_t n_samples, std::uint64_t seed, int threads,
                           double threshold) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto coarse = qi_samples(m, r, phi, cfg, n_samples, seed, threads);
  const double t_coarse = seconds_since(t0);
  QiSettings half = cfg;
  half.ds = cfg.ds / 2;
  half.du = cfg.du / 2;
  const auto fine = qi_samples(m, r, phi, half, n_samples, seed, threads);
  QiBiasReport out = qi_bias_from_samples(coarse, fine, threshold);
  out.coarse.wall_time = t_coarse;
  out.fine.wall_time = seconds_since(t0) - t_coarse;
  return out;
}

}  // namespace pathflow
