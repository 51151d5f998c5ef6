#pragma once

#include <pathflow/flow.hpp>
#include <pathflow/girsanov.hpp>
#include <pathflow/sde.hpp>

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace pathflow {

/// Phi(x) = f(x_{t_1}, ..., x_{t_m}) with per-slot ambient gradients.
struct CylinderFunction {
  using ValueFn = std::function<double(std::span<const Vec>)>;
  using GradFn = std::function<std::vector<Vec>(std::span<const Vec>)>;

  std::string name;
  std::vector<int> nodes;
  ValueFn value;
  GradFn gradient;

  double operator()(const DiffusionPath& x) const;
  std::vector<Vec> grad(const DiffusionPath& x) const;
};

inline constexpr double kCylinderFdStep = 1e-6;

/// Cylinder function whose gradient is taken by central differences.
CylinderFunction cylinder_with_fd_gradient(std::string name, std::vector<int> nodes,
                                           CylinderFunction::ValueFn value);

/// Product over slots of one scalar map g on M. Presets:
///   linear      g = <a, x>
///   quadratic   g = <a, x>^2
///   sin_angle   g = sin(theta)                (circle)
///   cos_angle   g = cos(theta)                (circle)
///   cos_coord   g = cos(x_c), c = params[0]   (torus)
///   sin_coord   g = sin(x_c), c = params[0]   (torus)
///   trig        g = cos(<k, x>), k = params   (torus)
CylinderFunction make_cylinder(const std::string& preset, const std::vector<double>& params,
                               std::vector<int> nodes);

/// Exact E[Phi(x^s)] on the driftless circle/torus for single-slot
/// sin/cos presets, where the flow is the Cameron-Martin shift x + s r.
std::optional<double> flat_shifted_expectation(const Manifold& m, const std::string& preset,
                                               const std::vector<double>& params, int node,
                                               const CameronMartinPath& r, double s);
/// d/ds of the above at s = 0, i.e. the common value of both sides of the
/// integration-by-parts identity.
std::optional<double> flat_ibp_expectation(const Manifold& m, const std::string& preset,
                                           const std::vector<double>& params, int node,
                                           const CameronMartinPath& r);

struct MCReport {
  double lhs_mean = 0, lhs_se = 0;
  double rhs_mean = 0, rhs_se = 0;
  double diff_mean = 0, diff_se = 0;
  std::size_t n_samples = 0;
  double z_score = 0;
  double threshold = 3.0;
  bool pass = false;
  double wall_time = 0;
  std::optional<double> analytic;
};

/// Paired statistics; diff_se comes from the per-sample differences.
MCReport mc_stats(std::span<const std::pair<double, double>> pairs, double threshold = 3.0);

/// Z(Phi)(x) = sum_j <P grad_j f, Z_{t_j}>.
double directional_derivative(const Manifold& m, const CylinderFunction& phi,
                              const DiffusionPath& xpath, std::span<const TangentVector> z);

struct IbpSample {
  double lhs = 0;  // Z(Phi)(x)
  double rhs = 0;  // Phi(x) Div(Z)
  double divergence = 0;
};

IbpSample ibp_sample(const Manifold& m, const LinearSystemSpec& spec, const CameronMartinPath& r,
                     const CylinderFunction& phi, const BrownianPath& w);

std::vector<IbpSample> ibp_samples(const Manifold& m, const CameronMartinPath& r,
                                   const CylinderFunction& phi, std::size_t n_samples,
                                   std::uint64_t seed, int threads);

MCReport ibp_check(const Manifold& m, const CameronMartinPath& r, const CylinderFunction& phi,
                   std::size_t n_samples, std::uint64_t seed, int threads = 1,
                   double threshold = 3.0);

struct QiSettings {
  double s = 0.25;
  double ds = 1.0 / 80;
  double du = 1.0 / 80;
  FlowMode mode = FlowMode::Euler;
};

struct QiSample {
  double lhs = 0;      // Phi(x^s)
  double rhs = 0;      // Phi(x) rho_s(x)
  double density = 1;  // rho_s(x)
};

QiSample qi_sample(const Manifold& m, const LinearSystemSpec& spec, const CameronMartinPath& r,
                   const CylinderFunction& phi, const BrownianPath& w, const QiSettings& cfg);

std::vector<QiSample> qi_samples(const Manifold& m, const CameronMartinPath& r,
                                 const CylinderFunction& phi, const QiSettings& cfg,
                                 std::size_t n_samples, std::uint64_t seed, int threads);

MCReport qi_check(const Manifold& m, const CameronMartinPath& r, const CylinderFunction& phi,
                  const QiSettings& cfg, std::size_t n_samples, std::uint64_t seed,
                  int threads = 1, double threshold = 3.0);

/// Quasi-invariance with an explicit discretisation-bias allowance: runs ds
/// and ds/2 on common noise and accepts |diff| <= threshold * se + C ds with
/// C ds = 2 |diff(ds) - diff(ds/2)|.
struct QiBiasReport {
  MCReport coarse;
  MCReport fine;
  double bias_allowance = 0;
  bool pass = false;
};

QiBiasReport qi_bias_check(const Manifold& m, const CameronMartinPath& r,
                           const CylinderFunction& phi, const QiSettings& cfg,
                           std::size_t n_samples, std::uint64_t seed, int threads = 1,
                           double threshold = 3.0);

/// `fine` holds the ds/2 run on the first fine.size() noise indices of
/// `coarse`; the allowance compares the two runs on those shared indices.
QiBiasReport qi_bias_from_samples(std::span<const QiSample> coarse, std::span<const QiSample> fine,
                                  double threshold = 3.0);

/// Mean of samples against a constant target, reported in MCReport form
/// (lhs = sample mean, rhs = target).
MCReport mean_check(std::span<const double> values, double target, double threshold);

}  // namespace pathflow
