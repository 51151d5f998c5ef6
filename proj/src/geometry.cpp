#include <pathflow/geometry.hpp>

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace pathflow {

namespace {

void check_index(const Manifold& m, int i, const char* what) {
  if (i < 0 || i >= m.n_fields())
    throw std::out_of_range(std::string(what) + " index " + std::to_string(i) +
                            " out of range for " + std::to_string(m.n_fields()) + " fields");
}

// grad_{X_b} X_c extended off M: P(y) DX_c(y) X_b(y).
std::vector<Vec> first_derivatives_at(const Manifold& m, const Vec& y) {
  const int n = m.n_fields();
  const Mat f = m.frame(y);
  const Mat p = m.projector(y);
  std::vector<Vec> out(static_cast<std::size_t>(n * n));
  for (int c = 0; c < n; ++c) {
    const Mat jac = m.frame_jacobian(y, c);
    for (int b = 0; b < n; ++b) out[b * n + c] = p * (jac * f.col(b));
  }
  return out;
}

}  // namespace

void require_on_manifold(const Manifold& m, const Vec& x, double tol) {
  const double viol = m.constraint_violation(x);
  if (!(viol <= tol)) {
    std::ostringstream os;
    os << "point violates the " << m.name() << " constraint by " << viol << " (tolerance " << tol
       << ")";
    throw ConstraintViolation(os.str());
  }
}

TangentVector tangent_project(const Manifold& m, const Vec& x, const Vec& v) {
  require_on_manifold(m, x);
  return {x, m.projector(x) * v};
}

double ellipticity_margin(const Manifold& m, const Vec& x) {
  const Mat f = m.frame(x);
  Eigen::JacobiSVD<Mat> svd(f);
  const int d = m.intrinsic_dim();
  const auto& s = svd.singularValues();
  return s.size() >= d ? s(d - 1) : 0.0;
}

Mat metric_inverse(const Manifold& m, const Vec& x) {
  require_on_manifold(m, x);
  const double margin = ellipticity_margin(m, x);
  if (!(margin > kEllipticityTol)) {
    std::ostringstream os;
    os << m.name() << ": frame does not span the tangent space (singular value " << margin << ")";
    throw EllipticityError(os.str());
  }
  const Mat f = m.frame(x);
  return f * f.transpose();
}

TangentVector covariant_derivative(const Manifold& m, const Vec& x, const Vec& v, const FieldFn& w,
                                   const FdSteps& steps) {
  const double h = steps.first;
  if (!(h > 1e-14)) throw ConfigError("covariant_derivative: finite-difference step underflow");
  const Vec ambient = (w(x + h * v) - w(x - h * v)) / (2 * h);
  return {x, m.projector(x) * ambient};
}

Vec frame_covariant_derivative(const Manifold& m, const Vec& x, const Vec& v, int i) {
  check_index(m, i, "frame");
  return m.projector(x) * (m.frame_jacobian(x, i) * v);
}

double omega_form(const Manifold& m, const Vec& x, int j, int k, const Vec& v) {
  check_index(m, j, "omega");
  check_index(m, k, "omega");
  const Mat p = m.projector(x);
  const Mat f = m.frame(x);
  const Vec vt = p * v;
  const Vec a = p * (m.frame_jacobian(x, k) * f.col(j));
  const Vec b = p * (m.frame_jacobian(x, j) * vt);
  return a.dot(vt) - b.dot(f.col(k));
}

CovariantTable covariant_table(const Manifold& m, const Vec& x, const FdSteps& steps) {
  const int n = m.n_fields();
  CovariantTable t;
  t.n = n;
  t.frame = m.frame(x);
  t.proj = m.projector(x);
  t.first_ = first_derivatives_at(m, x);

  std::vector<Mat> jac(static_cast<std::size_t>(n));
  for (int c = 0; c < n; ++c) jac[c] = m.frame_jacobian(x, c);

  const double h = steps.second;
  t.second_.assign(static_cast<std::size_t>(n * n * n), Vec::Zero(m.ambient_dim()));
  for (int a = 0; a < n; ++a) {
    const Vec dir = t.frame.col(a);
    const auto plus = first_derivatives_at(m, x + h * dir);
    const auto minus = first_derivatives_at(m, x - h * dir);
    for (int b = 0; b < n; ++b) {
      const Vec& nab = t.first(a, b);
      for (int c = 0; c < n; ++c) {
        const Vec outer = t.proj * ((plus[b * n + c] - minus[b * n + c]) / (2 * h));
        const Vec inner = t.proj * (jac[c] * nab);
        t.second_[(a * n + b) * n + c] = outer - inner;
      }
    }
  }
  return t;
}

BTerms b_terms(const CovariantTable& t, int j, int k) {
  const int n = t.n;
  BTerms out;
  for (int i = 0; i < n; ++i) {
    out.second_order_trace += t.second(j, i, i).dot(t.frame.col(k));
    out.second_order_cross -= t.second(i, j, k).dot(t.frame.col(i));
    out.divergence_term -= t.first(j, k).dot(t.first(i, i));
    for (int p = 0; p < n; ++p)
      out.quadratic_term += t.first(p, i).dot(t.frame.col(k)) * t.first(j, p).dot(t.frame.col(i));
  }
  out.second_order_trace *= 0.5;
  out.second_order_cross *= 0.5;
  out.divergence_term *= 0.5;
  out.quadratic_term *= 0.5;
  out.total =
      out.second_order_trace + out.second_order_cross + out.divergence_term + out.quadratic_term;
  return out;
}

BTerms b_terms(const Manifold& m, const Vec& x, int j, int k, const FdSteps& steps) {
  check_index(m, j, "B");
  check_index(m, k, "B");
  return b_terms(covariant_table(m, x, steps), j, k);
}

Mat b_matrix(const Manifold& m, const Vec& x, const FdSteps& steps, bool allow_analytic) {
  if (allow_analytic) {
    if (auto b = m.analytic_b(x)) return *b;
  }
  const CovariantTable t = covariant_table(m, x, steps);
  const int n = m.n_fields();
  Mat out(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) out(j, k) = b_terms(t, j, k).total;
  return out;
}

double b_coeff(const Manifold& m, const Vec& x, int j, int k, const FdSteps& steps,
               bool allow_analytic) {
  check_index(m, j, "B");
  check_index(m, k, "B");
  if (allow_analytic) {
    if (auto b = m.analytic_b(x)) return (*b)(j, k);
  }
  return b_terms(m, x, j, k, steps).total;
}

Vec ricci_from_table(const CovariantTable& t, const Vec& v) {
  const int n = t.n;
  const Vec coeffs = t.frame.transpose() * v;
  Vec out = Vec::Zero(t.frame.rows());
  for (int j = 0; j < n; ++j) {
    if (coeffs(j) == 0.0) continue;
    Vec rj = Vec::Zero(t.frame.rows());
    for (int i = 0; i < n; ++i) rj += t.second(j, i, i) - t.second(i, j, i);
    out += coeffs(j) * rj;
  }
  return t.proj * out;
}

TangentVector ricci(const Manifold& m, const Vec& x, const Vec& v, const FdSteps& steps,
                    bool allow_analytic) {
  if (allow_analytic) {
    if (auto r = m.analytic_ricci(x, v)) return {x, *r};
  }
  return {x, ricci_from_table(covariant_table(m, x, steps), v)};
}

ConnectionAxiomReport check_connection_axioms(const Manifold& m, int sample_count,
                                              std::uint64_t seed, double h) {
  ConnectionAxiomReport rep;
  rep.manifold = m.name();
  rep.samples = sample_count;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  const int n = m.n_fields();
  auto coeffs = [&] {
    Vec c(n);
    for (int i = 0; i < n; ++i) c(i) = g(rng);
    return c;
  };
  for (int s = 0; s < sample_count; ++s) {
    const Vec x = s == 0 ? m.base_point() : m.random_point(rng);
    const Vec a = coeffs(), b = coeffs(), c = coeffs();
    const FieldFn vf = [&](const Vec& y) { return Vec(m.frame(y) * a); };
    const FieldFn wf = [&](const Vec& y) { return Vec(m.frame(y) * b); };
    const FieldFn uf = [&](const Vec& y) { return Vec(m.frame(y) * c); };
    const Vec v = vf(x), w = wf(x), u = uf(x);

    const Vec dw_v = (wf(x + h * v) - wf(x - h * v)) / (2 * h);
    const Vec dv_w = (vf(x + h * w) - vf(x - h * w)) / (2 * h);
    const FdSteps steps{h, h};
    const Vec nabla_vw = covariant_derivative(m, x, v, wf, steps).vec;
    const Vec nabla_wv = covariant_derivative(m, x, w, vf, steps).vec;
    const Vec nabla_vu = covariant_derivative(m, x, v, uf, steps).vec;
    rep.max_torsion = std::max(rep.max_torsion, (nabla_vw - nabla_wv - (dw_v - dv_w)).norm());

    const Vec xp = m.retract(x + h * v), xm = m.retract(x - h * v);
    const double lhs = (wf(xp).dot(uf(xp)) - wf(xm).dot(uf(xm))) / (2 * h);
    const double rhs = nabla_vw.dot(u) + w.dot(nabla_vu);
    rep.max_metric_defect = std::max(rep.max_metric_defect, std::abs(lhs - rhs));
  }
  return rep;
}

FrameMetricReport check_frame_metric(const Manifold& m, int sample_count, std::uint64_t seed) {
  FrameMetricReport rep;
  rep.manifold = m.name();
  rep.samples = sample_count;
  rep.min_ellipticity = std::numeric_limits<double>::infinity();
  std::mt19937_64 rng(seed);
  for (int s = 0; s < sample_count; ++s) {
    const Vec x = s == 0 ? m.base_point() : m.random_point(rng);
    const Mat f = m.frame(x);
    const double disc = (f * f.transpose() - m.projector(x)).cwiseAbs().maxCoeff();
    rep.max_discrepancy = std::max(rep.max_discrepancy, disc);
    rep.min_ellipticity = std::min(rep.min_ellipticity, ellipticity_margin(m, x));
  }
  const bool metric_ok = rep.max_discrepancy < kFrameMetricTol;
  const bool elliptic = rep.min_ellipticity > kEllipticityTol;
  rep.pass = metric_ok && elliptic;
  std::ostringstream os;
  if (!metric_ok)
    os << m.name() << ": frame metric differs from the induced metric by " << rep.max_discrepancy
       << "; the projected connection is not Levi-Civita for this frame. ";
  if (!elliptic) os << m.name() << ": frame loses rank (singular value " << rep.min_ellipticity << ").";
  rep.diagnostic = os.str();
  return rep;
}

CovariantTable GeometryCache::table(const Manifold& m, const Vec& x) {
  std::vector<double> key(x.data(), x.data() + x.size());
  {
    std::lock_guard lock(mutex_);
    auto it = tables_.find(key);
    if (it != tables_.end()) {
      ++hits_;
      return it->second;
    }
  }
  CovariantTable t = covariant_table(m, x, steps_);
  std::lock_guard lock(mutex_);
  if (tables_.size() >= capacity_) tables_.clear();
  tables_.emplace(std::move(key), t);
  return t;
}

std::size_t GeometryCache::hits() const {
  std::lock_guard lock(mutex_);
  return hits_;
}

std::size_t GeometryCache::size() const {
  std::lock_guard lock(mutex_);
  return tables_.size();
}

}  // namespace pathflow
