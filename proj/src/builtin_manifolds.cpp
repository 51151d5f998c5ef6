#include <pathflow/builtin_manifolds.hpp>

#include <cmath>
#include <numbers>

namespace pathflow {

namespace {

Mat radial_projector(const Vec& y) {
  const int dim = static_cast<int>(y.size());
  return Mat::Identity(dim, dim) - y * y.transpose() / y.squaredNorm();
}

Vec radial_project(const Vec& y, const Vec& v) { return v - y * (y.dot(v) / y.squaredNorm()); }

Vec normalize_or_throw(const Vec& y) {
  const double norm = y.norm();
  if (!(norm > 0.5 && norm < 1.5))
    throw StepSizeError("retraction: point at radius " + std::to_string(norm) +
                        " is too far from the manifold; increase the number of steps");
  return y / norm;
}

// ---------------------------------------------------------------------------

class Circle final : public Manifold {
 public:
  explicit Circle(double drift_amplitude) : amplitude_(drift_amplitude) {}

  std::string name() const override { return "circle"; }
  int ambient_dim() const override { return 2; }
  int intrinsic_dim() const override { return 1; }
  int n_fields() const override { return 1; }
  Vec base_point() const override { return Vec::Unit(2, 0); }

  Vec constraint(const Vec& y) const override {
    Vec c(1);
    c(0) = y.squaredNorm() - 1.0;
    return c;
  }
  Vec retract(const Vec& y) const override { return normalize_or_throw(y); }
  Mat projector(const Vec& y) const override { return radial_projector(y); }
  Vec project(const Vec& y, const Vec& v) const override { return radial_project(y, v); }

  Mat frame(const Vec& y) const override {
    Mat f(2, 1);
    f << -y(1), y(0);
    return f;
  }
  Mat frame_jacobian(const Vec& /*y*/, int /*i*/) const override {
    Mat j(2, 2);
    j << 0, -1, 1, 0;
    return j;
  }

  bool has_drift() const override { return amplitude_ != 0.0; }
  Vec drift(const Vec& y) const override {
    Vec out(2);
    const double c = amplitude_ * y(1) / y.norm();
    out << -c * y(1), c * y(0);
    return out;
  }

  std::optional<Vec> analytic_ricci(const Vec& /*x*/, const Vec& /*v*/) const override {
    return Vec::Zero(2);
  }
  std::optional<Mat> analytic_b(const Vec& /*x*/) const override { return Mat::Zero(1, 1); }
  std::optional<Mat> constant_b() const override { return Mat::Zero(1, 1); }
  Mat omega_matrix(const Vec& /*x*/, const Vec& /*v*/) const override { return Mat::Zero(1, 1); }

  // Exact rotation by the angular size of v.
  Vec step(const Vec& x, const Vec& v) const override {
    if (v.isZero(0.0)) return x;
    const double phi = x(0) * v(1) - x(1) * v(0);
    return rotate(x, std::cos(phi), std::sin(phi));
  }
  Vec transport(const Vec& from, const Vec& to, const Vec& v) const override {
    const double c = from.dot(to);
    const double s = from(0) * to(1) - from(1) * to(0);
    return rotate(v, c, s);
  }

  Mat noise_projector(const Vec& /*x*/) const override { return Mat::Identity(1, 1); }
  Vec project_noise(const Vec& /*x*/, const Vec& dw) const override { return dw; }
  Vec noise_increment(const Vec& a, const Vec& b, double dt) const override {
    Vec out(1);
    const double angle = std::atan2(a(0) * b(1) - a(1) * b(0), a.dot(b));
    out(0) = angle - 0.5 * amplitude_ * (a(1) + b(1)) * dt;
    return out;
  }

  Vec random_point(std::mt19937_64& rng) const override {
    std::uniform_real_distribution<double> u(0.0, 2 * std::numbers::pi);
    const double t = u(rng);
    Vec p(2);
    p << std::cos(t), std::sin(t);
    return p;
  }

 private:
  static Vec rotate(const Vec& v, double c, double s) {
    Vec out(2);
    out << c * v(0) - s * v(1), s * v(0) + c * v(1);
    return out;
  }

  double amplitude_;
};

// ---------------------------------------------------------------------------

class FlatTorus final : public Manifold {
 public:
  explicit FlatTorus(int dim) : dim_(dim) {
    if (dim < 1 || dim > 2) throw ConfigError("flat torus dimension must be 1 or 2");
  }

  std::string name() const override { return dim_ == 1 ? "torus1" : "torus2"; }
  int ambient_dim() const override { return dim_; }
  int intrinsic_dim() const override { return dim_; }
  int n_fields() const override { return dim_; }
  Vec base_point() const override { return Vec::Zero(dim_); }

  Vec constraint(const Vec& /*y*/) const override { return Vec(0); }
  Vec retract(const Vec& y) const override { return y; }
  Mat projector(const Vec& /*y*/) const override { return Mat::Identity(dim_, dim_); }
  Vec project(const Vec& /*y*/, const Vec& v) const override { return v; }
  Mat frame(const Vec& /*y*/) const override { return Mat::Identity(dim_, dim_); }
  Mat frame_jacobian(const Vec& /*y*/, int /*i*/) const override { return Mat::Zero(dim_, dim_); }

  std::optional<Vec> analytic_ricci(const Vec& /*x*/, const Vec& /*v*/) const override {
    return Vec::Zero(dim_);
  }
  std::optional<Mat> analytic_b(const Vec& /*x*/) const override { return Mat::Zero(dim_, dim_); }
  std::optional<Mat> constant_b() const override { return Mat::Zero(dim_, dim_); }
  Mat omega_matrix(const Vec& /*x*/, const Vec& /*v*/) const override {
    return Mat::Zero(dim_, dim_);
  }

  Vec step(const Vec& x, const Vec& v) const override { return x + v; }
  Mat noise_projector(const Vec& /*x*/) const override { return Mat::Identity(dim_, dim_); }
  Vec project_noise(const Vec& /*x*/, const Vec& dw) const override { return dw; }
  Vec noise_increment(const Vec& a, const Vec& b, double /*dt*/) const override { return b - a; }

  Vec random_point(std::mt19937_64& rng) const override {
    std::uniform_real_distribution<double> u(0.0, 2 * std::numbers::pi);
    Vec p(dim_);
    for (int i = 0; i < dim_; ++i) p(i) = u(rng);
    return p;
  }

 private:
  int dim_;
};

// ---------------------------------------------------------------------------

class Sphere2 final : public Manifold {
 public:
  std::string name() const override { return "sphere2"; }
  int ambient_dim() const override { return 3; }
  int intrinsic_dim() const override { return 2; }
  int n_fields() const override { return 3; }
  Vec base_point() const override { return Vec::Unit(3, 2); }

  Vec constraint(const Vec& y) const override {
    Vec c(1);
    c(0) = y.squaredNorm() - 1.0;
    return c;
  }
  Vec retract(const Vec& y) const override { return normalize_or_throw(y); }
  Mat projector(const Vec& y) const override { return radial_projector(y); }
  Vec project(const Vec& y, const Vec& v) const override { return radial_project(y, v); }

  Mat frame(const Vec& y) const override {
    return Mat::Identity(3, 3) - y * y.transpose();
  }
  // DX_i[v] = -v_i y - y_i v
  Mat frame_jacobian(const Vec& y, int i) const override {
    Mat j = -y(i) * Mat::Identity(3, 3);
    j.col(i) -= y;
    return j;
  }

  std::optional<Vec> analytic_ricci(const Vec& x, const Vec& v) const override {
    return radial_project(x, v);
  }
  std::optional<Mat> analytic_b(const Vec& /*x*/) const override { return Mat::Zero(3, 3); }
  std::optional<Mat> constant_b() const override { return Mat::Zero(3, 3); }

  // omega^{jk}(v) = x_j v_k - x_k v_j
  Mat omega_matrix(const Vec& x, const Vec& v) const override {
    const Vec vt = radial_project(x, v);
    return x.lazyProduct(vt.transpose()) - vt.lazyProduct(x.transpose());
  }

  Mat noise_projector(const Vec& x) const override { return radial_projector(x); }
  Vec project_noise(const Vec& x, const Vec& dw) const override { return radial_project(x, dw); }
  Vec noise_increment(const Vec& a, const Vec& b, double /*dt*/) const override {
    const Vec d = b - a;
    return d - a * a.dot(d);
  }

  Vec random_point(std::mt19937_64& rng) const override {
    std::normal_distribution<double> g;
    Vec p(3);
    do {
      for (int i = 0; i < 3; ++i) p(i) = g(rng);
    } while (p.norm() < 1e-8);
    return p.normalized();
  }
};

// ---------------------------------------------------------------------------

using Mat3 = Eigen::Matrix3d;
using Vec3 = Eigen::Vector3d;

Mat3 as_matrix(const Vec& y) {
  Mat3 m;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) m(r, c) = y(3 * r + c);
  return m;
}

Vec as_vector(const Mat3& m) {
  Vec y(9);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) y(3 * r + c) = m(r, c);
  return y;
}

Mat3 hat(const Vec3& w) {
  Mat3 m;
  m << 0, -w(2), w(1), w(2), 0, -w(0), -w(1), w(0), 0;
  return m;
}

Vec3 vee_of_skew_part(const Mat3& a) {
  return Vec3(a(2, 1) - a(1, 2), a(0, 2) - a(2, 0), a(1, 0) - a(0, 1)) * 0.5;
}

Mat3 exp_so3(const Vec3& w) {
  const double theta = w.norm();
  const Mat3 k = hat(w);
  double a, b;
  if (theta < 1e-6) {
    a = 1.0 - theta * theta / 6.0;
    b = 0.5 - theta * theta / 24.0;
  } else {
    a = std::sin(theta) / theta;
    b = (1.0 - std::cos(theta)) / (theta * theta);
  }
  return Mat3::Identity() + a * k + b * k * k;
}

Vec3 log_so3(const Mat3& r) {
  const double c = std::clamp((r.trace() - 1.0) * 0.5, -1.0, 1.0);
  const double theta = std::acos(c);
  const Vec3 axis_part = vee_of_skew_part(r);  // sin(theta) * axis
  if (theta < 1e-6) return axis_part * (1.0 + theta * theta / 6.0);
  if (std::numbers::pi - theta < 1e-6) {
    // Rotation by ~pi: recover the axis from the symmetric part.
    const Mat3 b = (r + Mat3::Identity()) * 0.5;
    int col;
    b.diagonal().maxCoeff(&col);
    Vec3 axis = b.col(col) / std::sqrt(std::max(b(col, col), 1e-300));
    return axis.normalized() * theta;
  }
  return axis_part * (theta / std::sin(theta));
}

class SpecialOrthogonal3 final : public Manifold {
 public:
  SpecialOrthogonal3() {
    const double s = 1.0 / std::sqrt(2.0);
    for (int i = 0; i < 3; ++i) basis_[i] = hat(Vec3::Unit(i)) * s;
  }

  std::string name() const override { return "so3"; }
  int ambient_dim() const override { return 9; }
  int intrinsic_dim() const override { return 3; }
  int n_fields() const override { return 3; }
  Vec base_point() const override { return as_vector(Mat3::Identity()); }

  Vec constraint(const Vec& y) const override {
    const Mat3 m = as_matrix(y);
    const Mat3 s = m.transpose() * m - Mat3::Identity();
    Vec c(6);
    c << s(0, 0), s(0, 1), s(0, 2), s(1, 1), s(1, 2), s(2, 2);
    return c;
  }

  Vec retract(const Vec& y) const override { return as_vector(polar(as_matrix(y))); }

  Mat projector(const Vec& y) const override {
    const Mat3 q = polar(as_matrix(y));
    Mat g(9, 3);
    for (int i = 0; i < 3; ++i) g.col(i) = as_vector(q * basis_[i]);
    return g * g.transpose();
  }

  Mat frame(const Vec& y) const override {
    const Mat3 m = as_matrix(y);
    Mat f(9, 3);
    for (int i = 0; i < 3; ++i) f.col(i) = as_vector(m * basis_[i]);
    return f;
  }

  // X_i is linear in y: DX_i[V] = V E_i.
  Mat frame_jacobian(const Vec& /*y*/, int i) const override {
    Mat j = Mat::Zero(9, 9);
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c)
        for (int cc = 0; cc < 3; ++cc) j(3 * r + cc, 3 * r + c) = basis_[i](c, cc);
    return j;
  }

  // Bi-invariant metric with |E_i| = 1: Ric = 1/4 g, B^{jk} = delta_jk / 8,
  // omega^{jk} = 0. The test suite checks each against the generic routes.
  std::optional<Vec> analytic_ricci(const Vec& x, const Vec& v) const override {
    return Vec(0.25 * (projector(x) * v));
  }
  std::optional<Mat> analytic_b(const Vec& /*x*/) const override { return constant_b(); }
  std::optional<Mat> constant_b() const override { return Mat::Identity(3, 3) * 0.125; }
  Mat omega_matrix(const Vec& /*x*/, const Vec& /*v*/) const override { return Mat::Zero(3, 3); }

  Vec step(const Vec& x, const Vec& v) const override {
    if (v.isZero(0.0)) return x;
    const Mat3 r = as_matrix(x);
    const Vec3 w = vee_of_skew_part(r.transpose() * as_matrix(v));
    return as_vector(r * exp_so3(w));
  }
  Vec transport(const Vec& from, const Vec& to, const Vec& v) const override {
    return as_vector(as_matrix(to) * as_matrix(from).transpose() * as_matrix(v));
  }

  Mat noise_projector(const Vec& /*x*/) const override { return Mat::Identity(3, 3); }
  Vec project_noise(const Vec& /*x*/, const Vec& dw) const override { return dw; }
  Vec noise_increment(const Vec& a, const Vec& b, double /*dt*/) const override {
    const Vec3 w = log_so3(as_matrix(a).transpose() * as_matrix(b));
    Vec out(3);
    out = w * std::sqrt(2.0);
    return out;
  }

  Vec random_point(std::mt19937_64& rng) const override {
    std::normal_distribution<double> g;
    Eigen::Quaterniond q;
    do {
      q = Eigen::Quaterniond(g(rng), g(rng), g(rng), g(rng));
    } while (q.norm() < 1e-8);
    q.normalize();
    return as_vector(q.toRotationMatrix());
  }

 private:
  static Mat3 polar(const Mat3& m) {
    Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Vec3 s = svd.singularValues();
    if (s(2) < 0.1 || m.determinant() <= 0.0)
      throw StepSizeError("retraction: matrix too far from SO(3); increase the number of steps");
    return svd.matrixU() * svd.matrixV().transpose();
  }

  Mat3 basis_[3];
};

// ---------------------------------------------------------------------------

class ScaledFrame final : public Manifold {
 public:
  ScaledFrame(ManifoldPtr inner, double factor) : inner_(std::move(inner)), factor_(factor) {}

  std::string name() const override { return inner_->name() + "*scaled"; }
  int ambient_dim() const override { return inner_->ambient_dim(); }
  int intrinsic_dim() const override { return inner_->intrinsic_dim(); }
  int n_fields() const override { return inner_->n_fields(); }
  Vec base_point() const override { return inner_->base_point(); }
  Vec constraint(const Vec& y) const override { return inner_->constraint(y); }
  Vec retract(const Vec& y) const override { return inner_->retract(y); }
  Mat projector(const Vec& y) const override { return inner_->projector(y); }
  Vec project(const Vec& y, const Vec& v) const override { return inner_->project(y, v); }
  Mat frame(const Vec& y) const override { return factor_ * inner_->frame(y); }
  Mat frame_jacobian(const Vec& y, int i) const override {
    return factor_ * inner_->frame_jacobian(y, i);
  }
  bool has_drift() const override { return inner_->has_drift(); }
  Vec drift(const Vec& y) const override { return inner_->drift(y); }
  Vec random_point(std::mt19937_64& rng) const override { return inner_->random_point(rng); }

 private:
  ManifoldPtr inner_;
  double factor_;
};

}  // namespace

ManifoldPtr make_circle(double drift_amplitude) { return std::make_shared<Circle>(drift_amplitude); }
ManifoldPtr make_torus(int dim) { return std::make_shared<FlatTorus>(dim); }
ManifoldPtr make_sphere2() { return std::make_shared<Sphere2>(); }
ManifoldPtr make_so3() { return std::make_shared<SpecialOrthogonal3>(); }

ManifoldPtr make_scaled_frame(ManifoldPtr inner, double factor) {
  return std::make_shared<ScaledFrame>(std::move(inner), factor);
}

const std::vector<std::string>& builtin_manifold_names() {
  static const std::vector<std::string> names{"circle", "torus1", "torus2", "sphere2", "so3"};
  return names;
}

ManifoldPtr make_manifold(const std::string& name, double drift_amplitude) {
  if (drift_amplitude != 0.0 && name != "circle")
    throw ConfigError("drift is only supported on the circle");
  if (name == "circle") return make_circle(drift_amplitude);
  if (name == "torus1" || name == "T1") return make_torus(1);
  if (name == "torus2" || name == "torus") return make_torus(2);
  if (name == "sphere2") return make_sphere2();
  if (name == "so3") return make_so3();
  throw ConfigError("unknown manifold '" + name + "'");
}

}  // namespace pathflow
