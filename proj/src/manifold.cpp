#include <pathflow/manifold.hpp>

#include <cmath>

namespace pathflow {

namespace {

Mat pseudo_inverse(const Mat& f) {
  Eigen::JacobiSVD<Mat> svd(f, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  const double cutoff = 1e-12 * (s.size() > 0 ? s(0) : 0.0);
  Vec inv(s.size());
  for (int i = 0; i < s.size(); ++i) inv(i) = s(i) > cutoff ? 1.0 / s(i) : 0.0;
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

}  // namespace

Mat Manifold::frame_jacobian(const Vec& y, int i) const {
  const int dim = ambient_dim();
  const double h = fd_step_;
  Mat jac(dim, dim);
  Vec e = Vec::Zero(dim);
  for (int c = 0; c < dim; ++c) {
    e(c) = h;
    jac.col(c) = (frame(y + e).col(i) - frame(y - e).col(i)) / (2 * h);
    e(c) = 0;
  }
  return jac;
}

Vec Manifold::drift(const Vec& /*y*/) const { return Vec::Zero(ambient_dim()); }

Mat Manifold::drift_jacobian(const Vec& y) const {
  const int dim = ambient_dim();
  if (!has_drift()) return Mat::Zero(dim, dim);
  const double h = fd_step_;
  Mat jac(dim, dim);
  Vec e = Vec::Zero(dim);
  for (int c = 0; c < dim; ++c) {
    e(c) = h;
    jac.col(c) = (drift(y + e) - drift(y - e)) / (2 * h);
    e(c) = 0;
  }
  return jac;
}

Mat Manifold::omega_matrix(const Vec& x, const Vec& v) const {
  const int n = n_fields();
  const Mat f = frame(x);
  const Mat p = projector(x);
  const Vec vt = p * v;
  Mat omega(n, n);
  for (int j = 0; j < n; ++j) {
    const Mat jac_j = frame_jacobian(x, j);
    const Vec nabla_v_xj = p * (jac_j * vt);
    for (int k = 0; k < n; ++k) {
      // <grad_{X_j} X_k, v> with grad_{X_j} X_k = P DX_k[X_j]
      const Vec nabla_xj_xk = p * (frame_jacobian(x, k) * f.col(j));
      omega(j, k) = nabla_xj_xk.dot(vt) - nabla_v_xj.dot(f.col(k));
    }
  }
  return omega;
}

Vec Manifold::step(const Vec& x, const Vec& v) const {
  if (v.isZero(0.0)) return x;
  return retract(x + v);
}

Vec Manifold::transport(const Vec& /*from*/, const Vec& /*to*/, const Vec& v) const { return v; }

Vec Manifold::project(const Vec& y, const Vec& v) const { return projector(y).lazyProduct(v); }

Vec Manifold::project_noise(const Vec& x, const Vec& dw) const {
  return noise_projector(x).lazyProduct(dw);
}

Mat Manifold::noise_projector(const Vec& x) const {
  const Mat f = frame(x);
  return pseudo_inverse(f) * f;
}

Vec Manifold::noise_increment(const Vec& a, const Vec& b, double dt) const {
  Vec mean_drift = ito_correction(a);
  if (has_drift()) mean_drift += drift(a);
  return pseudo_inverse(frame(a)) * (b - a - mean_drift * dt);
}

Vec Manifold::ito_correction(const Vec& x) const {
  const Mat f = frame(x);
  Vec out = Vec::Zero(ambient_dim());
  for (int i = 0; i < n_fields(); ++i) out += frame_jacobian(x, i) * f.col(i);
  return 0.5 * out;
}

double Manifold::constraint_violation(const Vec& y) const {
  const Vec c = constraint(y);
  return c.size() == 0 ? 0.0 : c.cwiseAbs().maxCoeff();
}

}  // namespace pathflow
