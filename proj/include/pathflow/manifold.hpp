#pragma once

#include <pathflow/types.hpp>

#include <memory>
#include <optional>
#include <random>
#include <string>

namespace pathflow {

inline constexpr double kConstraintTol = 1e-10;

/// A tangent vector in ambient coordinates together with its base point.
struct TangentVector {
  Vec base;
  Vec vec;
};

/// Compact manifold M embedded in R^D, carrying an elliptic frame X_1..X_n
/// and a drift Y. Points and vectors are ambient coordinates.
///
/// Fields, projector and drift must be smooth in a neighbourhood of M, since
/// covariant derivatives are taken by differentiating them in ambient space.
/// Subclasses override the analytic hooks when closed forms exist; the
/// finite-difference defaults are used otherwise.
class Manifold {
 public:
  virtual ~Manifold() = default;

  virtual std::string name() const = 0;
  virtual int ambient_dim() const = 0;
  virtual int intrinsic_dim() const = 0;
  virtual int n_fields() const = 0;
  virtual Vec base_point() const = 0;

  /// Map R^D -> R^{D-d} vanishing exactly on M.
  virtual Vec constraint(const Vec& y) const = 0;
  /// Nearest-point projection of a point near M onto M.
  virtual Vec retract(const Vec& y) const = 0;
  /// Orthogonal projector onto the tangent space, smooth near M.
  virtual Mat projector(const Vec& y) const = 0;
  /// projector(y) * v without forming the matrix where possible.
  virtual Vec project(const Vec& y, const Vec& v) const;

  /// D x n matrix with columns X_i(y).
  virtual Mat frame(const Vec& y) const = 0;
  /// Ambient Jacobian of X_i at y (D x D). Central differences by default.
  virtual Mat frame_jacobian(const Vec& y, int i) const;

  virtual bool has_drift() const { return false; }
  virtual Vec drift(const Vec& y) const;
  virtual Mat drift_jacobian(const Vec& y) const;

  virtual std::optional<Vec> analytic_ricci(const Vec& /*x*/, const Vec& /*v*/) const {
    return std::nullopt;
  }
  /// Matrix of B^{jk}; nullopt means the finite-difference route is used.
  virtual std::optional<Mat> analytic_b(const Vec& /*x*/) const { return std::nullopt; }
  /// B when it does not depend on the point.
  virtual std::optional<Mat> constant_b() const { return std::nullopt; }

  /// n x n matrix with entries omega^{jk}(v) for v tangent at x.
  virtual Mat omega_matrix(const Vec& x, const Vec& v) const;

  /// Retraction R_x(v) for v tangent at x. Default: retract(x + v).
  virtual Vec step(const Vec& x, const Vec& v) const;
  /// Moves a vector based at `from` to `to`. Default: ambient identity.
  virtual Vec transport(const Vec& from, const Vec& to, const Vec& v) const;

  /// Projector on R^n onto the noise directions visible in the path,
  /// i.e. the range of F(x)^T.
  virtual Mat noise_projector(const Vec& x) const;
  /// noise_projector(x) * dw.
  virtual Vec project_noise(const Vec& x, const Vec& dw) const;
  /// Estimate of noise_projector(a) * dW from one step a -> b of a path.
  virtual Vec noise_increment(const Vec& a, const Vec& b, double dt) const;

  /// Uniformly distributed point (with respect to some smooth positive density).
  virtual Vec random_point(std::mt19937_64& rng) const = 0;

  /// 1/2 sum_i DX_i[X_i]: Ito correction of the Stratonovich frame term.
  Vec ito_correction(const Vec& x) const;

  double constraint_violation(const Vec& y) const;

  double fd_step() const { return fd_step_; }
  void set_fd_step(double h) { fd_step_ = h; }

 private:
  double fd_step_ = 1e-5;
};

using ManifoldPtr = std::shared_ptr<const Manifold>;

}  // namespace pathflow
