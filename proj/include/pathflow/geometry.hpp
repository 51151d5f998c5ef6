#pragma once

#include <pathflow/manifold.hpp>

#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <vector>

namespace pathflow {

/// Central-difference step sizes for first and second covariant derivatives.
struct FdSteps {
  double first = 1e-5;
  double second = 1e-4;
};

using FieldFn = std::function<Vec(const Vec&)>;

/// Throws ConstraintViolation if x is further than `tol` from M.
void require_on_manifold(const Manifold& m, const Vec& x, double tol = kConstraintTol);

TangentVector tangent_project(const Manifold& m, const Vec& x, const Vec& v);

/// g^{jk} = sum_i a_ij a_ik, i.e. F F^T with F the frame matrix at x.
/// Throws EllipticityError if the frame does not span T_xM.
Mat metric_inverse(const Manifold& m, const Vec& x);

/// d-th singular value of the frame matrix; zero means not elliptic at x.
double ellipticity_margin(const Manifold& m, const Vec& x);

/// Levi-Civita derivative of the ambient field W along V at x: tangential part
/// of the central difference of W along V.
TangentVector covariant_derivative(const Manifold& m, const Vec& x, const Vec& v, const FieldFn& w,
                                   const FdSteps& steps = {});

/// grad_V X_i computed from the frame Jacobian.
Vec frame_covariant_derivative(const Manifold& m, const Vec& x, const Vec& v, int i);

/// omega^{jk}(v) = <grad_{X_j} X_k, v> - <grad_v X_j, X_k>. Indices are 0-based.
double omega_form(const Manifold& m, const Vec& x, int j, int k, const Vec& v);

/// First and second covariant derivatives of the frame at one point:
///   first(a, b)      = grad_{X_a} X_b
///   second(a, b, c)  = L_ab X_c = grad_{X_a} grad_{X_b} X_c - grad_{grad_{X_a} X_b} X_c
struct CovariantTable {
  int n = 0;
  Mat frame;
  Mat proj;
  std::vector<Vec> first_;
  std::vector<Vec> second_;

  const Vec& first(int a, int b) const { return first_[a * n + b]; }
  const Vec& second(int a, int b, int c) const { return second_[(a * n + b) * n + c]; }
};

CovariantTable covariant_table(const Manifold& m, const Vec& x, const FdSteps& steps = {});

/// The four contributions to B^{jk}, each already carrying the factor 1/2.
struct BTerms {
  double second_order_trace = 0;   //  1/2 <L_ji X_i, X_k>
  double second_order_cross = 0;   // -1/2 <L_ij X_k, X_i>
  double divergence_term = 0;      // -1/2 <grad_{X_j} X_k, grad_{X_i} X_i>
  double quadratic_term = 0;       //  1/2 <grad_{X_p} X_i, X_k><grad_{X_j} X_p, X_i>
  double total = 0;
};

BTerms b_terms(const CovariantTable& table, int j, int k);
BTerms b_terms(const Manifold& m, const Vec& x, int j, int k, const FdSteps& steps = {});

/// B^{jk}; uses the manifold's closed form when `allow_analytic` and one exists.
double b_coeff(const Manifold& m, const Vec& x, int j, int k, const FdSteps& steps = {},
               bool allow_analytic = true);
Mat b_matrix(const Manifold& m, const Vec& x, const FdSteps& steps = {}, bool allow_analytic = true);

/// Ricci curvature as a (1,1) tensor. Falls back to contracting the curvature
/// of the frame, Ric(v) = sum_ij <X_j, v> (L_ji X_i - L_ij X_i).
TangentVector ricci(const Manifold& m, const Vec& x, const Vec& v, const FdSteps& steps = {},
                    bool allow_analytic = true);
Vec ricci_from_table(const CovariantTable& table, const Vec& v);

struct FrameMetricReport {
  std::string manifold;
  int samples = 0;
  double max_discrepancy = 0;  // max |F F^T - P| entrywise
  double min_ellipticity = 0;
  bool pass = false;
  std::string diagnostic;
};

inline constexpr double kFrameMetricTol = 1e-8;
inline constexpr double kEllipticityTol = 1e-8;

/// Checks that the frame metric equals the induced metric, which is what makes
/// the projected ambient derivative the Levi-Civita connection of g.
FrameMetricReport check_frame_metric(const Manifold& m, int sample_count, std::uint64_t seed);

struct ConnectionAxiomReport {
  std::string manifold;
  int samples = 0;
  double max_torsion = 0;        // |grad_V W - grad_W V - [V, W]|
  double max_metric_defect = 0;  // |V<W,U> - <grad_V W, U> - <W, grad_V U>|
};

/// Torsion-freeness and metric compatibility of the projected connection for
/// random constant-coefficient combinations of the frame at random points.
/// Brackets and V<W,U> are taken by central differences of step `h`.
ConnectionAxiomReport check_connection_axioms(const Manifold& m, int sample_count,
                                              std::uint64_t seed, double h = 1e-5);

/// Read-through memo of covariant tables keyed by the exact bits of the point.
class GeometryCache {
 public:
  explicit GeometryCache(FdSteps steps = {}, std::size_t capacity = 4096)
      : steps_(steps), capacity_(capacity) {}

  CovariantTable table(const Manifold& m, const Vec& x);
  const FdSteps& steps() const { return steps_; }
  std::size_t hits() const;
  std::size_t size() const;

 private:
  FdSteps steps_;
  std::size_t capacity_;
  mutable std::mutex mutex_;
  std::map<std::vector<double>, CovariantTable> tables_;
  std::size_t hits_ = 0;
};

}  // namespace pathflow
