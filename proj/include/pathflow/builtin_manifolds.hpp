#pragma once

#include <pathflow/manifold.hpp>

#include <string>
#include <vector>

namespace pathflow {

/// Unit circle in R^2 with the rotation field X = (-y2, y1) and optional
/// drift Y = a sin(theta) X.
ManifoldPtr make_circle(double drift_amplitude = 0.0);

/// Flat torus of dimension 1 or 2 in angle coordinates (D = d = n). Points
/// live on the universal cover; test functions are 2*pi periodic.
ManifoldPtr make_torus(int dim = 2);

/// Unit sphere S^2 with the projection frame X_i = e_i - <e_i, x> x.
ManifoldPtr make_sphere2();

/// SO(3) in R^9 (row-major matrices) with the orthonormal left-invariant frame
/// X_i(R) = R E_i / sqrt(2).
ManifoldPtr make_so3();

/// Same manifold with every frame field multiplied by `factor`.
ManifoldPtr make_scaled_frame(ManifoldPtr inner, double factor);

/// Lookup by config name: circle, torus1, torus2, sphere2, so3.
ManifoldPtr make_manifold(const std::string& name, double drift_amplitude = 0.0);

const std::vector<std::string>& builtin_manifold_names();

}  // namespace pathflow
