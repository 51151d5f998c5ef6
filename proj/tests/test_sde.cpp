#include <doctest.h>

#include <pathflow/builtin_manifolds.hpp>
#include <pathflow/geometry.hpp>
#include <pathflow/sde.hpp>

#include <cmath>
#include <numbers>
#include <random>

using namespace pathflow;

namespace {

BrownianPath zero_noise(const TimeGrid& grid, int n) {
  BrownianPath w;
  w.grid = grid;
  w.dim = n;
  w.increments.assign(static_cast<std::size_t>(grid.steps() * n), 0.0);
  return w;
}

double wrap(double a) { return std::remainder(a, 2 * std::numbers::pi); }

}  // namespace

TEST_SUITE("sde") {

TEST_CASE("time grid") {
  CHECK_THROWS(TimeGrid(1.0, 0));
  CHECK_THROWS(TimeGrid(0.0, 10));
  const TimeGrid g(2.0, 8);
  CHECK(g.dt() == 0.25);
  CHECK(g.node(8) == 2.0);
  CHECK(g.nearest_node(0.26) == 1);
}

TEST_CASE("Brownian increments") {
  const TimeGrid grid(1.0, 1000);
  SUBCASE("sample mean of 10^6 increments within the CLT bound") {
    double sum = 0, sq = 0;
    for (std::uint64_t i = 0; i < 1000; ++i) {
      const auto w = sample_brownian(grid, 1, 17, i);
      for (double d : w.increments) {
        sum += d;
        sq += d * d;
      }
    }
    const double n = 1e6;
    CHECK(std::abs(sum / n) < 4 * std::sqrt(grid.dt() / n));
    CHECK(sq / n == doctest::Approx(grid.dt()).epsilon(0.01));
  }
  SUBCASE("deterministic in (seed, index)") {
    const auto a = sample_brownian(grid, 3, 99, 7);
    const auto b = sample_brownian(grid, 3, 99, 7);
    const auto c = sample_brownian(grid, 3, 99, 8);
    CHECK(a.increments == b.increments);
    CHECK(a.increments != c.increments);
  }
  SUBCASE("values and coarsening") {
    const auto w = sample_brownian(grid, 2, 1, 0);
    CHECK(w.value(0).norm() == 0.0);
    const auto c = w.coarsen(10);
    CHECK(c.grid.steps() == 100);
    CHECK((c.value(100) - w.value(1000)).norm() < 1e-12);
    CHECK((c.value(37) - w.value(370)).norm() < 1e-12);
  }
  CHECK_THROWS(sample_brownian(grid, 0, 1, 0));
}

TEST_CASE("diffusion paths") {
  const TimeGrid grid(1.0, 256);
  SUBCASE("no noise and no drift stays at the base point") {
    for (const auto& name : builtin_manifold_names()) {
      const auto m = make_manifold(name);
      const auto x = integrate_diffusion(*m, zero_noise(grid, m->n_fields()));
      for (const auto& p : x.points) CHECK((p - m->base_point()).norm() == 0.0);
    }
  }
  SUBCASE("driftless circle is the exact wrapped Brownian motion") {
    const auto m = make_circle();
    const Vec o = m->base_point();
    const double a0 = std::atan2(o(1), o(0));
    for (std::uint64_t i = 0; i < 20; ++i) {
      const auto w = sample_brownian(grid, 1, 3, i);
      const auto x = integrate_diffusion(*m, w);
      for (int k = 0; k <= grid.steps(); ++k) {
        const double angle = std::atan2(x.points[k](1), x.points[k](0));
        CHECK(std::abs(wrap(angle - a0 - w.value(k)(0))) < 1e-12);
      }
    }
  }
  SUBCASE("sphere and SO(3) paths stay on the manifold") {
    for (const auto& name : {"sphere2", "so3"}) {
      const auto m = make_manifold(name);
      for (std::uint64_t i = 0; i < 20; ++i) {
        const auto x = integrate_diffusion(*m, sample_brownian(grid, m->n_fields(), 5, i));
        CHECK(max_constraint_violation(*m, x.points) < 1e-9);
        CHECK(x.points[0] == m->base_point());
      }
    }
  }
  SUBCASE("mismatched noise dimension is rejected") {
    const auto m = make_sphere2();
    CHECK_THROWS_AS(integrate_diffusion(*m, sample_brownian(grid, 2, 1, 0)), Error);
  }
}

TEST_CASE("Cameron-Martin paths") {
  const TimeGrid grid(1.0, 4);
  Vec c(2);
  c << 1, -2;
  const auto r = CameronMartinPath::constant(grid, c);
  CHECK(r.value(0).norm() == 0.0);
  CHECK((r.value(4) - c).norm() < 1e-15);
  CHECK(r.energy() == doctest::Approx(5.0));
  CHECK_THROWS(CameronMartinPath::from_cells(grid, {c, c}));
}

TEST_CASE("linear coefficient system") {
  const TimeGrid grid(1.0, 128);
  SUBCASE("zero forcing gives zero") {
    const auto m = make_sphere2();
    const auto r = CameronMartinPath::zero(grid, 3);
    const auto spec = make_admissible_system(*m, r);
    const auto w = sample_brownian(grid, 3, 1, 0);
    const auto x = integrate_diffusion(*m, w);
    for (const auto& v : integrate_linear_system(*m, x, w, spec).values) CHECK(v.norm() == 0.0);
  }
  SUBCASE("decoupled system integrates the forcing exactly") {
    const auto m = make_torus(2);
    LinearSystemSpec spec;
    spec.dim = 2;
    const auto r = CameronMartinPath::sine(grid, Vec::Ones(2));
    spec.forcing = r.rdot;
    const auto w = sample_brownian(grid, 2, 1, 0);
    const auto x = integrate_diffusion(*m, w);
    const auto eta = integrate_linear_system(*m, x, w, spec);
    const auto rv = r.values();
    CHECK(eta.values[0].norm() == 0.0);
    for (int k = 0; k <= grid.steps(); ++k) CHECK((eta.values[k] - rv[k]).norm() < 1e-13);
  }
  SUBCASE("admissible data on the flat torus: h = r") {
    const auto m = make_torus(2);
    Vec c(2);
    c << 0.3, -1.2;
    const auto r = CameronMartinPath::linear(grid, c);
    const auto spec = make_admissible_system(*m, r);
    const auto w = sample_brownian(grid, 2, 4, 2);
    const auto h = integrate_linear_system(*m, integrate_diffusion(*m, w), w, spec);
    const auto rv = r.values();
    for (int k = 0; k <= grid.steps(); ++k) CHECK((h.values[k] - rv[k]).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("one-forms are the transposed omega") {
    const auto m = make_sphere2();
    const auto spec = make_admissible_system(*m, CameronMartinPath::constant(grid, Vec::Ones(3)));
    std::mt19937_64 rng(12);
    std::normal_distribution<double> g;
    for (int p = 0; p < 10; ++p) {
      const Vec x = m->random_point(rng);
      Vec a(3);
      a << g(rng), g(rng), g(rng);
      const Vec v = m->project(x, a);
      const Mat t = spec.one_forms(x, v);
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) CHECK(std::abs(t(i, j) - omega_form(*m, x, j, i, v)) < 1e-7);
    }
  }
  SUBCASE("circle drift enters the zero-order term") {
    const double a = 0.7;
    const auto m = make_circle(a);
    const auto spec = make_admissible_system(*m, CameronMartinPath::constant(grid, Vec::Ones(1)));
    REQUIRE(spec.zero_order);
    const double h = 1e-6;
    for (double theta : {0.0, 0.4, 1.9, -2.5}) {
      Vec x(2), xp(2), xm(2);
      x << std::cos(theta), std::sin(theta);
      xp << std::cos(theta + h), std::sin(theta + h);
      xm << std::cos(theta - h), std::sin(theta - h);
      // Finite-difference oracle: <d/dtheta Y, X> with X the unit rotation field.
      const Vec dy = (m->drift(xp) - m->drift(xm)) / (2 * h);
      const Vec xf = m->frame(x).col(0);
      CHECK(spec.zero_order(x)(0, 0) == doctest::Approx(dy.dot(xf)).epsilon(1e-6));
      CHECK(spec.zero_order(x)(0, 0) == doctest::Approx(a * std::cos(theta)).epsilon(1e-6));
    }
  }
}

TEST_CASE("vector field along the path") {
  const TimeGrid grid(1.0, 64);
  SUBCASE("zero coefficients") {
    const auto m = make_sphere2();
    const auto w = sample_brownian(grid, 3, 1, 0);
    const auto x = integrate_diffusion(*m, w);
    CoefficientPath eta{grid, std::vector<Vec>(65, Vec::Zero(3))};
    for (const auto& z : eval_field_along_path(*m, x, eta)) CHECK(z.vec.norm() == 0.0);
  }
  SUBCASE("circle magnitude equals |eta|") {
    const auto m = make_circle();
    const auto w = sample_brownian(grid, 1, 1, 0);
    const auto x = integrate_diffusion(*m, w);
    const auto r = CameronMartinPath::sine(grid, Vec::Ones(1));
    const auto h = integrate_linear_system(*m, x, w, make_admissible_system(*m, r));
    const auto z = eval_field_along_path(*m, x, h);
    for (int k = 0; k <= 64; ++k) CHECK(z[k].vec.norm() == doctest::Approx(std::abs(h.values[k](0))));
  }
  SUBCASE("sphere field is tangent") {
    const auto m = make_sphere2();
    const auto w = sample_brownian(grid, 3, 2, 0);
    const auto x = integrate_diffusion(*m, w);
    Vec c(3);
    c << 1, 0, 0;
    const auto h = integrate_linear_system(
        *m, x, w, make_admissible_system(*m, CameronMartinPath::constant(grid, c)));
    const auto z = eval_field_along_path(*m, x, h);
    for (int k = 0; k <= 64; ++k) CHECK(std::abs(z[k].vec.dot(x.points[k])) < 1e-10);
  }
}

TEST_CASE("L2 norms") {
  const TimeGrid grid(1.0, 2);
  std::vector<Vec> a(3, Vec::Ones(1)), b(3, Vec::Zero(1));
  CHECK(l2_norm(grid, a) == doctest::Approx(1.0));
  CHECK(l2_distance(grid, a, b) == doctest::Approx(1.0));
}

}
