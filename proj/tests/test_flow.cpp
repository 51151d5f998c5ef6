#include <doctest.h>

#include <pathflow/builtin_manifolds.hpp>
#include <pathflow/convergence.hpp>
#include <pathflow/flow.hpp>

#include <cmath>

using namespace pathflow;

namespace {

struct Setup {
  ManifoldPtr m;
  TimeGrid grid;
  BrownianPath w;
  DiffusionPath x;
  CameronMartinPath r;
  LinearSystemSpec spec;
};

Setup make_setup(const std::string& name, const Vec& rdot, int steps = 64, std::uint64_t index = 0) {
  Setup s;
  s.m = make_manifold(name);
  s.grid = TimeGrid(1.0, steps);
  s.w = sample_brownian(s.grid, s.m->n_fields(), 31, index);
  s.x = integrate_diffusion(*s.m, s.w);
  s.r = CameronMartinPath::constant(s.grid, rdot);
  s.spec = make_admissible_system(*s.m, s.r);
  return s;
}

Vec vec(std::initializer_list<double> xs) {
  Vec v(static_cast<int>(xs.size()));
  int i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

}  // namespace

TEST_SUITE("flow") {

TEST_CASE("flow derivative") {
  SUBCASE("zero forcing gives a zero field") {
    const auto s = make_setup("sphere2", vec({0, 0, 0}));
    for (const auto& v : flow_derivative(*s.m, s.x, s.w, s.spec).field) CHECK(v.norm() == 0.0);
  }
  SUBCASE("flat torus: V = r") {
    const auto s = make_setup("torus2", vec({1, -0.5}));
    const auto v = flow_derivative(*s.m, s.x, s.w, s.spec);
    const auto rv = s.r.values();
    for (int k = 0; k <= s.grid.steps(); ++k) CHECK((v.field[k] - rv[k]).norm() < 1e-12);
  }
  SUBCASE("sphere: tangent along every snapshot") {
    const auto s = make_setup("sphere2", vec({1, 0, 0}));
    const auto f = flow_integrate(*s.m, s.x, s.w, s.spec, 0.25, 1.0 / 40, FlowMode::Euler);
    for (const auto& st : f.snapshots)
      for (int k = 0; k <= s.grid.steps(); ++k)
        CHECK(std::abs(st.velocity[k].dot(st.path.points[k])) < 1e-9);
  }
}

TEST_CASE("flow integration") {
  SUBCASE("s_max = 0 gives the input path") {
    const auto s = make_setup("sphere2", vec({1, 0, 0}));
    const auto f = flow_integrate(*s.m, s.x, s.w, s.spec, 0.0, 1.0 / 40, FlowMode::Euler);
    REQUIRE(f.snapshots.size() == 1);
    CHECK(f.snapshots[0].path.points == s.x.points);
  }
  SUBCASE("flat torus shift x + s r") {
    const auto s = make_setup("torus2", vec({0.7, -1.3}));
    const auto f = flow_integrate(*s.m, s.x, s.w, s.spec, 0.5, 1.0 / 16, FlowMode::Euler);
    const auto rv = s.r.values();
    CHECK(f.snapshots.size() == 17);
    for (const auto& st : f.snapshots)
      for (int k = 0; k <= s.grid.steps(); ++k)
        CHECK((st.path.points[k] - s.x.points[k] - st.s * rv[k]).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(f.at(-0.25).s == doctest::Approx(-0.25));
  }
  SUBCASE("stationary flow without forcing") {
    const auto s = make_setup("sphere2", vec({0, 0, 0}));
    const auto f = flow_integrate(*s.m, s.x, s.w, s.spec, 0.25, 1.0 / 40, FlowMode::Heun);
    for (const auto& st : f.snapshots) CHECK(st.path.points == s.x.points);
    for (double d : flow_regularity(f).delta) CHECK(d == 0.0);
  }
  SUBCASE("the s-grid must divide s_max") {
    const auto s = make_setup("sphere2", vec({1, 0, 0}));
    CHECK_THROWS(flow_integrate(*s.m, s.x, s.w, s.spec, 0.25, 0.1, FlowMode::Euler));
  }
  SUBCASE("sphere: Richardson ratios for euler and heun") {
    const auto m = make_sphere2();
    const TimeGrid grid(1.0, 64);
    const auto r = CameronMartinPath::constant(grid, vec({1, 0, 0}));
    const std::vector<double> ds{1.0 / 40, 1.0 / 80};
    const auto euler = flow_convergence(*m, grid, r, 0.5, ds, 1.0 / 320, FlowMode::Euler, 8, 3, 1);
    const auto heun = flow_convergence(*m, grid, r, 0.5, ds, 1.0 / 320, FlowMode::Heun, 8, 3, 1);
    CHECK(euler.pass);
    CHECK(heun.pass);
    CHECK(euler.order == doctest::Approx(1.0).epsilon(0.3));
    CHECK(heun.order == doctest::Approx(2.0).epsilon(0.3));
  }
}

TEST_CASE("Picard residual") {
  SUBCASE("s = 0 snapshot has zero residual") {
    const auto s = make_setup("sphere2", vec({1, 0, 0}));
    const auto f = flow_integrate(*s.m, s.x, s.w, s.spec, 0.25, 1.0 / 40, FlowMode::Euler);
    CHECK(picard_residual(*s.m, f, s.spec)[f.zero_index] == 0.0);
  }
  SUBCASE("flat torus") {
    const auto s = make_setup("torus2", vec({1, 2}));
    const auto f = flow_integrate(*s.m, s.x, s.w, s.spec, 0.5, 1.0 / 8, FlowMode::Euler);
    for (double p : picard_residual(*s.m, f, s.spec)) CHECK(p < 1e-10);
  }
  SUBCASE("sphere euler residual halves with ds") {
    const auto s = make_setup("sphere2", vec({1, 0, 0}));
    const auto f1 = flow_integrate(*s.m, s.x, s.w, s.spec, 0.25, 1.0 / 40, FlowMode::Euler);
    const auto f2 = flow_integrate(*s.m, s.x, s.w, s.spec, 0.25, 1.0 / 80, FlowMode::Euler);
    const double r1 = picard_residual(*s.m, f1, s.spec).back();
    const double r2 = picard_residual(*s.m, f2, s.spec).back();
    CHECK(r1 / r2 >= 1.5);
    CHECK(r1 / r2 <= 3.0);
  }
}

TEST_CASE("flow regularity") {
  SUBCASE("flat torus: delta = ds |r|") {
    const auto s = make_setup("torus2", vec({1, -2}));
    const double ds = 1.0 / 16;
    const auto f = flow_integrate(*s.m, s.x, s.w, s.spec, 0.25, ds, FlowMode::Euler);
    const auto rv = s.r.values();
    const double norm_r = l2_norm(s.grid, rv);
    for (double d : flow_regularity(f).delta) CHECK(d == doctest::Approx(ds * norm_r).epsilon(1e-10));
  }
  SUBCASE("sphere: delta / ds stays bounded under halving") {
    const auto s = make_setup("sphere2", vec({1, 0, 0}));
    double prev = 0;
    for (double ds : {1.0 / 20, 1.0 / 40, 1.0 / 80}) {
      const auto f = flow_integrate(*s.m, s.x, s.w, s.spec, 0.25, ds, FlowMode::Euler);
      const double ratio = flow_regularity(f).max_ratio;
      CHECK(std::isfinite(ratio));
      if (prev > 0) CHECK(ratio < 1.5 * prev);
      prev = ratio;
    }
  }
}

TEST_CASE("group property") {
  SUBCASE("u = 0") {
    const auto s = make_setup("sphere2", vec({1, 0, 0}));
    CHECK(flow_group_check(*s.m, s.x, s.w, s.spec, 0.25, 0.0, 1.0 / 80, FlowMode::Euler) == 0.0);
  }
  SUBCASE("flat torus") {
    const auto s = make_setup("torus2", vec({0.5, 0.5}));
    CHECK(flow_group_check(*s.m, s.x, s.w, s.spec, 0.25, 0.25, 1.0 / 16, FlowMode::Euler) < 1e-10);
  }
  SUBCASE("sphere s = u = 0.25") {
    for (std::uint64_t i = 0; i < 4; ++i) {
      const auto s = make_setup("sphere2", vec({1, 0, 0}), 64, i);
      const double ds = 1.0 / 80;
      CHECK(flow_group_check(*s.m, s.x, s.w, s.spec, 0.25, 0.25, ds, FlowMode::Euler) < 10 * ds);
    }
  }
}

TEST_CASE("flow mode names") {
  CHECK(parse_flow_mode("euler") == FlowMode::Euler);
  CHECK(parse_flow_mode("heun") == FlowMode::Heun);
  CHECK(to_string(FlowMode::Heun) == "heun");
  CHECK_THROWS(parse_flow_mode("rk4"));
}

}
