#include <doctest.h>

#include <pathflow/cli.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

namespace fs = std::filesystem;
using namespace pathflow;
using namespace pathflow::cli;

namespace {

const fs::path kExperiments = PATHFLOW_EXPERIMENTS_DIR;

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "pathflow_cli_tests";
  fs::create_directories(dir);
  return dir / name;
}

fs::path write_file(const std::string& name, const std::string& text) {
  const fs::path p = scratch(name);
  std::ofstream(p) << text;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

bool same_bits(double a, double b) {
  return std::memcmp(&a, &b, sizeof a) == 0;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("config parsing") {
  SUBCASE("common keys, sections and overrides layer in order") {
    const std::string text =
        "# comment\n"
        "manifold = torus2\n"
        "samples = 500   # trailing comment\n"
        "rdot = constant 1 0\n"
        "[qi]\n"
        "samples = 700\n"
        "s = 1/2\n"
        "ds = 1/8\n"
        "du = 1/8\n"
        "[ibp]\n"
        "samples = 900\n";
    const auto qi = parse_config(text, "qi", {{"seed", "42"}});
    CHECK(qi.manifold == "torus2");
    CHECK(qi.samples == 700);
    CHECK(qi.s == 0.5);
    CHECK(qi.seed == 42);
    CHECK(parse_config(text, "ibp").samples == 900);
    CHECK(parse_config(text, "flow").samples == 500);
  }
  SUBCASE("dump and re-parse is the identity") {
    const auto cfg = load_config((kExperiments / "c6_sphere_qi.cfg").string(), "qi");
    const auto again = parse_config(dump_config(cfg), "qi");
    CHECK(dump_config(again) == dump_config(cfg));
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(parse_config("bogus = 1\n", "ibp"), ConfigError);
    CHECK_THROWS_AS(parse_config("samples = 10\nsamples = 20\n", "ibp"), ConfigError);
    CHECK_THROWS_AS(parse_config("[nonsense]\n", "ibp"), ConfigError);
    CHECK_THROWS_AS(parse_config("samples = ten\n", "ibp"), ConfigError);
    CHECK_THROWS_AS(parse_config("samples = -5\n", "ibp"), ConfigError);
    CHECK_THROWS_AS(parse_config("horizon = 0\n", "ibp"), ConfigError);
    CHECK_THROWS_AS(parse_config("manifold = klein\n", "ibp"), ConfigError);
    CHECK_THROWS_AS(parse_config("ds = 1/80\ndu = 1/60\n", "qi"), ConfigError);
    CHECK_THROWS_AS(parse_config("s = 2\n", "qi"), ConfigError);
    CHECK_THROWS_AS(parse_config("mode = rk4\n", "qi"), ConfigError);
    CHECK_THROWS_AS(parse_config("targets = flow-heun\ns = 1/8\nds_levels = 1/20 1/40\n", "convergence"),
                    ConfigError);
    CHECK_THROWS_AS(parse_config("no equals sign\n", "ibp"), ConfigError);
    CHECK_THROWS_AS(parse_config("", "ibp", {{"unknown", "1"}}), ConfigError);
    CHECK_THROWS_AS(parse_config("", "teleport"), ConfigError);
    CHECK_THROWS_AS(load_config(scratch("does_not_exist.cfg").string(), "ibp"), ConfigError);
  }
}

TEST_CASE("results files") {
  SUBCASE("empty list is header only") {
    CHECK(format_results({}) == std::string(kResultsHeader) + "\n");
  }
  SUBCASE("one row round-trips") {
    ResultRow r;
    r.command = "ibp";
    r.manifold = "circle";
    r.n_samples = 1000;
    r.seed = 7;
    r.lhs_mean = 0.1;
    r.z = -1.25;
    r.pass = true;
    const auto path = scratch("one.csv");
    emit_results({r}, path.string());
    const std::string text = slurp(path);
    CHECK(std::count(text.begin(), text.end(), '\n') == 2);
    const auto back = read_results(path.string());
    REQUIRE(back.size() == 1);
    CHECK(back[0].command == "ibp");
    CHECK(back[0].lhs_mean == 0.1);
    CHECK(back[0].pass);
  }
  SUBCASE("100 random rows re-read bit for bit") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    std::vector<ResultRow> rows(100);
    for (auto& r : rows) {
      r.command = "qi";
      r.manifold = "sphere2";
      r.n_samples = rng();
      r.seed = rng();
      for (double* f : {&r.lhs_mean, &r.lhs_se, &r.rhs_mean, &r.rhs_se, &r.diff_mean, &r.diff_se,
                        &r.z, &r.wall_time_s})
        *f = g(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
      r.pass = rng() % 2;
    }
    rows[5].z = std::numeric_limits<double>::infinity();
    rows[6].rhs_mean = -std::numeric_limits<double>::infinity();
    const auto back = parse_results(format_results(rows));
    REQUIRE(back.size() == rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      CHECK(back[i].n_samples == rows[i].n_samples);
      CHECK(back[i].seed == rows[i].seed);
      CHECK(same_bits(back[i].lhs_mean, rows[i].lhs_mean));
      CHECK(same_bits(back[i].lhs_se, rows[i].lhs_se));
      CHECK(same_bits(back[i].rhs_mean, rows[i].rhs_mean));
      CHECK(same_bits(back[i].rhs_se, rows[i].rhs_se));
      CHECK(same_bits(back[i].diff_mean, rows[i].diff_mean));
      CHECK(same_bits(back[i].diff_se, rows[i].diff_se));
      CHECK(same_bits(back[i].z, rows[i].z));
      CHECK(same_bits(back[i].wall_time_s, rows[i].wall_time_s));
      CHECK(back[i].pass == rows[i].pass);
    }
    CHECK(format_results(back) == format_results(rows));
  }
  SUBCASE("malformed files are rejected") {
    CHECK_THROWS(parse_results("wrong,header\n"));
    CHECK_THROWS(parse_results(std::string(kResultsHeader) + "\nqi,circle,1\n"));
  }
  SUBCASE("unwritable path") {
    CHECK_THROWS(emit_results({}, "/nonexistent_dir/x.csv"));
  }
}

TEST_CASE("run") {
  SUBCASE("circle integration by parts exits 0 with a passing row") {
    const auto out = scratch("ibp.csv");
    const int rc = run("ibp", (kExperiments / "c3_circle_ibp.cfg").string(), {{"samples", "20000"}},
                       {1, out.string()});
    CHECK(rc == 0);
    const auto rows = read_results(out.string());
    REQUIRE_FALSE(rows.empty());
    CHECK(rows[0].command == "ibp");
    CHECK(rows[0].pass);
    const std::string manifest = slurp(out.string() + ".manifest");
    CHECK(manifest.find("version = " + std::string(version())) != std::string::npos);
    CHECK(manifest.find("seed = 31") != std::string::npos);
    CHECK(manifest.find("samples = 20000") != std::string::npos);
  }
  SUBCASE("missing config exits 2") {
    CHECK(run("ibp", scratch("missing.cfg").string(), {}, {1, scratch("m.csv").string()}) == 2);
  }
  SUBCASE("invalid config exits 2") {
    const auto cfg = write_file("bad.cfg", "manifold = sphere2\nrdot = constant 1 0\n");
    CHECK(run("ibp", cfg.string(), {}, {1, scratch("bad.csv").string()}) == 2);
  }
  SUBCASE("qi with s = 0 exits 0 with an exact zero difference") {
    const auto cfg = write_file("qi0.cfg", "manifold = sphere2\nrdot = constant 1 0 0\nphi = linear\n"
                                           "phi_params = 0 0 1\ns = 0\nsamples = 200\nsteps = 32\n");
    const auto out = scratch("qi0.csv");
    CHECK(run("qi", cfg.string(), {}, {1, out.string()}) == 0);
    const auto rows = read_results(out.string());
    REQUIRE(rows[0].command == "qi");
    CHECK(rows[0].diff_mean == 0.0);
    CHECK(rows[0].z == 0.0);
  }
  SUBCASE("a failing check exits 1") {
    // Wrong sign of the Cameron-Martin shift for the flat closed form.
    const auto cfg = write_file("fail.cfg", "manifold = torus2\nrdot = constant 1 0\nphi = sin_coord\n"
                                            "phi_params = 0\nsamples = 20000\nsteps = 16\ns = 1\n"
                                            "ds = 1\ndu = 1\n");
    const int rc = run("qi", cfg.string(), {{"threshold", "1e-9"}}, {1, scratch("fail.csv").string()});
    CHECK(rc == 1);
  }
  SUBCASE("wall time is only recorded on request") {
    const auto cfg = write_file("geo.cfg", "manifold = sphere2\npoints = 5\n");
    CHECK(run("geometry-check", cfg.string(), {}, {1, scratch("geo.csv").string()}) == 0);
    for (const auto& r : read_results(scratch("geo.csv").string())) CHECK(r.wall_time_s == 0.0);
    CHECK(run("geometry-check", cfg.string(), {{"record_wall_time", "true"}},
              {1, scratch("geo2.csv").string()}) == 0);
    for (const auto& r : read_results(scratch("geo2.csv").string())) CHECK(r.wall_time_s > 0.0);
  }
}

TEST_CASE("every command runs on a small config") {
  const std::string base = "manifold = sphere2\nrdot = constant 1 0 0\nphi = linear\nphi_params = 0 0 1\n"
                           "samples = 120\nsteps = 32\ns = 1/4\nds = 1/40\ndu = 1/40\npoints = 5\n"
                           "targets = diffusion flow-heun\nlevels = 16 32\nreference_factor = 4\n"
                           "ds_levels = 1/20 1/40\nds_reference = 1/160\n";
  for (const auto& cmd : commands()) {
    CAPTURE(cmd);
    auto cfg = parse_config(base, cmd, {{"samples", cmd == "convergence" ? "4" : "120"}});
    std::vector<ResultRow> rows;
    CHECK_NOTHROW(rows = execute(cfg, 2));
    CHECK_FALSE(rows.empty());
    for (const auto& r : rows) CHECK(r.manifold == "sphere2");
  }
}

TEST_CASE("command-line tool") {
  const std::string tool = PATHFLOW_TOOL_PATH;
  const auto quiet = " >/dev/null 2>&1";
  const auto status = [](const std::string& cmd) {
    const int s = std::system(cmd.c_str());
    return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
  };
  CHECK(status(tool + " --help" + quiet) == 0);
  CHECK(status(tool + " --version" + quiet) == 0);
  CHECK(status(tool + quiet) == 2);
  CHECK(status(tool + " teleport --config x.cfg" + quiet) == 2);
  CHECK(status(tool + " ibp --config " + scratch("nope.cfg").string() + quiet) == 2);
  CHECK(status(tool + " ibp --config x.cfg --set novalue" + quiet) == 2);
  const auto cfg = write_file("tool.cfg", "manifold = torus2\nrdot = constant 1 0\nphi = cos_coord\n"
                                          "phi_params = 0\nsteps = 16\n");
  const auto out = scratch("tool.csv");
  CHECK(status(tool + " qi --config " + cfg.string() + " --samples 300 --seed 9 --threads 2 --mode heun" +
               " --set ds=1/8 --set du=1/8 --out " + out.string() + quiet) == 0);
  const auto rows = read_results(out.string());
  REQUIRE_FALSE(rows.empty());
  CHECK(rows[0].n_samples == 300);
  CHECK(rows[0].seed == 9);
  CHECK(slurp(out.string() + ".manifest").find("mode = heun") != std::string::npos);
}

}
