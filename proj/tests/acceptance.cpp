// Runs every acceptance experiment from experiments/ and prints one
// PASS/FAIL line per criterion. Optional arguments select criteria by number.

#include <pathflow/cli.hpp>
#include <pathflow/parallel.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
namespace cli = pathflow::cli;
using Overrides = std::map<std::string, std::string>;

namespace {

const fs::path kExperiments = PATHFLOW_EXPERIMENTS_DIR;

struct Run {
  std::string command;
  std::string config;
  std::vector<std::string> required;  // row names that must be present
};

struct Criterion {
  int id;
  std::string title;
  double limit_s;
  std::vector<Run> runs;
};

std::string config_path(const std::string& name) { return (kExperiments / (name + ".cfg")).string(); }

bool has_row(const std::vector<cli::ResultRow>& rows, const std::string& name) {
  for (const auto& r : rows)
    if (r.command == name) return true;
  return false;
}

void print_rows(const std::vector<cli::ResultRow>& rows) {
  for (const auto& r : rows) {
    if (!r.gating) continue;
    std::printf("    %-4s %-34s lhs=%-12.6g rhs=%-12.6g z=%.3f\n", r.pass ? "ok" : "FAIL",
                r.command.c_str(), r.lhs_mean, r.rhs_mean, r.z);
  }
}

bool run_criterion(const Criterion& c, int threads) {
  const auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  for (const auto& run : c.runs) {
    std::printf("  %s %s\n", run.command.c_str(), run.config.c_str());
    try {
      const cli::ExperimentConfig cfg = cli::load_config(config_path(run.config), run.command);
      const auto rows = cli::execute(cfg, threads);
      print_rows(rows);
      if (!cli::all_pass(rows)) ok = false;
      for (const auto& name : run.required) {
        if (!has_row(rows, name)) {
          std::printf("    FAIL missing row %s\n", name.c_str());
          ok = false;
        }
      }
    } catch (const std::exception& e) {
      std::printf("    FAIL %s\n", e.what());
      ok = false;
    }
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = elapsed < c.limit_s;
  std::printf("criterion %d (%s): %s  [%.1f s, limit %.0f s%s]\n", c.id, c.title.c_str(),
              ok && in_time ? "PASS" : "FAIL", elapsed, c.limit_s, in_time ? "" : ", over time");
  std::fflush(stdout);
  return ok && in_time;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Reduced-size reruns of every experiment with different worker counts;
// the results files must match byte for byte.
bool determinism(const std::vector<Criterion>& all) {
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path dir = fs::temp_directory_path() / "pathflow_acceptance_determinism";
  fs::create_directories(dir);
  const std::map<std::string, Overrides> reduced = {
      {"c3_circle_ibp", {{"samples", "3000"}}},
      {"c4_sphere_ibp", {{"samples", "1000"}, {"repeats", "2"}, {"min_pass", "0"}}},
      {"c5_torus_divergence", {{"samples", "500"}}},
      {"c5_sphere_divergence", {{"samples", "500"}}},
      {"c6_torus_qi", {{"samples", "500"}}},
      {"c6_sphere_qi", {{"samples", "300"}, {"bias_samples", "100"}}},
      {"c7_circle", {{"samples", "16"}}},
      {"c7_sphere", {{"samples", "8"}}},
      {"c7_so3", {{"samples", "8"}}},
  };
  bool ok = true;
  for (const auto& c : all) {
    if (c.id == 8) continue;
    for (const auto& run : c.runs) {
      const auto it = reduced.find(run.config);
      const Overrides ov = it == reduced.end() ? Overrides{} : it->second;
      std::string first;
      bool same = true;
      for (int threads : {1, 2, 3}) {
        const fs::path out = dir / (run.config + "_t" + std::to_string(threads) + ".csv");
        const int rc = cli::run(run.command, config_path(run.config), ov, {threads, out.string()});
        if (rc == 2) same = false;
        const std::string bytes = slurp(out);
        if (threads == 1)
          first = bytes;
        else if (bytes != first || bytes.empty())
          same = false;
      }
      std::printf("    %-4s %s %s identical across 1, 2, 3 threads\n", same ? "ok" : "FAIL",
                  run.command.c_str(), run.config.c_str());
      ok = ok && same;
    }
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("criterion 8 (determinism across --threads): %s  [%.1f s]\n", ok ? "PASS" : "FAIL",
              elapsed);
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::stoi(argv[i]));
  const auto wanted = [&](int id) { return selected.empty() || selected.count(id) > 0; };

  const std::vector<Criterion> criteria = {
      {1, "geometry axioms on S^2 and SO(3)", 10,
       {{"geometry-check", "c1_geometry_sphere",
         {"geometry-check/torsion", "geometry-check/metric-compat",
          "geometry-check/ricci-closed-form"}},
        {"geometry-check", "c1_geometry_so3",
         {"geometry-check/torsion", "geometry-check/metric-compat"}}}},
      {2, "flat torus Cameron-Martin exactness", 30,
       {{"flow", "c2_flat_torus",
         {"flow/h-closed-form", "flow/shift-closed-form", "flow/density-closed-form"}}}},
      {3, "circle IBP closed form", 120,
       {{"ibp", "c3_circle_ibp", {"ibp", "ibp/lhs-exact", "ibp/rhs-exact"}}}},
      {4, "sphere IBP over 10 seeds", 600, {{"ibp", "c4_sphere_ibp", {"ibp/repeats"}}}},
      {5, "divergence mean and density normalization", 600,
       {{"divergence", "c5_torus_divergence", {"divergence/mean", "divergence/density-mean"}},
        {"divergence", "c5_sphere_divergence", {"divergence/mean", "divergence/density-mean"}}}},
      {6, "quasi-invariance on torus and sphere", 1200,
       {{"qi", "c6_torus_qi", {"qi", "qi/lhs-exact", "qi/rhs-exact"}},
        {"qi", "c6_sphere_qi", {"qi/bias"}}}},
      {7, "convergence orders", 300,
       {{"convergence", "c7_circle", {"convergence/diffusion", "convergence/hsystem"}},
        {"convergence", "c7_sphere",
         {"convergence/diffusion", "convergence/hsystem", "convergence/flow-euler",
          "convergence/flow-heun"}},
        {"convergence", "c7_so3", {"convergence/diffusion", "convergence/hsystem"}}}},
      {8, "determinism across --threads", 0, {}},
  };

  const int threads = pathflow::resolve_thread_count(0);
  std::printf("acceptance: %d worker thread(s)\n", threads);
  std::map<int, bool> verdict;
  for (const auto& c : criteria) {
    if (c.id == 8 || !wanted(c.id)) continue;
    verdict[c.id] = run_criterion(c, threads);
  }
  if (wanted(8)) verdict[8] = determinism(criteria);

  std::printf("\nsummary\n");
  bool all = true;
  for (const auto& [id, ok] : verdict) {
    std::printf("  criterion %d: %s\n", id, ok ? "PASS" : "FAIL");
    all = all && ok;
  }
  return all ? 0 : 1;
}
