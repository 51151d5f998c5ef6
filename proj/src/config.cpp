#include <pathflow/cli.hpp>

#include <pathflow/builtin_manifolds.hpp>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace pathflow::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> tokens(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ' ' || c == '\t' || c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

double parse_plain(const std::string& key, const std::string& v) {
  if (v.empty()) throw ConfigError(key + ": expected a number");
  char* end = nullptr;
  errno = 0;
  const double x = std::strtod(v.c_str(), &end);
  if (errno != 0 || end != v.c_str() + v.size() || !std::isfinite(x))
    throw ConfigError(key + ": '" + v + "' is not a finite number");
  return x;
}

// Accepts plain decimals and fractions p/q.
double parse_number(const std::string& key, const std::string& v) {
  const auto slash = v.find('/');
  if (slash == std::string::npos) return parse_plain(key, v);
  const double den = parse_plain(key, v.substr(slash + 1));
  if (den == 0.0) throw ConfigError(key + ": zero denominator");
  return parse_plain(key, v.substr(0, slash)) / den;
}

long long parse_integer(const std::string& key, const std::string& v) {
  char* end = nullptr;
  errno = 0;
  const long long x = std::strtoll(v.c_str(), &end, 10);
  if (v.empty() || errno != 0 || end != v.c_str() + v.size())
    throw ConfigError(key + ": '" + v + "' is not an integer");
  return x;
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  char* end = nullptr;
  errno = 0;
  if (v.empty() || v[0] == '-') throw ConfigError(key + ": expected a non-negative integer");
  const unsigned long long x = std::strtoull(v.c_str(), &end, 10);
  if (errno != 0 || end != v.c_str() + v.size())
    throw ConfigError(key + ": '" + v + "' is not a non-negative integer");
  return x;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
  if (v == "false" || v == "no" || v == "off" || v == "0") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

std::string single(const std::string& key, const std::string& v) {
  const auto t = tokens(v);
  if (t.size() != 1) throw ConfigError(key + ": expected exactly one value");
  return t[0];
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

template <class T, class F>
std::string join(const std::vector<T>& v, F f) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? " " : "") + f(v[i]);
  return out;
}

struct Key {
  const char* name;
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

#define PF_NUMBER(field)                                                                  \
  Key {                                                                                   \
    #field, [](ExperimentConfig& c, const std::string& v) {                               \
      c.field = parse_number(#field, single(#field, v));                                  \
    },                                                                                    \
        [](const ExperimentConfig& c) { return fmt(c.field); }                            \
  }
#define PF_INT(field)                                                                     \
  Key {                                                                                   \
    #field, [](ExperimentConfig& c, const std::string& v) {                               \
      const long long x = parse_integer(#field, single(#field, v));                       \
      if (x < -1000000000LL || x > 1000000000LL) throw ConfigError(#field ": out of range"); \
      c.field = static_cast<int>(x);                                                      \
    },                                                                                    \
        [](const ExperimentConfig& c) { return std::to_string(c.field); }                 \
  }
#define PF_U64(field)                                                                     \
  Key {                                                                                   \
    #field, [](ExperimentConfig& c, const std::string& v) {                               \
      c.field = parse_u64(#field, single(#field, v));                                     \
    },                                                                                    \
        [](const ExperimentConfig& c) { return std::to_string(c.field); }                 \
  }
#define PF_BOOL(field)                                                                    \
  Key {                                                                                   \
    #field, [](ExperimentConfig& c, const std::string& v) {                               \
      c.field = parse_bool(#field, single(#field, v));                                    \
    },                                                                                    \
        [](const ExperimentConfig& c) { return std::string(c.field ? "true" : "false"); } \
  }
#define PF_WORD(field)                                                                    \
  Key {                                                                                   \
    #field, [](ExperimentConfig& c, const std::string& v) { c.field = single(#field, v); }, \
        [](const ExperimentConfig& c) { return c.field; }                                 \
  }

const std::vector<Key>& keys() {
  static const std::vector<Key> table = {
      PF_WORD(manifold),
      PF_NUMBER(drift),
      PF_NUMBER(horizon),
      PF_INT(steps),
      PF_U64(samples),
      PF_U64(seed),
      Key{"rdot",
          [](ExperimentConfig& c, const std::string& v) {
            const auto t = tokens(v);
            if (t.empty()) throw ConfigError("rdot: empty specification");
            std::string norm = t[0];
            for (std::size_t i = 1; i < t.size(); ++i) norm += " " + t[i];
            c.rdot = norm;
          },
          [](const ExperimentConfig& c) { return c.rdot; }},
      PF_WORD(phi),
      Key{"phi_params",
          [](ExperimentConfig& c, const std::string& v) {
            c.phi_params.clear();
            for (const auto& t : tokens(v)) c.phi_params.push_back(parse_number("phi_params", t));
          },
          [](const ExperimentConfig& c) { return join(c.phi_params, fmt); }},
      Key{"phi_times",
          [](ExperimentConfig& c, const std::string& v) {
            c.phi_times.clear();
            for (const auto& t : tokens(v)) c.phi_times.push_back(parse_number("phi_times", t));
          },
          [](const ExperimentConfig& c) { return join(c.phi_times, fmt); }},
      PF_NUMBER(s),
      PF_NUMBER(ds),
      PF_NUMBER(du),
      Key{"mode",
          [](ExperimentConfig& c, const std::string& v) {
            try {
              c.mode = parse_flow_mode(single("mode", v));
            } catch (const ConfigError&) {
              throw;
            } catch (const std::exception& e) {
              throw ConfigError(std::string("mode: ") + e.what());
            }
          },
          [](const ExperimentConfig& c) { return to_string(c.mode); }},
      PF_NUMBER(threshold),
      PF_NUMBER(mean_threshold),
      PF_INT(repeats),
      PF_INT(min_pass),
      PF_BOOL(bias_check),
      PF_U64(bias_samples),
      PF_INT(points),
      Key{"targets",
          [](ExperimentConfig& c, const std::string& v) { c.targets = tokens(v); },
          [](const ExperimentConfig& c) {
            return join(c.targets, [](const std::string& s) { return s; });
          }},
      Key{"levels",
          [](ExperimentConfig& c, const std::string& v) {
            c.levels.clear();
            for (const auto& t : tokens(v)) {
              const long long x = parse_integer("levels", t);
              if (x < 2 || x > 1000000) throw ConfigError("levels: each level must be in [2, 1e6]");
              c.levels.push_back(static_cast<int>(x));
            }
          },
          [](const ExperimentConfig& c) {
            return join(c.levels, [](int x) { return std::to_string(x); });
          }},
      PF_INT(reference_factor),
      Key{"ds_levels",
          [](ExperimentConfig& c, const std::string& v) {
            c.ds_levels.clear();
            for (const auto& t : tokens(v)) c.ds_levels.push_back(parse_number("ds_levels", t));
          },
          [](const ExperimentConfig& c) { return join(c.ds_levels, fmt); }},
      PF_NUMBER(ds_reference),
      PF_NUMBER(min_order),
      PF_NUMBER(order_tolerance),
      PF_BOOL(record_wall_time),
  };
  return table;
}

#undef PF_NUMBER
#undef PF_INT
#undef PF_U64
#undef PF_BOOL
#undef PF_WORD

const Key& find_key(const std::string& name) {
  for (const auto& k : keys())
    if (name == k.name) return k;
  throw ConfigError("unknown configuration key '" + name + "'");
}

bool is_multiple(double a, double b) {
  const double r = a / b;
  return std::abs(r - std::round(r)) <= 1e-9 * std::max(1.0, r);
}

void validate(const ExperimentConfig& c) {
  const auto& names = builtin_manifold_names();
  if (std::find(names.begin(), names.end(), c.manifold) == names.end())
    throw ConfigError("manifold: unknown built-in '" + c.manifold + "'");
  if (!(c.horizon > 0)) throw ConfigError("horizon must be positive");
  if (c.steps < 2) throw ConfigError("steps must be at least 2");
  if (c.samples < 2) throw ConfigError("samples must be at least 2");
  if (!(c.ds > 0) || !(c.du > 0)) throw ConfigError("ds and du must be positive");
  if (std::abs(c.s) > 1.0) throw ConfigError("s must satisfy |s| <= 1");
  if (!is_multiple(c.du, c.ds)) throw ConfigError("du must be a multiple of ds");
  if (!is_multiple(std::abs(c.s), c.du)) throw ConfigError("s must be a multiple of du");
  if (!(c.threshold > 0) || !(c.mean_threshold > 0)) throw ConfigError("thresholds must be positive");
  if (c.repeats < 1) throw ConfigError("repeats must be at least 1");
  if (c.min_pass < 0 || c.min_pass > c.repeats) throw ConfigError("min_pass must lie in [0, repeats]");
  if (c.bias_samples > c.samples) throw ConfigError("bias_samples cannot exceed samples");
  if (c.bias_samples == 1) throw ConfigError("bias_samples must be 0 or at least 2");
  if (c.points < 1) throw ConfigError("points must be positive");
  if (c.reference_factor < 2) throw ConfigError("reference_factor must be at least 2");
  if (!(c.ds_reference > 0)) throw ConfigError("ds_reference must be positive");
  for (double h : c.ds_levels)
    if (!(h > 0)) throw ConfigError("ds_levels must be positive");
  if (!(c.order_tolerance > 0)) throw ConfigError("order_tolerance must be positive");
  for (double t : c.phi_times) {
    const double k = t / c.horizon * c.steps;
    if (t < 0 || t > c.horizon * (1 + 1e-12) || std::abs(k - std::round(k)) > 1e-9 * c.steps)
      throw ConfigError("phi_times: " + fmt(t) + " is not a grid node");
  }
  static const std::set<std::string> targets = {"diffusion", "hsystem", "flow-euler", "flow-heun"};
  if (c.targets.empty()) throw ConfigError("targets: at least one convergence target");
  for (const auto& t : c.targets)
    if (!targets.count(t)) throw ConfigError("targets: unknown target '" + t + "'");
  const bool flow_target = std::count(c.targets.begin(), c.targets.end(), "flow-euler") +
                               std::count(c.targets.begin(), c.targets.end(), "flow-heun") > 0;
  if (flow_target) {
    if (c.s == 0.0) throw ConfigError("flow convergence needs s != 0");
    for (double h : c.ds_levels)
      if (!is_multiple(std::abs(c.s), h)) throw ConfigError("s must be a multiple of every ds_levels entry");
    if (!is_multiple(std::abs(c.s), c.ds_reference)) throw ConfigError("s must be a multiple of ds_reference");
  }
  if (c.drift != 0.0 && c.manifold != "circle")
    throw ConfigError("drift is only available on the circle");
}

}  // namespace

const char* version() { return PATHFLOW_VERSION; }

const std::vector<std::string>& commands() {
  static const std::vector<std::string> list = {"geometry-check", "simulate", "divergence", "flow",
                                                "ibp",            "qi",       "convergence"};
  return list;
}

ExperimentConfig parse_config(const std::string& text, const std::string& command,
                              const std::map<std::string, std::string>& overrides) {
  const auto& cmds = commands();
  if (std::find(cmds.begin(), cmds.end(), command) == cmds.end())
    throw ConfigError("unknown command '" + command + "'");

  std::map<std::string, std::string> common, specific;
  std::set<std::pair<std::string, std::string>> seen;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(lineno) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + "malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (std::find(cmds.begin(), cmds.end(), section) == cmds.end())
        throw ConfigError(where + "unknown section '" + section + "'");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    find_key(key);
    if (!seen.insert({section, key}).second)
      throw ConfigError(where + "key '" + key + "' repeated");
    if (section.empty())
      common[key] = value;
    else if (section == command)
      specific[key] = value;
    else {
      ExperimentConfig scratch;  // other sections must still parse
      find_key(key).set(scratch, value);
    }
  }

  ExperimentConfig cfg;
  cfg.command = command;
  using Layer = const std::map<std::string, std::string>*;
  for (Layer layer : {Layer(&common), Layer(&specific), Layer(&overrides)})
    for (const auto& [k, v] : *layer) find_key(k).set(cfg, v);
  validate(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::string& path, const std::string& command,
                             const std::map<std::string, std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), command, overrides);
}

std::string dump_config(const ExperimentConfig& cfg) {
  std::string out = "# command = " + cfg.command + "\n";
  for (const auto& k : keys()) out += std::string(k.name) + " = " + k.get(cfg) + "\n";
  return out;
}

// ---------------------------------------------------------------------------

std::string format_results(const std::vector<ResultRow>& rows) {
  std::string out = std::string(kResultsHeader) + "\n";
  for (const auto& r : rows) {
    out += r.command + "," + r.manifold + "," + std::to_string(r.n_samples) + "," +
           std::to_string(r.seed);
    for (double x : {r.lhs_mean, r.lhs_se, r.rhs_mean, r.rhs_se, r.diff_mean, r.diff_se, r.z})
      out += "," + fmt(x);
    out += std::string(",") + (r.pass ? "true" : "false") + "," + fmt(r.wall_time_s) + "\n";
  }
  return out;
}

std::vector<ResultRow> parse_results(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kResultsHeader)
    throw ConfigError("results: missing or unexpected header");
  std::vector<ResultRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::string cur;
    for (char c : line) {
      if (c == ',') {
        f.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
    f.push_back(cur);
    if (f.size() != 13) throw ConfigError("results: expected 13 fields, got " + std::to_string(f.size()));
    auto num = [](const std::string& s) {
      char* end = nullptr;
      const double x = std::strtod(s.c_str(), &end);
      if (s.empty() || end != s.c_str() + s.size()) throw ConfigError("results: bad number '" + s + "'");
      return x;
    };
    ResultRow r;
    r.command = f[0];
    r.manifold = f[1];
    r.n_samples = parse_u64("n_samples", f[2]);
    r.seed = parse_u64("seed", f[3]);
    r.lhs_mean = num(f[4]);
    r.lhs_se = num(f[5]);
    r.rhs_mean = num(f[6]);
    r.rhs_se = num(f[7]);
    r.diff_mean = num(f[8]);
    r.diff_se = num(f[9]);
    r.z = num(f[10]);
    r.pass = parse_bool("pass", f[11]);
    r.wall_time_s = num(f[12]);
    rows.push_back(r);
  }
  return rows;
}

void emit_results(const std::vector<ResultRow>& rows, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write results file '" + path + "'");
  out << format_results(rows);
  if (!out) throw Error("failed writing results file '" + path + "'");
}

std::vector<ResultRow> read_results(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open results file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_results(buf.str());
}

}  // namespace pathflow::cli
