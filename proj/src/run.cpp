#include "tclgen/run.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "tclgen/dynamics.hpp"
#include "tclgen/errors.hpp"
#include "tclgen/generator.hpp"
#include "tclgen/quadrature.hpp"

namespace tclgen {

namespace {

using json = nlohmann::ordered_json;

constexpr double hermitian_tol = 1e-10;
constexpr double state_tol = 1e-10;
constexpr double canonical_tol = 1e-8;
constexpr double fock_tail_tol = 1e-10;
constexpr double max_condition = 1e8;

const std::set<std::string> known_outputs = {"generator", "canonical", "hamiltonian",
                                             "trajectory", "rates", "convergence"};

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

void only_keys(const json& obj, const std::string& path, std::initializer_list<const char*> keys) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : keys) ok = ok || it.key() == k;
    if (!ok) throw ConfigError(join(path, it.key()), "unknown field");
  }
}

const json& object_at(const json& parent, const std::string& path, const char* key) {
  const std::string p = join(path, key);
  if (!parent.contains(key)) throw ConfigError(p, "missing");
  const json& v = parent.at(key);
  if (!v.is_object()) throw ConfigError(p, "expected an object");
  return v;
}

double number_at(const json& parent, const std::string& path, const char* key) {
  const std::string p = join(path, key);
  if (!parent.contains(key)) throw ConfigError(p, "missing");
  const json& v = parent.at(key);
  if (!v.is_number()) throw ConfigError(p, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(p, "not finite");
  return x;
}

int integer_at(const json& parent, const std::string& path, const char* key) {
  const std::string p = join(path, key);
  if (!parent.contains(key)) throw ConfigError(p, "missing");
  const json& v = parent.at(key);
  if (!v.is_number_integer()) throw ConfigError(p, "expected an integer");
  const auto x = v.get<long long>();
  if (x < -1000000000LL || x > 1000000000LL) throw ConfigError(p, "out of range");
  return static_cast<int>(x);
}

std::string string_at(const json& parent, const std::string& path, const char* key) {
  const std::string p = join(path, key);
  if (!parent.contains(key)) throw ConfigError(p, "missing");
  const json& v = parent.at(key);
  if (!v.is_string()) throw ConfigError(p, "expected a string");
  return v.get<std::string>();
}

std::vector<Complex> complex_list(const json& v, const std::string& path) {
  if (!v.is_array()) throw ConfigError(path, "expected an array of interleaved re/im numbers");
  if (v.size() % 2 != 0) throw ConfigError(path, "odd number of entries; expected re/im pairs");
  std::vector<Complex> out;
  for (std::size_t i = 0; i < v.size(); i += 2) {
    if (!v[i].is_number() || !v[i + 1].is_number())
      throw ConfigError(path + "[" + std::to_string(v[i].is_number() ? i + 1 : i) + "]", "expected a number");
    const double re = v[i].get<double>(), im = v[i + 1].get<double>();
    if (!std::isfinite(re) || !std::isfinite(im)) throw ConfigError(path, "not finite");
    out.emplace_back(re, im);
  }
  return out;
}

Operator matrix_at(const json& parent, const std::string& path, const char* key, int d) {
  const std::string p = join(path, key);
  if (!parent.contains(key)) throw ConfigError(p, "missing");
  const auto flat = complex_list(parent.at(key), p);
  const auto want = static_cast<std::size_t>(d) * static_cast<std::size_t>(d);
  if (flat.size() != want)
    throw ConfigError(p, "expected " + std::to_string(2 * want) + " numbers for a " + std::to_string(d) + "x" +
                             std::to_string(d) + " matrix, got " + std::to_string(2 * flat.size()));
  Operator m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = flat[static_cast<std::size_t>(i * d + j)];
  return m;
}

void require_hermitian(const Operator& m, const std::string& path) {
  if (!is_hermitian(m, hermitian_tol))
    throw ConfigError(path, "not Hermitian (defect " + std::to_string(hermiticity_defect(m)) + ")");
}

VanishingRule parse_rule(const std::string& s, const std::string& path) {
  if (s == "none") return VanishingRule::none;
  if (s == "mean_zero") return VanishingRule::mean_zero;
  if (s == "gaussian_mean_zero") return VanishingRule::gaussian_mean_zero;
  throw ConfigError(path, "expected one of none, mean_zero, gaussian_mean_zero");
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", x == 0.0 ? 0.0 : x);
  return buf;
}

class Csv {
 public:
  Csv(const std::filesystem::path& p) : path_(p), out_(p) {
    if (!out_) throw std::runtime_error("cannot write " + p.string());
  }
  void header(const std::vector<std::string>& cols) { row_strings(cols); }
  void row(const std::vector<double>& vals) {
    std::vector<std::string> s;
    s.reserve(vals.size());
    for (double v : vals) s.push_back(fmt(v));
    row_strings(s);
  }
  void close() {
    out_.close();
    if (!out_) throw std::runtime_error("failed writing " + path_.string());
  }

 private:
  void row_strings(const std::vector<std::string>& s) {
    for (std::size_t i = 0; i < s.size(); ++i) out_ << (i ? "," : "") << s[i];
    out_ << '\n';
  }
  std::filesystem::path path_;
  std::ofstream out_;
};

void matrix_header(std::vector<std::string>& cols, const std::string& name, Eigen::Index rows, Eigen::Index ncols) {
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < ncols; ++j) {
      const std::string base = name + "_" + std::to_string(i) + "_" + std::to_string(j);
      cols.push_back(base + "_re");
      cols.push_back(base + "_im");
    }
}

void matrix_values(std::vector<double>& vals, const Eigen::MatrixXcd& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      vals.push_back(m(i, j).real());
      vals.push_back(m(i, j).imag());
    }
}

double json_number(double x) { return x == 0.0 ? 0.0 : x; }

}  // namespace

bool RunConfig::wants(const std::string& output) const {
  return std::find(outputs.begin(), outputs.end(), output) != outputs.end();
}

std::string version_string() { return "0.1.0"; }

RunConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<root>", std::string("not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("<root>", "expected an object");
  only_keys(root, "", {"system", "interaction", "coupling", "bath", "expansion", "quadrature", "time",
                       "initial_state", "outputs", "trajectory", "convergence"});

  RunConfig c;
  c.source = root.dump();

  const json& sys = object_at(root, "", "system");
  only_keys(sys, "system", {"dim", "hamiltonian"});
  c.dim = integer_at(sys, "system", "dim");
  if (c.dim < 2 || c.dim > 16) throw ConfigError("system.dim", "must be between 2 and 16");
  c.hamiltonian = matrix_at(sys, "system", "hamiltonian", c.dim);
  require_hermitian(c.hamiltonian, "system.hamiltonian");

  const json& inter = object_at(root, "", "interaction");
  only_keys(inter, "interaction", {"operator"});
  c.coupling = matrix_at(inter, "interaction", "operator", c.dim);
  require_hermitian(c.coupling, "interaction.operator");

  const json& coup = object_at(root, "", "coupling");
  only_keys(coup, "coupling", {"lambda"});
  c.lambda = number_at(coup, "coupling", "lambda");
  if (c.lambda < 0.0) throw ConfigError("coupling.lambda", "must be non-negative");

  const json& time = object_at(root, "", "time");
  only_keys(time, "time", {"t_max", "steps"});
  c.t_max = number_at(time, "time", "t_max");
  if (c.t_max <= 0.0) throw ConfigError("time.t_max", "must be positive");
  c.steps = integer_at(time, "time", "steps");
  if (c.steps < 1) throw ConfigError("time.steps", "must be positive");
  if (c.steps > 100000) throw ConfigError("time.steps", "at most 100000");

  const json& bath = object_at(root, "", "bath");
  c.bath.kind = string_at(bath, "bath", "kind");
  if (c.bath.kind == "single_mode_thermal") {
    only_keys(bath, "bath", {"kind", "omega", "g", "nbar"});
    c.bath.omega = number_at(bath, "bath", "omega");
    c.bath.g = number_at(bath, "bath", "g");
    c.bath.nbar = number_at(bath, "bath", "nbar");
    if (c.bath.nbar < 0.0) throw ConfigError("bath.nbar", "must be non-negative");
  } else if (c.bath.kind == "gaussian_generic") {
    only_keys(bath, "bath", {"kind", "table"});
    const json& table = object_at(bath, "bath", "table");
    only_keys(table, "bath.table", {"dt", "values"});
    c.bath.table_dt = number_at(table, "bath.table", "dt");
    if (c.bath.table_dt <= 0.0) throw ConfigError("bath.table.dt", "must be positive");
    if (!table.contains("values")) throw ConfigError("bath.table.values", "missing");
    c.bath.table = complex_list(table.at("values"), "bath.table.values");
    if (c.bath.table.size() < 2) throw ConfigError("bath.table.values", "need at least two samples");
    if (std::abs(c.bath.table[0].imag()) > 1e-12 * std::max(1.0, std::abs(c.bath.table[0])))
      throw ConfigError("bath.table.values", "C(0) must be real");
    const double span = c.bath.table_dt * static_cast<double>(c.bath.table.size() - 1);
    if (span < c.t_max * (1.0 - 1e-12))
      throw ConfigError("bath.table.values", "samples cover [0, " + fmt(span) + "], shorter than time.t_max");
  } else if (c.bath.kind == "custom") {
    throw ConfigError("bath.kind", "custom n-point baths are available through the library only");
  } else {
    throw ConfigError("bath.kind", "expected single_mode_thermal or gaussian_generic");
  }

  const json& exp = object_at(root, "", "expansion");
  only_keys(exp, "expansion", {"max_order", "suppression"});
  c.max_order = integer_at(exp, "expansion", "max_order");
  if (c.max_order < 1 || c.max_order > max_generator_order)
    throw ConfigError("expansion.max_order", "must be between 1 and " + std::to_string(max_generator_order));
  if (exp.contains("suppression"))
    c.suppression = parse_rule(string_at(exp, "expansion", "suppression"), "expansion.suppression");

  if (root.contains("quadrature")) {
    const json& q = object_at(root, "", "quadrature");
    only_keys(q, "quadrature", {"nodes"});
    c.nodes = integer_at(q, "quadrature", "nodes");
    try {
      QuadratureSpec{c.nodes}.validate();
    } catch (const std::exception& e) {
      throw ConfigError("quadrature.nodes", e.what());
    }
  }

  if (!root.contains("initial_state")) throw ConfigError("initial_state", "missing");
  c.initial_state = matrix_at(root, "", "initial_state", c.dim);
  require_hermitian(c.initial_state, "initial_state");
  {
    const double tr = c.initial_state.trace().real();
    if (std::abs(tr - 1.0) > state_tol) throw ConfigError("initial_state", "trace is " + fmt(tr) + ", not 1");
    try {
      check_density_matrix(c.initial_state, state_tol);
    } catch (const std::exception& e) {
      throw ConfigError("initial_state", e.what());
    }
  }

  if (!root.contains("outputs")) throw ConfigError("outputs", "missing");
  const json& outs = root.at("outputs");
  if (!outs.is_array() || outs.empty()) throw ConfigError("outputs", "expected a non-empty array of names");
  for (std::size_t i = 0; i < outs.size(); ++i) {
    const std::string p = "outputs[" + std::to_string(i) + "]";
    if (!outs[i].is_string()) throw ConfigError(p, "expected a string");
    const auto name = outs[i].get<std::string>();
    if (!known_outputs.contains(name))
      throw ConfigError(p, "unknown output '" + name +
                               "'; expected generator, canonical, hamiltonian, trajectory, rates or convergence");
    if (!c.wants(name)) c.outputs.push_back(name);
  }

  if (root.contains("trajectory")) {
    const json& tr = object_at(root, "", "trajectory");
    only_keys(tr, "trajectory", {"picture"});
    c.picture = string_at(tr, "trajectory", "picture");
    if (c.picture != "schroedinger" && c.picture != "interaction")
      throw ConfigError("trajectory.picture", "expected schroedinger or interaction");
  }

  if (root.contains("convergence")) {
    const json& cv = object_at(root, "", "convergence");
    only_keys(cv, "convergence", {"lambdas", "fock_cutoff"});
    if (cv.contains("lambdas")) {
      const json& ls = cv.at("lambdas");
      if (!ls.is_array() || ls.size() < 2) throw ConfigError("convergence.lambdas", "need at least two values");
      for (std::size_t i = 0; i < ls.size(); ++i) {
        const std::string p = "convergence.lambdas[" + std::to_string(i) + "]";
        if (!ls[i].is_number()) throw ConfigError(p, "expected a number");
        const double x = ls[i].get<double>();
        if (!(x > 0.0) || !std::isfinite(x)) throw ConfigError(p, "must be positive");
        c.convergence_lambdas.push_back(x);
      }
    }
    if (cv.contains("fock_cutoff")) {
      c.fock_cutoff = integer_at(cv, "convergence", "fock_cutoff");
      if (c.fock_cutoff < 2 || c.fock_cutoff > 400) throw ConfigError("convergence.fock_cutoff", "must be 2..400");
    }
  }
  if (c.wants("convergence")) {
    if (c.bath.kind != "single_mode_thermal")
      throw ConfigError("outputs", "convergence needs bath.kind single_mode_thermal");
    if (c.convergence_lambdas.empty() && c.lambda <= 0.0)
      throw ConfigError("coupling.lambda", "convergence needs a positive lambda or convergence.lambdas");
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

SystemModel make_model(const RunConfig& c) { return SystemModel(c.hamiltonian, c.coupling, c.lambda); }

BathModel make_bath(const RunConfig& c) {
  if (c.bath.kind == "single_mode_thermal") return BathModel::single_mode_thermal(c.bath.g, c.bath.omega, c.bath.nbar);
  const auto table = c.bath.table;
  const double dt = c.bath.table_dt;
  auto stationary = [table, dt](double tau) -> Complex {
    const double x = tau / dt;
    const auto last = table.size() - 1;
    if (x >= static_cast<double>(last)) return table[last];
    const auto i = static_cast<std::size_t>(x);
    const double f = x - static_cast<double>(i);
    return (1.0 - f) * table[i] + f * table[i + 1];
  };
  return BathModel::gaussian([stationary](double t, double s) -> Complex {
    return t >= s ? stationary(t - s) : std::conj(stationary(s - t));
  });
}

void run_pipeline(const RunConfig& c, const RunOptions& o) {
  namespace fs = std::filesystem;
  using clock = std::chrono::steady_clock;

  const fs::path dir(o.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());

  const SystemModel m = make_model(c);
  const BathModel b = make_bath(c);
  const QuadratureSpec q{c.nodes};
  const auto grid = uniform_grid(c.t_max, c.steps);
  const int d = c.dim;

  json stages = json::array();
  auto log = [&](const std::string& s) {
    if (!o.quiet) std::cerr << s << '\n';
  };
  auto timed = [&](const std::string& name, auto&& fn) {
    log("stage " + name);
    const auto t0 = clock::now();
    fn();
    const double secs = std::chrono::duration<double>(clock::now() - t0).count();
    stages.push_back({{"stage", name}, {"seconds", secs}});
  };

  json diagnostics = json::object();
  std::vector<std::string> written;

  const bool traj = c.wants("trajectory");
  const bool need_gen = traj || c.wants("generator") || c.wants("canonical") || c.wants("hamiltonian") ||
                        c.wants("rates");

  // Generators on the grid; with a trajectory also at the midpoints.
  std::vector<SuperOperator> gens;
  if (need_gen) {
    timed("generator", [&] {
      const int stride = traj ? 2 : 1;
      const int count = c.steps * stride + 1;
      gens.reserve(static_cast<std::size_t>(count));
      for (int i = 0; i < count; ++i) {
        // same expression as uniform_grid, so even samples land on grid times exactly
        const double t = c.t_max * i / (c.steps * stride);
        gens.push_back(build_generator(m, b, c.max_order, t, q, c.suppression));
      }
      double tr = 0.0, herm = 0.0;
      for (const auto& g : gens) {
        tr = std::max(tr, trace_annihilation_defect(g));
        herm = std::max(herm, hermiticity_preservation_defect(g));
      }
      diagnostics["max_trace_defect"] = json_number(tr);
      diagnostics["max_hermiticity_defect"] = json_number(herm);
    });
  }
  auto gen_at = [&](std::size_t i) -> const SuperOperator& { return gens[traj ? 2 * i : i]; };

  if (c.wants("generator")) {
    Csv f(dir / "generator.csv");
    std::vector<std::string> cols{"t"};
    matrix_header(cols, "L", d * d, d * d);
    f.header(cols);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      std::vector<double> v{grid[i]};
      matrix_values(v, gen_at(i).matrix());
      f.row(v);
    }
    f.close();
    written.push_back("generator.csv");
  }

  if (c.wants("canonical") || c.wants("hamiltonian") || c.wants("rates")) {
    std::vector<CanonicalForm> forms;
    timed("canonical", [&] {
      for (std::size_t i = 0; i < grid.size(); ++i) forms.push_back(canonical_decompose(gen_at(i), canonical_tol));
    });
    double min_rate = 0.0;
    for (const auto& f : forms) min_rate = std::min(min_rate, f.rates.minCoeff());
    diagnostics["min_rate"] = json_number(min_rate);

    if (c.wants("hamiltonian")) {
      Csv f(dir / "hamiltonian.csv");
      std::vector<std::string> cols{"t"};
      matrix_header(cols, "K", d, d);
      f.header(cols);
      for (std::size_t i = 0; i < grid.size(); ++i) {
        std::vector<double> v{grid[i]};
        matrix_values(v, forms[i].K);
        f.row(v);
      }
      f.close();
      written.push_back("hamiltonian.csv");
    }
    if (c.wants("rates")) {
      Csv f(dir / "rates.csv");
      std::vector<std::string> cols{"t"};
      for (int r = 0; r < d * d - 1; ++r) cols.push_back("rate_" + std::to_string(r));
      f.header(cols);
      for (std::size_t i = 0; i < grid.size(); ++i) {
        std::vector<double> v{grid[i]};
        for (Eigen::Index r = 0; r < forms[i].rates.size(); ++r) v.push_back(forms[i].rates(r));
        f.row(v);
      }
      f.close();
      written.push_back("rates.csv");
    }
    if (c.wants("canonical")) {
      Csv f(dir / "canonical.csv");
      std::vector<std::string> cols{"t"};
      matrix_header(cols, "gamma", d * d - 1, d * d - 1);
      f.header(cols);
      for (std::size_t i = 0; i < grid.size(); ++i) {
        std::vector<double> v{grid[i]};
        matrix_values(v, forms[i].gamma);
        f.row(v);
      }
      f.close();
      written.push_back("canonical.csv");
    }
  }

  if (traj) {
    Trajectory tr;
    timed("trajectory", [&] {
      tr = propagate_sampled(gens, c.initial_state, grid);
      if (c.picture == "schroedinger") tr = to_schroedinger(tr, m);
    });
    const double min_eig = *std::min_element(tr.min_eigenvalues.begin(), tr.min_eigenvalues.end());
    diagnostics["min_state_eigenvalue"] = json_number(min_eig);
    diagnostics["trajectory_picture"] = c.picture;
    Csv f(dir / "trajectory.csv");
    std::vector<std::string> cols{"t"};
    matrix_header(cols, "rho", d, d);
    cols.push_back("min_eigenvalue");
    f.header(cols);
    for (std::size_t i = 0; i < tr.times.size(); ++i) {
      std::vector<double> v{tr.times[i]};
      matrix_values(v, tr.states[i]);
      v.push_back(tr.min_eigenvalues[i]);
      f.row(v);
    }
    f.close();
    written.push_back("trajectory.csv");
  }

  if (c.wants("convergence")) {
    std::vector<double> lambdas = c.convergence_lambdas;
    if (lambdas.empty())
      for (int i = 0; i < 5; ++i) lambdas.push_back(c.lambda * std::pow(10.0, -1.0 + 0.25 * i));
    ConvergenceStudy study;
    timed("convergence", [&] {
      const SingleModeParams mode{c.bath.g, c.bath.omega, c.bath.nbar};
      study = convergence_study(m, mode, c.max_order, c.t_max, lambdas, q, c.fock_cutoff, c.suppression);
    });
    json conds = json::array();
    for (const auto& p : study.points) conds.push_back(json_number(p.condition));
    diagnostics["map_condition_numbers"] = conds;
    diagnostics["convergence_slope"] = json_number(study.slope);
    Csv f(dir / "convergence.csv");
    f.header({"t", "lambda", "residual"});
    for (const auto& p : study.points) f.row({c.t_max, p.lambda, p.residual});
    f.close();
    written.push_back("convergence.csv");
  }

  json manifest;
  manifest["artifact"] = "tclgen";
  manifest["version"] = version_string();
  manifest["config"] = json::parse(c.source);
  manifest["threads"] = thread_count();
  manifest["stages"] = stages;
  manifest["tolerances"] = {{"hermiticity", hermitian_tol},  {"state", state_tol},
                            {"canonical", canonical_tol},    {"fock_tail", fock_tail_tol},
                            {"max_condition", max_condition}};
  manifest["diagnostics"] = diagnostics;
  manifest["outputs"] = written;
  std::ofstream mf(dir / "manifest.json");
  mf << manifest.dump(2) << '\n';
  if (!mf) throw std::runtime_error("failed writing manifest.json");
  log("wrote " + std::to_string(written.size()) + " csv files to " + dir.string());
}

}  // namespace tclgen
