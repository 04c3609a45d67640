// Acceptance run: one PASS/FAIL line per criterion.

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "tclgen/cumulant.hpp"
#include "tclgen/dynamics.hpp"
#include "tclgen/generator.hpp"

using namespace tclgen;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

QuadratureSpec nodes(int n) {
  QuadratureSpec q;
  q.nodes_per_dimension = n;
  return q;
}

Operator pauli(char c) {
  Operator m(2, 2);
  if (c == 'x') m << 0, 1, 1, 0;
  if (c == 'y') m << 0, Complex(0, -1), Complex(0, 1), 0;
  if (c == 'z') m << 1, 0, 0, -1;
  return m;
}

Operator random_hermitian(std::mt19937_64& rng, int d) {
  std::normal_distribution<double> n;
  Operator m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = Complex(n(rng), n(rng));
  return 0.5 * (m + m.adjoint());
}

std::string sci(double x) {
  char b[32];
  std::snprintf(b, sizeof b, "%.3g", x);
  return b;
}

std::vector<double> log_space(double a, double b, int n) {
  std::vector<double> v;
  for (int i = 0; i < n; ++i) v.push_back(a * std::pow(b / a, static_cast<double>(i) / (n - 1)));
  return v;
}

// Value of the cumulant at fixed times straight from its defining recursion,
// using only bath blocks. Slots: tau_i -> i-1, s_i -> k+i-1.
Complex recursion_value(const CorrelationTable& table, int k, int m) {
  auto block = [&](int l0, int l1, int r0, int r1) {
    std::vector<int> taus, ss;
    for (int i = l0 + 1; i <= l1; ++i) taus.push_back(i - 1);
    for (int i = r0 + 1; i <= r1; ++i) ss.push_back(k + i - 1);
    return table.block(taus, ss);
  };
  std::vector<std::vector<Complex>> r(static_cast<std::size_t>(k + 1), std::vector<Complex>(static_cast<std::size_t>(m + 1)));
  for (int l = 0; l <= k; ++l)
    for (int q = 0; q <= m; ++q) {
      if (l == 0 && q == 0) continue;
      Complex v = block(0, l, 0, q);
      for (int a = 0; a <= l; ++a)
        for (int b = 0; b <= q; ++b) {
          if ((a == 0 && b == 0) || (a == l && b == q)) continue;
          v -= r[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] * block(a, l, b, q);
        }
      r[static_cast<std::size_t>(l)][static_cast<std::size_t>(q)] = v;
    }
  return r[static_cast<std::size_t>(k)][static_cast<std::size_t>(m)];
}

Outcome criterion1() {
  auto key = [](std::vector<CumulantTerm> v) {
    std::sort(v.begin(), v.end(), [](const CumulantTerm& a, const CumulantTerm& b) {
      return std::tie(a.blocks, a.coefficient) < std::tie(b.blocks, b.coefficient);
    });
    return v;
  };
  int mismatched = 0;
  double worst = 0.0;
  const BathModel b = BathModel::displaced_single_mode(1.0, 0.9, 0.3, Complex(0.4, 0.2));
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  for (int n = 1; n <= 5; ++n)
    for (int k = 0; k <= n; ++k) {
      const auto direct = expand_direct(n, k);
      const auto recursive = expand_recursive(n, k);
      if (key(direct) != key(recursive)) ++mismatched;
      for (int rep = 0; rep < 100; ++rep) {
        std::vector<double> times(static_cast<std::size_t>(n));
        for (auto& x : times) x = u(rng);
        // half the tuples descending on each side so that no block vanishes
        if (rep % 2 == 0) {
          std::sort(times.begin(), times.begin() + k, std::greater<>());
          std::sort(times.begin() + k, times.end(), std::greater<>());
        }
        const CorrelationTable table(b, times);
        Complex vd = 0.0, vr = 0.0;
        for (const auto& t : direct) vd += eval_blocks(t, table, k);
        for (const auto& t : recursive) vr += eval_blocks(t, table, k);
        const Complex vn = recursion_value(table, k, n - k);
        const double scale = std::max(1.0, std::abs(vn));
        worst = std::max({worst, std::abs(vd - vr) / scale, std::abs(vd - vn) / scale});
      }
    }
  return {mismatched == 0 && worst <= 1e-12,
          "multiset mismatches " + std::to_string(mismatched) + " over n<=5; max |direct - recursion| " +
              sci(worst) + " (tol 1e-12, 100 tuples per (n,k))"};
}

Outcome criterion2() {
  auto counts = [](int n, VanishingRule rule) {
    std::vector<int> c;
    for (int k = n; k >= 0; --k) c.push_back(static_cast<int>(suppress_vanishing(cumulant_terms(n, k), rule).size()));
    return c;
  };
  auto str = [](const std::vector<int>& v) {
    std::string s = "(";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s + ")";
  };
  const auto c1 = counts(1, VanishingRule::none), c2 = counts(2, VanishingRule::none),
             c3 = counts(3, VanishingRule::none), c4 = counts(4, VanishingRule::mean_zero);
  int twos_ok = 0;
  for (int k : {1, 2}) {
    int twos = 0;
    for (const auto& t : cumulant_terms(3, k)) twos += std::abs(t.coefficient) == 2;
    twos_ok += twos == 1;
  }
  const bool lists = format_terms(cumulant_terms(2, 1)) == "-dD(s1)·D(τ1) -dD(τ1)·D(s1) +dD(τ1;s1)" &&
                     format_terms(cumulant_terms(2, 2)) == "-dD(τ1)·D(τ2) +dD(τ1τ2)";
  const bool ok = c1 == std::vector<int>{1, 1} && c2 == std::vector<int>{2, 3, 2} &&
                  c3 == std::vector<int>{4, 7, 7, 4} && c4 == std::vector<int>{2, 3, 4, 3, 2} && twos_ok == 2 && lists;
  return {ok, "counts " + str(c1) + " " + str(c2) + " " + str(c3) + " " + str(c4) +
                  "; single coefficient-2 term in both middle order-3 lists: " + (twos_ok == 2 ? "yes" : "no")};
}

Outcome criterion3() {
  std::mt19937_64 rng(303);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_trace = 0.0, worst_herm = 0.0, worst_k = 0.0, worst_gamma = 0.0, worst_basis = 0.0;
  for (int model = 0; model < 50; ++model) {
    const int d = model % 2 == 0 ? 2 : 3;
    const SystemModel m(random_hermitian(rng, d), random_hermitian(rng, d), 0.1);
    const BathModel b = BathModel::single_mode_thermal(0.5 + u(rng), 0.5 + 1.5 * u(rng), u(rng));
    const double t = 0.5 + 2.5 * u(rng);
    std::vector<Operator> xs;
    std::normal_distribution<double> nd;
    for (int i = 0; i < 10; ++i) {
      Operator x(d, d);
      for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c) x(r, c) = Complex(nd(rng), nd(rng));
      xs.push_back(x);
    }
    for (int n = 1; n <= 4; ++n) {
      const SuperOperator l = build_Ln(m, b, n, t, nodes(8));
      for (const auto& x : xs) {
        const double nx = x.norm();
        worst_trace = std::max(worst_trace, std::abs(l.apply(x).trace()) / nx);
        worst_herm = std::max(worst_herm, (l.apply(x.adjoint()) - l.apply(x).adjoint()).norm() / nx);
      }
      const auto c = canonical_decompose(l);
      worst_k = std::max(worst_k, hermiticity_defect(c.K));
      worst_gamma = std::max(worst_gamma, hermiticity_defect(c.gamma));
      for (const auto& g : c.basis) worst_basis = std::max(worst_basis, std::abs(g.trace()));
    }
  }
  const bool ok = worst_trace <= 1e-10 && worst_herm <= 1e-10 && worst_k <= 1e-10 && worst_gamma <= 1e-10 &&
                  worst_basis == 0.0;
  return {ok, "50 models n<=4: max |Tr L[X]|/|X| " + sci(worst_trace) + ", Hermiticity " + sci(worst_herm) +
                  ", K " + sci(worst_k) + ", gamma " + sci(worst_gamma) + ", basis |Tr G| " + sci(worst_basis)};
}

Outcome criterion4() {
  const SystemModel deph(0.5 * pauli('z'), pauli('z'), 0.1);
  const SystemModel gen(0.5 * pauli('z'), pauli('x') + 0.3 * pauli('z'), 0.1);
  const BathModel b = BathModel::single_mode_thermal(1.0, 1.0, 0.3);
  double worst = 0.0, largest = 0.0;
  for (const SystemModel* m : {&deph, &gen})
    for (int i = 1; i <= 10; ++i) {
      const double t = 0.5 * i;
      for (int n = 1; n <= 4; ++n) {
        const Operator direct = effective_H_direct(*m, b, n, t, nodes(24));
        const Operator canonical = canonical_decompose(build_Ln(*m, b, n, t, nodes(24))).K;
        worst = std::max(worst, (direct - canonical).norm());
        largest = std::max(largest, canonical.norm());
      }
    }
  return {worst <= 1e-6, "max ||K_direct - K_canonical||_F " + sci(worst) + " (largest ||K_n|| " + sci(largest) +
                             ", tol 1e-6, 24 nodes)"};
}

Outcome criterion5() {
  const double lam = 0.3;
  const SingleModeParams mode{1.0, 1.0, 0.5};
  const SystemModel m(0.5 * pauli('z'), pauli('z'), lam);
  const BathModel b = BathModel::single_mode_thermal(mode.g, mode.omega, mode.nbar);
  const auto grid = uniform_grid(10.0, 200);
  Operator plus(2, 2);
  plus << 0.5, 0.5, 0.5, 0.5;
  const auto oracle = dephasing_oracle(b, lam, grid, nodes(24));
  const auto exact = exact_map_single_mode(m, mode, 30, grid);
  const auto tr = propagate([&](double t) { return build_generator(m, b, 2, t, nodes(24)); }, plus, grid);
  double coh = 0.0, oracle_vs_map = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Complex o = 0.5 * std::exp(-Complex(oracle[i].gamma, oracle[i].phi));
    coh = std::max(coh, std::abs(tr.states[i](0, 1) - o));
    oracle_vs_map = std::max(oracle_vs_map, std::abs(exact.maps[i].apply(plus)(0, 1) - o));
  }
  double l3 = 0.0, l4 = 0.0, k2 = 0.0, k3 = 0.0;
  for (int i = 1; i <= 10; ++i) {
    const double t = i;
    l3 = std::max(l3, build_Ln(m, b, 3, t, nodes(24)).matrix().norm());
    l4 = std::max(l4, build_Ln(m, b, 4, t, nodes(24)).matrix().norm());
    k2 = std::max(k2, effective_H_direct(m, b, 2, t, nodes(24)).norm());
    k3 = std::max(k3, effective_H_direct(m, b, 3, t, nodes(24)).norm());
  }
  const bool ok = coh <= 1e-6 && oracle_vs_map <= 1e-8 && l3 <= 1e-8 && l4 <= 1e-8 && k2 <= 1e-12 && k3 <= 1e-12;
  return {ok, "TCL2 coherence vs oracle " + sci(coh) + " (oracle vs Fock map " + sci(oracle_vs_map) +
                  "); max ||L3|| " + sci(l3) + ", ||L4|| " + sci(l4) + ", ||K2|| " + sci(k2) + ", ||K3|| " + sci(k3)};
}

Outcome criterion6() {
  const SystemModel m(0.5 * pauli('z'), pauli('x'), 0.1);
  const SingleModeParams mode{1.0, 1.0, 0.0};
  const auto lambdas = log_space(0.03, 0.3, 5);
  const auto s2 = convergence_study(m, mode, 2, 1.0, lambdas, nodes(24), 30);
  const auto s4 = convergence_study(m, mode, 4, 1.0, lambdas, nodes(24), 30);
  const bool ok = s2.slope >= 3.5 && s2.slope <= 4.5 && s4.slope >= 5.5 && s4.slope <= 6.5;
  return {ok, "t* = 1, lambda 0.03..0.3: slope N=2 " + sci(s2.slope) + " (want 3.5..4.5), N=4 " + sci(s4.slope) +
                  " (want 5.5..6.5)"};
}

Outcome criterion7() {
  const double lam = 0.2, step = 0.2, tol = 1e-8;
  const SystemModel m(0.5 * pauli('z'), pauli('x'), lam);
  const SingleModeParams mode{1.0, 1.0, 0.0};
  const BathModel b = BathModel::single_mode_thermal(mode.g, mode.omega, mode.nbar);
  const auto grid = uniform_grid(5.0, 25);
  const auto fine = uniform_grid(5.0, 500);
  const auto exact = exact_tcl_from_map(exact_map_single_mode(m, mode, 30, fine));
  auto negatives = [&](const Eigen::VectorXd& r) {
    int c = 0;
    for (Eigen::Index i = 0; i < r.size(); ++i) c += r(i) < -tol;
    return c;
  };
  std::vector<int> count_exact, count_tcl;
  bool any_exact = false, any_tcl = false;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto re = canonical_decompose(exact.generators[i * 20], 1e-6).rates;
    const auto rt = canonical_decompose(build_generator(m, b, 4, grid[i], nodes(16))).rates;
    count_exact.push_back(negatives(re));
    count_tcl.push_back(negatives(rt));
    any_exact = any_exact || count_exact.back() > 0;
    any_tcl = any_tcl || count_tcl.back() > 0;
  }
  // events: grid times where the number of negative rates changes
  auto events = [&](const std::vector<int>& c) {
    std::vector<double> e;
    for (std::size_t i = 1; i < c.size(); ++i)
      if (c[i] != c[i - 1]) e.push_back(grid[i]);
    return e;
  };
  const auto ee = events(count_exact), et = events(count_tcl);
  bool match = ee.size() == et.size() && !ee.empty();
  for (std::size_t i = 0; match && i < ee.size(); ++i) match = std::abs(ee[i] - et[i]) <= step + 1e-9;
  auto list = [](const std::vector<double>& v) {
    std::string s;
    for (double x : v) s += (s.empty() ? "" : " ") + sci(x);
    return "[" + s + "]";
  };
  return {any_exact && any_tcl && match,
          "lambda 0.2, step 0.2: negative-count changes exact " + list(ee) + ", TCL4 " + list(et)};
}

Outcome criterion8() {
  const SystemModel m(0.5 * pauli('z'), pauli('x'), 0.1);
  const SingleModeParams mode{1.0, 1.0, 0.0};
  const BathModel b = BathModel::single_mode_thermal(1, 1, 0);
  std::vector<double> ys;
  const auto lambdas = log_space(0.03, 0.3, 5);
  for (double lam : lambdas) {
    const auto ml = m.with_lambda(lam);
    const auto ex = exact_map_single_mode(ml, mode, 30, {1.0});
    ys.push_back((ex.maps[0].matrix() - moment_map(ml, b, 2, 1.0, nodes(24)).matrix()).norm());
  }
  const double slope = loglog_slope(lambdas, ys);
  return {slope >= 2.5, "t = 1, lambda 0.03..0.3: slope " + sci(slope) + " (want >= 2.5)"};
}

int run_command(const std::string& cmd) {
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome criterion9() {
  const fs::path src = TCLGEN_SOURCE_DIR;
  const std::string cli = TCLGEN_CLI;
  const fs::path work = fs::temp_directory_path() / ("tclgen_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(work);
  int configs = 0, files = 0, mismatched = 0;
  std::string bad;
  std::vector<fs::path> cfgs;
  for (const auto& e : fs::directory_iterator(src / "configs"))
    if (e.path().extension() == ".json") cfgs.push_back(e.path());
  std::sort(cfgs.begin(), cfgs.end());
  for (const auto& cfg : cfgs) {
    const std::string name = cfg.stem().string();
    const fs::path out = work / name;
    ++configs;
    if (run_command("'" + cli + "' --quiet --output-dir '" + out.string() + "' run '" + cfg.string() + "'") != 0) {
      ++mismatched;
      bad += " " + name + "(run)";
      continue;
    }
    std::vector<std::string> golden, produced;
    for (const auto& e : fs::directory_iterator(src / "tests/golden" / name))
      golden.push_back(e.path().filename().string());
    for (const auto& e : fs::directory_iterator(out))
      if (e.path().extension() == ".csv") produced.push_back(e.path().filename().string());
    std::sort(golden.begin(), golden.end());
    std::sort(produced.begin(), produced.end());
    if (golden != produced || !fs::exists(out / "manifest.json")) {
      ++mismatched;
      bad += " " + name + "(file set)";
    }
    for (const auto& f : golden) {
      ++files;
      if (slurp(out / f) != slurp(src / "tests/golden" / name / f)) {
        ++mismatched;
        bad += " " + name + "/" + f;
      }
    }
  }
  int rejected = 0, fixtures = 0;
  std::ifstream expected(src / "tests/malformed/expected.txt");
  std::string file, field;
  while (expected >> file >> field) {
    ++fixtures;
    const fs::path err = work / ("validate_" + file + ".txt");
    const int code = run_command("'" + cli + "' validate '" + (src / "tests/malformed" / file).string() + "' 2> '" +
                                 err.string() + "'");
    if (code == 2 && slurp(err).find("config error: " + field + ":") != std::string::npos)
      ++rejected;
    else
      bad += " " + file + "(exit " + std::to_string(code) + ")";
  }
  fs::remove_all(work);
  const bool ok = configs > 0 && mismatched == 0 && fixtures == 5 && rejected == 5;
  return {ok, std::to_string(configs) + " sample configs, " + std::to_string(files) + " golden CSVs, " +
                  std::to_string(mismatched) + " mismatches; malformed rejected with field path " +
                  std::to_string(rejected) + "/" + std::to_string(fixtures) + bad};
}

}  // namespace

int main() {
  const std::vector<std::pair<int, std::function<Outcome()>>> all = {
      {1, criterion1}, {2, criterion2}, {3, criterion3}, {4, criterion4}, {5, criterion5},
      {6, criterion6}, {7, criterion7}, {8, criterion8}, {9, criterion9}};
  int failed = 0;
  for (const auto& [id, fn] : all) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %d: %s  %s  [%.1fs]\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}
