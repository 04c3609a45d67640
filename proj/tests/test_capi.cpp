// The C interface and the config/run pipeline behind the command line.

#include <doctest.h>

#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include <unistd.h>

#include "tclgen/tclgen.h"

namespace fs = std::filesystem;
using cd = std::complex<double>;

namespace {

const fs::path source_dir = TCLGEN_SOURCE_DIR;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<double>> read_csv(const fs::path& p, std::string* header = nullptr) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  if (header) *header = line;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::vector<double> r;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) r.push_back(std::stod(cell));
    rows.push_back(r);
  }
  return rows;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("tclgen_capi_" + std::to_string(::getpid()) + "_" + name);
  fs::remove_all(p);
  return p;
}

// Runs a config given as JSON text; returns the status.
tcl_status run_text(const std::string& text, const fs::path& out) {
  tcl_config* c = nullptr;
  tcl_status s = tcl_config_parse(text.c_str(), &c);
  if (s != TCL_OK) return s;
  s = tcl_run(c, out.string().c_str(), 1);
  tcl_config_destroy(c);
  return s;
}

const double sx[8] = {0, 0, 1, 0, 1, 0, 0, 0};
const double sz_half[8] = {0.5, 0, 0, 0, 0, 0, -0.5, 0};
const double sz[8] = {1, 0, 0, 0, 0, 0, -1, 0};

}  // namespace

TEST_CASE("version, threads and argument errors") {
  CHECK(std::string(tcl_version()) == "0.1.0");
  CHECK(tcl_set_threads(0) == TCL_ERR_ARGUMENT);
  CHECK(tcl_set_threads(2) == TCL_OK);
  CHECK(tcl_set_threads(1) == TCL_OK);

  tcl_model* m = nullptr;
  const double bad[8] = {0, 0, 1, 0, 0, 0, 0, 0};
  CHECK(tcl_model_create(2, bad, sx, 0.1, &m) == TCL_ERR_ARGUMENT);
  CHECK(m == nullptr);
  CHECK(std::string(tcl_last_error()).find("Hermitian") != std::string::npos);
  CHECK(tcl_model_create(2, sz_half, sx, -1.0, &m) == TCL_ERR_ARGUMENT);
  CHECK(tcl_model_create(2, sz_half, sx, 0.1, nullptr) == TCL_ERR_ARGUMENT);
  REQUIRE(tcl_model_create(2, sz_half, sx, 0.1, &m) == TCL_OK);
  CHECK(tcl_model_dim(m) == 2);
  tcl_bath* b = nullptr;
  REQUIRE(tcl_bath_single_mode(1.0, 1.0, 0.0, &b) == TCL_OK);
  std::vector<double> out(32);
  CHECK(tcl_generator_order(m, b, 7, 1.0, 8, TCL_SUPPRESS_NONE, out.data()) == TCL_ERR_ARGUMENT);
  CHECK(tcl_generator_order(m, b, 2, 1.0, 0, TCL_SUPPRESS_NONE, out.data()) == TCL_ERR_ARGUMENT);
  CHECK(tcl_generator_order(m, nullptr, 2, 1.0, 8, TCL_SUPPRESS_NONE, out.data()) == TCL_ERR_ARGUMENT);
  CHECK(tcl_last_error_detail() == std::string());
  tcl_bath_destroy(b);
  tcl_model_destroy(m);
  tcl_model_destroy(nullptr);
}

TEST_CASE("generator, canonical split and direct K agree through the interface") {
  tcl_model* m = nullptr;
  tcl_bath* b = nullptr;
  REQUIRE(tcl_model_create(2, sz_half, sx, 0.3, &m) == TCL_OK);
  REQUIRE(tcl_bath_single_mode(1.0, 1.0, 0.2, &b) == TCL_OK);

  for (int n : {2, 4}) {
    std::vector<double> l(32), k(8), gamma(18), rates(3), kd(8);
    REQUIRE(tcl_generator_order(m, b, n, 1.7, 16, TCL_SUPPRESS_GAUSSIAN_MEAN_ZERO, l.data()) == TCL_OK);
    // trace annihilation: rows 0 and 3 of the column-stacked matrix sum to zero
    for (int j = 0; j < 4; ++j) {
      const cd s = cd(l[2 * (0 * 4 + j)], l[2 * (0 * 4 + j) + 1]) + cd(l[2 * (3 * 4 + j)], l[2 * (3 * 4 + j) + 1]);
      CHECK(std::abs(s) < 1e-12);
    }
    REQUIRE(tcl_canonical(2, l.data(), k.data(), gamma.data(), rates.data()) == TCL_OK);
    CHECK(rates[0] >= rates[1]);
    CHECK(rates[1] >= rates[2]);
    REQUIRE(tcl_effective_hamiltonian(m, b, n, 1.7, 16, TCL_SUPPRESS_GAUSSIAN_MEAN_ZERO, kd.data()) == TCL_OK);
    double diff = 0.0;
    for (int i = 0; i < 8; ++i) diff = std::max(diff, std::abs(k[static_cast<std::size_t>(i)] - kd[static_cast<std::size_t>(i)]));
    CHECK(diff < 1e-10);
    // K Hermitian
    CHECK(std::abs(k[2] - k[4]) < 1e-14);
    CHECK(std::abs(k[3] + k[5]) < 1e-14);
  }

  std::vector<double> total(32), sum(32, 0.0), part(32);
  REQUIRE(tcl_generator(m, b, 2, 1.0, 12, TCL_SUPPRESS_NONE, total.data()) == TCL_OK);
  double p = 1.0;
  for (int n = 1; n <= 2; ++n) {
    p *= 0.3;
    REQUIRE(tcl_generator_order(m, b, n, 1.0, 12, TCL_SUPPRESS_NONE, part.data()) == TCL_OK);
    for (int i = 0; i < 32; ++i) sum[static_cast<std::size_t>(i)] += p * part[static_cast<std::size_t>(i)];
  }
  for (int i = 0; i < 32; ++i) CHECK(total[static_cast<std::size_t>(i)] == doctest::Approx(sum[static_cast<std::size_t>(i)]).epsilon(1e-13));

  // a superoperator that breaks trace annihilation
  std::vector<double> bad(32, 0.0);
  bad[0] = 1.0;
  CHECK(tcl_canonical(2, bad.data(), nullptr, nullptr, nullptr) == TCL_ERR_NUMERIC);
  CHECK(std::string(tcl_last_error_detail()) == "trace annihilation");

  tcl_bath_destroy(b);
  tcl_model_destroy(m);
}

TEST_CASE("tabulated Gaussian bath reproduces the single-mode correlation") {
  // C(tau) = g^2 ((nbar + 1) e^{-i w tau} + nbar e^{i w tau}), g = 0.8, w = 1.3, nbar = 0.4
  const double g = 0.8, w = 1.3, nbar = 0.4, dt = 1e-3, t = 1.2;
  std::vector<double> table;
  for (int k = 0; k <= 1300; ++k) {
    const double tau = k * dt;
    const cd c = g * g * ((nbar + 1.0) * std::exp(cd(0, -w * tau)) + nbar * std::exp(cd(0, w * tau)));
    table.push_back(c.real());
    table.push_back(c.imag());
  }
  tcl_model* m = nullptr;
  tcl_bath *bt = nullptr, *bs = nullptr;
  const double a[8] = {0.3, 0, 1, -0.5, 1, 0.5, -0.3, 0};
  REQUIRE(tcl_model_create(2, sz_half, a, 1.0, &m) == TCL_OK);
  REQUIRE(tcl_bath_gaussian_table(dt, table.data(), table.size() / 2, &bt) == TCL_OK);
  REQUIRE(tcl_bath_single_mode(g, w, nbar, &bs) == TCL_OK);
  std::vector<double> lt(32), ls(32);
  REQUIRE(tcl_generator_order(m, bt, 2, t, 16, TCL_SUPPRESS_NONE, lt.data()) == TCL_OK);
  REQUIRE(tcl_generator_order(m, bs, 2, t, 16, TCL_SUPPRESS_NONE, ls.data()) == TCL_OK);
  double diff = 0.0, scale = 0.0;
  for (int i = 0; i < 32; ++i) {
    diff = std::max(diff, std::abs(lt[static_cast<std::size_t>(i)] - ls[static_cast<std::size_t>(i)]));
    scale = std::max(scale, std::abs(ls[static_cast<std::size_t>(i)]));
  }
  CHECK(scale > 0.1);
  CHECK(diff < 1e-6 * scale);

  CHECK(tcl_bath_gaussian_table(0.0, table.data(), 10, &bt) == TCL_ERR_ARGUMENT);
  tcl_bath_destroy(bt);
  tcl_bath_destroy(bs);
  tcl_model_destroy(m);
}

TEST_CASE("malformed fixtures name the offending field") {
  std::ifstream expected(source_dir / "tests/malformed/expected.txt");
  std::string file, path;
  int seen = 0;
  while (expected >> file >> path) {
    CAPTURE(file);
    tcl_config* c = nullptr;
    CHECK(tcl_config_load((source_dir / "tests/malformed" / file).string().c_str(), &c) == TCL_ERR_CONFIG);
    CHECK(c == nullptr);
    CHECK(std::string(tcl_last_error_detail()) == path);
    CHECK(std::string(tcl_last_error()).find(path) != std::string::npos);
    ++seen;
  }
  CHECK(seen == 5);

  for (const char* name : {"dephasing", "jaynes_cummings", "free_evolution", "gaussian_table"}) {
    tcl_config* c = nullptr;
    CHECK(tcl_config_load((source_dir / "configs" / (std::string(name) + ".json")).string().c_str(), &c) == TCL_OK);
    tcl_config_destroy(c);
  }
}

TEST_CASE("config validation paths") {
  const auto base = nlohmann::json::parse(slurp(source_dir / "configs/dephasing.json"));
  auto expect = [&](const std::function<void(nlohmann::json&)>& edit, const std::string& path) {
    auto j = base;
    edit(j);
    tcl_config* c = nullptr;
    CAPTURE(path);
    CHECK(tcl_config_parse(j.dump().c_str(), &c) == TCL_ERR_CONFIG);
    CHECK(std::string(tcl_last_error_detail()) == path);
  };
  expect([](auto& j) { j["system"]["dim"] = 3; }, "system.hamiltonian");
  expect([](auto& j) { j["system"]["dim"] = 2.5; }, "system.dim");
  expect([](auto& j) { j["interaction"]["operator"][3] = 0.4; }, "interaction.operator");
  expect([](auto& j) { j["interaction"]["operator"][2] = "x"; }, "interaction.operator[2]");
  expect([](auto& j) { j["coupling"]["lambda"] = -0.1; }, "coupling.lambda");
  expect([](auto& j) { j["bath"]["kind"] = "ohmic"; }, "bath.kind");
  expect([](auto& j) { j["bath"]["kind"] = "custom"; }, "bath.kind");
  expect([](auto& j) { j["bath"]["nbar"] = -1; }, "bath.nbar");
  expect([](auto& j) { j["bath"]["extra"] = 1; }, "bath.extra");
  expect([](auto& j) { j["expansion"]["max_order"] = 0; }, "expansion.max_order");
  expect([](auto& j) { j["expansion"]["suppression"] = "all"; }, "expansion.suppression");
  expect([](auto& j) { j["quadrature"]["nodes"] = 0; }, "quadrature.nodes");
  expect([](auto& j) { j["time"]["t_max"] = 0; }, "time.t_max");
  expect([](auto& j) { j["time"].erase("steps"); }, "time.steps");
  expect([](auto& j) { j["initial_state"] = {1.5, 0, 0, 0, 0, 0, -0.5, 0}; }, "initial_state");
  expect([](auto& j) { j["outputs"] = {"rates", "plots"}; }, "outputs[1]");
  expect([](auto& j) { j["outputs"] = nlohmann::json::array(); }, "outputs");
  expect([](auto& j) { j["colour"] = "blue"; }, "colour");
  expect([](auto& j) { j["trajectory"] = {{"picture", "heisenberg"}}; }, "trajectory.picture");
  expect([](auto& j) { j["convergence"] = {{"lambdas", {0.1, -0.2}}}; }, "convergence.lambdas[1]");
  expect(
      [](auto& j) {
        j["bath"] = {{"kind", "gaussian_generic"}, {"table", {{"dt", 0.5}, {"values", {1, 0, 0.5, 0.1}}}}};
      },
      "bath.table.values");
  expect(
      [](auto& j) {
        j["bath"] = {{"kind", "gaussian_generic"}, {"table", {{"dt", 5.0}, {"values", {1, 0.1, 0.5, 0.1, 0, 0}}}}};
      },
      "bath.table.values");
  expect(
      [](auto& j) {
        j["bath"] = {{"kind", "gaussian_generic"}, {"table", {{"dt", 5.0}, {"values", {1, 0, 0.5, 0.1, 0, 0}}}}};
        j["outputs"] = {"convergence"};
      },
      "outputs");

  tcl_config* c = nullptr;
  CHECK(tcl_config_parse("{\"system\": ", &c) == TCL_ERR_CONFIG);
  CHECK(std::string(tcl_last_error_detail()) == "<root>");
  CHECK(tcl_config_load("/nonexistent/x.json", &c) == TCL_ERR_CONFIG);
}

TEST_CASE("zero coupling gives free evolution and vanishing rates") {
  const fs::path out = scratch("free");
  REQUIRE(run_text(slurp(source_dir / "configs/free_evolution.json"), out) == TCL_OK);
  for (const auto& row : read_csv(out / "rates.csv"))
    for (std::size_t i = 1; i < row.size(); ++i) CHECK(row[i] == 0.0);

  // traceless H: U = cos(w t) - i sin(w t) H / w
  const cd h00(0.5, 0), h01(0.2, -0.1), h10(0.2, 0.1), h11(-0.5, 0);
  const double w = std::sqrt(0.3);
  std::string header;
  const auto rows = read_csv(out / "trajectory.csv", &header);
  CHECK(header == "t,rho_0_0_re,rho_0_0_im,rho_0_1_re,rho_0_1_im,rho_1_0_re,rho_1_0_im,rho_1_1_re,rho_1_1_im,"
                  "min_eigenvalue");
  REQUIRE(rows.size() == 41);
  for (const auto& r : rows) {
    const double t = r[0];
    const cd c = std::cos(w * t), s = cd(0, -std::sin(w * t) / w);
    const cd u[2][2] = {{c + s * h00, s * h01}, {s * h10, c + s * h11}};
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        cd v = 0.0;
        for (int k = 0; k < 2; ++k)
          for (int l = 0; l < 2; ++l) v += u[i][k] * 0.5 * std::conj(u[j][l]);
        const std::size_t col = 1 + 2 * static_cast<std::size_t>(2 * i + j);
        CHECK(std::abs(v - cd(r[col], r[col + 1])) < 1e-12);
      }
  }
  fs::remove_all(out);
}

TEST_CASE("odd order under Gaussian suppression leaves the generator unchanged") {
  auto j = nlohmann::json::parse(slurp(source_dir / "configs/dephasing.json"));
  j["outputs"] = {"generator", "rates"};
  j["expansion"]["suppression"] = "gaussian_mean_zero";
  const fs::path o2 = scratch("o2"), o3 = scratch("o3");
  REQUIRE(run_text(j.dump(), o2) == TCL_OK);
  j["expansion"]["max_order"] = 3;
  REQUIRE(run_text(j.dump(), o3) == TCL_OK);
  CHECK(slurp(o2 / "generator.csv") == slurp(o3 / "generator.csv"));
  CHECK(slurp(o2 / "rates.csv") == slurp(o3 / "rates.csv"));
  CHECK_FALSE(slurp(o2 / "generator.csv").empty());

  const auto manifest = nlohmann::json::parse(slurp(o3 / "manifest.json"));
  CHECK(manifest["version"] == "0.1.0");
  CHECK(manifest["config"]["expansion"]["max_order"] == 3);
  CHECK(manifest["outputs"] == nlohmann::json({"generator.csv", "rates.csv"}));
  CHECK(manifest.contains("tolerances"));
  CHECK(manifest["stages"][0]["stage"] == "generator");
  fs::remove_all(o2);
  fs::remove_all(o3);
}

TEST_CASE("dephasing sample rates follow the closed form") {
  // rate = 4 lambda^2 g^2 (2 nbar + 1) sin(w t) / w on the sigma_z direction
  const fs::path out = scratch("deph");
  REQUIRE(run_text(slurp(source_dir / "configs/dephasing.json"), out) == TCL_OK);
  const auto rows = read_csv(out / "rates.csv");
  REQUIRE(rows.size() == 51);
  for (const auto& r : rows) {
    const double expect = 4 * 0.09 * 2.0 * std::sin(r[0]);
    const double got = expect >= 0 ? r[1] : r[3];
    CHECK(got == doctest::Approx(expect).epsilon(1e-12).scale(1.0));
  }
  fs::remove_all(out);
}

TEST_CASE("numerical precondition failures surface the identity") {
  tcl_config* c = nullptr;
  REQUIRE(tcl_config_load((source_dir / "tests/numeric/fock_truncation.json").string().c_str(), &c) == TCL_OK);
  const fs::path out = scratch("num");
  CHECK(tcl_run(c, out.string().c_str(), 1) == TCL_ERR_NUMERIC);
  CHECK(std::string(tcl_last_error_detail()) == "fock truncation");
  tcl_config_destroy(c);
  fs::remove_all(out);
}
