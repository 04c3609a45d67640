#pragma once

// JSON run configuration and the run pipeline behind the command line.

#include <optional>
#include <string>
#include <vector>

#include "tclgen/bath.hpp"
#include "tclgen/cumulant.hpp"
#include "tclgen/model.hpp"

namespace tclgen {

struct BathConfig {
  std::string kind;                 // single_mode_thermal | gaussian_generic
  double omega = 0.0, g = 0.0, nbar = 0.0;
  double table_dt = 0.0;            // gaussian_generic: C(k dt), k = 0..n-1
  std::vector<Complex> table;
};

struct RunConfig {
  int dim = 0;
  Operator hamiltonian;
  Operator coupling;
  double lambda = 0.0;
  BathConfig bath;
  int max_order = 2;
  VanishingRule suppression = VanishingRule::none;
  int nodes = 24;
  double t_max = 0.0;
  int steps = 0;
  Operator initial_state;
  std::vector<std::string> outputs;
  std::string picture = "schroedinger";  // trajectory.csv picture
  std::vector<double> convergence_lambdas;  // empty: lambda/10 .. lambda, 5 points
  int fock_cutoff = 30;
  std::string source;                    // raw JSON text, echoed in the manifest

  bool wants(const std::string& output) const;
};

// Parse and validate. Throws ConfigError naming the offending field.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);

SystemModel make_model(const RunConfig& c);
BathModel make_bath(const RunConfig& c);

struct RunOptions {
  std::string output_dir = ".";
  bool quiet = false;
};

// Runs the requested stages and writes the CSVs plus manifest.json. Throws
// NumericalError when a required identity fails, std::runtime_error on I/O.
void run_pipeline(const RunConfig& c, const RunOptions& o);

std::string version_string();

}  // namespace tclgen
