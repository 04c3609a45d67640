// Command-line front end; talks to the library only through the C interface.

#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "tclgen/tclgen.h"

namespace {

int report(tcl_status s) {
  switch (s) {
    case TCL_ERR_CONFIG:
      std::fprintf(stderr, "config error: %s\n", tcl_last_error());
      return 2;
    case TCL_ERR_NUMERIC:
      std::fprintf(stderr, "numerical error: %s\n", tcl_last_error());
      return 3;
    default:
      std::fprintf(stderr, "error: %s\n", tcl_last_error());
      return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Perturbative TCL generators, canonical rates and effective Hamiltonians"};
  app.set_version_flag("--version", std::string(tcl_version()));
  app.require_subcommand(1);

  std::string output_dir = ".";
  int threads = 1;
  bool quiet = false;
  app.add_option("--output-dir", output_dir, "Directory for CSV files and manifest.json");
  app.add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  app.add_flag("--quiet", quiet, "No progress output");

  std::string config_path;
  auto* run = app.add_subcommand("run", "Run the stages requested by a config");
  run->add_option("config", config_path, "Config file (JSON)")->required();
  run->fallthrough();
  auto* validate = app.add_subcommand("validate", "Parse and check a config without computing");
  validate->add_option("config", config_path, "Config file (JSON)")->required();
  validate->fallthrough();

  CLI11_PARSE(app, argc, argv);

  if (tcl_status s = tcl_set_threads(threads); s != TCL_OK) return report(s);

  tcl_config* cfg = nullptr;
  if (tcl_status s = tcl_config_load(config_path.c_str(), &cfg); s != TCL_OK) return report(s);

  int code = 0;
  if (*validate) {
    std::printf("ok\n");
  } else {
    if (tcl_status s = tcl_run(cfg, output_dir.c_str(), quiet ? 1 : 0); s != TCL_OK) code = report(s);
  }
  tcl_config_destroy(cfg);
  return code;
}
