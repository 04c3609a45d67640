#include "tclgen/tclgen.h"

#include <exception>
#include <new>
#include <string>

#include "tclgen/errors.hpp"
#include "tclgen/generator.hpp"
#include "tclgen/run.hpp"

struct tcl_model {
  tclgen::SystemModel model;
};

struct tcl_bath {
  tclgen::BathModel bath;
};

struct tcl_config {
  tclgen::RunConfig config;
};

namespace {

thread_local std::string last_error;
thread_local std::string last_detail;

tcl_status fail(tcl_status s, std::string msg, std::string detail = {}) {
  last_error = std::move(msg);
  last_detail = std::move(detail);
  return s;
}

template <class F>
tcl_status guarded(F&& fn) {
  last_error.clear();
  last_detail.clear();
  try {
    fn();
    return TCL_OK;
  } catch (const tclgen::ConfigError& e) {
    return fail(TCL_ERR_CONFIG, e.what(), e.path());
  } catch (const tclgen::NumericalError& e) {
    return fail(TCL_ERR_NUMERIC, e.what(), e.identity());
  } catch (const std::invalid_argument& e) {
    return fail(TCL_ERR_ARGUMENT, e.what());
  } catch (const std::out_of_range& e) {
    return fail(TCL_ERR_ARGUMENT, e.what());
  } catch (const std::bad_alloc&) {
    return fail(TCL_ERR_INTERNAL, "out of memory");
  } catch (const std::runtime_error& e) {
    return fail(TCL_ERR_IO, e.what());
  } catch (const std::exception& e) {
    return fail(TCL_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(TCL_ERR_INTERNAL, "unknown error");
  }
}

tclgen::Operator read_matrix(const double* p, int rows, int cols) {
  tclgen::Operator m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) {
      const std::size_t k = 2 * (static_cast<std::size_t>(i) * cols + j);
      m(i, j) = {p[k], p[k + 1]};
    }
  return m;
}

void write_matrix(const Eigen::MatrixXcd& m, double* p) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const std::size_t k = 2 * static_cast<std::size_t>(i * m.cols() + j);
      p[k] = m(i, j).real();
      p[k + 1] = m(i, j).imag();
    }
}

tclgen::VanishingRule rule(tcl_suppression s) {
  switch (s) {
    case TCL_SUPPRESS_NONE: return tclgen::VanishingRule::none;
    case TCL_SUPPRESS_MEAN_ZERO: return tclgen::VanishingRule::mean_zero;
    case TCL_SUPPRESS_GAUSSIAN_MEAN_ZERO: return tclgen::VanishingRule::gaussian_mean_zero;
  }
  throw std::invalid_argument("unknown suppression rule");
}

void need(const void* p, const char* name) {
  if (!p) throw std::invalid_argument(std::string(name) + " is null");
}

}  // namespace

extern "C" {

const char* tcl_version(void) {
  static const std::string v = tclgen::version_string();
  return v.c_str();
}

const char* tcl_last_error(void) { return last_error.c_str(); }
const char* tcl_last_error_detail(void) { return last_detail.c_str(); }

tcl_status tcl_set_threads(int threads) {
  return guarded([&] { tclgen::set_thread_count(threads); });
}

tcl_status tcl_model_create(int dim, const double* h, const double* a, double lambda, tcl_model** out) {
  return guarded([&] {
    need(h, "h");
    need(a, "a");
    need(out, "out");
    if (dim < 1) throw std::invalid_argument("dim must be positive");
    *out = new tcl_model{tclgen::SystemModel(read_matrix(h, dim, dim), read_matrix(a, dim, dim), lambda)};
  });
}

void tcl_model_destroy(tcl_model* m) { delete m; }

int tcl_model_dim(const tcl_model* m) { return m ? m->model.dim() : 0; }

tcl_status tcl_bath_single_mode(double g, double omega, double nbar, tcl_bath** out) {
  return guarded([&] {
    need(out, "out");
    *out = new tcl_bath{tclgen::BathModel::single_mode_thermal(g, omega, nbar)};
  });
}

tcl_status tcl_bath_gaussian_table(double dt, const double* values, size_t count, tcl_bath** out) {
  return guarded([&] {
    need(values, "values");
    need(out, "out");
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
    if (count < 2) throw std::invalid_argument("need at least two samples");
    tclgen::RunConfig c;
    c.bath.kind = "gaussian_generic";
    c.bath.table_dt = dt;
    for (size_t i = 0; i < count; ++i) c.bath.table.emplace_back(values[2 * i], values[2 * i + 1]);
    *out = new tcl_bath{tclgen::make_bath(c)};
  });
}

void tcl_bath_destroy(tcl_bath* b) { delete b; }

tcl_status tcl_generator_order(const tcl_model* m, const tcl_bath* b, int n, double t, int nodes,
                               tcl_suppression suppression, double* out) {
  return guarded([&] {
    need(m, "model");
    need(b, "bath");
    need(out, "out");
    const auto l = tclgen::build_Ln(m->model, b->bath, n, t, tclgen::QuadratureSpec{nodes}, rule(suppression));
    write_matrix(l.matrix(), out);
  });
}

tcl_status tcl_generator(const tcl_model* m, const tcl_bath* b, int max_order, double t, int nodes,
                         tcl_suppression suppression, double* out) {
  return guarded([&] {
    need(m, "model");
    need(b, "bath");
    need(out, "out");
    const auto l =
        tclgen::build_generator(m->model, b->bath, max_order, t, tclgen::QuadratureSpec{nodes}, rule(suppression));
    write_matrix(l.matrix(), out);
  });
}

tcl_status tcl_canonical(int dim, const double* superop, double* k, double* gamma, double* rates) {
  return guarded([&] {
    need(superop, "superop");
    if (dim < 2) throw std::invalid_argument("dim must be at least 2");
    const tclgen::SuperOperator s(read_matrix(superop, dim * dim, dim * dim));
    const auto c = tclgen::canonical_decompose(s);
    if (k) write_matrix(c.K, k);
    if (gamma) write_matrix(c.gamma, gamma);
    if (rates)
      for (Eigen::Index i = 0; i < c.rates.size(); ++i) rates[i] = c.rates(i);
  });
}

tcl_status tcl_effective_hamiltonian(const tcl_model* m, const tcl_bath* b, int n, double t, int nodes,
                                     tcl_suppression suppression, double* out) {
  return guarded([&] {
    need(m, "model");
    need(b, "bath");
    need(out, "out");
    const auto kn =
        tclgen::effective_H_direct(m->model, b->bath, n, t, tclgen::QuadratureSpec{nodes}, rule(suppression));
    write_matrix(kn, out);
  });
}

tcl_status tcl_config_load(const char* path, tcl_config** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new tcl_config{tclgen::load_config(path)};
  });
}

tcl_status tcl_config_parse(const char* text, tcl_config** out) {
  return guarded([&] {
    need(text, "text");
    need(out, "out");
    *out = new tcl_config{tclgen::parse_config(text)};
  });
}

void tcl_config_destroy(tcl_config* c) { delete c; }

tcl_status tcl_run(const tcl_config* c, const char* output_dir, int quiet) {
  return guarded([&] {
    need(c, "config");
    need(output_dir, "output_dir");
    tclgen::run_pipeline(c->config, tclgen::RunOptions{output_dir, quiet != 0});
  });
}

}  // extern "C"
