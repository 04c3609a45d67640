#ifndef TCLGEN_TCLGEN_H
#define TCLGEN_TCLGEN_H

/*
 * C interface to the tclgen library.
 *
 * Complex matrices cross the boundary as interleaved re/im doubles in
 * row-major order: entry (i, j) of a d x d matrix sits at 2*(i*d + j).
 * Superoperators act on column-stacked vectors, vec(X)[i + d*j] = X(i, j),
 * and are d^2 x d^2 matrices in the same encoding.
 *
 * Every function returns a tcl_status. On failure tcl_last_error() holds a
 * message for the calling thread and tcl_last_error_detail() the field path
 * (TCL_ERR_CONFIG) or identity name (TCL_ERR_NUMERIC).
 */

#include <stddef.h>

#if defined(_WIN32)
#define TCL_API __declspec(dllexport)
#else
#define TCL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  TCL_OK = 0,
  TCL_ERR_ARGUMENT = 1,
  TCL_ERR_CONFIG = 2,
  TCL_ERR_NUMERIC = 3,
  TCL_ERR_IO = 4,
  TCL_ERR_INTERNAL = 5
} tcl_status;

typedef enum { TCL_SUPPRESS_NONE = 0, TCL_SUPPRESS_MEAN_ZERO = 1, TCL_SUPPRESS_GAUSSIAN_MEAN_ZERO = 2 } tcl_suppression;

typedef struct tcl_model tcl_model;
typedef struct tcl_bath tcl_bath;
typedef struct tcl_config tcl_config;

TCL_API const char* tcl_version(void);
TCL_API const char* tcl_last_error(void);
TCL_API const char* tcl_last_error_detail(void);

/* Worker threads for the quadrature loops; results do not depend on it. */
TCL_API tcl_status tcl_set_threads(int threads);

/* H_S + lambda A (x) B; h and a are dim x dim Hermitian. */
TCL_API tcl_status tcl_model_create(int dim, const double* h, const double* a, double lambda, tcl_model** out);
TCL_API void tcl_model_destroy(tcl_model* m);
TCL_API int tcl_model_dim(const tcl_model* m);

/* B = g (a + a^dag) on a thermal mode of frequency omega. */
TCL_API tcl_status tcl_bath_single_mode(double g, double omega, double nbar, tcl_bath** out);
/* Stationary mean-zero Gaussian bath from samples C(k dt), k < count
 * (interleaved re/im), linearly interpolated, C(-tau) = conj C(tau). */
TCL_API tcl_status tcl_bath_gaussian_table(double dt, const double* values, size_t count, tcl_bath** out);
TCL_API void tcl_bath_destroy(tcl_bath* b);

/* L_n(t), written to out (2 d^4 doubles). */
TCL_API tcl_status tcl_generator_order(const tcl_model* m, const tcl_bath* b, int n, double t, int nodes,
                                       tcl_suppression suppression, double* out);
/* sum_{n <= max_order} lambda^n L_n(t). */
TCL_API tcl_status tcl_generator(const tcl_model* m, const tcl_bath* b, int max_order, double t, int nodes,
                                 tcl_suppression suppression, double* out);
/* Minimal-dissipation split of a generator: K (2 d^2 doubles, may be NULL),
 * rate matrix gamma over the traceless Gell-Mann basis (2 (d^2-1)^2, may be
 * NULL) and its eigenvalues in descending order (d^2 - 1, may be NULL). */
TCL_API tcl_status tcl_canonical(int dim, const double* superop, double* k, double* gamma, double* rates);
/* K_n(t) from the direct integral, 2 d^2 doubles. */
TCL_API tcl_status tcl_effective_hamiltonian(const tcl_model* m, const tcl_bath* b, int n, double t, int nodes,
                                             tcl_suppression suppression, double* out);

/* Parse and validate a configuration file (JSON). */
TCL_API tcl_status tcl_config_load(const char* path, tcl_config** out);
TCL_API tcl_status tcl_config_parse(const char* text, tcl_config** out);
TCL_API void tcl_config_destroy(tcl_config* c);
/* Run every stage requested by the configuration; writes CSVs and
 * manifest.json into output_dir (created if needed). */
TCL_API tcl_status tcl_run(const tcl_config* c, const char* output_dir, int quiet);

#ifdef __cplusplus
}
#endif

#endif
