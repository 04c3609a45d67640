#pragma once

// Propagation under a time-dependent generator, single-mode brute-force
// oracles and exact TCL extraction.

#include <functional>
#include <vector>

#include "tclgen/bath.hpp"
#include "tclgen/generator.hpp"
#include "tclgen/model.hpp"
#include "tclgen/quadrature.hpp"

namespace tclgen {

enum class Picture { interaction, schroedinger };

struct Trajectory {
  std::vector<double> times;
  std::vector<Operator> states;
  std::vector<double> min_eigenvalues;  // positivity diagnostic
  Picture picture = Picture::interaction;
};

using GeneratorFn = std::function<SuperOperator(double)>;

// Classical RK4 on the vectorized state. The grid must be ascending and
// uniform; gen is sampled at grid points and midpoints, each once.
Trajectory propagate(const GeneratorFn& gen, const Operator& rho0, const std::vector<double>& grid);

// Same, with gen given at t_0, t_0 + h/2, t_1, ..., t_last (2 * steps + 1).
Trajectory propagate_sampled(const std::vector<SuperOperator>& half_step_gens, const Operator& rho0,
                             const std::vector<double>& grid);

// rho -> U rho U^dag with U = exp(-i H_S t) per grid point (and back).
Trajectory to_schroedinger(const Trajectory& tr, const SystemModel& m);
Trajectory to_interaction(const Trajectory& tr, const SystemModel& m);

// Throws std::invalid_argument unless rho is Hermitian, trace one and
// positive semidefinite (all to tol).
void check_density_matrix(const Operator& rho, double tol = 1e-10);

std::vector<double> uniform_grid(double t_max, int steps);

struct ExactMapGrid {
  std::vector<double> times;
  std::vector<SuperOperator> maps;         // Phi_t
  std::vector<SuperOperator> derivatives;  // d/dt Phi_t, from the joint Hamiltonian
  Picture picture = Picture::interaction;
  double max_edge_population = 0.0;        // weight in the top Fock level, max over grid
};

// Joint system + mode H_S + Omega a^dag a + lambda A (x) g (a + a^dag) in a
// Fock space truncated at fock_cutoff, mode initially thermal. Throws
// NumericalError when the thermal tail beyond the cutoff exceeds 1e-10.
ExactMapGrid exact_map_single_mode(const SystemModel& m, const SingleModeParams& mode, int fock_cutoff,
                                   const std::vector<double>& grid, Picture picture = Picture::interaction);

struct ExactGenerator {
  std::vector<double> times;
  std::vector<SuperOperator> generators;
  std::vector<double> condition_numbers;
};

// L_t = dPhi_t/dt . Phi_t^{-1} with a fourth-order finite-difference
// derivative (central inside, one-sided at both ends). Needs a uniform grid
// of at least five points. Throws NumericalError when cond(Phi_t) > max_condition.
ExactGenerator exact_tcl_from_map(const ExactMapGrid& g, double max_condition = 1e8);

// Same, using the analytic derivatives stored in the grid.
ExactGenerator exact_tcl_analytic(const ExactMapGrid& g, double max_condition = 1e8);

struct DephasingSample {
  double t;
  double gamma;  // decay exponent of rho_01
  double phi;    // phase exponent of rho_01
};

// Exact pure-dephasing coherence for a mean-zero Gaussian bath and coupling
// A = diag(a0, a1): in the interaction picture
// rho_01(t) = rho_01(0) exp(-(gamma + i phi)), with
// gamma = lambda^2 (a0 - a1)^2 int_0^t dt1 int_0^t1 dt2 Re C(t1, t2),
// phi = lambda^2 (a0^2 - a1^2) int_0^t dt1 int_0^t1 dt2 Im C(t1, t2).
std::vector<DephasingSample> dephasing_oracle(const BathModel& b, double lambda, const std::vector<double>& grid,
                                              const QuadratureSpec& q, double a0 = 1.0, double a1 = -1.0);

// mu_n^k = (-1)^(n-k) int_[0,t]^n D(taus; ss) A(taus) . A^dag(ss).
SuperOperator map_moment(const SystemModel& m, const BathModel& b, int n, int k, double t, const QuadratureSpec& q);

// id + sum_{n=1..N} (-i lambda)^n sum_k mu_n^k.
SuperOperator moment_map(const SystemModel& m, const BathModel& b, int max_order, double t, const QuadratureSpec& q);

struct ConvergencePoint {
  double lambda;
  double residual;
  double condition = 0.0;  // cond(Phi_t) of the exact map
};

struct ConvergenceStudy {
  std::vector<ConvergencePoint> points;
  double slope = 0.0;  // least-squares log-log
};

// ||L_exact(t) - sum_{n<=N} lambda^n L_n(t)||_F over the lambdas, for the
// single-mode bath of the model; the exact generator uses analytic
// derivatives of the truncated-Fock map.
ConvergenceStudy convergence_study(const SystemModel& m, const SingleModeParams& mode, int max_order, double t,
                                   const std::vector<double>& lambdas, const QuadratureSpec& q, int fock_cutoff,
                                   VanishingRule suppression = VanishingRule::none);

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace tclgen
