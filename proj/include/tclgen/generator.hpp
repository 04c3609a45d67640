#pragma once

// Perturbative TCL generator, its canonical (minimal dissipation) form and
// the effective Hamiltonian.

#include <utility>
#include <vector>

#include "tclgen/bath.hpp"
#include "tclgen/cumulant.hpp"
#include "tclgen/model.hpp"
#include "tclgen/quadrature.hpp"

namespace tclgen {

constexpr int max_generator_order = 4;

// L_n(t) = i^n sum_k (-1)^k int D(taus, ss) A(taus) . A^dag(ss).
SuperOperator build_Ln(const SystemModel& m, const BathModel& b, int n, double t, const QuadratureSpec& q,
                       VanishingRule suppression = VanishingRule::none);

// All L_1..L_N at one time.
std::vector<SuperOperator> build_orders(const SystemModel& m, const BathModel& b, int max_order, double t,
                                        const QuadratureSpec& q, VanishingRule suppression = VanishingRule::none);

// sum_{n <= N} lambda^n L_n.
SuperOperator build_generator(const SystemModel& m, const BathModel& b, int max_order, double t,
                              const QuadratureSpec& q, VanishingRule suppression = VanishingRule::none);

struct CanonicalForm {
  Operator K;                  // Hermitian, traceless
  Eigen::MatrixXcd gamma;      // (d^2-1) x (d^2-1), over basis
  std::vector<Operator> basis; // traceless orthonormal G_1..G_{d^2-1}
  Eigen::VectorXd rates;       // eigenvalues of gamma, descending
};

// Throws NumericalError when S fails trace annihilation or Hermiticity
// preservation by more than tol (scaled by max(1, max|S|)).
CanonicalForm canonical_decompose(const SuperOperator& s, double tol = 1e-8);

// -i[K, .] + sum_ij gamma_ij (G_i . G_j^dag - 1/2 {G_j^dag G_i, .}).
SuperOperator canonical_reassemble(const CanonicalForm& c);

// K_n from K_n^k = (-1)^k int D <A^dag(ss)>_{1/d} A(taus), traceless.
Operator effective_H_direct(const SystemModel& m, const BathModel& b, int n, double t, const QuadratureSpec& q,
                            VanishingRule suppression = VanishingRule::none);

// Order-4 closed form. short_form keeps only the f.X - g.Y integrand, which
// drops the k = 2 term pinned at s_1 (h.Z, with Z = <A_s A_t> A_t1 A_t2 and
// t1, t2 unordered); it is exact only when the A_t commute.
enum class FixtureForm { completed, short_form };

// K_n from the closed forms at orders 1-4, written out independently of the
// cumulant engine. Order 4 requires a mean-zero bath.
Operator effective_H_fixture(const SystemModel& m, const BathModel& b, int n, double t, const QuadratureSpec& q,
                             FixtureForm form = FixtureForm::completed);

struct RateSample {
  double t;
  Eigen::VectorXd rates;
};

std::vector<RateSample> canonical_rates_over_time(const SystemModel& m, const BathModel& b, int max_order,
                                                  const std::vector<double>& grid, const QuadratureSpec& q,
                                                  VanishingRule suppression = VanishingRule::none);

// Integral of fn(v) over [0, t]^dim. The cube is split into dim! ordered
// sectors so fn may contain step functions of differences of its arguments.
Operator hypercube_integral(int dim, double t, const QuadratureSpec& q,
                            const std::function<Operator(std::span<const double>)>& fn, int out_dim);

}  // namespace tclgen
