#pragma once

// System side of the product coupling H = H_S + H_E + lambda * A (x) B.

#include <functional>
#include <span>

#include "tclgen/linalg.hpp"

namespace tclgen {

class SystemModel {
 public:
  using CouplingPath = std::function<Operator(double)>;

  // H_S and A must be Hermitian (to 1e-12, scaled) with equal dimensions.
  SystemModel(Operator hamiltonian, Operator coupling, double lambda);

  // Interaction-picture coupling supplied directly as t -> A_t. The callable
  // must return Hermitian operators of dimension dim and be safe to call
  // concurrently.
  SystemModel(int dim, CouplingPath coupling_path, double lambda);

  int dim() const { return dim_; }
  double lambda() const { return lambda_; }
  const Operator& hamiltonian() const { return hamiltonian_; }
  const Operator& coupling() const { return coupling_; }

  // A_t = exp(i H_S t) A exp(-i H_S t).
  Operator interaction_picture_A(double t) const;

  // exp(-i H_S t).
  Operator free_propagator(double t) const;

  SystemModel with_lambda(double lambda) const;

  // True when built from a coupling callable; hamiltonian() is then zero.
  bool has_coupling_path() const { return static_cast<bool>(path_); }

 private:
  int dim_ = 0;
  double lambda_ = 0.0;
  Operator hamiltonian_;
  Operator coupling_;
  CouplingPath path_;
  // Eigendecomposition of H_S; coupling_eigen_ is A in that eigenbasis.
  Eigen::VectorXd energies_;
  Operator eigvecs_;
  Operator coupling_eigen_;
};

// A_{t1} A_{t2} ... A_{tk}, or A_{tk} ... A_{t1} when dagger is set.
// An empty list yields the identity.
Operator ordered_product(const SystemModel& m, std::span<const double> times, bool dagger);

// Tr(X) / d.
Complex maximally_mixed_average(const Operator& x);

}  // namespace tclgen
