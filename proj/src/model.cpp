#include "tclgen/model.hpp"

#include <stdexcept>

namespace tclgen {

SystemModel::SystemModel(Operator hamiltonian, Operator coupling, double lambda)
    : dim_(static_cast<int>(hamiltonian.rows())),
      lambda_(lambda),
      hamiltonian_(std::move(hamiltonian)),
      coupling_(std::move(coupling)) {
  if (hamiltonian_.rows() != hamiltonian_.cols() || hamiltonian_.rows() < 1)
    throw std::invalid_argument("system Hamiltonian must be a non-empty square matrix");
  if (coupling_.rows() != hamiltonian_.rows() || coupling_.cols() != hamiltonian_.cols())
    throw std::invalid_argument("coupling operator dimension does not match the Hamiltonian");
  if (!is_hermitian(hamiltonian_, scaled_tolerance(hamiltonian_, 1e-12)))
    throw std::invalid_argument("system Hamiltonian is not Hermitian");
  if (!is_hermitian(coupling_, scaled_tolerance(coupling_, 1e-12)))
    throw std::invalid_argument("coupling operator is not Hermitian");
  if (!(lambda_ >= 0.0)) throw std::invalid_argument("coupling strength lambda must be >= 0");
  Eigen::SelfAdjointEigenSolver<Operator> es(hermitian_part(hamiltonian_));
  energies_ = es.eigenvalues();
  eigvecs_ = es.eigenvectors();
  coupling_eigen_ = eigvecs_.adjoint() * coupling_ * eigvecs_;
}

SystemModel::SystemModel(int dim, CouplingPath coupling_path, double lambda)
    : dim_(dim),
      lambda_(lambda),
      hamiltonian_(Operator::Zero(dim, dim)),
      coupling_(Operator::Zero(dim, dim)),
      path_(std::move(coupling_path)) {
  if (dim < 1) throw std::invalid_argument("dimension must be positive");
  if (!path_) throw std::invalid_argument("coupling path callable is empty");
  if (!(lambda_ >= 0.0)) throw std::invalid_argument("coupling strength lambda must be >= 0");
  coupling_ = path_(0.0);
  if (coupling_.rows() != dim || coupling_.cols() != dim)
    throw std::invalid_argument("coupling path returned an operator of the wrong dimension");
}

Operator SystemModel::interaction_picture_A(double t) const {
  if (path_) return path_(t);
  Operator rotated(dim_, dim_);
  for (int n = 0; n < dim_; ++n)
    for (int m = 0; m < dim_; ++m)
      rotated(m, n) = coupling_eigen_(m, n) * std::polar(1.0, (energies_(m) - energies_(n)) * t);
  return eigvecs_ * rotated * eigvecs_.adjoint();
}

Operator SystemModel::free_propagator(double t) const {
  if (path_) return Operator::Identity(dim_, dim_);
  Eigen::VectorXcd phases(dim_);
  for (int m = 0; m < dim_; ++m) phases(m) = std::polar(1.0, -energies_(m) * t);
  return eigvecs_ * phases.asDiagonal() * eigvecs_.adjoint();
}

SystemModel SystemModel::with_lambda(double lambda) const {
  SystemModel copy = *this;
  if (!(lambda >= 0.0)) throw std::invalid_argument("coupling strength lambda must be >= 0");
  copy.lambda_ = lambda;
  return copy;
}

Operator ordered_product(const SystemModel& m, std::span<const double> times, bool dagger) {
  Operator out = Operator::Identity(m.dim(), m.dim());
  const std::size_t k = times.size();
  for (std::size_t i = 0; i < k; ++i) out = out * m.interaction_picture_A(times[dagger ? k - 1 - i : i]);
  return out;
}

Complex maximally_mixed_average(const Operator& x) { return x.trace() / static_cast<double>(x.rows()); }

}  // namespace tclgen
