#include "tclgen/linalg.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace tclgen {

using Eigen::Index;

namespace {

Index checked_sqrt(Index n) {
  const auto d = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(n))));
  if (d * d != n) throw std::invalid_argument("length " + std::to_string(n) + " is not a perfect square");
  return d;
}

// R((i + d*k), (l + d*j)) = S((i + d*j), (k + d*l)); exchanges the superoperator
// matrix with its "left (x) right" realignment: realign(superop_from_lr(L, R))
// = vec(L) vec(R)^T.
Eigen::MatrixXcd realign(const Eigen::MatrixXcd& s, Index d) {
  Eigen::MatrixXcd r(d * d, d * d);
  for (Index j = 0; j < d; ++j)
    for (Index i = 0; i < d; ++i)
      for (Index l = 0; l < d; ++l)
        for (Index k = 0; k < d; ++k) r(i + d * k, l + d * j) = s(i + d * j, k + d * l);
  return r;
}

Eigen::MatrixXcd unrealign(const Eigen::MatrixXcd& r, Index d) {
  Eigen::MatrixXcd s(d * d, d * d);
  for (Index j = 0; j < d; ++j)
    for (Index i = 0; i < d; ++i)
      for (Index l = 0; l < d; ++l)
        for (Index k = 0; k < d; ++k) s(i + d * j, k + d * l) = r(i + d * k, l + d * j);
  return s;
}

Eigen::MatrixXcd basis_columns(const std::vector<Operator>& basis, Index d) {
  Eigen::MatrixXcd p(d * d, static_cast<Index>(basis.size()));
  for (std::size_t a = 0; a < basis.size(); ++a) {
    if (basis[a].rows() != d || basis[a].cols() != d) throw std::invalid_argument("basis element has wrong dimension");
    p.col(static_cast<Index>(a)) = vectorize(basis[a]);
  }
  return p;
}

}  // namespace

SuperOperator::SuperOperator(Index dim) : dim_(dim), matrix_(Eigen::MatrixXcd::Zero(dim * dim, dim * dim)) {}

SuperOperator::SuperOperator(Eigen::MatrixXcd matrix) : matrix_(std::move(matrix)) {
  if (matrix_.rows() != matrix_.cols()) throw std::invalid_argument("superoperator matrix must be square");
  dim_ = checked_sqrt(matrix_.rows());
}

SuperOperator SuperOperator::zero(Index dim) { return SuperOperator(dim); }

SuperOperator SuperOperator::identity(Index dim) {
  SuperOperator s(dim);
  s.matrix_.setIdentity();
  return s;
}

Operator SuperOperator::apply(const Operator& x) const {
  if (x.rows() != dim_ || x.cols() != dim_) throw std::invalid_argument("operator dimension does not match superoperator");
  return devectorize(matrix_ * vectorize(x));
}

SuperOperator& SuperOperator::operator+=(const SuperOperator& other) {
  if (other.dim_ != dim_) throw std::invalid_argument("superoperator dimension mismatch");
  matrix_ += other.matrix_;
  return *this;
}

SuperOperator& SuperOperator::operator-=(const SuperOperator& other) {
  if (other.dim_ != dim_) throw std::invalid_argument("superoperator dimension mismatch");
  matrix_ -= other.matrix_;
  return *this;
}

SuperOperator& SuperOperator::operator*=(Complex factor) {
  matrix_ *= factor;
  return *this;
}

SuperOperator operator*(const SuperOperator& a, const SuperOperator& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("superoperator dimension mismatch");
  return SuperOperator(Eigen::MatrixXcd(a.matrix() * b.matrix()));
}

Vector vectorize(const Operator& x) {
  return Eigen::Map<const Vector>(x.data(), x.size());
}

Operator devectorize(const Vector& v) {
  const Index d = checked_sqrt(v.size());
  return Eigen::Map<const Operator>(v.data(), d, d);
}

SuperOperator superop_from_lr(const Operator& left, const Operator& right) {
  if (left.rows() != left.cols() || right.rows() != right.cols() || left.rows() != right.rows())
    throw std::invalid_argument("superop_from_lr: operands must be square with equal dimensions");
  const Index d = left.rows();
  Eigen::MatrixXcd m(d * d, d * d);
  // (right^T (x) left)
  for (Index j = 0; j < d; ++j)
    for (Index l = 0; l < d; ++l) m.block(j * d, l * d, d, d) = right(l, j) * left;
  return SuperOperator(std::move(m));
}

std::vector<Operator> orthonormal_traceless_basis(int d) {
  if (d < 2) throw std::invalid_argument("orthonormal_traceless_basis requires d >= 2");
  const double r2 = 1.0 / std::sqrt(2.0);
  const Complex i1(0.0, 1.0);
  std::vector<Operator> out;
  out.reserve(static_cast<std::size_t>(d * d - 1));
  for (int j = 0; j < d; ++j)
    for (int k = j + 1; k < d; ++k) {
      Operator g = Operator::Zero(d, d);
      g(j, k) = r2;
      g(k, j) = r2;
      out.push_back(std::move(g));
    }
  for (int j = 0; j < d; ++j)
    for (int k = j + 1; k < d; ++k) {
      Operator g = Operator::Zero(d, d);
      g(j, k) = -i1 * r2;
      g(k, j) = i1 * r2;
      out.push_back(std::move(g));
    }
  for (int l = 1; l < d; ++l) {
    Operator g = Operator::Zero(d, d);
    const double f = 1.0 / std::sqrt(static_cast<double>(l * (l + 1)));
    for (int m = 0; m < l; ++m) g(m, m) = f;
    g(l, l) = -f * l;
    out.push_back(std::move(g));
  }
  return out;
}

std::vector<Operator> canonical_operator_basis(int d) {
  std::vector<Operator> out;
  out.reserve(static_cast<std::size_t>(d * d));
  out.push_back(Operator::Identity(d, d) / std::sqrt(static_cast<double>(d)));
  for (auto& g : orthonormal_traceless_basis(d)) out.push_back(std::move(g));
  return out;
}

Eigen::MatrixXcd superop_coefficients(const SuperOperator& s, const std::vector<Operator>& basis) {
  const Index d = s.dim();
  const Eigen::MatrixXcd p = basis_columns(basis, d);
  const Eigen::MatrixXcd gram = p.adjoint() * p;
  const double defect = max_abs(gram - Eigen::MatrixXcd::Identity(gram.rows(), gram.cols()));
  if (defect > 1e-10) throw std::invalid_argument("superop_coefficients: basis is not orthonormal (Gram defect " + std::to_string(defect) + ")");
  return p.adjoint() * realign(s.matrix(), d) * p.conjugate();
}

SuperOperator superop_from_coefficients(const Eigen::MatrixXcd& c, const std::vector<Operator>& basis) {
  if (basis.empty()) throw std::invalid_argument("empty basis");
  const Index d = basis.front().rows();
  const Eigen::MatrixXcd p = basis_columns(basis, d);
  if (c.rows() != p.cols() || c.cols() != p.cols()) throw std::invalid_argument("coefficient matrix does not match basis size");
  return SuperOperator(unrealign(p * c * p.transpose(), d));
}

double max_abs(const Eigen::MatrixXcd& x) { return x.size() == 0 ? 0.0 : x.cwiseAbs().maxCoeff(); }

double hermiticity_defect(const Eigen::MatrixXcd& x) { return max_abs(x - x.adjoint()); }

double scaled_tolerance(const Eigen::MatrixXcd& x, double tol) { return tol * std::max(1.0, max_abs(x)); }

bool is_hermitian(const Eigen::MatrixXcd& x, double tol) {
  return x.rows() == x.cols() && hermiticity_defect(x) <= tol;
}

Operator hermitian_part(const Operator& x) { return 0.5 * (x + x.adjoint()); }

Operator antihermitian_part(const Operator& x) { return (x - x.adjoint()) / Complex(0.0, 2.0); }

Operator traceless_part(const Operator& x) {
  const Index d = x.rows();
  return x - (x.trace() / static_cast<double>(d)) * Operator::Identity(d, d);
}

double trace_annihilation_defect(const SuperOperator& s) {
  const Index d = s.dim();
  double worst = 0.0;
  for (Index col = 0; col < d * d; ++col) {
    Complex tr = 0.0;
    for (Index i = 0; i < d; ++i) tr += s.matrix()(i + d * i, col);
    worst = std::max(worst, std::abs(tr));
  }
  return worst;
}

double hermiticity_preservation_defect(const SuperOperator& s) {
  const Index d = s.dim();
  double worst = 0.0;
  for (Index j = 0; j < d; ++j)
    for (Index i = 0; i < d; ++i) {
      Operator e = Operator::Zero(d, d);
      e(i, j) = 1.0;
      const Operator lhs = s.apply(e.adjoint());
      const Operator rhs = s.apply(e).adjoint();
      worst = std::max(worst, max_abs(lhs - rhs));
    }
  return worst;
}

}  // namespace tclgen
