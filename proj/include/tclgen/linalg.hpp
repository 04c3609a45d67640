#pragma once

// Dense operator and superoperator algebra.
//
// Vectorization is column stacking throughout: component (i + d*j) of
// vec(X) is X(i, j). Under this convention vec(L X R) = (R^T (x) L) vec(X).

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace tclgen {

using Complex = std::complex<double>;
using Operator = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

class SuperOperator {
 public:
  SuperOperator() = default;
  explicit SuperOperator(Eigen::Index dim);
  explicit SuperOperator(Eigen::MatrixXcd matrix);

  static SuperOperator zero(Eigen::Index dim);
  static SuperOperator identity(Eigen::Index dim);

  Eigen::Index dim() const { return dim_; }
  const Eigen::MatrixXcd& matrix() const { return matrix_; }
  Eigen::MatrixXcd& matrix() { return matrix_; }

  Operator apply(const Operator& x) const;

  SuperOperator& operator+=(const SuperOperator& other);
  SuperOperator& operator-=(const SuperOperator& other);
  SuperOperator& operator*=(Complex factor);

  friend SuperOperator operator+(SuperOperator a, const SuperOperator& b) { return a += b; }
  friend SuperOperator operator-(SuperOperator a, const SuperOperator& b) { return a -= b; }
  friend SuperOperator operator*(Complex f, SuperOperator a) { return a *= f; }
  friend SuperOperator operator*(double f, SuperOperator a) { return a *= Complex(f, 0.0); }

  // Composition: (a * b)[X] = a[b[X]].
  friend SuperOperator operator*(const SuperOperator& a, const SuperOperator& b);

 private:
  Eigen::Index dim_ = 0;
  Eigen::MatrixXcd matrix_;
};

Vector vectorize(const Operator& x);
Operator devectorize(const Vector& v);

// Superoperator of X -> left * X * right.
SuperOperator superop_from_lr(const Operator& left, const Operator& right);

// Generalized Gell-Mann matrices: Hermitian, traceless, Tr(G_i G_j) = delta_ij.
// Order: symmetric pairs, antisymmetric pairs, diagonal; ascending indices.
std::vector<Operator> orthonormal_traceless_basis(int d);

// {1/sqrt(d), G_1, ..., G_{d^2-1}}: a complete orthonormal operator basis.
std::vector<Operator> canonical_operator_basis(int d);

// Coefficients c with S[X] = sum_ab c(a,b) G_a X G_b. The basis must be
// orthonormal under the Hilbert-Schmidt inner product.
Eigen::MatrixXcd superop_coefficients(const SuperOperator& s, const std::vector<Operator>& basis);

// Inverse of superop_coefficients.
SuperOperator superop_from_coefficients(const Eigen::MatrixXcd& c, const std::vector<Operator>& basis);

double max_abs(const Eigen::MatrixXcd& x);
double hermiticity_defect(const Eigen::MatrixXcd& x);
bool is_hermitian(const Eigen::MatrixXcd& x, double tol);
// Tolerance scaled by max(1, max|x|).
double scaled_tolerance(const Eigen::MatrixXcd& x, double tol);

Operator hermitian_part(const Operator& x);       // (X + X^dag) / 2
Operator antihermitian_part(const Operator& x);   // (X - X^dag) / 2i
Operator traceless_part(const Operator& x);

// |Tr S[X]| maximized over matrix units, i.e. max_j |sum_i S(i + d*i, j)|.
double trace_annihilation_defect(const SuperOperator& s);
// max over matrix units E of |S[E^dag] - S[E]^dag|.
double hermiticity_preservation_defect(const SuperOperator& s);

}  // namespace tclgen
