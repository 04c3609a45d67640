#pragma once

#include <cmath>
#include <random>

#include "tclgen/linalg.hpp"

namespace th {

using tclgen::Complex;
using tclgen::Operator;

inline Operator sx() { Operator m(2, 2); m << 0, 1, 1, 0; return m; }
inline Operator sy() { Operator m(2, 2); m << 0, Complex(0, -1), Complex(0, 1), 0; return m; }
inline Operator sz() { Operator m(2, 2); m << 1, 0, 0, -1; return m; }
inline Operator sminus() { Operator m(2, 2); m << 0, 0, 1, 0; return m; }  // |1><0|, |0> excited
inline Operator id(int d) { return Operator::Identity(d, d); }

inline Operator random_matrix(std::mt19937_64& rng, int d) {
  std::normal_distribution<double> n;
  Operator m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = Complex(n(rng), n(rng));
  return m;
}

inline Operator random_hermitian(std::mt19937_64& rng, int d) {
  const Operator m = random_matrix(rng, d);
  return 0.5 * (m + m.adjoint());
}

// Thermal expectation <B_t1 ... B_tn> of B = g (a + a^dag) by truncated Fock
// space, in the interaction picture of Omega a^dag a.
inline Complex fock_moment(double g, double omega, double nbar, const std::vector<double>& times, int cutoff = 60) {
  const int n = cutoff + 1;
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(n, n);
  for (int k = 1; k < n; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(n, n);
  double z = 0.0;
  for (int k = 0; k < n; ++k) {
    const double p = (nbar == 0.0) ? (k == 0 ? 1.0 : 0.0) : std::pow(nbar / (1.0 + nbar), k) / (1.0 + nbar);
    rho(k, k) = p;
    z += p;
  }
  rho /= z;
  Eigen::MatrixXcd prod = Eigen::MatrixXcd::Identity(n, n);
  for (double t : times) {
    Eigen::MatrixXcd at = a;
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) at(r, c) *= std::exp(Complex(0, omega * t * (r - c)));
    prod = prod * (g * (at + at.adjoint()));
  }
  return (prod * rho).trace();
}

}  // namespace th
