#pragma once

// Gauss-Legendre integration of pinned cumulant terms over [0, t]^(n-1).
//
// The hypercube is split into the (n-1)! sectors of a total order of the free
// variables. Each sector is the image of one descending simplex
// t > v_1 > ... > v_p > 0, discretized once with a collapsed (Duffy) tensor
// Gauss-Legendre rule and reused for every sector and every term. The
// time-ordering step functions are constant on a sector, so no node ever
// straddles a discontinuity, and identities that hold after relabeling the
// integration variables hold for the discrete sums to rounding.

#include <utility>
#include <vector>

#include "tclgen/bath.hpp"
#include "tclgen/cumulant.hpp"
#include "tclgen/model.hpp"

namespace tclgen {

struct QuadratureSpec {
  int nodes_per_dimension = 24;

  void validate() const;
};

struct GaussLegendre {
  std::vector<double> nodes;    // in (0, 1), ascending
  std::vector<double> weights;  // sum to 1
};

GaussLegendre gauss_legendre_unit(int n);

// Nodes of the descending simplex t > v_1 > ... > v_dim > 0, stored as
// consecutive dim-tuples. For dim = 0 there is one empty node of weight 1.
struct SimplexRule {
  int dim = 0;
  int nodes_per_dimension = 0;
  double t = 0.0;
  std::vector<double> coords;
  std::vector<double> weights;

  std::size_t size() const { return weights.size(); }
  const double* node(std::size_t i) const { return coords.data() + i * static_cast<std::size_t>(dim); }
};

SimplexRule simplex_rule(int dim, int nodes_per_dimension, double t);

// Highest supported number of free integration variables.
constexpr int max_free_dimensions = 4;

// Integral of eval_pinned(term) * superop_from_lr(A(taus), A^dag(ss)) over
// the free variables, without the i^n (-1)^k prefactor.
SuperOperator integrate_term(const PinnedTerm& term, const SystemModel& m, const BathModel& b, double t,
                             const QuadratureSpec& q);

// Frobenius norms of integrate_term for each node count.
std::vector<std::pair<int, double>> integral_convergence(const PinnedTerm& term, const SystemModel& m,
                                                         const BathModel& b, double t,
                                                         const std::vector<int>& node_counts);

// Worker threads used by the node loops. Results do not depend on it.
void set_thread_count(int threads);
int thread_count();

}  // namespace tclgen
