#include "tclgen/generator.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

#include "integrator.hpp"
#include "tclgen/errors.hpp"

namespace tclgen {

namespace {

void check_order(int n) {
  if (n < 1 || n > max_generator_order)
    throw std::invalid_argument("generator order " + std::to_string(n) + " outside 1.." +
                                std::to_string(max_generator_order));
}

void check_time(double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw std::invalid_argument("time must be finite and >= 0");
}

Complex i_pow(int n) {
  static const Complex p[4] = {1.0, Complex(0, 1), -1.0, Complex(0, -1)};
  return p[n % 4];
}

// Terms of D(n, k) split by pinned variable.
struct PinGroups {
  std::vector<detail::SlotIntegrand> tau;
  std::vector<detail::SlotIntegrand> s;
};

PinGroups group_by_pin(const std::vector<CumulantTerm>& terms) {
  PinGroups g;
  for (const auto& term : terms) {
    if (term.dotted().tau.contains(1)) g.tau.push_back({Complex(1.0), &term});
    if (term.dotted().s.contains(1)) g.s.push_back({Complex(1.0), &term});
  }
  return g;
}

template <class Sink>
Sink integrate_order(const detail::NodeCache& cache, const BathModel& b, int n, int k,
                     const std::vector<CumulantTerm>& terms, const Sink& proto) {
  const PinGroups g = group_by_pin(terms);
  Sink acc = proto;
  if (!g.tau.empty())
    acc.merge(detail::integrate_slots(cache, b, k, n - k, 0, std::span<const detail::SlotIntegrand>(g.tau), proto));
  if (!g.s.empty())
    acc.merge(detail::integrate_slots(cache, b, k, n - k, k, std::span<const detail::SlotIntegrand>(g.s), proto));
  return acc;
}

}  // namespace

SuperOperator build_Ln(const SystemModel& m, const BathModel& b, int n, double t, const QuadratureSpec& q,
                       VanishingRule suppression) {
  check_order(n);
  check_time(t);
  q.validate();
  const int d = m.dim();
  const detail::NodeCache cache(m, t, n - 1, q.nodes_per_dimension);
  Eigen::MatrixXcd total = Eigen::MatrixXcd::Zero(d * d, d * d);
  for (int k = 0; k <= n; ++k) {
    const auto terms = suppress_vanishing(cumulant_terms(n, k), suppression);
    if (terms.empty()) continue;
    const auto sink = integrate_order(cache, b, n, k, terms, detail::SuperopSink(d));
    total += (i_pow(n) * (k % 2 ? -1.0 : 1.0)) * sink.acc;
  }
  return SuperOperator(std::move(total));
}

std::vector<SuperOperator> build_orders(const SystemModel& m, const BathModel& b, int max_order, double t,
                                        const QuadratureSpec& q, VanishingRule suppression) {
  if (max_order < 1 || max_order > max_generator_order) check_order(max_order);
  std::vector<SuperOperator> out;
  for (int n = 1; n <= max_order; ++n) out.push_back(build_Ln(m, b, n, t, q, suppression));
  return out;
}

SuperOperator build_generator(const SystemModel& m, const BathModel& b, int max_order, double t,
                              const QuadratureSpec& q, VanishingRule suppression) {
  check_order(max_order);
  SuperOperator total = SuperOperator::zero(m.dim());
  if (m.lambda() == 0.0) return total;
  double lam = 1.0;
  for (int n = 1; n <= max_order; ++n) {
    lam *= m.lambda();
    total += lam * build_Ln(m, b, n, t, q, suppression);
  }
  return total;
}

CanonicalForm canonical_decompose(const SuperOperator& s, double tol) {
  const int d = static_cast<int>(s.dim());
  if (d < 2) throw std::invalid_argument("canonical_decompose: dimension must be >= 2");
  const double scaled = scaled_tolerance(s.matrix(), tol);
  const double tr = trace_annihilation_defect(s);
  if (tr > scaled)
    throw NumericalError("trace annihilation", "generator changes the trace (defect " + std::to_string(tr) + ")");
  const double he = hermiticity_preservation_defect(s);
  if (he > scaled)
    throw NumericalError("hermiticity preservation",
                         "generator does not preserve Hermiticity (defect " + std::to_string(he) + ")");
  const auto full = canonical_operator_basis(d);
  const Eigen::MatrixXcd c = superop_coefficients(s, full);
  const int n = d * d;
  CanonicalForm out;
  out.basis.assign(full.begin() + 1, full.end());
  out.gamma = c.bottomRightCorner(n - 1, n - 1);
  Operator f = (c(0, 0) / (2.0 * d)) * Operator::Identity(d, d);
  for (int a = 1; a < n; ++a) f += (c(a, 0) / std::sqrt(static_cast<double>(d))) * full[static_cast<std::size_t>(a)];
  out.K = traceless_part((f.adjoint() - f) / Complex(0.0, 2.0));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (out.gamma + out.gamma.adjoint()), Eigen::EigenvaluesOnly);
  out.rates = es.eigenvalues().reverse();
  return out;
}

SuperOperator canonical_reassemble(const CanonicalForm& c) {
  const int d = static_cast<int>(c.K.rows());
  const Operator id = Operator::Identity(d, d);
  SuperOperator s = Complex(0, -1) * (superop_from_lr(c.K, id) - superop_from_lr(id, c.K));
  for (std::size_t i = 0; i < c.basis.size(); ++i)
    for (std::size_t j = 0; j < c.basis.size(); ++j) {
      const Complex g = c.gamma(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (g == Complex(0.0)) continue;
      const Operator& gi = c.basis[i];
      const Operator gj = c.basis[j].adjoint();
      const Operator prod = gj * gi;
      s += g * (superop_from_lr(gi, gj) - 0.5 * (superop_from_lr(prod, id) + superop_from_lr(id, prod)));
    }
  return s;
}

Operator effective_H_direct(const SystemModel& m, const BathModel& b, int n, double t, const QuadratureSpec& q,
                            VanishingRule suppression) {
  check_order(n);
  check_time(t);
  q.validate();
  const int d = m.dim();
  const detail::NodeCache cache(m, t, n - 1, q.nodes_per_dimension);
  Operator sum = Operator::Zero(d, d);
  for (int k = 0; k <= n; ++k) {
    const auto terms = suppress_vanishing(cumulant_terms(n, k), suppression);
    if (terms.empty()) continue;
    const auto sink = integrate_order(cache, b, n, k, terms, detail::LeftAverageSink(d));
    sum += (k % 2 ? -1.0 : 1.0) * sink.acc;
  }
  const double sign = ((n / 2) % 2 == 1) ? 1.0 : -1.0;  // (-1)^(floor(n/2)+1)
  const Operator k_n = (n % 2 == 0) ? antihermitian_part(sum) : hermitian_part(sum);
  return traceless_part(sign * k_n);
}

Operator hypercube_integral(int dim, double t, const QuadratureSpec& q,
                            const std::function<Operator(std::span<const double>)>& fn, int out_dim) {
  q.validate();
  const SimplexRule rule = simplex_rule(dim, q.nodes_per_dimension, t);
  std::vector<std::vector<int>> perms;
  std::vector<int> perm(static_cast<std::size_t>(dim));
  std::iota(perm.begin(), perm.end(), 0);
  do perms.push_back(perm);
  while (std::next_permutation(perm.begin(), perm.end()));
  const std::size_t firsts = dim == 0 ? 1 : static_cast<std::size_t>(q.nodes_per_dimension);
  const std::size_t per_first = rule.size() / firsts;
  const std::size_t chunks = perms.size() * firsts;
  std::vector<Operator> partial(chunks, Operator::Zero(out_dim, out_dim));
  detail::parallel_chunks(chunks, [&](std::size_t chunk) {
    const auto& pm = perms[chunk / firsts];
    const std::size_t first = chunk % firsts;
    std::vector<double> v(static_cast<std::size_t>(dim));
    for (std::size_t node = first * per_first; node < (first + 1) * per_first; ++node) {
      const double* c = rule.node(node);
      for (int j = 0; j < dim; ++j) v[static_cast<std::size_t>(pm[static_cast<std::size_t>(j)])] = c[j];
      partial[chunk] += rule.weights[node] * fn(v);
    }
  });
  Operator total = Operator::Zero(out_dim, out_dim);
  for (const auto& p : partial) total += p;
  return total;
}

Operator effective_H_fixture(const SystemModel& m, const BathModel& b, int n, double t, const QuadratureSpec& q,
                             FixtureForm form) {
  check_order(n);
  check_time(t);
  const int d = m.dim();
  auto avg = [](const Operator& x) { return maximally_mixed_average(x); };
  auto B = [&](std::initializer_list<double> ts) { return n_point(b, std::vector<double>(ts)); };
  auto theta = [](double a, double c) { return a >= c ? 1.0 : 0.0; };
  const Operator At = m.interaction_picture_A(t);
  const Operator id = Operator::Identity(d, d);

  if (n == 1) return traceless_part(b.mean(t).real() * (At - avg(At) * id));

  if (n == 2) {
    const Operator z = hypercube_integral(1, t, q, [&](std::span<const double> v) -> Operator {
      const double t1 = v[0];
      const Operator A1 = m.interaction_picture_A(t1);
      const Complex c = B({t, t1}) - b.mean(t) * b.mean(t1);
      return c * (At * A1 - avg(At * A1) * id + At * avg(A1) - A1 * avg(At));
    }, d);
    return traceless_part(antihermitian_part(z));
  }

  if (n == 3) {
    const Operator z = hypercube_integral(2, t, q, [&](std::span<const double> v) -> Operator {
      const double t1 = v[0], t2 = v[1];
      const Operator A1 = m.interaction_picture_A(t1), A2 = m.interaction_picture_A(t2);
      const Complex mt = b.mean(t), m1 = b.mean(t1), m2 = b.mean(t2);
      const double th = theta(t1, t2);
      const Complex f = B({t, t1, t2}) * th - mt * B({t1, t2}) * th - B({t, t1}) * m2 + mt * m1 * m2;
      const Complex g = B({t1, t, t2}) - mt * B({t1, t2}) - B({t1, t}) * m2 - B({t, t2}) * m1 + 2.0 * mt * m1 * m2;
      const Operator X = At * A1 * A2 - avg(At * A1 * A2) * id - A1 * A2 * avg(At) + At * avg(A1 * A2);
      const Operator Y = At * A2 * avg(A1) - A1 * avg(At * A2);
      return f * X - g * Y;
    }, d);
    return traceless_part(-hermitian_part(z));
  }

  if (!b.mean_is_zero()) throw std::invalid_argument("fourth-order closed form requires a mean-zero bath");
  const Operator z = hypercube_integral(3, t, q, [&](std::span<const double> v) -> Operator {
    const double t1 = v[0], t2 = v[1], t3 = v[2];
    const Operator A1 = m.interaction_picture_A(t1), A2 = m.interaction_picture_A(t2),
                   A3 = m.interaction_picture_A(t3);
    const double th123 = theta(t1, t2) * theta(t2, t3), th23 = theta(t2, t3);
    const Complex f = B({t, t1, t2, t3}) * th123 - B({t, t1}) * B({t2, t3}) * th23;
    const Complex g = B({t1, t, t2, t3}) * th23 - B({t1, t}) * B({t2, t3}) * th23 - B({t, t2}) * B({t1, t3});
    const Operator X = At * A1 * A2 * A3 - avg(At * A1 * A2 * A3) * id - A1 * A2 * A3 * avg(At) +
                       At * avg(A1 * A2 * A3);
    const Operator Y = At * A2 * A3 * avg(A1) - A1 * avg(At * A2 * A3);
    if (form == FixtureForm::short_form) return f * X - g * Y;
    const Complex h = B({t3, t, t1, t2}) * theta(t1, t2) - B({t, t1}) * B({t3, t2}) -
                      B({t3, t}) * B({t1, t2}) * theta(t1, t2);
    const Operator Z = avg(A3 * At) * A1 * A2;
    return f * X - g * Y + h * Z;
  }, d);
  return traceless_part(-antihermitian_part(z));
}

std::vector<RateSample> canonical_rates_over_time(const SystemModel& m, const BathModel& b, int max_order,
                                                  const std::vector<double>& grid, const QuadratureSpec& q,
                                                  VanishingRule suppression) {
  std::vector<RateSample> out;
  out.reserve(grid.size());
  for (double t : grid) out.push_back({t, canonical_decompose(build_generator(m, b, max_order, t, q, suppression)).rates});
  return out;
}

}  // namespace tclgen
