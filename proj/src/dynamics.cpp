#include "tclgen/dynamics.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <unsupported/Eigen/KroneckerProduct>

#include "integrator.hpp"
#include "tclgen/errors.hpp"

namespace tclgen {

namespace {

double check_uniform(const std::vector<double>& grid) {
  if (grid.empty()) throw std::invalid_argument("time grid is empty");
  if (grid.size() == 1) return 0.0;
  const double h = grid[1] - grid[0];
  if (!(h > 0.0)) throw std::invalid_argument("time grid must be ascending");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double step = grid[i] - grid[i - 1];
    if (std::abs(step - h) > 1e-9 * std::max(1.0, std::abs(grid[i]))) throw std::invalid_argument("time grid must be uniform");
  }
  return h;
}

double min_eigenvalue(const Operator& rho) {
  Eigen::SelfAdjointEigenSolver<Operator> es(hermitian_part(rho), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

Trajectory conjugate(const Trajectory& tr, const SystemModel& m, bool forward) {
  Trajectory out = tr;
  for (std::size_t i = 0; i < tr.times.size(); ++i) {
    const Operator u = m.free_propagator(forward ? tr.times[i] : -tr.times[i]);
    out.states[i] = u * tr.states[i] * u.adjoint();
  }
  return out;
}

}  // namespace

void check_density_matrix(const Operator& rho, double tol) {
  if (rho.rows() != rho.cols() || rho.rows() < 1) throw std::invalid_argument("density matrix must be square");
  if (!rho.allFinite()) throw std::invalid_argument("density matrix has non-finite entries");
  if (!is_hermitian(rho, tol)) throw std::invalid_argument("density matrix is not Hermitian");
  if (std::abs(rho.trace() - 1.0) > tol) throw std::invalid_argument("density matrix trace is not one");
  if (min_eigenvalue(rho) < -tol) throw std::invalid_argument("density matrix is not positive semidefinite");
}

std::vector<double> uniform_grid(double t_max, int steps) {
  if (steps < 1) throw std::invalid_argument("steps must be >= 1");
  if (!(t_max > 0.0) || !std::isfinite(t_max)) throw std::invalid_argument("t_max must be finite and > 0");
  std::vector<double> g(static_cast<std::size_t>(steps) + 1);
  for (int i = 0; i <= steps; ++i) g[static_cast<std::size_t>(i)] = t_max * i / steps;
  return g;
}

Trajectory propagate_sampled(const std::vector<SuperOperator>& gens, const Operator& rho0,
                             const std::vector<double>& grid) {
  check_density_matrix(rho0);
  const double h = check_uniform(grid);
  if (gens.size() != 2 * grid.size() - 1) throw std::invalid_argument("propagate: need generators at grid points and midpoints");
  Trajectory tr;
  tr.times = grid;
  Vector y = vectorize(rho0);
  tr.states.push_back(rho0);
  tr.min_eigenvalues.push_back(min_eigenvalue(rho0));
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    const Eigen::MatrixXcd& l0 = gens[2 * i].matrix();
    const Eigen::MatrixXcd& lh = gens[2 * i + 1].matrix();
    const Eigen::MatrixXcd& l1 = gens[2 * i + 2].matrix();
    const Vector k1 = l0 * y;
    const Vector k2 = lh * (y + 0.5 * h * k1);
    const Vector k3 = lh * (y + 0.5 * h * k2);
    const Vector k4 = l1 * (y + h * k3);
    y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    tr.states.push_back(devectorize(y));
    tr.min_eigenvalues.push_back(min_eigenvalue(tr.states.back()));
  }
  return tr;
}

Trajectory propagate(const GeneratorFn& gen, const Operator& rho0, const std::vector<double>& grid) {
  const double h = check_uniform(grid);
  std::vector<SuperOperator> gens;
  gens.reserve(2 * grid.size() - 1);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    gens.push_back(gen(grid[i]));
    if (i + 1 < grid.size()) gens.push_back(gen(grid[i] + 0.5 * h));
  }
  return propagate_sampled(gens, rho0, grid);
}

Trajectory to_schroedinger(const Trajectory& tr, const SystemModel& m) {
  if (tr.picture == Picture::schroedinger) return tr;
  Trajectory out = conjugate(tr, m, true);
  out.picture = Picture::schroedinger;
  return out;
}

Trajectory to_interaction(const Trajectory& tr, const SystemModel& m) {
  if (tr.picture == Picture::interaction) return tr;
  Trajectory out = conjugate(tr, m, false);
  out.picture = Picture::interaction;
  return out;
}

ExactMapGrid exact_map_single_mode(const SystemModel& m, const SingleModeParams& mode, int fock_cutoff,
                                   const std::vector<double>& grid, Picture picture) {
  if (fock_cutoff < 1) throw std::invalid_argument("fock cutoff must be >= 1");
  if (m.has_coupling_path()) throw std::invalid_argument("exact map needs a model with explicit H_S and A");
  if (mode.nbar < 0.0) throw std::invalid_argument("nbar must be >= 0");
  const double ratio = mode.nbar / (1.0 + mode.nbar);
  const double tail = std::pow(ratio, fock_cutoff + 1);
  if (tail > 1e-10) {
    const int suggested = static_cast<int>(std::ceil(std::log(1e-10) / std::log(ratio)));
    throw NumericalError("fock truncation", "thermal occupation beyond cutoff is " + std::to_string(tail) +
                                                "; use a cutoff of at least " + std::to_string(suggested));
  }
  for (double t : grid)
    if (!std::isfinite(t)) throw std::invalid_argument("time grid has non-finite entries");

  const int d = m.dim();
  const int nf = fock_cutoff + 1;
  const int dim = d * nf;
  Eigen::MatrixXcd adag_a = Eigen::MatrixXcd::Zero(nf, nf), x = Eigen::MatrixXcd::Zero(nf, nf);
  for (int n = 0; n < nf; ++n) adag_a(n, n) = n;
  for (int n = 1; n < nf; ++n) x(n - 1, n) = x(n, n - 1) = std::sqrt(static_cast<double>(n));
  const Operator idf = Operator::Identity(nf, nf), ids = Operator::Identity(d, d);
  const Eigen::MatrixXcd h = Eigen::kroneckerProduct(m.hamiltonian(), idf).eval() +
                             mode.omega * Eigen::kroneckerProduct(ids, adag_a).eval() +
                             (m.lambda() * mode.g) * Eigen::kroneckerProduct(m.coupling(), x).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  const Eigen::MatrixXcd& v = es.eigenvectors();
  const Eigen::VectorXd& e = es.eigenvalues();

  std::vector<double> p(static_cast<std::size_t>(nf));
  double z = 0.0;
  for (int n = 0; n < nf; ++n) z += (p[static_cast<std::size_t>(n)] = std::pow(ratio, n));
  for (auto& w : p) w /= z;

  ExactMapGrid out;
  out.times = grid;
  out.picture = picture;
  for (double t : grid) {
    Eigen::VectorXcd ph(dim);
    for (int j = 0; j < dim; ++j) ph(j) = std::exp(Complex(0.0, -e(j) * t));
    const Eigen::MatrixXcd u = v * ph.asDiagonal() * v.adjoint();
    const Eigen::MatrixXcd du = Complex(0.0, -1.0) * (h * u);
    SuperOperator phi = SuperOperator::zero(d), dphi = SuperOperator::zero(d);
    double edge = 0.0;
    for (int n = 0; n < nf; ++n) {
      const double pn = p[static_cast<std::size_t>(n)];
      if (pn < 1e-300) continue;
      const double sp = std::sqrt(pn);
      for (int mm = 0; mm < nf; ++mm) {
        Operator k(d, d), dk(d, d);
        for (int i = 0; i < d; ++i)
          for (int j = 0; j < d; ++j) {
            k(i, j) = sp * u(i * nf + mm, j * nf + n);
            dk(i, j) = sp * du(i * nf + mm, j * nf + n);
          }
        phi += superop_from_lr(k, k.adjoint());
        dphi += superop_from_lr(dk, k.adjoint()) + superop_from_lr(k, dk.adjoint());
        if (mm == nf - 1) edge += (k * k.adjoint()).trace().real() / d;
      }
    }
    out.max_edge_population = std::max(out.max_edge_population, edge);
    if (picture == Picture::interaction) {
      const Operator us = m.free_propagator(t);
      const SuperOperator s = superop_from_lr(us.adjoint(), us);
      const Operator ih = Complex(0.0, 1.0) * m.hamiltonian();
      const SuperOperator ds = (superop_from_lr(ih, ids) - superop_from_lr(ids, ih)) * s;
      dphi = ds * phi + s * dphi;
      phi = s * phi;
    }
    out.maps.push_back(std::move(phi));
    out.derivatives.push_back(std::move(dphi));
  }
  return out;
}

namespace {

ExactGenerator compose_with_inverse(const ExactMapGrid& g, const std::vector<SuperOperator>& deriv,
                                    double max_condition) {
  ExactGenerator out;
  out.times = g.times;
  for (std::size_t i = 0; i < g.maps.size(); ++i) {
    const Eigen::MatrixXcd& phi = g.maps[i].matrix();
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(phi);
    const auto& sv = svd.singularValues();
    const double cond = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1) : INFINITY;
    out.condition_numbers.push_back(cond);
    if (!(cond <= max_condition))
      throw NumericalError("map invertibility", "dynamical map is near singular at t = " + std::to_string(g.times[i]) +
                                                    " (condition number " + std::to_string(cond) + ")");
    const Eigen::MatrixXcd lt = phi.transpose().partialPivLu().solve(deriv[i].matrix().transpose());
    out.generators.emplace_back(Eigen::MatrixXcd(lt.transpose()));
  }
  return out;
}

}  // namespace

ExactGenerator exact_tcl_from_map(const ExactMapGrid& g, double max_condition) {
  if (g.maps.size() < 5) throw std::invalid_argument("finite differences need at least five grid points");
  const double h = check_uniform(g.times);
  const std::size_t n = g.maps.size();
  auto f = [&](std::size_t i) -> const Eigen::MatrixXcd& { return g.maps[i].matrix(); };
  std::vector<SuperOperator> deriv;
  deriv.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Eigen::MatrixXcd dm;
    if (i >= 2 && i + 2 < n) {
      dm = -f(i + 2) + 8.0 * f(i + 1) - 8.0 * f(i - 1) + f(i - 2);
    } else if (i < 2) {
      const std::size_t b = 0;
      dm = (i == 0) ? Eigen::MatrixXcd(-25.0 * f(b) + 48.0 * f(b + 1) - 36.0 * f(b + 2) + 16.0 * f(b + 3) - 3.0 * f(b + 4))
                    : Eigen::MatrixXcd(-3.0 * f(b) - 10.0 * f(b + 1) + 18.0 * f(b + 2) - 6.0 * f(b + 3) + f(b + 4));
    } else {
      const std::size_t b = n - 1;
      dm = (i == b) ? Eigen::MatrixXcd(25.0 * f(b) - 48.0 * f(b - 1) + 36.0 * f(b - 2) - 16.0 * f(b - 3) + 3.0 * f(b - 4))
                    : Eigen::MatrixXcd(3.0 * f(b) + 10.0 * f(b - 1) - 18.0 * f(b - 2) + 6.0 * f(b - 3) - f(b - 4));
    }
    deriv.emplace_back(Eigen::MatrixXcd(dm / (12.0 * h)));
  }
  return compose_with_inverse(g, deriv, max_condition);
}

ExactGenerator exact_tcl_analytic(const ExactMapGrid& g, double max_condition) {
  if (g.derivatives.size() != g.maps.size()) throw std::invalid_argument("map grid carries no derivatives");
  return compose_with_inverse(g, g.derivatives, max_condition);
}

std::vector<DephasingSample> dephasing_oracle(const BathModel& b, double lambda, const std::vector<double>& grid,
                                              const QuadratureSpec& q, double a0, double a1) {
  if (!b.is_gaussian() || !b.mean_is_zero()) throw std::invalid_argument("dephasing oracle needs a mean-zero Gaussian bath");
  q.validate();
  std::vector<DephasingSample> out;
  for (double t : grid) {
    const SimplexRule r = simplex_rule(2, q.nodes_per_dimension, t);
    Complex s = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) s += r.weights[i] * b.two_point(r.node(i)[0], r.node(i)[1]);
    const double l2 = lambda * lambda;
    out.push_back({t, l2 * (a0 - a1) * (a0 - a1) * s.real(), l2 * (a0 * a0 - a1 * a1) * s.imag()});
  }
  return out;
}

SuperOperator map_moment(const SystemModel& m, const BathModel& b, int n, int k, double t, const QuadratureSpec& q) {
  if (n < 0 || n > max_free_dimensions || k < 0 || k > n) throw std::invalid_argument("map_moment: need 0 <= k <= n <= 4");
  if (!(t >= 0.0)) throw std::invalid_argument("map_moment: t must be >= 0");
  q.validate();
  if (n == 0) return SuperOperator::identity(m.dim());
  CumulantTerm term;
  term.coefficient = ((n - k) % 2) ? -1 : 1;
  term.blocks.push_back(BlockSpec{IndexRange::make(1, k), IndexRange::make(1, n - k), false});
  const detail::NodeCache cache(m, t, n, q.nodes_per_dimension);
  const detail::SlotIntegrand item{Complex(1.0), &term};
  const auto sink = detail::integrate_slots(cache, b, k, n - k, -1, std::span<const detail::SlotIntegrand>(&item, 1),
                                            detail::SuperopSink(m.dim()));
  return SuperOperator(sink.acc);
}

SuperOperator moment_map(const SystemModel& m, const BathModel& b, int max_order, double t, const QuadratureSpec& q) {
  SuperOperator out = SuperOperator::identity(m.dim());
  Complex f = 1.0;
  for (int n = 1; n <= max_order; ++n) {
    f *= Complex(0.0, -m.lambda());
    for (int k = 0; k <= n; ++k) out += f * map_moment(m, b, n, k, t, q);
  }
  return out;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("slope fit needs two or more points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw std::invalid_argument("slope fit needs positive values");
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

ConvergenceStudy convergence_study(const SystemModel& m, const SingleModeParams& mode, int max_order, double t,
                                   const std::vector<double>& lambdas, const QuadratureSpec& q, int fock_cutoff,
                                   VanishingRule suppression) {
  const BathModel b = BathModel::single_mode_thermal(mode.g, mode.omega, mode.nbar);
  const auto orders = build_orders(m, b, max_order, t, q, suppression);
  ConvergenceStudy out;
  std::vector<double> xs, ys;
  for (double lam : lambdas) {
    const SystemModel ml = m.with_lambda(lam);
    const auto g = exact_map_single_mode(ml, mode, fock_cutoff, {t});
    const auto ex = exact_tcl_analytic(g);
    Eigen::MatrixXcd diff = ex.generators[0].matrix();
    double p = 1.0;
    for (const auto& l : orders) {
      p *= lam;
      diff -= p * l.matrix();
    }
    out.points.push_back({lam, diff.norm(), ex.condition_numbers[0]});
    xs.push_back(lam);
    ys.push_back(diff.norm());
  }
  if (xs.size() >= 2) out.slope = loglog_slope(xs, ys);
  return out;
}

}  // namespace tclgen
