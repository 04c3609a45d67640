#include "tclgen/quadrature.hpp"

#include <atomic>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "integrator.hpp"

namespace tclgen {

namespace {
std::atomic<int> g_threads{1};
}

void set_thread_count(int threads) {
  if (threads < 1) throw std::invalid_argument("thread count must be >= 1");
  g_threads = threads;
}

int thread_count() { return g_threads; }

void QuadratureSpec::validate() const {
  if (nodes_per_dimension < 1 || nodes_per_dimension > 256)
    throw std::invalid_argument("nodes_per_dimension must be in [1, 256]");
}

GaussLegendre gauss_legendre_unit(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre_unit: n must be >= 1");
  GaussLegendre gl;
  gl.nodes.resize(static_cast<std::size_t>(n));
  gl.weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int j = 2; j <= n; ++j) {
        const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // recompute derivative at the converged root
    double p0 = 1.0, p1 = x;
    for (int j = 2; j <= n; ++j) {
      const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    // x is the (i+1)-th largest root on (-1, 1)
    gl.nodes[static_cast<std::size_t>(n - 1 - i)] = 0.5 * (1.0 + x);
    gl.nodes[static_cast<std::size_t>(i)] = 0.5 * (1.0 - x);
    gl.weights[static_cast<std::size_t>(n - 1 - i)] = 0.5 * w;
    gl.weights[static_cast<std::size_t>(i)] = 0.5 * w;
  }
  return gl;
}

SimplexRule simplex_rule(int dim, int nodes_per_dimension, double t) {
  if (dim < 0 || dim > max_free_dimensions) throw std::invalid_argument("simplex_rule: unsupported dimension");
  if (nodes_per_dimension < 1) throw std::invalid_argument("simplex_rule: nodes_per_dimension must be >= 1");
  if (!(t >= 0.0) || !std::isfinite(t)) throw std::invalid_argument("simplex_rule: t must be finite and >= 0");
  SimplexRule r;
  r.dim = dim;
  r.nodes_per_dimension = nodes_per_dimension;
  r.t = t;
  if (dim == 0) {
    r.weights.push_back(1.0);
    return r;
  }
  const GaussLegendre gl = gauss_legendre_unit(nodes_per_dimension);
  std::size_t total = 1;
  for (int j = 0; j < dim; ++j) total *= static_cast<std::size_t>(nodes_per_dimension);
  r.coords.resize(total * static_cast<std::size_t>(dim));
  r.weights.resize(total);
  const double volume = std::pow(t, dim);
  std::vector<int> idx(static_cast<std::size_t>(dim), 0);
  for (std::size_t node = 0; node < total; ++node) {
    std::size_t rem = node;
    for (int j = dim - 1; j >= 0; --j) {
      idx[static_cast<std::size_t>(j)] = static_cast<int>(rem % static_cast<std::size_t>(nodes_per_dimension));
      rem /= static_cast<std::size_t>(nodes_per_dimension);
    }
    double v = t;
    double w = volume;
    for (int j = 0; j < dim; ++j) {
      const double x = gl.nodes[static_cast<std::size_t>(idx[static_cast<std::size_t>(j)])];
      v *= x;
      w *= gl.weights[static_cast<std::size_t>(idx[static_cast<std::size_t>(j)])] * std::pow(x, dim - 1 - j);
      r.coords[node * static_cast<std::size_t>(dim) + static_cast<std::size_t>(j)] = v;
    }
    r.weights[node] = w;
  }
  return r;
}

namespace detail {

NodeCache::NodeCache(const SystemModel& m, double t, int dim, int nodes_per_dimension)
    : rule_(simplex_rule(dim, nodes_per_dimension, t)), system_dim_(m.dim()), a_top_(m.interaction_picture_A(t)) {
  const std::size_t N = static_cast<std::size_t>(nodes_per_dimension);
  strides_.resize(static_cast<std::size_t>(dim));
  levels_.resize(static_cast<std::size_t>(dim));
  for (int j = 0; j < dim; ++j) {
    std::size_t stride = 1;
    for (int l = j + 1; l < dim; ++l) stride *= N;
    strides_[static_cast<std::size_t>(j)] = stride;
    const std::size_t count = rule_.size() / stride;
    auto& level = levels_[static_cast<std::size_t>(j)];
    level.reserve(count);
    for (std::size_t c = 0; c < count; ++c)
      level.push_back(m.interaction_picture_A(rule_.node(c * stride)[j]));
  }
}

ChainSet term_chains(const CumulantTerm& term, int k) {
  ChainSet cs;
  for (const auto& b : term.blocks) {
    if (b.tau.size() > 1) {
      std::vector<int> c;
      for (int i = b.tau.first; i <= b.tau.last; ++i) c.push_back(i - 1);
      cs.chains.push_back(std::move(c));
    }
    if (b.s.size() > 1) {
      std::vector<int> c;
      for (int i = b.s.first; i <= b.s.last; ++i) c.push_back(k + i - 1);
      cs.chains.push_back(std::move(c));
    }
  }
  return cs;
}

bool sector_consistent(const ChainSet& chains, std::span<const int> slot_rank) {
  for (const auto& c : chains.chains)
    for (std::size_t i = 1; i < c.size(); ++i)
      if (slot_rank[static_cast<std::size_t>(c[i - 1])] > slot_rank[static_cast<std::size_t>(c[i])]) return false;
  return true;
}

}  // namespace detail

SuperOperator integrate_term(const PinnedTerm& term, const SystemModel& m, const BathModel& b, double t,
                             const QuadratureSpec& q) {
  q.validate();
  const VariableLayout layout{term.base.tau_count(), term.base.s_count(), term.pin};
  const bool pin_ok = term.pin == Pin::tau_one ? term.base.dotted().tau.contains(1) : term.base.dotted().s.contains(1);
  if (!pin_ok) throw std::invalid_argument("integrate_term: pinned variable is not in the dotted block");
  const int p = layout.size() - 1;
  if (p > max_free_dimensions) throw std::invalid_argument("integrate_term: order too high");
  const detail::NodeCache cache(m, t, p, q.nodes_per_dimension);
  const detail::SlotIntegrand item{Complex(1.0), &term.base};
  const auto sink = detail::integrate_slots(cache, b, layout.k, layout.m, layout.pinned_slot(),
                                            std::span<const detail::SlotIntegrand>(&item, 1),
                                            detail::SuperopSink(m.dim()));
  return SuperOperator(sink.acc);
}

std::vector<std::pair<int, double>> integral_convergence(const PinnedTerm& term, const SystemModel& m,
                                                         const BathModel& b, double t,
                                                         const std::vector<int>& node_counts) {
  std::vector<std::pair<int, double>> out;
  for (int n : node_counts) {
    QuadratureSpec q;
    q.nodes_per_dimension = n;
    out.emplace_back(n, integrate_term(term, m, b, t, q).matrix().norm());
  }
  return out;
}

}  // namespace tclgen
