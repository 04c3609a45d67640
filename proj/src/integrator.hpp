#pragma once

// Sector-decomposed quadrature engine shared by the generator, effective
// Hamiltonian and map-moment integrals. Internal header.

#include <algorithm>
#include <array>
#include <atomic>
#include <exception>
#include <numeric>
#include <span>
#include <stdexcept>
#include <thread>
#include <vector>

#include "tclgen/bath.hpp"
#include "tclgen/cumulant.hpp"
#include "tclgen/model.hpp"
#include "tclgen/quadrature.hpp"

namespace tclgen::detail {

// Interaction-picture A at every coordinate of a simplex rule, memoized by
// coordinate prefix: coordinate j of node i depends only on its first j+1
// Gauss-Legendre indices.
class NodeCache {
 public:
  NodeCache(const SystemModel& m, double t, int dim, int nodes_per_dimension);

  const SimplexRule& rule() const { return rule_; }
  const Operator& a_at(std::size_t node, int coord) const {
    return levels_[static_cast<std::size_t>(coord)][node / strides_[static_cast<std::size_t>(coord)]];
  }
  const Operator& a_top() const { return a_top_; }
  int dim() const { return rule_.dim; }
  int system_dim() const { return system_dim_; }

 private:
  SimplexRule rule_;
  int system_dim_;
  Operator a_top_;
  std::vector<std::size_t> strides_;
  std::vector<std::vector<Operator>> levels_;
};

struct SlotIntegrand {
  Complex factor;
  const CumulantTerm* term;
};

template <class Fn>
void parallel_chunks(std::size_t count, Fn&& fn) {
  const std::size_t workers = std::min<std::size_t>(count, static_cast<std::size_t>(std::max(1, thread_count())));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count && !failed; i = next++) {
        try {
          fn(i);
        } catch (...) {
          if (!failed.exchange(true)) error = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

// Chains of slots that must be strictly descending in time, per term.
struct ChainSet {
  std::vector<std::vector<int>> chains;
};

ChainSet term_chains(const CumulantTerm& term, int k);

// True when the sector assigning rank[f] to free variable f respects every
// chain (pinned slot sits above all free variables).
bool sector_consistent(const ChainSet& chains, std::span<const int> slot_rank);

struct SuperopSink {
  explicit SuperopSink(int d) : d(d), acc(Eigen::MatrixXcd::Zero(d * d, d * d)) {}
  void add(Complex w, const Operator& left, const Operator& right) {
    for (int j = 0; j < d; ++j)
      for (int l = 0; l < d; ++l) acc.block(j * d, l * d, d, d) += (w * right(l, j)) * left;
  }
  void merge(const SuperopSink& o) { acc += o.acc; }
  int d;
  Eigen::MatrixXcd acc;
};

// Accumulates <right>_{1/d} * left.
struct LeftAverageSink {
  explicit LeftAverageSink(int d) : d(d), acc(Operator::Zero(d, d)) {}
  void add(Complex w, const Operator& left, const Operator& right) {
    acc += (w * right.trace() / static_cast<double>(d)) * left;
  }
  void merge(const LeftAverageSink& o) { acc += o.acc; }
  int d;
  Operator acc;
};

// Integrates sum_i factor_i * blocks_i(times) * sink(A(taus), A^dag(ss)) over
// the free slots. pinned_slot < 0 means every slot is free.
template <class Sink>
Sink integrate_slots(const NodeCache& cache, const BathModel& b, int k, int m, int pinned_slot,
                     std::span<const SlotIntegrand> items, const Sink& prototype) {
  const int n = k + m;
  const int p = n - (pinned_slot >= 0 ? 1 : 0);
  if (p != cache.dim()) throw std::logic_error("integrate_slots: node cache dimension mismatch");
  if (n > CorrelationTable::max_points) throw std::invalid_argument("integrate_slots: too many variables");
  const SimplexRule& rule = cache.rule();
  if (items.empty() || rule.size() == 0) return prototype;
  if (p > 0 && rule.t == 0.0) return prototype;

  std::vector<int> free_slots;
  for (int s = 0; s < n; ++s)
    if (s != pinned_slot) free_slots.push_back(s);

  std::vector<ChainSet> chains;
  chains.reserve(items.size());
  for (const auto& it : items) chains.push_back(term_chains(*it.term, k));

  // Sectors: perm[j] is the free variable holding coordinate j.
  struct Sector {
    std::array<int, CorrelationTable::max_points> slot_coord{};  // -1 for pinned
    std::vector<std::size_t> active;
  };
  std::vector<Sector> sectors;
  std::vector<int> perm(static_cast<std::size_t>(p));
  std::iota(perm.begin(), perm.end(), 0);
  do {
    Sector sec;
    std::vector<int> slot_rank(static_cast<std::size_t>(n), -1);
    for (int j = 0; j < p; ++j) slot_rank[static_cast<std::size_t>(free_slots[static_cast<std::size_t>(perm[static_cast<std::size_t>(j)])])] = j;
    for (int s = 0; s < n; ++s) sec.slot_coord[static_cast<std::size_t>(s)] = slot_rank[static_cast<std::size_t>(s)];
    for (std::size_t i = 0; i < items.size(); ++i)
      if (sector_consistent(chains[i], slot_rank)) sec.active.push_back(i);
    if (!sec.active.empty()) sectors.push_back(std::move(sec));
  } while (std::next_permutation(perm.begin(), perm.end()));

  const std::size_t per_first = (p == 0) ? 1 : rule.size() / static_cast<std::size_t>(rule.nodes_per_dimension);
  const std::size_t firsts = (p == 0) ? 1 : static_cast<std::size_t>(rule.nodes_per_dimension);
  const std::size_t chunks = sectors.size() * firsts;
  std::vector<Sink> partial(chunks, prototype);
  const int d = cache.system_dim();

  parallel_chunks(chunks, [&](std::size_t chunk) {
    const Sector& sec = sectors[chunk / firsts];
    const std::size_t first = chunk % firsts;
    Sink& sink = partial[chunk];
    std::array<double, CorrelationTable::max_points> times{};
    std::array<const Operator*, CorrelationTable::max_points> ops{};
    Operator left(d, d), right(d, d), tmp(d, d);
    for (std::size_t node = first * per_first; node < (first + 1) * per_first; ++node) {
      const double* v = rule.node(node);
      for (int s = 0; s < n; ++s) {
        const int c = sec.slot_coord[static_cast<std::size_t>(s)];
        times[static_cast<std::size_t>(s)] = (c < 0) ? rule.t : v[c];
        ops[static_cast<std::size_t>(s)] = (c < 0) ? &cache.a_top() : &cache.a_at(node, c);
      }
      const CorrelationTable table(b, std::span<const double>(times.data(), static_cast<std::size_t>(n)));
      Complex scalar = 0.0;
      for (std::size_t i : sec.active) scalar += items[i].factor * eval_blocks(*items[i].term, table, k);
      if (scalar == Complex(0.0)) continue;
      left.setIdentity();
      for (int s = 0; s < k; ++s) {
        tmp.noalias() = left * *ops[static_cast<std::size_t>(s)];
        left.swap(tmp);
      }
      right.setIdentity();
      for (int s = n - 1; s >= k; --s) {
        tmp.noalias() = right * *ops[static_cast<std::size_t>(s)];
        right.swap(tmp);
      }
      sink.add(rule.weights[node] * scalar, left, right);
    }
  });

  Sink total = prototype;
  for (const auto& s : partial) total.merge(s);
  return total;
}

}  // namespace tclgen::detail
