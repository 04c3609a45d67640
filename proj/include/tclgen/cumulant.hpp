#pragma once

// Generalized cumulants as signed products of D-blocks.
//
// Indices are 1-based: tau_1..tau_k on the left-acting side, s_1..s_m on the
// right-acting side. Each term has exactly one dotted (time-differentiated)
// block, always the one holding tau_1 and/or s_1, stored first; the plain
// blocks follow in canonical order, so equal products compare equal.

#include <compare>
#include <span>
#include <string>
#include <vector>

#include "tclgen/bath.hpp"

namespace tclgen {

struct IndexRange {
  int first = 0;
  int last = -1;  // inclusive; empty when last < first

  static IndexRange make(int first, int last);
  bool empty() const { return last < first; }
  int size() const { return empty() ? 0 : last - first + 1; }
  bool contains(int i) const { return !empty() && i >= first && i <= last; }
  auto operator<=>(const IndexRange&) const = default;
};

struct BlockSpec {
  IndexRange tau;
  IndexRange s;
  bool dotted = false;

  int size() const { return tau.size() + s.size(); }
  auto operator<=>(const BlockSpec&) const = default;
};

struct CumulantTerm {
  int coefficient = 0;  // signed multiplicity, sign = (-1)^(blocks + 1)
  std::vector<BlockSpec> blocks;

  int tau_count() const;
  int s_count() const;
  const BlockSpec& dotted() const { return blocks.front(); }
  bool operator==(const CumulantTerm&) const = default;
};

enum class Pin { tau_one, s_one };

struct PinnedTerm {
  CumulantTerm base;
  Pin pin = Pin::tau_one;
};

enum class VanishingRule { none, mean_zero, gaussian_mean_zero };

// Direct sum over nondecreasing split sequences. Test oracle.
std::vector<CumulantTerm> expand_direct(int n, int k);

// Recursion D(k, m) = dD(k, m) - sum_{l, r} D(l, r) * D-block(tail).
std::vector<CumulantTerm> expand_recursive(int n, int k);

// Cached expand_recursive for n <= 6; thread-safe after first use.
const std::vector<CumulantTerm>& cumulant_terms(int n, int k);

std::vector<CumulantTerm> suppress_vanishing(std::span<const CumulantTerm> terms, VanishingRule rule);

std::vector<PinnedTerm> pin_terms(std::span<const CumulantTerm> terms);

// Layout of the n time variables of a (n, k) cumulant: tau_1..tau_k occupy
// slots 0..k-1, s_1..s_m slots k..n-1. The pinned slot is set to t; the
// remaining n-1 slots are "free" and listed in slot order.
struct VariableLayout {
  int k = 0;
  int m = 0;
  Pin pin = Pin::tau_one;

  int size() const { return k + m; }
  int pinned_slot() const { return pin == Pin::tau_one ? 0 : k; }
  int tau_slot(int i) const { return i - 1; }
  int s_slot(int i) const { return k + i - 1; }
  // Fills all n slot times from the free times and t.
  void assign(std::span<const double> free_times, double t, std::span<double> slots) const;
};

// Value of the pinned term with the pinned variable at t. free_times lists
// the n-1 remaining variables in slot order (tau first, then s).
Complex eval_pinned(const PinnedTerm& term, std::span<const double> free_times, double t, const BathModel& b);

// Product of D-blocks over slot-indexed correlations (dotted block included
// as a plain block, no pinning).
Complex eval_blocks(const CumulantTerm& term, const CorrelationTable& table, int k);

// Plain-text rendering, e.g. "+dD(τ1;s1) -dD(τ1)·D(s1) -dD(s1)·D(τ1)".
std::string format_terms(std::span<const CumulantTerm> terms);

// Throws if the blocks of a term do not partition [1..k] and [1..m]
// contiguously or violate the dotted-block and sign invariants.
void check_term_invariants(const CumulantTerm& term, int k, int m);

}  // namespace tclgen
