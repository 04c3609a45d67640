#include "tclgen/cumulant.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>

namespace tclgen {

namespace {

constexpr int max_cached_order = 6;

void check_order(int n, int k) {
  if (n < 1) throw std::invalid_argument("cumulant order n must be >= 1");
  if (k < 0 || k > n) throw std::invalid_argument("cumulant split k must satisfy 0 <= k <= n");
}

bool plain_block_less(const BlockSpec& a, const BlockSpec& b) {
  const auto key = [](const BlockSpec& x) {
    return std::array<int, 3>{x.tau.empty() ? 1 : 0, x.tau.empty() ? 0 : x.tau.first, x.s.empty() ? 0 : x.s.first};
  };
  return key(a) < key(b);
}

BlockSpec make_block(int tau_first, int tau_last, int s_first, int s_last, bool dotted) {
  return BlockSpec{IndexRange::make(tau_first, tau_last), IndexRange::make(s_first, s_last), dotted};
}

// Accumulates signed products keyed by canonical block structure.
class TermAccumulator {
 public:
  void add(std::vector<BlockSpec> blocks, int coefficient) {
    std::sort(blocks.begin() + 1, blocks.end(), plain_block_less);
    terms_[std::move(blocks)] += coefficient;
  }

  std::vector<CumulantTerm> finish() const {
    std::vector<CumulantTerm> out;
    for (const auto& [blocks, c] : terms_)
      if (c != 0) out.push_back(CumulantTerm{c, blocks});
    return out;
  }

 private:
  std::map<std::vector<BlockSpec>, int> terms_;
};

void enumerate_splits(int kp, int mp, int k, int m, std::vector<BlockSpec>& blocks, TermAccumulator& acc) {
  for (int k2 = kp; k2 <= k; ++k2)
    for (int m2 = mp; m2 <= m; ++m2) {
      if (k2 == kp && m2 == mp) continue;
      blocks.push_back(make_block(kp + 1, k2, mp + 1, m2, blocks.empty()));
      if (k2 == k && m2 == m) {
        const int q = static_cast<int>(blocks.size());
        acc.add(blocks, (q % 2 == 1) ? 1 : -1);
      } else {
        enumerate_splits(k2, m2, k, m, blocks, acc);
      }
      blocks.pop_back();
    }
}

class RecursiveExpansion {
 public:
  explicit RecursiveExpansion(int max_total) : memo_(static_cast<std::size_t>(max_total + 1)) {
    for (auto& row : memo_) row.resize(static_cast<std::size_t>(max_total + 1));
  }

  const std::vector<CumulantTerm>& get(int l, int r) {
    auto& slot = memo_[static_cast<std::size_t>(l)][static_cast<std::size_t>(r)];
    if (slot) return *slot;
    TermAccumulator acc;
    acc.add({make_block(1, l, 1, r, true)}, 1);
    for (int lp = 0; lp <= l; ++lp)
      for (int rp = 0; rp <= r; ++rp) {
        if ((lp == 0 && rp == 0) || (lp == l && rp == r)) continue;
        const BlockSpec tail = make_block(lp + 1, l, rp + 1, r, false);
        for (const CumulantTerm& sub : get(lp, rp)) {
          std::vector<BlockSpec> blocks = sub.blocks;
          blocks.push_back(tail);
          acc.add(std::move(blocks), -sub.coefficient);
        }
      }
    slot = acc.finish();
    return *slot;
  }

 private:
  std::vector<std::vector<std::optional<std::vector<CumulantTerm>>>> memo_;
};

bool block_vanishes(const BlockSpec& b, VanishingRule rule) {
  switch (rule) {
    case VanishingRule::none:
      return false;
    case VanishingRule::mean_zero:
      return b.size() == 1;
    case VanishingRule::gaussian_mean_zero:
      return b.size() % 2 == 1;
  }
  return false;
}

void render_range(std::ostringstream& os, const char* symbol, const IndexRange& r) {
  for (int i = r.first; i <= r.last; ++i) os << symbol << i;
}

}  // namespace

IndexRange IndexRange::make(int first, int last) {
  if (last < first) return IndexRange{};
  return IndexRange{first, last};
}

int CumulantTerm::tau_count() const {
  int n = 0;
  for (const auto& b : blocks) n += b.tau.size();
  return n;
}

int CumulantTerm::s_count() const {
  int n = 0;
  for (const auto& b : blocks) n += b.s.size();
  return n;
}

std::vector<CumulantTerm> expand_direct(int n, int k) {
  check_order(n, k);
  TermAccumulator acc;
  std::vector<BlockSpec> blocks;
  enumerate_splits(0, 0, k, n - k, blocks, acc);
  return acc.finish();
}

std::vector<CumulantTerm> expand_recursive(int n, int k) {
  check_order(n, k);
  RecursiveExpansion rec(n);
  return rec.get(k, n - k);
}

const std::vector<CumulantTerm>& cumulant_terms(int n, int k) {
  check_order(n, k);
  if (n > max_cached_order) throw std::invalid_argument("cumulant_terms: order above cache ceiling");
  struct Table {
    std::vector<std::vector<std::vector<CumulantTerm>>> terms;
    Table() {
      RecursiveExpansion rec(max_cached_order);
      terms.resize(max_cached_order + 1);
      for (int nn = 1; nn <= max_cached_order; ++nn)
        for (int kk = 0; kk <= nn; ++kk) terms[static_cast<std::size_t>(nn)].push_back(rec.get(kk, nn - kk));
    }
  };
  static const Table table;
  return table.terms[static_cast<std::size_t>(n)][static_cast<std::size_t>(k)];
}

std::vector<CumulantTerm> suppress_vanishing(std::span<const CumulantTerm> terms, VanishingRule rule) {
  std::vector<CumulantTerm> out;
  for (const auto& term : terms)
    if (std::none_of(term.blocks.begin(), term.blocks.end(), [rule](const BlockSpec& b) { return block_vanishes(b, rule); }))
      out.push_back(term);
  return out;
}

std::vector<PinnedTerm> pin_terms(std::span<const CumulantTerm> terms) {
  std::vector<PinnedTerm> out;
  for (const auto& term : terms) {
    if (term.dotted().tau.contains(1)) out.push_back(PinnedTerm{term, Pin::tau_one});
    if (term.dotted().s.contains(1)) out.push_back(PinnedTerm{term, Pin::s_one});
  }
  return out;
}

void VariableLayout::assign(std::span<const double> free_times, double t, std::span<double> slots) const {
  if (free_times.size() + 1 != static_cast<std::size_t>(size()) || slots.size() != static_cast<std::size_t>(size()))
    throw std::invalid_argument("VariableLayout::assign: wrong number of times");
  const int p = pinned_slot();
  std::size_t f = 0;
  for (int slot = 0; slot < size(); ++slot) slots[static_cast<std::size_t>(slot)] = (slot == p) ? t : free_times[f++];
}

Complex eval_blocks(const CumulantTerm& term, const CorrelationTable& table, int k) {
  Complex value = static_cast<double>(term.coefficient);
  std::array<int, CorrelationTable::max_points> taus{};
  std::array<int, CorrelationTable::max_points> ss{};
  for (const auto& b : term.blocks) {
    int nt = 0;
    int ns = 0;
    for (int i = b.tau.first; i <= b.tau.last; ++i) taus[static_cast<std::size_t>(nt++)] = i - 1;
    for (int i = b.s.first; i <= b.s.last; ++i) ss[static_cast<std::size_t>(ns++)] = k + i - 1;
    value *= table.block(std::span<const int>(taus.data(), static_cast<std::size_t>(nt)),
                         std::span<const int>(ss.data(), static_cast<std::size_t>(ns)));
    if (value == Complex(0.0)) return value;
  }
  return value;
}

Complex eval_pinned(const PinnedTerm& term, std::span<const double> free_times, double t, const BathModel& b) {
  const VariableLayout layout{term.base.tau_count(), term.base.s_count(), term.pin};
  const bool pin_ok = term.pin == Pin::tau_one ? term.base.dotted().tau.contains(1) : term.base.dotted().s.contains(1);
  if (!pin_ok) throw std::invalid_argument("eval_pinned: pinned variable is not in the dotted block");
  std::array<double, CorrelationTable::max_points> slots{};
  const std::span<double> slot_span(slots.data(), static_cast<std::size_t>(layout.size()));
  layout.assign(free_times, t, slot_span);
  const CorrelationTable table(b, slot_span);
  return eval_blocks(term.base, table, layout.k);
}

std::string format_terms(std::span<const CumulantTerm> terms) {
  std::ostringstream os;
  bool first_term = true;
  for (const auto& term : terms) {
    if (!first_term) os << ' ';
    first_term = false;
    os << (term.coefficient < 0 ? '-' : '+');
    if (std::abs(term.coefficient) != 1) os << std::abs(term.coefficient) << "·";
    bool first_block = true;
    for (const auto& b : term.blocks) {
      if (!first_block) os << "·";
      first_block = false;
      os << (b.dotted ? "dD(" : "D(");
      render_range(os, "τ", b.tau);
      if (!b.tau.empty() && !b.s.empty()) os << ';';
      render_range(os, "s", b.s);
      os << ')';
    }
  }
  return os.str();
}

void check_term_invariants(const CumulantTerm& term, int k, int m) {
  if (term.blocks.empty()) throw std::logic_error("cumulant term without blocks");
  const int q = static_cast<int>(term.blocks.size());
  const int sign = (q % 2 == 1) ? 1 : -1;
  if (term.coefficient == 0 || (term.coefficient > 0 ? 1 : -1) != sign) throw std::logic_error("cumulant term sign mismatch");
  std::vector<int> tau_cover(static_cast<std::size_t>(k + 1), 0);
  std::vector<int> s_cover(static_cast<std::size_t>(m + 1), 0);
  for (std::size_t j = 0; j < term.blocks.size(); ++j) {
    const BlockSpec& b = term.blocks[j];
    if (b.tau.empty() && b.s.empty()) throw std::logic_error("doubly empty block");
    if (b.dotted != (j == 0)) throw std::logic_error("dotted flag must be set on the first block only");
    for (int i = b.tau.first; i <= b.tau.last; ++i) {
      if (i < 1 || i > k) throw std::logic_error("tau index out of range");
      ++tau_cover[static_cast<std::size_t>(i)];
    }
    for (int i = b.s.first; i <= b.s.last; ++i) {
      if (i < 1 || i > m) throw std::logic_error("s index out of range");
      ++s_cover[static_cast<std::size_t>(i)];
    }
  }
  for (int i = 1; i <= k; ++i)
    if (tau_cover[static_cast<std::size_t>(i)] != 1) throw std::logic_error("tau indices not partitioned");
  for (int i = 1; i <= m; ++i)
    if (s_cover[static_cast<std::size_t>(i)] != 1) throw std::logic_error("s indices not partitioned");
  const BlockSpec& d = term.dotted();
  if (!(d.tau.contains(1) || d.s.contains(1))) throw std::logic_error("dotted block holds neither tau_1 nor s_1");
  if ((k > 0 && !d.tau.empty() && d.tau.first != 1) || (m > 0 && !d.s.empty() && d.s.first != 1))
    throw std::logic_error("dotted block does not start at the first index");
}

}  // namespace tclgen
