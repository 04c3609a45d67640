#pragma once

// Environment correlation functions <B_t1 ... B_tn> and the time-ordered
// D-blocks built from them.
//
// Custom n-point callables and Gaussian two-point/mean callables must be safe
// to call concurrently. The conjugation symmetry D(taus, ss) = D(ss, taus)^*
// holds for any Hermitian B; the test suite assumes it also for custom baths.

#include <array>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "tclgen/linalg.hpp"

namespace tclgen {

enum class BathKind { gaussian_generic, single_mode_thermal, custom };

struct SingleModeParams {
  double g = 1.0;      // coupling, B = g (a + a^dag)
  double omega = 1.0;  // mode frequency
  double nbar = 0.0;   // thermal occupation
};

class BathModel {
 public:
  using TwoPoint = std::function<Complex(double, double)>;
  using Mean = std::function<Complex(double)>;
  using NPoint = std::function<Complex(std::span<const double>)>;

  static BathModel single_mode_thermal(double g, double omega, double nbar);
  // Gaussian state with two-point function C(t, s) = <B_t B_s> and mean <B_t>.
  // An empty mean means <B_t> == 0.
  static BathModel gaussian(TwoPoint two_point, Mean mean = {});
  // Coherently displaced thermal mode: Gaussian with
  // <B_t> = g (alpha e^{-i omega t} + c.c.).
  static BathModel displaced_single_mode(double g, double omega, double nbar, Complex alpha);
  // Arbitrary ordered n-point function; no cumulant truncation is applied.
  static BathModel custom(NPoint n_point, bool mean_zero = false);

  BathKind kind() const { return kind_; }
  bool is_gaussian() const { return kind_ != BathKind::custom; }
  bool mean_is_zero() const { return mean_zero_; }
  const std::optional<SingleModeParams>& single_mode() const { return mode_; }

  Complex two_point(double t, double s) const;
  Complex mean(double t) const;
  // Centered two-point function C(t, s) - <B_t><B_s>.
  Complex centered_two_point(double t, double s) const;

 private:
  friend Complex n_point(const BathModel& b, std::span<const double> times);
  friend class CorrelationTable;

  BathKind kind_ = BathKind::gaussian_generic;
  bool mean_zero_ = true;
  TwoPoint two_point_;
  Mean mean_;
  NPoint n_point_;
  std::optional<SingleModeParams> mode_;
};

// <B_t1 B_t2 ... B_tn> in the listed order.
Complex n_point(const BathModel& b, std::span<const double> times);

// Tr{B_tau1 ... B_tauk rho_E B_s_m ... B_s1}, zero unless both lists are
// descending. Equal neighbouring times count as ordered.
Complex d_block(const BathModel& b, std::span<const double> taus, std::span<const double> ss);

// Correlations among a fixed, small set of time points, precomputed once so
// that many ordered moments over subsets can be evaluated cheaply.
class CorrelationTable {
 public:
  static constexpr int max_points = 8;

  CorrelationTable(const BathModel& b, std::span<const double> times);

  double time(int i) const { return times_[static_cast<std::size_t>(i)]; }
  // <B_{t[idx0]} B_{t[idx1]} ...>.
  Complex moment(std::span<const int> indices) const;
  // D-block over variable indices; zero when either side is not descending.
  Complex block(std::span<const int> taus, std::span<const int> ss) const;

 private:
  Complex wick(std::span<const int> indices) const;

  const BathModel* bath_;
  int size_ = 0;
  std::array<double, max_points> times_{};
  std::array<Complex, max_points> mean_{};
  std::array<std::array<Complex, max_points>, max_points> centered_{};
};

}  // namespace tclgen
