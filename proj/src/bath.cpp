#include "tclgen/bath.hpp"

#include <cmath>
#include <stdexcept>

namespace tclgen {

namespace {

bool descending(std::span<const double> times) {
  for (std::size_t i = 1; i < times.size(); ++i)
    if (times[i] > times[i - 1]) return false;
  return true;
}

// Sum over partial pairings of the listed points: every point is either
// paired with a later one (centered two-point factor, order preserved) or
// left as a mean factor.
template <class Mean, class Centered>
Complex gaussian_moment(const int* idx, int n, bool mean_zero, const Mean& mean, const Centered& centered) {
  if (n == 0) return 1.0;
  if (mean_zero && (n % 2) == 1) return 0.0;
  const int first = idx[0];
  std::array<int, CorrelationTable::max_points> rest{};
  Complex total = 0.0;
  if (!mean_zero) {
    for (int i = 1; i < n; ++i) rest[static_cast<std::size_t>(i - 1)] = idx[i];
    total += mean(first) * gaussian_moment(rest.data(), n - 1, mean_zero, mean, centered);
  }
  for (int j = 1; j < n; ++j) {
    int w = 0;
    for (int i = 1; i < n; ++i)
      if (i != j) rest[static_cast<std::size_t>(w++)] = idx[i];
    total += centered(first, idx[j]) * gaussian_moment(rest.data(), n - 2, mean_zero, mean, centered);
  }
  return total;
}

}  // namespace

BathModel BathModel::single_mode_thermal(double g, double omega, double nbar) {
  if (!(g > 0.0)) throw std::invalid_argument("single_mode_thermal: coupling g must be > 0");
  if (!(nbar >= 0.0)) throw std::invalid_argument("single_mode_thermal: nbar must be >= 0");
  if (!std::isfinite(omega)) throw std::invalid_argument("single_mode_thermal: omega must be finite");
  BathModel b;
  b.kind_ = BathKind::single_mode_thermal;
  b.mean_zero_ = true;
  b.mode_ = SingleModeParams{g, omega, nbar};
  b.two_point_ = [g, omega, nbar](double t, double s) {
    const double phase = omega * (t - s);
    return g * g * ((nbar + 1.0) * std::polar(1.0, -phase) + nbar * std::polar(1.0, phase));
  };
  return b;
}

BathModel BathModel::gaussian(TwoPoint two_point, Mean mean) {
  if (!two_point) throw std::invalid_argument("gaussian bath requires a two-point function");
  BathModel b;
  b.kind_ = BathKind::gaussian_generic;
  b.two_point_ = std::move(two_point);
  b.mean_zero_ = !mean;
  b.mean_ = std::move(mean);
  return b;
}

BathModel BathModel::displaced_single_mode(double g, double omega, double nbar, Complex alpha) {
  const BathModel thermal = single_mode_thermal(g, omega, nbar);
  Mean mean = [g, omega, alpha](double t) {
    return Complex(2.0 * g * std::real(alpha * std::polar(1.0, -omega * t)), 0.0);
  };
  TwoPoint c = [thermal_c = thermal.two_point_, mean](double t, double s) { return thermal_c(t, s) + mean(t) * mean(s); };
  return gaussian(std::move(c), std::move(mean));
}

BathModel BathModel::custom(NPoint n_point, bool mean_zero) {
  if (!n_point) throw std::invalid_argument("custom bath requires an n-point callable");
  BathModel b;
  b.kind_ = BathKind::custom;
  b.mean_zero_ = mean_zero;
  b.n_point_ = std::move(n_point);
  return b;
}

Complex BathModel::two_point(double t, double s) const {
  if (kind_ == BathKind::custom) {
    const std::array<double, 2> ts{t, s};
    return n_point_(ts);
  }
  return two_point_(t, s);
}

Complex BathModel::mean(double t) const {
  if (mean_zero_) return 0.0;
  if (kind_ == BathKind::custom) {
    const std::array<double, 1> ts{t};
    return n_point_(ts);
  }
  return mean_(t);
}

Complex BathModel::centered_two_point(double t, double s) const { return two_point(t, s) - mean(t) * mean(s); }

Complex n_point(const BathModel& b, std::span<const double> times) {
  if (times.empty()) throw std::invalid_argument("n_point requires at least one time");
  if (b.kind_ == BathKind::custom) {
    if (!b.n_point_) throw std::invalid_argument("custom bath has no n-point callable");
    return b.n_point_(times);
  }
  if (times.size() > static_cast<std::size_t>(CorrelationTable::max_points))
    throw std::invalid_argument("n_point: too many time arguments");
  std::array<int, CorrelationTable::max_points> idx{};
  for (std::size_t i = 0; i < times.size(); ++i) idx[i] = static_cast<int>(i);
  auto mean = [&](int i) { return b.mean(times[static_cast<std::size_t>(i)]); };
  auto centered = [&](int i, int j) {
    return b.centered_two_point(times[static_cast<std::size_t>(i)], times[static_cast<std::size_t>(j)]);
  };
  return gaussian_moment(idx.data(), static_cast<int>(times.size()), b.mean_zero_, mean, centered);
}

Complex d_block(const BathModel& b, std::span<const double> taus, std::span<const double> ss) {
  if (taus.empty() && ss.empty()) throw std::invalid_argument("d_block: both argument lists are empty");
  if (!descending(taus) || !descending(ss)) return 0.0;
  std::vector<double> joined;
  joined.reserve(taus.size() + ss.size());
  for (auto it = ss.rbegin(); it != ss.rend(); ++it) joined.push_back(*it);
  joined.insert(joined.end(), taus.begin(), taus.end());
  return n_point(b, joined);
}

CorrelationTable::CorrelationTable(const BathModel& b, std::span<const double> times)
    : bath_(&b), size_(static_cast<int>(times.size())) {
  if (size_ > max_points) throw std::invalid_argument("CorrelationTable: too many time points");
  for (int i = 0; i < size_; ++i) times_[static_cast<std::size_t>(i)] = times[static_cast<std::size_t>(i)];
  if (!b.is_gaussian()) return;
  for (int i = 0; i < size_; ++i) mean_[static_cast<std::size_t>(i)] = b.mean(times_[static_cast<std::size_t>(i)]);
  for (int i = 0; i < size_; ++i)
    for (int j = 0; j < size_; ++j) {
      const auto ui = static_cast<std::size_t>(i);
      const auto uj = static_cast<std::size_t>(j);
      centered_[ui][uj] = b.two_point(times_[ui], times_[uj]) - mean_[ui] * mean_[uj];
    }
}

Complex CorrelationTable::wick(std::span<const int> indices) const {
  auto mean = [this](int i) { return mean_[static_cast<std::size_t>(i)]; };
  auto centered = [this](int i, int j) { return centered_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]; };
  return gaussian_moment(indices.data(), static_cast<int>(indices.size()), bath_->mean_is_zero(), mean, centered);
}

Complex CorrelationTable::moment(std::span<const int> indices) const {
  if (bath_->is_gaussian()) return wick(indices);
  std::array<double, max_points> ts{};
  for (std::size_t i = 0; i < indices.size(); ++i) ts[i] = times_[static_cast<std::size_t>(indices[i])];
  return n_point(*bath_, std::span<const double>(ts.data(), indices.size()));
}

Complex CorrelationTable::block(std::span<const int> taus, std::span<const int> ss) const {
  for (std::size_t i = 1; i < taus.size(); ++i)
    if (time(taus[i]) > time(taus[i - 1])) return 0.0;
  for (std::size_t i = 1; i < ss.size(); ++i)
    if (time(ss[i]) > time(ss[i - 1])) return 0.0;
  std::array<int, max_points> joined{};
  std::size_t w = 0;
  for (auto it = ss.rbegin(); it != ss.rend(); ++it) joined[w++] = *it;
  for (int v : taus) joined[w++] = v;
  return moment(std::span<const int>(joined.data(), w));
}

}  // namespace tclgen
