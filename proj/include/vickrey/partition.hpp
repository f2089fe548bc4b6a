// Growing nested partition of (0, 1] with log-space exponential weights, the
// exploration-mixed bid distribution built on top of it, and the
// importance-weighted gain estimators shared by ExpTree and ExpTree.P.
#pragma once

#include <algorithm>
#include <cmath>
#include <iterator>
#include <limits>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "vickrey/auction.hpp"
#include "vickrey/random.hpp"

namespace vickrey {

struct Cell {
  Interval span;
  double gain = 0.0;  // cumulative estimated gain S; weight is exp(eta * S)
};

/// Estimated gains for one round, one entry per partition cell in order,
/// plus the two exploration atoms.
struct IntervalGains {
  std::vector<double> per_interval;
  double atom_zero = 0.0;
  double atom_one = 0.0;
};

class IntervalPartition {
 public:
  IntervalPartition() { cells_.emplace(1.0, Entry{0.0, 0.0}); }

  [[nodiscard]] std::size_t size() const noexcept { return cells_.size(); }

  [[nodiscard]] std::vector<Cell> cells() const {
    std::vector<Cell> out;
    out.reserve(cells_.size());
    for (const auto& [hi, e] : cells_) out.push_back({Interval{e.lo, hi}, e.gain});
    return out;
  }

  /// Interior and end breakpoints 0 = x_0 < ... < x_k = 1.
  [[nodiscard]] std::vector<double> breakpoints() const {
    std::vector<double> out{0.0};
    for (const auto& [hi, e] : cells_) out.push_back(hi);
    return out;
  }

  /// The cell (x, y] containing m in (0, 1].
  [[nodiscard]] Cell cell_containing(double m) const {
    const auto it = locate(m);
    return {Interval{it->second.lo, it->first}, it->second.gain};
  }

  /// Splits the cell containing m into (x, m] and (m, y], both inheriting S.
  /// Returns false when m is already a breakpoint.
  bool split_at(double m) {
    auto it = locate(m);
    if (it->first == m) return false;
    const Entry parent = it->second;
    it->second.lo = m;
    cells_.emplace_hint(it, m, parent);
    return true;
  }

  void apply_gains(const IntervalGains& gains) {
    if (gains.per_interval.size() != cells_.size()) {
      throw std::invalid_argument("gain vector does not cover the partition");
    }
    auto g = gains.per_interval.begin();
    for (auto& [hi, e] : cells_) e.gain += *g++;
    atom_zero_gain_ += gains.atom_zero;
    atom_one_gain_ += gains.atom_one;
  }

  /// Zeroes every cumulative gain (atoms included), keeping breakpoints.
  void reset_gains() noexcept {
    for (auto& [hi, e] : cells_) e.gain = 0.0;
    atom_zero_gain_ = 0.0;
    atom_one_gain_ = 0.0;
  }

  [[nodiscard]] double atom_zero_gain() const noexcept { return atom_zero_gain_; }
  [[nodiscard]] double atom_one_gain() const noexcept { return atom_one_gain_; }

  [[nodiscard]] double narrowest_width() const {
    double w = 1.0;
    for (const auto& [hi, e] : cells_) w = std::min(w, hi - e.lo);
    return w;
  }

  /// Coverage of (0, 1] by disjoint cells with strictly increasing endpoints.
  [[nodiscard]] bool is_valid() const {
    double expected_lo = 0.0;
    for (const auto& [hi, e] : cells_) {
      if (e.lo != expected_lo || !(hi > e.lo)) return false;
      expected_lo = hi;
    }
    return expected_lo == 1.0;
  }

  template <class Fn>
  void for_each_cell(Fn&& fn) const {
    for (const auto& [hi, e] : cells_) fn(Interval{e.lo, hi}, e.gain);
  }

 private:
  struct Entry {
    double lo;
    double gain;
  };
  using Map = std::map<double, Entry>;

  [[nodiscard]] Map::const_iterator locate(double m) const {
    if (!(m > 0.0 && m <= 1.0)) throw std::invalid_argument("point outside (0, 1]");
    return cells_.lower_bound(m);
  }
  Map::iterator locate(double m) {
    if (!(m > 0.0 && m <= 1.0)) throw std::invalid_argument("point outside (0, 1]");
    return cells_.lower_bound(m);
  }

  Map cells_;  // keyed by right endpoint
  double atom_zero_gain_ = 0.0;
  double atom_one_gain_ = 0.0;
};

inline bool split_at(IntervalPartition& partition, Bid m) { return partition.split_at(m.value()); }

inline void apply_gains(IntervalPartition& partition, const IntervalGains& gains) {
  partition.apply_gains(gains);
}

/// Snapshot of the bid law: atom_prob on each of {0} and {1}, and with the
/// remaining mass a cell chosen with p proportional to |cell| exp(eta S),
/// then a uniform draw inside it.
class BidDistribution {
 public:
  BidDistribution(const IntervalPartition& partition, double eta, double atom_prob)
      : atom_prob_(atom_prob) {
    if (!(atom_prob >= 0.0 && atom_prob <= 0.5)) {
      throw std::invalid_argument("atom probability must lie in [0, 1/2]");
    }
    spans_.reserve(partition.size());
    probs_.reserve(partition.size());
    // Shift gains by their maximum before scaling so large S keep precision.
    double max_gain = -std::numeric_limits<double>::infinity();
    partition.for_each_cell([&](Interval, double gain) { max_gain = std::max(max_gain, gain); });
    double max_logit = -std::numeric_limits<double>::infinity();
    partition.for_each_cell([&](Interval span, double gain) {
      spans_.push_back(span);
      const double logit = std::log(span.width()) + eta * (gain - max_gain);
      probs_.push_back(logit);
      max_logit = std::max(max_logit, logit);
    });
    double total = 0.0;
    for (double& p : probs_) {
      p = std::exp(p - max_logit);
      total += p;
    }
    for (double& p : probs_) p /= total;
  }

  [[nodiscard]] double atom_prob() const noexcept { return atom_prob_; }
  [[nodiscard]] std::span<const Interval> intervals() const noexcept { return spans_; }
  [[nodiscard]] std::span<const double> probs() const noexcept { return probs_; }

  /// P(b > m) for m in (0, 1].
  [[nodiscard]] double prob_win(Bid m) const {
    if (atom_prob_ == 0.0) {
      throw std::invalid_argument("prob_win needs exploration atoms with positive mass");
    }
    const double x = m.value();
    if (!(x > 0.0)) throw std::invalid_argument("prob_win needs m in (0, 1]");
    double above = 0.0;
    for (std::size_t i = 0; i < spans_.size(); ++i) {
      const Interval& s = spans_[i];
      if (s.lo >= x) {
        above += probs_[i];
      } else if (s.hi > x) {
        above += probs_[i] * (s.hi - x) / s.width();
      }
    }
    return (x < 1.0 ? atom_prob_ : 0.0) + (1.0 - 2.0 * atom_prob_) * above;
  }

  /// P(b <= x).
  [[nodiscard]] double cdf(double x) const {
    if (x < 0.0) return 0.0;
    double inner = 0.0;
    for (std::size_t i = 0; i < spans_.size(); ++i) {
      const Interval& s = spans_[i];
      if (s.hi <= x) {
        inner += probs_[i];
      } else if (s.lo < x) {
        inner += probs_[i] * (x - s.lo) / s.width();
      }
    }
    return atom_prob_ + (1.0 - 2.0 * atom_prob_) * inner + (x >= 1.0 ? atom_prob_ : 0.0);
  }

  Bid sample(Rng& rng) const {
    const double u = uniform01(rng);
    if (u < atom_prob_) return Bid(1.0);
    if (u < 2.0 * atom_prob_) return Bid(0.0);
    double target = uniform01(rng);
    std::size_t i = 0;
    for (; i + 1 < probs_.size(); ++i) {
      if (target < probs_[i]) break;
      target -= probs_[i];
    }
    const Interval& s = spans_[i];
    return Bid(s.hi - s.width() * uniform01(rng));  // uniform on (lo, hi]
  }

 private:
  double atom_prob_;
  std::vector<Interval> spans_;
  std::vector<double> probs_;
};

inline double prob_win(const BidDistribution& dist, Bid m) { return dist.prob_win(m); }
inline Bid sample_bid(const BidDistribution& dist, Rng& rng) { return dist.sample(rng); }

namespace detail {

inline IntervalGains estimate_gains(const IntervalPartition& partition,
                                    const RoundOutcome& outcome, double p_win, double beta) {
  outcome.validate();
  if (!(p_win >= 0.0 && p_win < 1.0)) throw std::invalid_argument("p_win must lie in [0, 1)");
  if (outcome.won && p_win == 0.0) {
    throw std::logic_error("won a round that had zero winning probability");
  }
  const double m = outcome.opponent_max.value();
  const double win_numerator = (outcome.won ? *outcome.observed_value : 0.0) + beta;
  const double loss_numerator = (outcome.won ? 0.0 : m) + beta;
  const double above = p_win > 0.0 ? win_numerator / p_win : 0.0;
  const double below = loss_numerator / (1.0 - p_win);

  IntervalGains gains;
  gains.per_interval.reserve(partition.size());
  partition.for_each_cell([&](Interval span, double) {
    if (span.lo >= m) {
      if (p_win == 0.0) throw std::logic_error("cell above m with zero winning probability");
      gains.per_interval.push_back(above);
    } else if (span.hi <= m) {
      gains.per_interval.push_back(below);
    } else {
      throw std::logic_error("cell straddles the opponent bid; split before estimating");
    }
  });
  gains.atom_zero = below;
  gains.atom_one = m < 1.0 ? above : below;
  return gains;
}

}  // namespace detail

/// Importance-weighted unbiased estimate: v / P(win) above m after a win,
/// m / P(loss) below m after a loss, zero elsewhere.
inline IntervalGains estimate_gain_unbiased(const IntervalPartition& partition,
                                            const RoundOutcome& outcome, double p_win) {
  return detail::estimate_gains(partition, outcome, p_win, 0.0);
}

/// Same as the unbiased estimate with beta added to both numerators.
inline IntervalGains estimate_gain_biased(const IntervalPartition& partition,
                                          const RoundOutcome& outcome, double p_win,
                                          double beta) {
  if (!(beta >= 0.0 && beta < 1.0)) throw std::invalid_argument("beta must lie in [0, 1)");
  return detail::estimate_gains(partition, outcome, p_win, beta);
}

}  // namespace vickrey
