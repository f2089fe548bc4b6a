// Repeated second-price auction primitives: bids, round outcomes, the shifted
// gain, regret increments, and the exact best-fixed-bid-in-hindsight oracle.
#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace vickrey {

/// A bid (own or opponent) in [0, 1].
class Bid {
 public:
  constexpr Bid() = default;
  explicit Bid(double value) : value_(value) {
    if (!(value >= 0.0 && value <= 1.0)) {
      std::ostringstream msg;
      msg << "bid " << value << " outside [0, 1]";
      throw std::invalid_argument(msg.str());
    }
  }

  [[nodiscard]] constexpr double value() const noexcept { return value_; }

  friend constexpr auto operator<=>(const Bid&, const Bid&) = default;

 private:
  double value_ = 0.0;
};

/// Opponent maxima live in (0, 1]; zero is excluded from the model.
inline Bid opponent_bid(double m) {
  if (!(m > 0.0)) {
    throw std::invalid_argument("opponent bid must be strictly positive");
  }
  return Bid(m);
}

/// One resolved auction round. `won` is strict (ties lose) and the value is
/// only present on a win.
struct RoundOutcome {
  std::int64_t t = 0;
  Bid bid;
  Bid opponent_max;
  bool won = false;
  std::optional<double> observed_value;

  /// Resolves a round given the true value; the value leaks into the outcome
  /// only when the bid strictly exceeds the opponent maximum.
  static RoundOutcome resolve(std::int64_t t, Bid bid, Bid opponent_max,
                              double true_value) {
    RoundOutcome out;
    out.t = t;
    out.bid = bid;
    out.opponent_max = opponent_max;
    out.won = bid.value() > opponent_max.value();
    if (out.won) out.observed_value = true_value;
    return out;
  }

  void validate() const {
    if (t < 1) throw std::invalid_argument("round index must be >= 1");
    if (won != (bid.value() > opponent_max.value())) {
      throw std::invalid_argument("won flag disagrees with bid > opponent_max");
    }
    if (won != observed_value.has_value()) {
      throw std::invalid_argument("value must be observed exactly on wins");
    }
    if (observed_value && !(*observed_value >= 0.0 && *observed_value <= 1.0)) {
      throw std::invalid_argument("observed value outside [0, 1]");
    }
  }
};

inline void require_gain_domain(double v, double m) {
  if (!(m > 0.0 && m <= 1.0)) {
    throw std::invalid_argument("opponent bid must lie in (0, 1]");
  }
  if (!(v >= 0.0 && v <= 1.0)) {
    throw std::invalid_argument("value must lie in [0, 1]");
  }
}

/// g(b) = (v - m) 1{b > m} + m. Always in [0, 1].
inline double shifted_gain(Bid bid, double v, Bid m) {
  require_gain_domain(v, m.value());
  return bid.value() > m.value() ? v : m.value();
}

/// Net utility of the bidder: (v - m) 1{b > m}.
inline double raw_utility(Bid bid, double v, Bid m) {
  require_gain_domain(v, m.value());
  return bid.value() > m.value() ? v - m.value() : 0.0;
}

/// Per-round pseudo-regret against the truthful bid b = v_mean. Never negative.
inline double pseudo_regret_increment(double v_mean, Bid m, Bid bid) {
  const double diff = v_mean - m.value();
  const double best = v_mean > m.value() ? 1.0 : 0.0;
  const double played = bid.value() > m.value() ? 1.0 : 0.0;
  return diff * (best - played);
}

/// Half-open interval (lo, hi].
struct Interval {
  double lo = 0.0;
  double hi = 1.0;
  [[nodiscard]] double width() const noexcept { return hi - lo; }
  [[nodiscard]] bool contains(double x) const noexcept { return x > lo && x <= hi; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

struct HindsightResult {
  double best_gain = 0.0;
  Interval witness;
};

namespace detail {

inline void check_sequences(std::span<const double> values,
                            std::span<const double> opponent_bids) {
  if (values.size() != opponent_bids.size()) {
    throw std::invalid_argument("values and opponent bids differ in length");
  }
  if (values.empty()) throw std::invalid_argument("empty round sequence");
  for (std::size_t i = 0; i < values.size(); ++i) {
    require_gain_domain(values[i], opponent_bids[i]);
  }
}

}  // namespace detail

/// Best fixed bid in hindsight for sum_t (v_t - m_t) 1{b > m_t}, computed by
/// sweeping the sorted distinct opponent bids. The returned witness is the
/// lowest maximizing cell; (0, min m] with gain 0 is always a candidate.
inline HindsightResult hindsight_best_fixed_bid(std::span<const double> values,
                                                std::span<const double> opponent_bids) {
  detail::check_sequences(values, opponent_bids);
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return opponent_bids[a] < opponent_bids[b];
  });

  HindsightResult best{0.0, Interval{0.0, opponent_bids[order.front()]}};
  double running = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    const double level = opponent_bids[order[i]];
    while (i < order.size() && opponent_bids[order[i]] == level) {
      running += values[order[i]] - level;
      ++i;
    }
    if (level >= 1.0) break;  // no bid in [0, 1] beats m = 1
    const double upper = i < order.size() ? opponent_bids[order[i]] : 1.0;
    if (running > best.best_gain) best = {running, Interval{level, upper}};
  }
  return best;
}

/// Cumulative hindsight regret after every prefix of a run:
/// max_b sum_{s<=t} (v_s - m_s) 1{b > m_s} - sum_{s<=t} u_s.
/// A segment tree over the distinct opponent bids keeps each step O(log T).
inline std::vector<double> hindsight_regret_curve(std::span<const double> values,
                                                  std::span<const double> opponent_bids,
                                                  std::span<const double> realized_utility) {
  detail::check_sequences(values, opponent_bids);
  if (realized_utility.size() != values.size()) {
    throw std::invalid_argument("utility sequence length mismatch");
  }
  std::vector<double> levels;
  levels.reserve(opponent_bids.size());
  for (double m : opponent_bids) {
    if (m < 1.0) levels.push_back(m);
  }
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

  struct Node {
    double sum = 0.0;
    double best_prefix = 0.0;
  };
  std::size_t size = 1;
  while (size < std::max<std::size_t>(levels.size(), 1)) size <<= 1;
  std::vector<Node> tree(2 * size);

  std::vector<double> curve;
  curve.reserve(values.size());
  double realized = 0.0;
  for (std::size_t t = 0; t < values.size(); ++t) {
    realized += realized_utility[t];
    const double m = opponent_bids[t];
    if (m < 1.0) {
      const auto leaf = static_cast<std::size_t>(
          std::lower_bound(levels.begin(), levels.end(), m) - levels.begin());
      std::size_t node = size + leaf;
      tree[node].sum += values[t] - m;
      tree[node].best_prefix = tree[node].sum;
      for (node >>= 1; node >= 1; node >>= 1) {
        const Node& l = tree[2 * node];
        const Node& r = tree[2 * node + 1];
        tree[node].sum = l.sum + r.sum;
        tree[node].best_prefix = std::max(l.best_prefix, l.sum + r.best_prefix);
      }
    }
    curve.push_back(std::max(0.0, tree[1].best_prefix) - realized);
  }
  return curve;
}

/// Append-only record of one run.
class GainLedger {
 public:
  explicit GainLedger(std::optional<double> value_mean = std::nullopt)
      : value_mean_(value_mean) {}

  void append(const RoundOutcome& outcome) {
    outcome.validate();
    if (outcome.t != static_cast<std::int64_t>(rounds_.size()) + 1) {
      throw std::invalid_argument("round " + std::to_string(outcome.t) +
                                  " appended out of sequence");
    }
    const double m = outcome.opponent_max.value();
    realized_gain_ += outcome.won ? *outcome.observed_value : m;
    if (value_mean_) {
      instant_regret_ += pseudo_regret_increment(*value_mean_, outcome.opponent_max,
                                                 outcome.bid);
    }
    rounds_.push_back(outcome);
  }

  [[nodiscard]] std::span<const RoundOutcome> rounds() const noexcept { return rounds_; }
  [[nodiscard]] double cumulative_realized_gain() const noexcept { return realized_gain_; }
  [[nodiscard]] std::optional<double> cumulative_instant_regret() const {
    if (!value_mean_) return std::nullopt;
    return instant_regret_;
  }

 private:
  std::optional<double> value_mean_;
  std::vector<RoundOutcome> rounds_;
  double realized_gain_ = 0.0;
  double instant_regret_ = 0.0;
};

}  // namespace vickrey
