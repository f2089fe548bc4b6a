// UCBid: bid an upper confidence bound on the mean value observed on wins.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "vickrey/auction.hpp"
#include "vickrey/random.hpp"

namespace vickrey {

struct UcbidState {
  std::int64_t t = 0;      // rounds elapsed
  std::int64_t omega = 0;  // auctions won
  double v_bar = 0.0;      // mean value over wins; meaningful once omega >= 1
};

/// Bid for round t + 1. Bids 1 until the first win; afterwards
/// min(v_bar + sqrt(3 ln(t + 1) / (2 omega)), 1), i.e. the log of the index of
/// the round being bid on.
inline Bid ucbid_next_bid(const UcbidState& state) {
  if (state.t == 0 || state.omega == 0) return Bid(1.0);
  const double round = static_cast<double>(state.t + 1);
  const double radius = std::sqrt(3.0 * std::log(round) / (2.0 * static_cast<double>(state.omega)));
  return Bid(std::min(state.v_bar + radius, 1.0));
}

/// Folds one round into the state. Opponent bids are ignored.
inline UcbidState ucbid_observe(UcbidState state, const RoundOutcome& outcome) {
  if (outcome.t != state.t + 1) {
    throw std::invalid_argument("ucbid: outcome for round " + std::to_string(outcome.t) +
                                " after " + std::to_string(state.t) + " rounds");
  }
  outcome.validate();
  state.t = outcome.t;
  if (outcome.won) {
    const double w = static_cast<double>(state.omega);
    state.v_bar = (w * state.v_bar + *outcome.observed_value) / (w + 1.0);
    ++state.omega;
  }
  return state;
}

class Ucbid {
 public:
  Bid propose(Rng& /*rng*/) const { return ucbid_next_bid(state_); }
  void observe(const RoundOutcome& outcome) { state_ = ucbid_observe(state_, outcome); }
  [[nodiscard]] const UcbidState& state() const noexcept { return state_; }

 private:
  UcbidState state_;
};

}  // namespace vickrey
