#pragma once

#include <variant>

#include "vickrey/auction.hpp"
#include "vickrey/exptree.hpp"
#include "vickrey/random.hpp"
#include "vickrey/ucbid.hpp"

namespace vickrey {

/// Bids a fixed, known value every round (the pseudo-regret benchmark).
class TruthfulBidder {
 public:
  explicit TruthfulBidder(double value) : bid_(value) {}
  Bid propose(Rng&) const { return bid_; }
  void observe(const RoundOutcome&) {}

 private:
  Bid bid_;
};

class ConstantBidder {
 public:
  explicit ConstantBidder(double value) : bid_(value) {}
  Bid propose(Rng&) const { return bid_; }
  void observe(const RoundOutcome&) {}

 private:
  Bid bid_;
};

using Strategy =
    std::variant<Ucbid, ExpTree, ExpTreeP, DoublingExpTree, TruthfulBidder, ConstantBidder>;

inline Bid propose(Strategy& s, Rng& rng) {
  return std::visit([&](auto& impl) { return impl.propose(rng); }, s);
}

inline void observe(Strategy& s, const RoundOutcome& outcome) {
  std::visit([&](auto& impl) { impl.observe(outcome); }, s);
}

}  // namespace vickrey
