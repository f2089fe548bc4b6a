// ExpTree, ExpTree.P and the doubling-trick wrapper around ExpTree.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vickrey/auction.hpp"
#include "vickrey/partition.hpp"
#include "vickrey/random.hpp"

namespace vickrey {

/// Smallest learning rate handed out by the configure functions.
inline constexpr double kMinEta = 1e-6;

namespace detail {

inline double clamp_degenerate_eta(double eta, const char* who) {
  if (eta < kMinEta) {
    std::clog << "warning: " << who << ": degenerate learning rate " << eta << " clamped to "
              << kMinEta << '\n';
    return kMinEta;
  }
  return eta;
}

}  // namespace detail

/// eta = min(sqrt(ln(1/delta) / T) / 2, 1/2).
///
/// delta is the width of a reference cell of the final partition. The regret
/// guarantee for ExpTree is stated for the widest cell meeting the set of
/// optimal bids; callers that only know the narrowest cell may pass that
/// instead, which yields a smaller (more conservative) rate.
inline double exptree_configure(std::int64_t horizon, double delta_circ) {
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  if (!(delta_circ > 0.0 && delta_circ <= 1.0)) {
    throw std::invalid_argument("delta must lie in (0, 1]");
  }
  const double eta =
      std::min(0.5 * std::sqrt(std::log(1.0 / delta_circ) / static_cast<double>(horizon)), 0.5);
  return detail::clamp_degenerate_eta(eta, "exptree_configure");
}

struct ExpTreePParams {
  double eta = 0.0;
  double gamma = 0.0;
  double beta = 0.0;
};

/// eta = min(sqrt(ln(1/delta) / 8T), 1/8), gamma = 2 eta, beta = sqrt(ln T / 2T),
/// with delta the narrowest cell of the final partition.
inline ExpTreePParams exptreep_configure(std::int64_t horizon, double delta_circ) {
  if (horizon < 2) throw std::invalid_argument("horizon must be >= 2");
  if (!(delta_circ > 0.0 && delta_circ <= 1.0)) {
    throw std::invalid_argument("delta must lie in (0, 1]");
  }
  const auto T = static_cast<double>(horizon);
  ExpTreePParams p;
  p.eta = detail::clamp_degenerate_eta(
      std::min(std::sqrt(std::log(1.0 / delta_circ) / (8.0 * T)), 0.125), "exptreep_configure");
  p.gamma = 2.0 * p.eta;
  p.beta = std::sqrt(std::log(T) / (2.0 * T));
  return p;
}

namespace detail {

/// Shared round structure: draw from the current mixture, then on feedback
/// split at m, estimate with the drawing distribution's P(win), and update.
template <class Derived>
class ExpWeightsBidder {
 public:
  Bid propose(Rng& rng) {
    if (pending_bid_) throw std::logic_error("propose called twice without observe");
    distribution_.emplace(partition_, eta_, self().atom_prob());
    pending_bid_ = distribution_->sample(rng);
    return *pending_bid_;
  }

  void observe(const RoundOutcome& outcome) {
    if (!pending_bid_) throw std::logic_error("observe called without a pending bid");
    if (outcome.t != round_ + 1) throw std::logic_error("outcome out of sequence");
    if (outcome.bid != *pending_bid_) throw std::logic_error("outcome bid differs from proposal");
    outcome.validate();
    last_p_win_ = distribution_->prob_win(outcome.opponent_max);
    partition_.split_at(outcome.opponent_max.value());
    last_gains_ = self().estimate(partition_, outcome, last_p_win_);
    partition_.apply_gains(last_gains_);
    pending_bid_.reset();
    ++round_;
  }

  [[nodiscard]] const IntervalPartition& partition() const noexcept { return partition_; }
  [[nodiscard]] double eta() const noexcept { return eta_; }
  [[nodiscard]] std::int64_t round() const noexcept { return round_; }
  /// P(win) used by the most recent estimate.
  [[nodiscard]] double last_p_win() const noexcept { return last_p_win_; }
  [[nodiscard]] const IntervalGains& last_gains() const noexcept { return last_gains_; }
  /// Distribution the most recent bid was drawn from.
  [[nodiscard]] const std::optional<BidDistribution>& last_distribution() const noexcept {
    return distribution_;
  }

 protected:
  explicit ExpWeightsBidder(double eta) : eta_(eta) {}

  void set_eta(double eta) { eta_ = eta; }
  void reset_gains() { partition_.reset_gains(); }

 private:
  Derived& self() { return static_cast<Derived&>(*this); }

  IntervalPartition partition_;
  double eta_;
  std::int64_t round_ = 0;
  std::optional<BidDistribution> distribution_;
  std::optional<Bid> pending_bid_;
  double last_p_win_ = 0.0;
  IntervalGains last_gains_;
};

}  // namespace detail

/// Exponential weights on the growing partition with unbiased estimates and
/// exploration atoms of mass eta at 0 and 1.
class ExpTree : public detail::ExpWeightsBidder<ExpTree> {
 public:
  explicit ExpTree(double eta) : ExpWeightsBidder(check(eta)) {}

  [[nodiscard]] double atom_prob() const noexcept { return eta(); }

  static IntervalGains estimate(const IntervalPartition& partition, const RoundOutcome& outcome,
                                double p_win) {
    return estimate_gain_unbiased(partition, outcome, p_win);
  }

  /// Used by the doubling wrapper: zero all weights and switch the rate.
  void restart(double eta) {
    set_eta(check(eta));
    reset_gains();
  }

 private:
  static double check(double eta) {
    if (!(eta > 0.0 && eta <= 0.5)) throw std::invalid_argument("ExpTree needs eta in (0, 1/2]");
    return eta;
  }
};

/// ExpTree with atoms of mass gamma and beta-biased estimates.
class ExpTreeP : public detail::ExpWeightsBidder<ExpTreeP> {
 public:
  explicit ExpTreeP(const ExpTreePParams& params)
      : ExpWeightsBidder(params.eta), gamma_(params.gamma), beta_(params.beta) {
    if (!(params.eta > 0.0 && params.eta <= 0.125)) {
      throw std::invalid_argument("ExpTree.P needs eta in (0, 1/8]");
    }
    if (!(params.gamma > 0.0 && params.gamma <= 0.25)) {
      throw std::invalid_argument("ExpTree.P needs gamma in (0, 1/4]");
    }
    if (!(params.beta >= 0.0 && params.beta < 1.0)) {
      throw std::invalid_argument("ExpTree.P needs beta in [0, 1)");
    }
  }

  [[nodiscard]] double atom_prob() const noexcept { return gamma_; }
  [[nodiscard]] double gamma() const noexcept { return gamma_; }
  [[nodiscard]] double beta() const noexcept { return beta_; }

  IntervalGains estimate(const IntervalPartition& partition, const RoundOutcome& outcome,
                         double p_win) const {
    return estimate_gain_biased(partition, outcome, p_win, beta_);
  }

 private:
  double gamma_;
  double beta_;
};

/// ExpTree run without knowing T or delta. Two registers bound the stage
/// length and ln(1/narrowest cell); breaching either doubles it and restarts
/// with weights reset and the partition kept.
class DoublingExpTree {
 public:
  enum class Breach { none, horizon, gap };

  struct Stage {
    std::int64_t first_round = 1;
    std::int64_t last_round = 0;
    double horizon_bound = 1.0;
    double gap_bound = 1.0;
    double eta = 0.5;
    Breach ended_by = Breach::none;
  };

  DoublingExpTree() : inner_(eta_for(1.0, 1.0)) { stages_.push_back({}); }

  static double eta_for(double horizon_bound, double gap_bound) {
    return std::min(0.5 * std::sqrt(gap_bound / horizon_bound), 0.5);
  }

  Bid propose(Rng& rng) { return inner_.propose(rng); }

  void observe(const RoundOutcome& outcome) {
    inner_.observe(outcome);
    ++elapsed_;
    stages_.back().last_round = outcome.t;

    Breach breach = Breach::none;
    if (static_cast<double>(elapsed_) > horizon_bound_) {
      horizon_bound_ *= 2.0;
      breach = Breach::horizon;
    }
    const double log_gap = std::log(1.0 / inner_.partition().narrowest_width());
    if (log_gap > gap_bound_) {
      while (log_gap > gap_bound_) gap_bound_ *= 2.0;
      breach = Breach::gap;
    }
    if (breach != Breach::none) {
      stages_.back().ended_by = breach;
      inner_.restart(eta_for(horizon_bound_, gap_bound_));
      elapsed_ = 0;
      stages_.push_back({outcome.t + 1, outcome.t, horizon_bound_, gap_bound_, inner_.eta(),
                         Breach::none});
    }
  }

  [[nodiscard]] const ExpTree& inner() const noexcept { return inner_; }
  [[nodiscard]] double horizon_bound() const noexcept { return horizon_bound_; }
  [[nodiscard]] double gap_bound() const noexcept { return gap_bound_; }
  [[nodiscard]] const std::vector<Stage>& stages() const noexcept { return stages_; }

 private:
  ExpTree inner_;
  double horizon_bound_ = 1.0;
  double gap_bound_ = 1.0;
  std::int64_t elapsed_ = 0;
  std::vector<Stage> stages_;
};

}  // namespace vickrey
