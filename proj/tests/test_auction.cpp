#include <gtest/gtest.h>

#include <random>
#include <stdexcept>
#include <vector>

#include "oracles.hpp"
#include "vickrey/auction.hpp"

using namespace vickrey;

TEST(Bid, RejectsOutsideUnitInterval) {
  EXPECT_THROW(Bid(-0.1), std::invalid_argument);
  EXPECT_THROW(Bid(1.5), std::invalid_argument);
  EXPECT_THROW(Bid(std::nan("")), std::invalid_argument);
  EXPECT_NO_THROW(Bid(0.0));
  EXPECT_NO_THROW(Bid(1.0));
  EXPECT_THROW(opponent_bid(0.0), std::invalid_argument);
  EXPECT_LT(Bid(0.2), Bid(0.3));
}

TEST(ShiftedGain, WinLossAndTie) {
  EXPECT_DOUBLE_EQ(shifted_gain(Bid(0.7), 0.9, Bid(0.5)), 0.9);
  EXPECT_DOUBLE_EQ(shifted_gain(Bid(0.3), 0.9, Bid(0.5)), 0.5);
  EXPECT_DOUBLE_EQ(shifted_gain(Bid(0.5), 0.9, Bid(0.5)), 0.5);
  EXPECT_THROW(shifted_gain(Bid(0.5), 1.2, Bid(0.5)), std::invalid_argument);
}

TEST(RawUtility, SignOfWinnersCurse) {
  EXPECT_NEAR(raw_utility(Bid(0.7), 0.9, Bid(0.5)), 0.4, 1e-15);
  EXPECT_DOUBLE_EQ(raw_utility(Bid(0.3), 0.9, Bid(0.5)), 0.0);
  EXPECT_NEAR(raw_utility(Bid(0.7), 0.2, Bid(0.5)), -0.3, 1e-15);
  for (double b : {0.1, 0.4, 0.6, 0.95}) {
    EXPECT_NEAR(shifted_gain(Bid(b), 0.6, Bid(0.45)) - raw_utility(Bid(b), 0.6, Bid(0.45)), 0.45,
                1e-15);
  }
}

TEST(PseudoRegret, Increment) {
  EXPECT_NEAR(pseudo_regret_increment(0.5, Bid(0.7), Bid(0.9)), 0.2, 1e-15);
  EXPECT_NEAR(pseudo_regret_increment(0.5, Bid(0.3), Bid(0.2)), 0.2, 1e-15);
  EXPECT_DOUBLE_EQ(pseudo_regret_increment(0.5, Bid(0.3), Bid(0.6)), 0.0);
}

TEST(RoundOutcome, ValueOnlyOnWins) {
  const auto won = RoundOutcome::resolve(1, Bid(0.6), Bid(0.5), 0.8);
  EXPECT_TRUE(won.won);
  ASSERT_TRUE(won.observed_value);
  EXPECT_EQ(*won.observed_value, 0.8);
  const auto tie = RoundOutcome::resolve(2, Bid(0.5), Bid(0.5), 0.8);
  EXPECT_FALSE(tie.won);
  EXPECT_FALSE(tie.observed_value);

  RoundOutcome bad = won;
  bad.observed_value.reset();
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(Hindsight, HandExamples) {
  const std::vector<double> v{0.8, 0.2, 0.9}, m{0.5, 0.5, 0.6};
  const auto r = hindsight_best_fixed_bid(v, m);
  EXPECT_NEAR(r.best_gain, 0.3, 1e-12);
  EXPECT_DOUBLE_EQ(r.witness.lo, 0.6);
  EXPECT_DOUBLE_EQ(r.witness.hi, 1.0);

  const std::vector<double> v1{0.2}, m1{0.5};
  const auto r1 = hindsight_best_fixed_bid(v1, m1);
  EXPECT_DOUBLE_EQ(r1.best_gain, 0.0);
  EXPECT_DOUBLE_EQ(r1.witness.lo, 0.0);
  EXPECT_DOUBLE_EQ(r1.witness.hi, 0.5);
}

TEST(Hindsight, ConstantValueAttainedAtTruthfulBid) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  for (int rep = 0; rep < 50; ++rep) {
    const double value = u(rng);
    std::vector<double> v(40, value), m(40);
    double expected = 0.0;
    for (double& x : m) {
      x = u(rng);
      expected += std::max(value - x, 0.0);
    }
    EXPECT_NEAR(hindsight_best_fixed_bid(v, m).best_gain, expected, 1e-12);
  }
}

TEST(Hindsight, MatchesBruteForceOnRandomInstances) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> len(1, 60);
  for (int rep = 0; rep < 300; ++rep) {
    const int n = len(rng);
    std::vector<double> v(n), m(n);
    for (int i = 0; i < n; ++i) {
      v[i] = u(rng);
      // a coarse grid forces repeated opponent bids
      m[i] = rep % 2 ? std::ceil(u(rng) * 8.0) / 8.0 : std::max(u(rng), 1e-3);
    }
    const auto r = hindsight_best_fixed_bid(v, m);
    EXPECT_NEAR(r.best_gain, oracle::brute_force_hindsight(v, m), 1e-12);
    // the witness cell really attains the optimum
    EXPECT_NEAR(oracle::fixed_bid_utility(r.witness.hi, v, m), r.best_gain, 1e-12);
  }
}

TEST(Hindsight, RegretCurveMatchesPrefixRecomputation) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int n = 120;
  std::vector<double> v(n), m(n), util(n);
  for (int i = 0; i < n; ++i) {
    v[i] = u(rng);
    m[i] = i % 7 == 0 ? 1.0 : std::ceil(u(rng) * 20.0) / 20.0;
    const double b = u(rng);
    util[i] = b > m[i] ? v[i] - m[i] : 0.0;
  }
  const auto curve = hindsight_regret_curve(v, m, util);
  double realized = 0.0;
  for (int t = 0; t < n; ++t) {
    realized += util[t];
    const std::span<const double> vp(v.data(), t + 1), mp(m.data(), t + 1);
    EXPECT_NEAR(curve[t], oracle::brute_force_hindsight(vp, mp) - realized, 1e-12) << t;
  }
}

TEST(Hindsight, RejectsBadInput) {
  const std::vector<double> v{0.5}, m{0.0}, empty;
  EXPECT_THROW(hindsight_best_fixed_bid(v, m), std::invalid_argument);
  EXPECT_THROW(hindsight_best_fixed_bid(empty, empty), std::invalid_argument);
}

TEST(GainLedger, AccumulatesAndChecksSequence) {
  GainLedger ledger(0.5);
  ledger.append(RoundOutcome::resolve(1, Bid(0.9), Bid(0.7), 1.0));
  ledger.append(RoundOutcome::resolve(2, Bid(0.2), Bid(0.3), 0.0));
  EXPECT_NEAR(ledger.cumulative_realized_gain(), 1.3, 1e-15);
  EXPECT_NEAR(*ledger.cumulative_instant_regret(), 0.4, 1e-15);
  EXPECT_THROW(ledger.append(RoundOutcome::resolve(4, Bid(0.2), Bid(0.3), 0.0)),
               std::invalid_argument);
  EXPECT_FALSE(GainLedger().cumulative_instant_regret());
}
