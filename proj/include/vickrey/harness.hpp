// Seeded Monte Carlo replication of the repeated-auction protocol.
#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "vickrey/auction.hpp"
#include "vickrey/config.hpp"
#include "vickrey/csv.hpp"
#include "vickrey/environments.hpp"
#include "vickrey/random.hpp"
#include "vickrey/stats.hpp"
#include "vickrey/strategy.hpp"

namespace vickrey {

class RunError : public std::runtime_error {
 public:
  RunError(int replication, std::int64_t round, const std::string& what)
      : std::runtime_error("replication " + std::to_string(replication) + " round " +
                           std::to_string(round) + ": " + what),
        replication_(replication),
        round_(round) {}
  [[nodiscard]] int replication() const noexcept { return replication_; }
  [[nodiscard]] std::int64_t round() const noexcept { return round_; }

 private:
  int replication_;
  std::int64_t round_;
};

struct ReplicationSummary {
  int replication = 0;
  std::int64_t rounds = 0;
  double realized_utility = 0.0;  // sum of (v - m) 1{won}
  double realized_gain = 0.0;     // sum of shifted gains
  HindsightResult hindsight;
  double hindsight_regret = 0.0;
  std::optional<double> pseudo_regret;
  std::int64_t underbid_rounds = 0;  // rounds with bid < known value mean
  double narrowest_width = 1.0;      // final partition, tree strategies only
  /// ExpTree.P only: max over bids of (true cumulative gain - estimated one).
  std::optional<double> gain_shortfall;
  std::optional<double> beta;
  double final_regret = 0.0;  // in the configured regret mode
};

struct ReplicationResult {
  ReplicationSummary summary;
  std::vector<RoundRecord> rounds;
  std::vector<double> checkpoint_regret;
};

struct RunOptions {
  bool record_rounds = true;
  std::vector<std::int64_t> checkpoints;  // rounds at which to sample cumulative regret
};

namespace detail {

/// max over representative bids of G(b) - G~(b) for a finished ExpTree.P run:
/// every final cell (its right endpoint) and the bid 0.
inline double gain_shortfall(const ExpTreeP& strategy, std::span<const double> values,
                            std::span<const double> opponents) {
  std::vector<std::pair<double, double>> by_m;  // (m, v - m)
  by_m.reserve(values.size());
  double base = 0.0;
  for (std::size_t t = 0; t < values.size(); ++t) {
    base += opponents[t];
    by_m.emplace_back(opponents[t], values[t] - opponents[t]);
  }
  std::sort(by_m.begin(), by_m.end());
  std::vector<double> prefix(by_m.size() + 1, 0.0);
  for (std::size_t i = 0; i < by_m.size(); ++i) prefix[i + 1] = prefix[i] + by_m[i].second;
  const auto true_gain = [&](double b) {
    const auto below = std::lower_bound(by_m.begin(), by_m.end(), std::pair{b, -1e300});
    return base + prefix[static_cast<std::size_t>(below - by_m.begin())];
  };
  double worst = true_gain(0.0) - strategy.partition().atom_zero_gain();
  strategy.partition().for_each_cell([&](Interval span, double estimated) {
    worst = std::max(worst, true_gain(span.hi) - estimated);
  });
  return worst;
}

}  // namespace detail

/// Runs one replication. Determined entirely by (config, replication).
inline ReplicationResult run_replication(const RunConfig& cfg, int replication,
                                         const RunOptions& options = {}) {
  const auto rep = static_cast<std::uint64_t>(replication);
  Rng strategy_rng(derive_seed(cfg.master_seed, rep, Stream::strategy));
  Rng opponent_rng(derive_seed(cfg.master_seed, rep, Stream::opponent));
  Rng value_rng(derive_seed(cfg.master_seed, rep, Stream::value));

  Environment env = cfg.make_environment();
  Strategy strategy = make_strategy(cfg);
  const std::optional<double> v_mean = env.value_mean();
  GainLedger ledger(v_mean);

  const auto T = static_cast<std::size_t>(cfg.horizon);
  std::vector<double> values, opponents, utility, pseudo_curve;
  values.reserve(T);
  opponents.reserve(T);
  utility.reserve(T);
  std::vector<double> bids;
  if (options.record_rounds) bids.reserve(T);

  ReplicationResult result;
  ReplicationSummary& s = result.summary;
  s.replication = replication;
  double pseudo = 0.0;

  for (std::int64_t t = 1; t <= cfg.horizon; ++t) {
    try {
      const Bid bid = propose(strategy, strategy_rng);
      const Bid m = env.next_opponent_bid(ledger.rounds(), opponent_rng);
      const double v = env.sample_value(ledger.rounds(), value_rng);
      const RoundOutcome outcome = RoundOutcome::resolve(t, bid, m, v);
      observe(strategy, outcome);
      env.record(outcome);
      ledger.append(outcome);

      values.push_back(v);
      opponents.push_back(m.value());
      utility.push_back(raw_utility(bid, v, m));
      if (options.record_rounds) bids.push_back(bid.value());
      if (v_mean) {
        pseudo += pseudo_regret_increment(*v_mean, m, bid);
        if (bid.value() < *v_mean) ++s.underbid_rounds;
        if (cfg.regret == RegretMode::pseudo) pseudo_curve.push_back(pseudo);
      }
    } catch (const std::exception& e) {
      throw RunError(replication, t, e.what());
    }
  }

  s.rounds = cfg.horizon;
  s.realized_gain = ledger.cumulative_realized_gain();
  s.realized_utility = std::accumulate(utility.begin(), utility.end(), 0.0);
  s.hindsight = hindsight_best_fixed_bid(values, opponents);
  s.hindsight_regret = s.hindsight.best_gain - s.realized_utility;
  if (v_mean) s.pseudo_regret = pseudo;
  s.final_regret = cfg.regret == RegretMode::pseudo ? pseudo : s.hindsight_regret;

  std::visit(
      [&](const auto& impl) {
        using T = std::decay_t<decltype(impl)>;
        if constexpr (std::is_same_v<T, ExpTree> || std::is_same_v<T, ExpTreeP>) {
          s.narrowest_width = impl.partition().narrowest_width();
        } else if constexpr (std::is_same_v<T, DoublingExpTree>) {
          s.narrowest_width = impl.inner().partition().narrowest_width();
        }
        if constexpr (std::is_same_v<T, ExpTreeP>) {
          s.gain_shortfall = detail::gain_shortfall(impl, values, opponents);
          s.beta = impl.beta();
        }
      },
      strategy);

  const bool need_curve = options.record_rounds || !options.checkpoints.empty();
  std::vector<double> curve;
  if (need_curve) {
    curve = cfg.regret == RegretMode::pseudo
                ? std::move(pseudo_curve)
                : hindsight_regret_curve(values, opponents, utility);
  }
  for (std::int64_t c : options.checkpoints) {
    if (c < 1 || c > cfg.horizon) throw std::invalid_argument("checkpoint outside the horizon");
    result.checkpoint_regret.push_back(curve[static_cast<std::size_t>(c - 1)]);
  }
  if (options.record_rounds) {
    result.rounds.reserve(T);
    const auto rounds = ledger.rounds();
    for (std::size_t i = 0; i < T; ++i) {
      const RoundOutcome& o = rounds[i];
      result.rounds.push_back({replication, o.t, bids[i], opponents[i], o.won, o.observed_value,
                               o.won ? *o.observed_value : opponents[i], curve[i]});
    }
  }
  return result;
}

/// Worker count: VICKREY_BANDIT_THREADS wins over the requested value.
inline unsigned resolve_threads(unsigned requested) {
  if (const char* env = std::getenv("VICKREY_BANDIT_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && n > 0) return static_cast<unsigned>(n);
  }
  return std::max(1u, requested);
}

/// Runs all replications on a pool of `threads` workers. Results are indexed
/// by replication, so the output is independent of scheduling.
inline std::vector<ReplicationResult> run_experiment(const RunConfig& cfg,
                                                     const RunOptions& options = {},
                                                     unsigned threads = 1) {
  std::vector<ReplicationResult> results(static_cast<std::size_t>(cfg.replications));
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const auto worker = [&] {
    for (int r = next++; r < cfg.replications; r = next++) {
      try {
        results[static_cast<std::size_t>(r)] = run_replication(cfg, r, options);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = cfg.replications;
      }
    }
  };
  const unsigned n = std::min<unsigned>(std::max(1u, threads),
                                        static_cast<unsigned>(cfg.replications));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < n; ++i) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return results;
}

/// All round records of an experiment, ordered by replication then round.
inline std::vector<RoundRecord> collect_rounds(const std::vector<ReplicationResult>& results) {
  std::vector<RoundRecord> out;
  for (const auto& r : results) out.insert(out.end(), r.rounds.begin(), r.rounds.end());
  return out;
}

struct CurvePoint {
  std::int64_t t = 0;
  double mean = 0.0;
  double stderr = 0.0;
  double median = 0.0;
};

/// Mean, standard error and median of cumulative regret at each checkpoint.
inline std::vector<CurvePoint> aggregate_checkpoints(const std::vector<ReplicationResult>& results,
                                                     std::span<const std::int64_t> checkpoints) {
  std::vector<CurvePoint> out;
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    std::vector<double> xs;
    xs.reserve(results.size());
    for (const auto& r : results) xs.push_back(r.checkpoint_regret.at(i));
    out.push_back({checkpoints[i], mean_of(xs), stderr_of(xs), median_of(xs)});
  }
  return out;
}

struct ShortfallReport {
  long violations = 0;
  long replications = 0;
  double threshold = 0.0;  // ln(T / delta) / beta
  double rate = 0.0;
  WilsonInterval interval;
};

/// Fraction of ExpTree.P replications where some bid's true cumulative gain
/// exceeds its estimated one by more than ln(T / delta) / beta.
inline ShortfallReport shortfall_check(const RunConfig& cfg, double delta, unsigned threads = 1) {
  if (cfg.strategy.kind != "exptree_p") throw std::invalid_argument("shortfall_check needs exptree_p");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
  RunOptions options;
  options.record_rounds = false;
  const auto results = run_experiment(cfg, options, threads);
  ShortfallReport report;
  report.replications = static_cast<long>(results.size());
  const double beta = *results.front().summary.beta;
  report.threshold = std::log(static_cast<double>(cfg.horizon) / delta) / beta;
  for (const auto& r : results) {
    if (*r.summary.gain_shortfall > report.threshold) ++report.violations;
  }
  report.rate = static_cast<double>(report.violations) / static_cast<double>(report.replications);
  report.interval = wilson_interval(report.violations, report.replications);
  return report;
}

}  // namespace vickrey
