// Acceptance criteria 1-8. Each check runs a fixed experiment and compares it
// with a bound or an independent reference; the result is one PASS/FAIL line.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "../oracles.hpp"
#include "vickrey/config.hpp"
#include "vickrey/csv.hpp"
#include "vickrey/harness.hpp"
#include "vickrey/partition.hpp"
#include "vickrey/stats.hpp"

namespace acceptance {

using nlohmann::json;
using namespace vickrey;

struct Options {
  std::uint64_t seed = 20240611;
  unsigned threads = 1;
};

struct Verdict {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;

  [[nodiscard]] std::string line() const {
    return std::string(pass ? "[PASS]" : "[FAIL]") + " criterion " + std::to_string(id) + " " +
           name + ": " + detail;
  }
};

namespace detail {

inline std::string fmt(double x, int precision = 4) {
  std::ostringstream s;
  s << std::setprecision(precision) << x;
  return s.str();
}

inline json two_point_opponents() {
  return {{"kind", "iid"}, {"distribution", {{"kind", "discrete"}, {"values", {0.3, 0.8}}}}};
}

inline json bernoulli(double p) { return {{"kind", "bernoulli"}, {"p", p}}; }

inline RunConfig make(std::int64_t T, int R, std::uint64_t seed, json values, json opponents,
                      json strategy, const char* regret) {
  return parse_config(json{{"horizon", T},
                           {"replications", R},
                           {"master_seed", seed},
                           {"environment", {{"values", values}, {"opponents", opponents}}},
                           {"strategy", strategy},
                           {"regret", regret}});
}

/// Oblivious environment shared by criteria 3-5: m cycles through
/// {1/4, 1/2, 3/4}; v is one fixed pseudo-random sequence, the same for every
/// replication.
struct Oblivious {
  json values;
  json opponents;
  std::vector<double> v;
  std::vector<double> m;
};

inline Oblivious oblivious(std::int64_t T) {
  Oblivious env;
  std::mt19937_64 rng(0x0b11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::int64_t t = 0; t < T; ++t) {
    env.v.push_back(u(rng));
    env.m.push_back(0.25 * static_cast<double>(t % 3 + 1));
  }
  env.values = {{"kind", "fixed_sequence"}, {"values", env.v}};
  env.opponents = {{"kind", "fixed_sequence"}, {"values", {0.25, 0.5, 0.75}}};
  return env;
}

/// Cells of the final partition. Breakpoints are exactly the distinct
/// opponent bids, so the partition is rebuilt from the opponent sequence.
inline std::vector<Interval> final_cells(std::vector<double> m) {
  m.push_back(0.0);
  m.push_back(1.0);
  std::sort(m.begin(), m.end());
  m.erase(std::unique(m.begin(), m.end()), m.end());
  std::vector<Interval> cells;
  for (std::size_t i = 1; i < m.size(); ++i) cells.push_back({m[i - 1], m[i]});
  return cells;
}

/// Width of the widest final cell on which the hindsight gain is maximal.
inline double widest_optimal_width(const std::vector<double>& v, const std::vector<double>& m) {
  const auto cells = final_cells(m);
  std::vector<double> gain;
  for (const auto& c : cells) gain.push_back(oracle::fixed_bid_utility(c.hi, v, m));
  const double best = *std::max_element(gain.begin(), gain.end());
  double width = 0.0;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (gain[i] >= best - 1e-9) width = std::max(width, cells[i].width());
  }
  return width;
}

inline double narrowest_width(const std::vector<double>& m) {
  double w = 1.0;
  for (const auto& c : final_cells(m)) w = std::min(w, c.width());
  return w;
}

inline std::vector<double> final_regrets(const std::vector<ReplicationResult>& results) {
  std::vector<double> out;
  for (const auto& r : results) out.push_back(r.summary.final_regret);
  return out;
}

}  // namespace detail

// 1. UCBid pseudo-regret under a gap of 0.3 around v = 0.5.
inline Verdict criterion1(const Options& o) {
  Verdict out{1, "ucbid gap bound", false, {}};
  const std::int64_t T = 100'000;
  const auto cfg = detail::make(T, 200, o.seed, detail::bernoulli(0.5),
                                detail::two_point_opponents(), {{"kind", "ucbid"}}, "pseudo");
  RunOptions opts;
  opts.record_rounds = false;
  opts.checkpoints = {1000, 10'000, 100'000};
  const auto results = run_experiment(cfg, opts, o.threads);
  const auto curve = aggregate_checkpoints(results, opts.checkpoints);

  const double gap_bound = 3.0 + 12.0 * std::log(static_cast<double>(T)) / 0.3;
  bool pass = curve.back().mean <= gap_bound;
  std::ostringstream d;
  d << "mean R(1e5)=" << detail::fmt(curve.back().mean) << " <= " << detail::fmt(gap_bound);
  for (const auto& p : curve) {
    const double t = static_cast<double>(p.t);
    const double root = 2.0 * std::sqrt(6.0 * t * std::log(t));
    pass = pass && p.mean <= root;
    d << "; R(" << p.t << ")=" << detail::fmt(p.mean) << " vs " << detail::fmt(root);
  }
  out.pass = pass;
  out.detail = d.str();
  return out;
}

// 2. UCBid regret growth under the margin condition.
inline Verdict criterion2(const Options& o) {
  Verdict out{2, "ucbid margin rates", false, {}};
  RunOptions opts;
  opts.record_rounds = false;
  for (int k = 12; k <= 18; ++k) opts.checkpoints.push_back(std::int64_t{1} << k);
  const std::int64_t T = opts.checkpoints.back();

  bool pass = true;
  std::ostringstream d;
  for (double alpha : {0.25, 0.5, 0.75}) {
    const auto cfg = detail::make(T, 100, o.seed, detail::bernoulli(0.5),
                                  {{"kind", "mu_alpha"}, {"alpha", alpha}, {"eps", 0.1}},
                                  {{"kind", "ucbid"}}, "pseudo");
    const auto curve = aggregate_checkpoints(run_experiment(cfg, opts, o.threads), opts.checkpoints);
    std::vector<std::pair<double, double>> series;
    for (const auto& p : curve) series.emplace_back(static_cast<double>(p.t), p.mean);
    const auto fit = fit_regret_slope(series);
    const double target = (1.0 - alpha) / 2.0;
    const bool ok = fit.slope >= target - 0.05 && fit.slope <= target + 0.20;
    pass = pass && ok;
    d << "alpha=" << alpha << " slope=" << detail::fmt(fit.slope, 3) << " in ["
      << detail::fmt(target - 0.05, 3) << "," << detail::fmt(target + 0.20, 3) << "]"
      << (ok ? "" : " (out)") << "; ";
  }
  const auto cfg = detail::make(T, 100, o.seed, detail::bernoulli(0.5),
                                {{"kind", "mu_alpha"}, {"alpha", 2.0}, {"eps", 0.1}},
                                {{"kind", "ucbid"}}, "pseudo");
  const auto curve = aggregate_checkpoints(run_experiment(cfg, opts, o.threads), opts.checkpoints);
  const auto per_log = [&](std::int64_t t) {
    const auto it = std::find_if(curve.begin(), curve.end(), [&](const auto& p) { return p.t == t; });
    return it->mean / std::log(static_cast<double>(t));
  };
  const double ratio = per_log(std::int64_t{1} << 18) / per_log(std::int64_t{1} << 14);
  const bool ok = ratio >= 0.5 && ratio <= 2.0;
  pass = pass && ok;
  d << "alpha=2 (R/lnT at 2^18)/(R/lnT at 2^14)=" << detail::fmt(ratio, 3) << " in [0.5,2]";
  out.pass = pass;
  out.detail = d.str();
  return out;
}

// 3. ExpTree against an oblivious adversary.
inline Verdict criterion3(const Options& o) {
  Verdict out{3, "exptree oblivious bound", false, {}};
  const std::int64_t T = 10'000;
  const auto env = detail::oblivious(T);
  const double widest = detail::widest_optimal_width(env.v, env.m);
  const auto cfg = detail::make(T, 200, o.seed, env.values, env.opponents,
                                {{"kind", "exptree"}, {"delta_circ", widest}}, "hindsight");
  RunOptions opts;
  opts.record_rounds = false;
  const auto regrets = detail::final_regrets(run_experiment(cfg, opts, o.threads));
  const double mean = mean_of(regrets);
  const double bound = 4.0 * std::sqrt(static_cast<double>(T) * std::log(1.0 / widest));
  out.pass = mean <= bound;
  out.detail = "mean regret=" + detail::fmt(mean) + " <= 4 sqrt(T ln(1/" + detail::fmt(widest) +
               "))=" + detail::fmt(bound);
  return out;
}

// 4. ExpTree.P high-probability bound and the estimate-dominance check.
inline Verdict criterion4(const Options& o) {
  Verdict out{4, "exptree.p high-probability bound", false, {}};
  const std::int64_t T = 10'000;
  const int R = 500;
  const double delta = 0.1;
  const auto env = detail::oblivious(T);
  const double narrow = detail::narrowest_width(env.m);
  const auto cfg = detail::make(T, R, o.seed, env.values, env.opponents,
                                {{"kind", "exptree_p"}, {"delta_circ", narrow}}, "hindsight");
  RunOptions opts;
  opts.record_rounds = false;
  const auto results = run_experiment(cfg, opts, o.threads);
  const auto t = static_cast<double>(T);
  const double bound = 2.0 * std::sqrt(8.0 * t * std::log(1.0 / narrow)) +
                       3.0 * std::sqrt(2.0 * t * std::log(t)) * std::log(1.0 / delta);
  long exceed = 0, shortfall_violations = 0;
  const double threshold = std::log(t / delta) / *results.front().summary.beta;
  for (const auto& r : results) {
    exceed += r.summary.final_regret > bound;
    shortfall_violations += *r.summary.gain_shortfall > threshold;
  }
  // pass when delta is not excluded by the 95% interval of the observed rate
  const auto w = wilson_interval(exceed, R);
  const auto wl = wilson_interval(shortfall_violations, R);
  out.pass = w.lo <= delta && wl.lo <= delta;
  double worst = 0.0;
  for (const auto& r : results) worst = std::max(worst, r.summary.final_regret);
  out.detail = "regret>" + detail::fmt(bound) + " in " + std::to_string(exceed) + "/" +
               std::to_string(R) + " (max " + detail::fmt(worst) + "); G-G~>" +
               detail::fmt(threshold) + " in " + std::to_string(shortfall_violations) + "/" +
               std::to_string(R);
  return out;
}

// 5. Doubling wrapper without T or the gap supplied.
inline Verdict criterion5(const Options& o) {
  Verdict out{5, "doubling wrapper bound", false, {}};
  const std::int64_t T = 10'000;
  const auto env = detail::oblivious(T);
  const auto cfg = detail::make(T, 100, o.seed, env.values, env.opponents,
                                {{"kind", "exptree_doubling"}}, "hindsight");
  RunOptions opts;
  opts.record_rounds = false;
  const auto results = run_experiment(cfg, opts, o.threads);
  std::vector<double> regrets, bounds;
  for (const auto& r : results) {
    regrets.push_back(r.summary.final_regret);
    bounds.push_back(48.0 * std::sqrt(2.0 * static_cast<double>(T) *
                                      std::log(1.0 / r.summary.narrowest_width)));
  }
  const double mean = mean_of(regrets), bound = mean_of(bounds);
  out.pass = mean <= bound;
  out.detail = "mean regret=" + detail::fmt(mean) + " <= " + detail::fmt(bound) +
               " (narrowest cell " + detail::fmt(results.front().summary.narrowest_width) + ")";
  return out;
}

/// Frozen from a pilot of 100 replications with master seed 1 (see the
/// `pilot` mode of the acceptance binary); the check uses a different seed.
inline constexpr double kStagedRegretConstant = 0.099;  // pilot 0.1449 - 3 * 0.0152

inline RunConfig staged_config(std::uint64_t seed, int R) {
  const std::int64_t T = 40'000;
  return detail::make(T, R, seed, {{"kind", "staged"}},
                      {{"kind", "staged_adversary"}, {"n_stages", 4}},
                      {{"kind", "exptree"}, {"delta_circ", 1.0 / 32.0}}, "hindsight");
}

/// Mean hindsight regret divided by sqrt(T n) for the staged adversary.
inline std::pair<double, double> staged_ratio(std::uint64_t seed, int R, unsigned threads) {
  const auto cfg = staged_config(seed, R);
  RunOptions opts;
  opts.record_rounds = false;
  const auto regrets = detail::final_regrets(run_experiment(cfg, opts, threads));
  const double scale = std::sqrt(static_cast<double>(cfg.horizon) * 4.0);
  return {mean_of(regrets) / scale, stderr_of(regrets) / scale};
}

// 6. Regret forced by the staged adversary.
inline Verdict criterion6(const Options& o) {
  Verdict out{6, "staged adversary pressure", false, {}};
  const auto [ratio, se] = staged_ratio(o.seed, 100, o.threads);
  const double c = kStagedRegretConstant;
  out.pass = c >= 0.005 && ratio >= c;
  out.detail = "mean regret/sqrt(Tn)=" + detail::fmt(ratio) + " (se " + detail::fmt(se, 2) +
               ") >= c=" + detail::fmt(c) + " (c must be >= 0.005)";
  return out;
}

// 7. Exact property suites.
inline Verdict criterion7(const Options& o) {
  Verdict out{7, "exact property suites", false, {}};
  std::vector<std::string> failed;
  std::mt19937_64 rng(o.seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);

  const auto random_partition = [&](int splits, double scale) {
    IntervalPartition p;
    for (int i = 0; i < splits; ++i) p.split_at(std::max(u(rng), 1e-9));
    IntervalGains g;
    for (std::size_t i = 0; i < p.size(); ++i) g.per_interval.push_back(scale * (u(rng) - 0.5));
    p.apply_gains(g);
    return p;
  };

  {  // unbiasedness: sum over both outcomes of P(outcome) * estimate = true gain
    double worst = 0.0;
    for (int rep = 0; rep < 10'000; ++rep) {
      auto p = random_partition(1 + rep % 40, 50.0);
      const double eta = 0.01 + 0.49 * u(rng), atom = 0.01 + 0.49 * u(rng);
      const double m = std::max(u(rng), 1e-9), v = u(rng);
      const double pw = BidDistribution(p, eta, atom).prob_win(Bid(m));
      const auto ref = static_cast<double>(oracle::prob_win(p, eta, atom, m));
      p.split_at(m);
      const auto win = estimate_gain_unbiased(p, RoundOutcome::resolve(1, Bid(1.0), Bid(m), v), pw);
      const auto loss = estimate_gain_unbiased(p, RoundOutcome::resolve(1, Bid(0.0), Bid(m), v), pw);
      std::size_t i = 0;
      p.for_each_cell([&](Interval s, double) {
        const double expected = ref * win.per_interval[i] + (1.0 - ref) * loss.per_interval[i];
        worst = std::max(worst, std::abs(expected - (s.lo >= m ? v : m)));
        ++i;
      });
    }
    if (worst > 1e-12) failed.push_back("unbiasedness " + detail::fmt(worst, 3));
  }
  {  // splitting leaves the bid distribution unchanged
    double worst = 0.0;
    for (int rep = 0; rep < 50; ++rep) {
      auto p = random_partition(1 + rep % 20, 30.0);
      const double eta = 0.3, atom = 0.05;
      const BidDistribution before(p, eta, atom);
      for (int s = 0; s < 5; ++s) p.split_at(std::max(u(rng), 1e-9));
      const BidDistribution after(p, eta, atom);
      for (int k = 0; k < 10'000; ++k) {
        const double x = (k + 0.5) / 10'000.0;
        worst = std::max(worst, std::abs(before.cdf(x) - after.cdf(x)));
        if (k % 97 == 0) {
          worst = std::max(
              worst, std::abs(after.cdf(x) - static_cast<double>(oracle::mass(p, eta, atom, -1, x))));
        }
      }
    }
    if (worst > 1e-9) failed.push_back("split transparency " + detail::fmt(worst, 3));
  }
  {  // hindsight sweep against the brute-force grid
    double worst = 0.0;
    std::uniform_int_distribution<int> len(1, 200);
    for (int rep = 0; rep < 1000; ++rep) {
      const int n = len(rng);
      std::vector<double> v(n), m(n);
      for (int i = 0; i < n; ++i) {
        v[i] = u(rng);
        m[i] = rep % 3 == 0 ? std::ceil(u(rng) * 10.0) / 10.0 : std::max(u(rng), 1e-9);
      }
      worst = std::max(worst, std::abs(hindsight_best_fixed_bid(v, m).best_gain -
                                       oracle::brute_force_hindsight(v, m)));
    }
    if (worst > 1e-9) failed.push_back("hindsight oracle " + detail::fmt(worst, 3));
  }
  {  // partition invariants after many splits
    IntervalPartition p;
    std::vector<double> points{1.0};
    for (int i = 0; i < 100'000; ++i) {
      const double x = i % 5 == 0 ? points[static_cast<std::size_t>(i) % points.size()]
                                  : std::max(u(rng), 1e-12);
      p.split_at(x);
      points.push_back(x);
    }
    std::sort(points.begin(), points.end());
    points.erase(std::unique(points.begin(), points.end()), points.end());
    double total = 0.0;
    p.for_each_cell([&](Interval s, double) { total += s.width(); });
    if (!p.is_valid() || p.size() != points.size() || std::abs(total - 1.0) > 1e-9) {
      failed.push_back("partition invariants");
    }
  }
  {  // softmax with S = 1e6 on one cell
    IntervalPartition p;
    for (double x : {0.2, 0.4, 0.6, 0.8}) p.split_at(x);
    p.apply_gains({{0.0, 1e6, 1e6 - 1.0, -1e6, 3.0}, 0.0, 0.0});
    const BidDistribution d(p, 0.5, 0.05);
    const auto ref = oracle::cell_probs(p, 0.5);
    double total = 0.0, worst = 0.0;
    bool finite = true;
    for (std::size_t i = 0; i < d.probs().size(); ++i) {
      finite = finite && std::isfinite(d.probs()[i]);
      total += d.probs()[i];
      worst = std::max(worst, std::abs(d.probs()[i] - static_cast<double>(ref[i])));
    }
    if (!finite || std::abs(total - 1.0) > 1e-12 || worst > 1e-12) {
      failed.push_back("overflow stress " + detail::fmt(worst, 3));
    }
  }
  {  // replay determinism and thread-count independence, byte for byte
    const auto cfg = detail::make(500, 8, o.seed, detail::bernoulli(0.5),
                                  detail::two_point_opponents(),
                                  {{"kind", "exptree_p"}, {"delta_circ", 0.1}}, "hindsight");
    std::ostringstream a, b, c;
    emit_csv(collect_rounds(run_experiment(cfg, {}, 1)), a);
    emit_csv(collect_rounds(run_experiment(cfg, {}, 1)), b);
    emit_csv(collect_rounds(run_experiment(cfg, {}, 4)), c);
    if (a.str() != b.str()) failed.push_back("replay determinism");
    if (a.str() != c.str()) failed.push_back("parallel/serial equivalence");
  }
  out.pass = failed.empty();
  if (out.pass) {
    out.detail = "unbiasedness, split transparency, hindsight oracle, partition invariants, "
                 "overflow stress, replay and threading all exact";
  } else {
    for (const auto& f : failed) out.detail += (out.detail.empty() ? "" : "; ") + f;
  }
  return out;
}

// 8. UCBid optimism: rounds bid below the mean value are rare.
inline Verdict criterion8(const Options& o) {
  Verdict out{8, "ucbid optimism", false, {}};
  const std::int64_t T = 1000;
  const int R = 10'000;
  const auto cfg = detail::make(T, R, o.seed, detail::bernoulli(0.5),
                                detail::two_point_opponents(), {{"kind", "ucbid"}}, "pseudo");
  RunOptions opts;
  opts.record_rounds = false;
  long underbids = 0;
  for (const auto& r : run_experiment(cfg, opts, o.threads)) underbids += r.summary.underbid_rounds;
  double tail = 0.0;
  for (std::int64_t t = 2; t <= T; ++t) tail += 1.0 / (static_cast<double>(t) * static_cast<double>(t));
  const double limit = tail * R * 1.5;
  out.pass = static_cast<double>(underbids) <= limit;
  out.detail = "underbid rounds=" + std::to_string(underbids) + " <= " + detail::fmt(limit);
  return out;
}

inline Verdict run_criterion(int id, const Options& o) {
  switch (id) {
    case 1: return criterion1(o);
    case 2: return criterion2(o);
    case 3: return criterion3(o);
    case 4: return criterion4(o);
    case 5: return criterion5(o);
    case 6: return criterion6(o);
    case 7: return criterion7(o);
    case 8: return criterion8(o);
    default: throw std::invalid_argument("no criterion " + std::to_string(id));
  }
}

}  // namespace acceptance
