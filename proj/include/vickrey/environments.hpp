// Value and opponent-bid generators: i.i.d. and fixed processes, the
// margin-condition family mu_alpha, the gap-conditioned opponent, and the
// staged midpoint adversary used for the adversarial lower bound.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "vickrey/auction.hpp"
#include "vickrey/random.hpp"

namespace vickrey {

/// Opponent samples at or below zero are replaced by this floor.
inline constexpr double kOpponentFloor = 0x1.0p-30;

/// Snaps adversarial bids onto the 2^-40 grid.
inline double quantize_bid(double x) { return std::ldexp(std::round(std::ldexp(x, 40)), -40); }

/// mu_alpha: for alpha < 1, the two-branch density
///   g(x) = c [(x - 1/2)^(alpha-1) on (1/2, 1/2 + 2 eps]
///           + (x - 1/2 - 2 eps)^(alpha-1) on (1/2 + 2 eps, 1]],
/// and for alpha >= 1 the point mass at 1/2 + eps.
class MarginMuAlpha {
 public:
  MarginMuAlpha(double alpha, double eps) : alpha_(alpha), eps_(eps) {
    if (!(alpha > 0.0)) throw std::invalid_argument("mu_alpha requires alpha > 0");
    if (alpha < 1.0) {
      if (!(eps > 0.0 && eps < 0.25)) {
        throw std::invalid_argument("mu_alpha with alpha < 1 requires eps in (0, 1/4)");
      }
      c_alpha_ = alpha / (std::pow(2.0 * eps, alpha) + std::pow(0.5 - 2.0 * eps, alpha));
    } else if (!(eps > 0.0 && eps < 0.5)) {
      throw std::invalid_argument("mu_alpha point mass requires eps in (0, 1/2)");
    }
  }

  [[nodiscard]] double alpha() const noexcept { return alpha_; }
  [[nodiscard]] double eps() const noexcept { return eps_; }
  [[nodiscard]] bool is_point_mass() const noexcept { return alpha_ >= 1.0; }
  /// Normalizer c_alpha of the density (0 for the point mass).
  [[nodiscard]] double normalizer() const noexcept { return c_alpha_; }

  [[nodiscard]] double density(double x) const {
    if (is_point_mass()) throw std::logic_error("point mass has no density");
    const double split = 0.5 + 2.0 * eps_;
    if (x <= 0.5 || x > 1.0) return 0.0;
    if (x <= split) return c_alpha_ * std::pow(x - 0.5, alpha_ - 1.0);
    return c_alpha_ * std::pow(x - split, alpha_ - 1.0);
  }

  [[nodiscard]] double cdf(double x) const {
    if (is_point_mass()) return x >= 0.5 + eps_ ? 1.0 : 0.0;
    if (x <= 0.5) return 0.0;
    if (x >= 1.0) return 1.0;
    const double k = c_alpha_ / alpha_;
    const double u = x - 0.5;
    if (u <= 2.0 * eps_) return k * std::pow(u, alpha_);
    return k * (std::pow(2.0 * eps_, alpha_) + std::pow(u - 2.0 * eps_, alpha_));
  }

  /// Closed-form branch inversion of the CDF for p in (0, 1]. The result is
  /// kept strictly above 1/2 so the support stays (1/2, 1] in floating point.
  [[nodiscard]] double inverse_cdf(double p) const {
    if (is_point_mass()) return 0.5 + eps_;
    const double scaled = p * alpha_ / c_alpha_;
    const double head = std::pow(2.0 * eps_, alpha_);
    double x;
    if (scaled <= head) {
      x = 0.5 + std::pow(scaled, 1.0 / alpha_);
    } else {
      x = 0.5 + 2.0 * eps_ + std::pow(scaled - head, 1.0 / alpha_);
    }
    return std::clamp(x, std::nextafter(0.5, 1.0), 1.0);
  }

  double sample(Rng& rng) const {
    if (is_point_mass()) return 0.5 + eps_;
    return inverse_cdf(uniform_open_closed(rng));
  }

  /// C with mu{(1/2, 1/2 + u]} <= C u^alpha for every u > 0. On u <= 2 eps the
  /// bound c/alpha is tight; past the kink subadditivity of u^alpha costs a
  /// factor 2^(1-alpha).
  [[nodiscard]] double margin_constant() const {
    if (is_point_mass()) return std::pow(eps_, -alpha_);
    return c_alpha_ / alpha_ * std::pow(2.0, 1.0 - alpha_);
  }

 private:
  double alpha_;
  double eps_;
  double c_alpha_ = 0.0;
};

struct Bernoulli {
  double p = 0.5;
};

struct Uniform {
  double lo = 0.0;
  double hi = 1.0;
};

/// Finite support; empty weights mean equal weights.
struct Discrete {
  std::vector<double> values;
  std::vector<double> weights;
};

struct PointMass {
  double location = 0.5;
};

using Distribution = std::variant<Bernoulli, Uniform, Discrete, PointMass, MarginMuAlpha>;

namespace detail {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

inline void require_unit(double x, const char* what) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw std::invalid_argument(std::string(what) + " must lie in [0, 1]");
  }
}

}  // namespace detail

/// Rejects distributions whose support leaves [0, 1].
inline void validate(const Distribution& dist) {
  std::visit(detail::Overloaded{
                 [](const Bernoulli& d) { detail::require_unit(d.p, "bernoulli p"); },
                 [](const Uniform& d) {
                   detail::require_unit(d.lo, "uniform lo");
                   detail::require_unit(d.hi, "uniform hi");
                   if (!(d.lo <= d.hi)) throw std::invalid_argument("uniform requires lo <= hi");
                 },
                 [](const Discrete& d) {
                   if (d.values.empty()) throw std::invalid_argument("discrete support is empty");
                   for (double v : d.values) detail::require_unit(v, "discrete value");
                   if (!d.weights.empty()) {
                     if (d.weights.size() != d.values.size()) {
                       throw std::invalid_argument("discrete weights/values length mismatch");
                     }
                     double total = 0.0;
                     for (double w : d.weights) {
                       if (!(w >= 0.0)) throw std::invalid_argument("negative discrete weight");
                       total += w;
                     }
                     if (!(total > 0.0)) throw std::invalid_argument("discrete weights sum to 0");
                   }
                 },
                 [](const PointMass& d) { detail::require_unit(d.location, "point mass"); },
                 [](const MarginMuAlpha&) {},
             },
             dist);
}

inline double sample(const Distribution& dist, Rng& rng) {
  return std::visit(
      detail::Overloaded{
          [&](const Bernoulli& d) { return uniform01(rng) < d.p ? 1.0 : 0.0; },
          [&](const Uniform& d) { return d.lo + (d.hi - d.lo) * uniform01(rng); },
          [&](const Discrete& d) {
            if (d.weights.empty()) {
              const auto n = static_cast<double>(d.values.size());
              auto idx = static_cast<std::size_t>(uniform01(rng) * n);
              return d.values[std::min(idx, d.values.size() - 1)];
            }
            const double total = std::accumulate(d.weights.begin(), d.weights.end(), 0.0);
            double target = uniform01(rng) * total;
            for (std::size_t i = 0; i < d.values.size(); ++i) {
              if (target < d.weights[i]) return d.values[i];
              target -= d.weights[i];
            }
            return d.values.back();
          },
          [](const PointMass& d) { return d.location; },
          [&](const MarginMuAlpha& d) { return d.sample(rng); },
      },
      dist);
}

inline std::optional<double> mean(const Distribution& dist) {
  return std::visit(
      detail::Overloaded{
          [](const Bernoulli& d) -> std::optional<double> { return d.p; },
          [](const Uniform& d) -> std::optional<double> { return 0.5 * (d.lo + d.hi); },
          [](const Discrete& d) -> std::optional<double> {
            if (d.weights.empty()) {
              return std::accumulate(d.values.begin(), d.values.end(), 0.0) /
                     static_cast<double>(d.values.size());
            }
            double total = 0.0, acc = 0.0;
            for (std::size_t i = 0; i < d.values.size(); ++i) {
              acc += d.weights[i] * d.values[i];
              total += d.weights[i];
            }
            return acc / total;
          },
          [](const PointMass& d) -> std::optional<double> { return d.location; },
          [](const MarginMuAlpha&) -> std::optional<double> { return std::nullopt; },
      },
      dist);
}

/// mu_alpha from its sampler-independent parameters.
inline double sample_mu_alpha(const MarginMuAlpha& dist, Rng& rng) { return dist.sample(rng); }

// ---------------------------------------------------------------------------
// Staged adversary

/// State of the staged midpoint adversary. Stage i (1-based) posts the
/// opponent bid m_i = 1/4 + code * 2^(-i-1) and draws values from
/// Bernoulli(m_i + tilt * eps_stage).
struct StagedAdversaryState {
  int n_stages = 1;
  int stage_index = 1;
  std::int64_t stage_length = 1;
  std::int64_t code = 1;
  std::int64_t t_minus = 0;  // bids <= m_i this stage (ties included)
  std::int64_t t_plus = 0;   // bids > m_i this stage
  int tilt = +1;

  [[nodiscard]] double midpoint() const {
    return quantize_bid(0.25 + std::ldexp(static_cast<double>(code), -stage_index - 1));
  }
  [[nodiscard]] double stage_eps() const {
    return 1.0 / (8.0 * std::sqrt(static_cast<double>(stage_length)));
  }
  [[nodiscard]] double value_mean() const { return midpoint() + tilt * stage_eps(); }
  [[nodiscard]] std::int64_t rounds_in_stage() const noexcept { return t_minus + t_plus; }
};

/// Number of stages for a target smallest gap: floor(log2(1 / (2 delta))).
inline int staged_adversary_stage_count(double delta_circ) {
  if (!(delta_circ > 0.0 && delta_circ < 0.25)) {
    throw std::invalid_argument("staged adversary needs delta in (0, 1/4)");
  }
  return static_cast<int>(std::floor(std::log2(1.0 / (2.0 * delta_circ))));
}

inline StagedAdversaryState make_staged_adversary(int n_stages, std::int64_t horizon) {
  if (n_stages < 1) throw std::invalid_argument("staged adversary needs >= 1 stage");
  if (horizon < n_stages) throw std::invalid_argument("horizon shorter than stage count");
  StagedAdversaryState s;
  s.n_stages = n_stages;
  s.stage_length = horizon / n_stages;
  return s;
}

/// Moves to the next stage. U (midpoint up, positive tilt) is chosen when the
/// bidder spent at least as many rounds at or below the midpoint as above it.
inline StagedAdversaryState staged_adversary_advance(const StagedAdversaryState& state) {
  if (state.stage_index >= state.n_stages) {
    throw std::logic_error("staged adversary advanced past its final stage");
  }
  StagedAdversaryState next = state;
  const bool up = state.t_minus >= state.t_plus;
  next.code = up ? 2 * state.code + 1 : 2 * state.code - 1;
  next.tilt = up ? +1 : -1;
  next.stage_index = state.stage_index + 1;
  next.t_minus = 0;
  next.t_plus = 0;
  return next;
}

// ---------------------------------------------------------------------------
// Processes

/// Cyclic fixed sequence: round t reads element (t - 1) mod size.
struct FixedSequence {
  std::vector<double> values;
};

struct IidValues {
  Distribution dist;
};

/// Values drawn from the staged adversary's current Bernoulli.
struct StagedValues {};

struct AdaptiveValues {
  std::function<double(std::span<const RoundOutcome>, Rng&)> draw;
};

using ValueProcess = std::variant<IidValues, FixedSequence, StagedValues, AdaptiveValues>;

struct IidOpponent {
  Distribution dist;
};

/// Base distribution conditioned to avoid the open interval (v, v + delta).
struct GapOpponent {
  Distribution base;
  double v = 0.5;
  double delta = 0.0;
  static constexpr int kMaxRetries = 10'000;
};

struct StagedOpponent {
  StagedAdversaryState state;
  std::vector<double> midpoints;  // one per stage entered
};

using OpponentProcess = std::variant<FixedSequence, IidOpponent, GapOpponent, StagedOpponent>;

inline ValueProcess iid_bernoulli(double p) { return IidValues{Bernoulli{p}}; }
inline OpponentProcess point_mass_opponent(double x) { return IidOpponent{PointMass{x}}; }
inline OpponentProcess margin_mu_alpha_opponent(double alpha, double eps) {
  return IidOpponent{MarginMuAlpha(alpha, eps)};
}
inline OpponentProcess staged_opponent(int n_stages, std::int64_t horizon) {
  auto state = make_staged_adversary(n_stages, horizon);
  return StagedOpponent{state, {state.midpoint()}};
}

/// A value process paired with an opponent process, owned by one run.
class Environment {
 public:
  Environment(ValueProcess values, OpponentProcess opponents)
      : values_(std::move(values)), opponents_(std::move(opponents)) {
    if (std::holds_alternative<StagedValues>(values_) !=
        std::holds_alternative<StagedOpponent>(opponents_)) {
      throw std::invalid_argument("staged values and staged opponent must be used together");
    }
    if (const auto* iid = std::get_if<IidValues>(&values_)) validate(iid->dist);
    if (const auto* seq = std::get_if<FixedSequence>(&values_)) check_sequence(*seq, false);
    if (const auto* seq = std::get_if<FixedSequence>(&opponents_)) check_sequence(*seq, true);
    if (const auto* iid = std::get_if<IidOpponent>(&opponents_)) validate(iid->dist);
    if (const auto* gap = std::get_if<GapOpponent>(&opponents_)) {
      validate(gap->base);
      if (!(gap->delta >= 0.0)) throw std::invalid_argument("gap delta must be >= 0");
    }
  }

  Bid next_opponent_bid(std::span<const RoundOutcome> history, Rng& rng) {
    const double raw = std::visit(
        detail::Overloaded{
            [&](const FixedSequence& s) { return s.values[history.size() % s.values.size()]; },
            [&](const IidOpponent& o) { return sample(o.dist, rng); },
            [&](const GapOpponent& o) {
              for (int attempt = 0; attempt < GapOpponent::kMaxRetries; ++attempt) {
                const double m = sample(o.base, rng);
                if (!(m > o.v && m < o.v + o.delta)) return m;
              }
              throw std::runtime_error("gap opponent: rejection sampling exhausted retries");
            },
            [&](const StagedOpponent& o) { return o.state.midpoint(); },
        },
        opponents_);
    return opponent_bid(raw > 0.0 ? raw : kOpponentFloor);
  }

  double sample_value(std::span<const RoundOutcome> history, Rng& rng) {
    const double v = std::visit(
        detail::Overloaded{
            [&](const IidValues& p) { return sample(p.dist, rng); },
            [&](const FixedSequence& s) { return s.values[history.size() % s.values.size()]; },
            [&](const StagedValues&) {
              const auto& staged = std::get<StagedOpponent>(opponents_);
              return uniform01(rng) < staged.state.value_mean() ? 1.0 : 0.0;
            },
            [&](const AdaptiveValues& a) { return a.draw(history, rng); },
        },
        values_);
    if (!(v >= 0.0 && v <= 1.0)) throw std::runtime_error("value process left [0, 1]");
    return v;
  }

  /// Feeds a completed round to adaptive opponents.
  void record(const RoundOutcome& outcome) {
    auto* staged = std::get_if<StagedOpponent>(&opponents_);
    if (staged == nullptr) return;
    auto& s = staged->state;
    if (outcome.bid.value() <= s.midpoint()) {
      ++s.t_minus;
    } else {
      ++s.t_plus;
    }
    if (s.rounds_in_stage() >= s.stage_length && s.stage_index < s.n_stages) {
      s = staged_adversary_advance(s);
      staged->midpoints.push_back(s.midpoint());
    }
  }

  /// Mean of the value process when it is stationary and known.
  [[nodiscard]] std::optional<double> value_mean() const {
    if (const auto* iid = std::get_if<IidValues>(&values_)) return mean(iid->dist);
    return std::nullopt;
  }

  [[nodiscard]] const ValueProcess& values() const noexcept { return values_; }
  [[nodiscard]] const OpponentProcess& opponents() const noexcept { return opponents_; }

 private:
  static void check_sequence(const FixedSequence& s, bool opponent) {
    if (s.values.empty()) throw std::invalid_argument("fixed sequence is empty");
    for (double x : s.values) {
      if (opponent ? !(x > 0.0 && x <= 1.0) : !(x >= 0.0 && x <= 1.0)) {
        throw std::invalid_argument("fixed sequence element out of range");
      }
    }
  }

  ValueProcess values_;
  OpponentProcess opponents_;
};

/// The two environments of the stochastic lower bound: values Bern(1/2) and
/// Bern(1/2 + 2 eps), opponents mu_alpha(eps), with eps = T^(-1/2) / 2.
inline std::pair<Environment, Environment> make_stochastic_lb_pair(double alpha,
                                                                   std::int64_t horizon) {
  if (horizon < 2) throw std::invalid_argument("lower-bound pair needs T >= 2");
  const double eps = 0.5 / std::sqrt(static_cast<double>(horizon));
  const MarginMuAlpha mu(alpha, eps);
  return {Environment(iid_bernoulli(0.5), IidOpponent{mu}),
          Environment(iid_bernoulli(0.5 + 2.0 * eps), IidOpponent{mu})};
}

}  // namespace vickrey
