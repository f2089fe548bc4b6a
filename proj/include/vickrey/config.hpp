// Declarative run description and its strict JSON schema.
//
//   {
//     "horizon": 10000, "replications": 200, "master_seed": 7,
//     "environment": {
//       "values":    {"kind": "bernoulli", "p": 0.5},
//       "opponents": {"kind": "iid", "distribution": {"kind": "discrete", "values": [0.3, 0.8]}}
//     },
//     "strategy": {"kind": "ucbid"},
//     "regret": "pseudo",
//     "output": "run.csv"
//   }
//
// Unknown keys anywhere are an error.
#pragma once

#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "vickrey/environments.hpp"
#include "vickrey/exptree.hpp"
#include "vickrey/strategy.hpp"

namespace vickrey {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class RegretMode { pseudo, hindsight };

struct StrategySpec {
  std::string kind = "ucbid";
  std::optional<double> eta;
  std::optional<double> gamma;
  std::optional<double> beta;
  std::optional<double> delta_circ;
  std::optional<double> bid;
};

struct RunConfig {
  std::int64_t horizon = 2;
  int replications = 1;
  std::uint64_t master_seed = 0;
  ValueProcess values = iid_bernoulli(0.5);
  OpponentProcess opponents = point_mass_opponent(0.5);
  StrategySpec strategy;
  RegretMode regret = RegretMode::hindsight;
  std::string output;
  nlohmann::json document;  // the parsed source, kept for sweeps

  [[nodiscard]] Environment make_environment() const { return Environment(values, opponents); }
};

namespace detail {

using nlohmann::json;

inline void check_keys(const json& obj, std::initializer_list<std::string_view> allowed,
                       const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

inline const json& require(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw ConfigError(where + ": missing key '" + key + "'");
  return obj.at(key);
}

inline double number(const json& obj, const char* key, const std::string& where) {
  const json& v = require(obj, key, where);
  if (!v.is_number()) throw ConfigError(where + "." + key + ": expected a number");
  return v.get<double>();
}

inline std::optional<double> optional_number(const json& obj, const char* key,
                                             const std::string& where) {
  if (!obj.contains(key)) return std::nullopt;
  return number(obj, key, where);
}

inline std::vector<double> number_list(const json& obj, const char* key,
                                       const std::string& where) {
  const json& v = require(obj, key, where);
  if (!v.is_array()) throw ConfigError(where + "." + key + ": expected an array");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) throw ConfigError(where + "." + key + ": expected numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

inline std::string kind_of(const json& obj, const std::string& where) {
  const json& k = require(obj, "kind", where);
  if (!k.is_string()) throw ConfigError(where + ".kind: expected a string");
  return k.get<std::string>();
}

inline Distribution parse_distribution(const json& obj, const std::string& where) {
  const std::string kind = kind_of(obj, where);
  if (kind == "bernoulli") {
    check_keys(obj, {"kind", "p"}, where);
    return Bernoulli{number(obj, "p", where)};
  }
  if (kind == "uniform") {
    check_keys(obj, {"kind", "lo", "hi"}, where);
    return Uniform{number(obj, "lo", where), number(obj, "hi", where)};
  }
  if (kind == "discrete") {
    check_keys(obj, {"kind", "values", "weights"}, where);
    Discrete d{number_list(obj, "values", where), {}};
    if (obj.contains("weights")) d.weights = number_list(obj, "weights", where);
    return d;
  }
  if (kind == "point_mass") {
    check_keys(obj, {"kind", "location"}, where);
    return PointMass{number(obj, "location", where)};
  }
  if (kind == "mu_alpha") {
    check_keys(obj, {"kind", "alpha", "eps"}, where);
    return MarginMuAlpha(number(obj, "alpha", where), number(obj, "eps", where));
  }
  throw ConfigError(where + ": unknown distribution kind '" + kind + "'");
}

inline ValueProcess parse_values(const json& obj, const std::string& where) {
  const std::string kind = kind_of(obj, where);
  if (kind == "iid") {
    check_keys(obj, {"kind", "distribution"}, where);
    return IidValues{parse_distribution(require(obj, "distribution", where), where + ".distribution")};
  }
  if (kind == "fixed_sequence") {
    check_keys(obj, {"kind", "values"}, where);
    return FixedSequence{number_list(obj, "values", where)};
  }
  if (kind == "staged") {
    check_keys(obj, {"kind"}, where);
    return StagedValues{};
  }
  // Shorthand: a bare distribution means i.i.d. draws from it.
  return IidValues{parse_distribution(obj, where)};
}

inline OpponentProcess parse_opponents(const json& obj, std::int64_t horizon,
                                       const std::string& where) {
  const std::string kind = kind_of(obj, where);
  if (kind == "fixed_sequence") {
    check_keys(obj, {"kind", "values"}, where);
    return FixedSequence{number_list(obj, "values", where)};
  }
  if (kind == "iid") {
    check_keys(obj, {"kind", "distribution"}, where);
    return IidOpponent{parse_distribution(require(obj, "distribution", where), where + ".distribution")};
  }
  if (kind == "gap") {
    check_keys(obj, {"kind", "v", "delta", "base"}, where);
    return GapOpponent{parse_distribution(require(obj, "base", where), where + ".base"),
                       number(obj, "v", where), number(obj, "delta", where)};
  }
  if (kind == "mu_alpha") {
    check_keys(obj, {"kind", "alpha", "eps"}, where);
    return margin_mu_alpha_opponent(number(obj, "alpha", where), number(obj, "eps", where));
  }
  if (kind == "point_mass") {
    check_keys(obj, {"kind", "location"}, where);
    return point_mass_opponent(number(obj, "location", where));
  }
  if (kind == "staged_adversary") {
    check_keys(obj, {"kind", "n_stages", "delta_circ"}, where);
    int stages;
    if (obj.contains("n_stages")) {
      if (obj.contains("delta_circ")) {
        throw ConfigError(where + ": give either n_stages or delta_circ, not both");
      }
      const json& n = obj.at("n_stages");
      if (!n.is_number_integer()) throw ConfigError(where + ".n_stages: expected an integer");
      stages = n.get<int>();
    } else {
      stages = staged_adversary_stage_count(number(obj, "delta_circ", where));
    }
    return staged_opponent(stages, horizon);
  }
  throw ConfigError(where + ": unknown opponent kind '" + kind + "'");
}

inline StrategySpec parse_strategy(const json& obj) {
  const std::string where = "strategy";
  StrategySpec spec;
  spec.kind = kind_of(obj, where);
  if (spec.kind == "ucbid" || spec.kind == "exptree_doubling" || spec.kind == "truthful") {
    check_keys(obj, {"kind"}, where);
  } else if (spec.kind == "exptree") {
    check_keys(obj, {"kind", "eta", "delta_circ"}, where);
  } else if (spec.kind == "exptree_p") {
    check_keys(obj, {"kind", "eta", "gamma", "beta", "delta_circ"}, where);
  } else if (spec.kind == "constant") {
    check_keys(obj, {"kind", "bid"}, where);
    spec.bid = number(obj, "bid", where);
  } else {
    throw ConfigError(where + ": unknown strategy kind '" + spec.kind + "'");
  }
  spec.eta = optional_number(obj, "eta", where);
  spec.gamma = optional_number(obj, "gamma", where);
  spec.beta = optional_number(obj, "beta", where);
  spec.delta_circ = optional_number(obj, "delta_circ", where);
  return spec;
}

}  // namespace detail

inline Strategy make_strategy(const RunConfig& cfg);

inline RunConfig parse_config(const nlohmann::json& doc) {
  using detail::check_keys;
  using detail::require;
  RunConfig cfg;
  try {
    check_keys(doc, {"horizon", "replications", "master_seed", "environment", "strategy",
                     "regret", "output"},
               "config");
    const auto& horizon = require(doc, "horizon", "config");
    if (!horizon.is_number_integer()) throw ConfigError("config.horizon: expected an integer");
    cfg.horizon = horizon.get<std::int64_t>();
    if (cfg.horizon < 2) throw ConfigError("config.horizon: must be >= 2");

    const auto& reps = require(doc, "replications", "config");
    if (!reps.is_number_integer()) throw ConfigError("config.replications: expected an integer");
    cfg.replications = reps.get<int>();
    if (cfg.replications < 1) throw ConfigError("config.replications: must be >= 1");

    if (doc.contains("master_seed")) {
      const auto& seed = doc.at("master_seed");
      if (!seed.is_number_unsigned()) {
        throw ConfigError("config.master_seed: expected an unsigned 64-bit integer");
      }
      cfg.master_seed = seed.get<std::uint64_t>();
    }

    const auto& env = require(doc, "environment", "config");
    check_keys(env, {"values", "opponents"}, "environment");
    cfg.values = detail::parse_values(require(env, "values", "environment"), "environment.values");
    cfg.opponents = detail::parse_opponents(require(env, "opponents", "environment"),
                                            cfg.horizon, "environment.opponents");
    cfg.strategy = detail::parse_strategy(require(doc, "strategy", "config"));

    const std::string mode = doc.value("regret", std::string("hindsight"));
    if (mode == "pseudo") {
      cfg.regret = RegretMode::pseudo;
    } else if (mode == "hindsight") {
      cfg.regret = RegretMode::hindsight;
    } else {
      throw ConfigError("config.regret: expected 'pseudo' or 'hindsight'");
    }
    if (doc.contains("output")) {
      if (!doc.at("output").is_string()) throw ConfigError("config.output: expected a string");
      cfg.output = doc.at("output").get<std::string>();
    }

    const Environment probe = cfg.make_environment();
    if (cfg.regret == RegretMode::pseudo && !probe.value_mean()) {
      throw ConfigError("config.regret: pseudo regret needs an i.i.d. value process");
    }
    if (cfg.strategy.kind == "truthful" && !probe.value_mean()) {
      throw ConfigError("strategy: truthful bidding needs a known value mean");
    }
    (void)make_strategy(cfg);  // surfaces bad strategy parameters now, not mid-run
  } catch (const ConfigError&) {
    throw;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  cfg.document = doc;
  return cfg;
}

inline RunConfig parse_config(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return parse_config(doc);
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_config(std::string_view(text));
}

/// Builds a fresh strategy for one replication.
inline Strategy make_strategy(const RunConfig& cfg) {
  const StrategySpec& s = cfg.strategy;
  if (s.kind == "ucbid") return Ucbid{};
  if (s.kind == "exptree") {
    if (s.eta) return ExpTree(*s.eta);
    if (!s.delta_circ) throw ConfigError("strategy: exptree needs eta or delta_circ");
    return ExpTree(exptree_configure(cfg.horizon, *s.delta_circ));
  }
  if (s.kind == "exptree_p") {
    const int given = s.eta.has_value() + s.gamma.has_value() + s.beta.has_value();
    if (given == 3) return ExpTreeP({*s.eta, *s.gamma, *s.beta});
    if (given != 0) throw ConfigError("strategy: exptree_p takes all of eta, gamma, beta or none");
    if (!s.delta_circ) throw ConfigError("strategy: exptree_p needs explicit parameters or delta_circ");
    return ExpTreeP(exptreep_configure(cfg.horizon, *s.delta_circ));
  }
  if (s.kind == "exptree_doubling") return DoublingExpTree{};
  if (s.kind == "truthful") return TruthfulBidder(*cfg.make_environment().value_mean());
  if (s.kind == "constant") return ConstantBidder(*s.bid);
  throw ConfigError("strategy: unknown kind '" + s.kind + "'");
}

}  // namespace vickrey
