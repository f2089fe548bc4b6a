// vickrey_bandit: command-line front end for the repeated second-price
// auction simulator.
//
//   vickrey_bandit simulate --config run.json [--seed S] [--out rounds.csv] [--threads N]
//   vickrey_bandit sweep    --config run.json --param horizon --values 1024,4096,16384
//   vickrey_bandit accept   [--criteria 1,4] [--seed S] [--threads N]
//   vickrey_bandit report   rounds_a.csv rounds_b.csv ...
//
// Failures print a single line `ERROR <code> <message>` on stderr.
#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "acceptance.hpp"
#include "vickrey/config.hpp"
#include "vickrey/csv.hpp"
#include "vickrey/harness.hpp"
#include "vickrey/stats.hpp"

namespace {

using namespace vickrey;

enum Exit : int { kOk = 0, kCriteriaFailed = 1, kUsage = 2, kConfig = 3, kIo = 4, kRun = 5 };

struct CliError : std::runtime_error {
  CliError(Exit code, const std::string& tag, const std::string& what)
      : std::runtime_error(what), code(code), tag(tag) {}
  Exit code;
  std::string tag;
};

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  unsigned threads = 1;
};

void add_common(CLI::App* app, Common& c, bool with_config) {
  if (with_config) app->add_option("--config", c.config, "JSON run configuration")->required();
  app->add_option("--seed", c.seed, "override master_seed");
  app->add_option("--out", c.out, "output path (default: config output, else stdout)");
  app->add_option("--threads", c.threads, "worker threads (VICKREY_BANDIT_THREADS wins)")
      ->check(CLI::PositiveNumber);
}

RunConfig load(const Common& c) {
  RunConfig cfg = load_config(c.config);
  if (c.seed) cfg.master_seed = *c.seed;
  return cfg;
}

// Opens the destination or falls back to stdout.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (path.empty()) return;
    file_.open(path, std::ios::binary);
    if (!file_) throw CliError(kIo, "io", "cannot open '" + path + "' for writing");
    path_ = path;
  }
  std::ostream& stream() { return path_.empty() ? std::cout : file_; }
  [[nodiscard]] bool is_stdout() const { return path_.empty(); }
  void close() {
    if (path_.empty()) return;
    file_.flush();
    if (!file_) throw CliError(kIo, "io", "write to '" + path_ + "' failed");
  }

 private:
  std::ofstream file_;
  std::string path_;
};

void write_summary(const std::vector<ReplicationResult>& results, std::ostream& out) {
  out << "rep,rounds,final_regret,hindsight_regret,pseudo_regret,best_gain,witness_lo,witness_hi,"
         "underbid_rounds,narrowest_width\n";
  for (const auto& r : results) {
    const auto& s = r.summary;
    out << s.replication << ',' << s.rounds << ',' << format_double(s.final_regret) << ','
        << format_double(s.hindsight_regret) << ','
        << (s.pseudo_regret ? format_double(*s.pseudo_regret) : std::string()) << ','
        << format_double(s.hindsight.best_gain) << ',' << format_double(s.hindsight.witness.lo)
        << ',' << format_double(s.hindsight.witness.hi) << ',' << s.underbid_rounds << ','
        << format_double(s.narrowest_width) << '\n';
  }
}

std::vector<double> finals(const std::vector<ReplicationResult>& results) {
  std::vector<double> xs;
  for (const auto& r : results) xs.push_back(r.summary.final_regret);
  return xs;
}

int simulate(const Common& c) {
  const RunConfig cfg = load(c);
  const auto results = run_experiment(cfg, {}, resolve_threads(c.threads));
  Sink sink(c.out.empty() ? cfg.output : c.out);
  emit_csv(collect_rounds(results), sink.stream());
  sink.close();
  // rounds on stdout push the summary to stderr
  write_summary(results, sink.is_stdout() ? std::cerr : std::cout);
  return kOk;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> xs;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    char* end = nullptr;
    const double x = std::strtod(item.c_str(), &end);
    if (item.empty() || end != item.c_str() + item.size()) {
      throw CliError(kUsage, "usage", "--values: bad number '" + item + "'");
    }
    xs.push_back(x);
  }
  if (xs.empty()) throw CliError(kUsage, "usage", "--values: empty list");
  return xs;
}

std::string pointer_for(const std::string& param) {
  if (param == "horizon") return "/horizon";
  if (param == "alpha") return "/environment/opponents/alpha";
  if (param == "replications") return "/replications";
  if (!param.empty() && param.front() == '/') return param;
  throw CliError(kUsage, "usage", "--param: expected horizon, alpha or a JSON pointer");
}

void fit_line(const std::vector<std::pair<double, double>>& series, std::ostream& out) {
  if (series.size() < 3) return;
  try {
    const auto fit = fit_regret_slope(series);
    out << "fit slope=" << fit.slope << " intercept=" << fit.intercept << " stderr=" << fit.stderr
        << '\n';
  } catch (const std::invalid_argument& e) {
    out << "fit skipped: " << e.what() << '\n';
  }
}

int sweep(const Common& c, const std::string& param, const std::string& values) {
  const RunConfig base = load(c);
  const auto pointer = nlohmann::json::json_pointer(pointer_for(param));
  if (!base.document.contains(pointer.parent_pointer())) {
    throw CliError(kConfig, "config", "--param: no such location " + pointer.to_string());
  }
  const auto grid = parse_list(values);
  const unsigned threads = resolve_threads(c.threads);
  Sink sink(c.out);
  auto& out = sink.stream();
  out << "param,value,horizon,replications,mean_regret,stderr,median_regret\n";
  std::vector<std::pair<double, double>> by_horizon;
  for (double x : grid) {
    nlohmann::json doc = base.document;
    if (c.seed) doc["master_seed"] = *c.seed;
    if (x == static_cast<double>(static_cast<std::int64_t>(x))) {
      doc[pointer] = static_cast<std::int64_t>(x);
    } else {
      doc[pointer] = x;
    }
    const RunConfig cfg = parse_config(doc);
    const auto results = run_experiment(cfg, {false, {}}, threads);
    const auto xs = finals(results);
    out << param << ',' << format_double(x) << ',' << cfg.horizon << ',' << cfg.replications << ','
        << format_double(mean_of(xs)) << ',' << format_double(stderr_of(xs)) << ','
        << format_double(median_of(xs)) << '\n';
    by_horizon.emplace_back(static_cast<double>(cfg.horizon), mean_of(xs));
  }
  sink.close();
  if (param == "horizon" || pointer.to_string() == "/horizon") fit_line(by_horizon, std::cerr);
  return kOk;
}

int accept(const Common& c, const std::vector<int>& ids) {
  acceptance::Options o;
  if (c.seed) o.seed = *c.seed;
  o.threads = resolve_threads(c.threads);
  Sink sink(c.out);
  bool all = true;
  for (int id : ids) {
    if (id < 1 || id > 8) throw CliError(kUsage, "usage", "--criteria: ids run from 1 to 8");
    const auto v = acceptance::run_criterion(id, o);
    sink.stream() << v.line() << std::endl;
    all = all && v.pass;
  }
  sink.close();
  return all ? kOk : kCriteriaFailed;
}

int report(const std::vector<std::string>& inputs, const std::string& out_path) {
  Sink sink(out_path);
  auto& out = sink.stream();
  out << "file,replications,horizon,mean_regret,stderr,median_regret\n";
  std::vector<std::pair<double, double>> series;
  for (const auto& path : inputs) {
    std::ifstream in(path);
    if (!in) throw CliError(kIo, "io", "cannot open '" + path + "'");
    std::vector<RoundRecord> rows;
    try {
      rows = parse_csv(in);
    } catch (const std::runtime_error& e) {
      throw CliError(kIo, "csv", path + ": " + e.what());
    }
    if (rows.empty()) throw CliError(kIo, "csv", path + ": no rounds");
    std::map<int, RoundRecord> last;  // final row of each replication
    for (const auto& r : rows) {
      auto [it, fresh] = last.emplace(r.rep, r);
      if (!fresh && r.t > it->second.t) it->second = r;
    }
    std::vector<double> xs;
    std::int64_t horizon = 0;
    for (const auto& [rep, r] : last) {
      xs.push_back(r.cum_regret);
      horizon = std::max(horizon, r.t);
    }
    out << path << ',' << xs.size() << ',' << horizon << ',' << format_double(mean_of(xs)) << ','
        << format_double(stderr_of(xs)) << ',' << format_double(median_of(xs)) << '\n';
    series.emplace_back(static_cast<double>(horizon), mean_of(xs));
  }
  sink.close();
  fit_line(series, std::cerr);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bidding strategies for repeated second-price auctions"};
  app.require_subcommand(1);

  Common sim_opts, sweep_opts, accept_opts;
  std::string param, values, report_out;
  std::vector<int> criteria{1, 2, 3, 4, 5, 6, 7, 8};
  std::vector<std::string> inputs;

  auto* sim = app.add_subcommand("simulate", "run a configuration and write per-round CSV");
  add_common(sim, sim_opts, true);

  auto* sw = app.add_subcommand("sweep", "rerun a configuration over a grid of one parameter");
  add_common(sw, sweep_opts, true);
  sw->add_option("--param", param, "horizon, alpha or a JSON pointer into the config")->required();
  sw->add_option("--values", values, "comma separated grid")->required();

  auto* acc = app.add_subcommand("accept", "run the acceptance criteria");
  add_common(acc, accept_opts, false);
  acc->add_option("--criteria", criteria, "criterion ids")->delimiter(',');

  auto* rep = app.add_subcommand("report", "summarise per-round CSV files");
  rep->add_option("inputs", inputs, "per-round CSV files")->required();
  rep->add_option("--out", report_out, "output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "ERROR usage " << e.what() << std::endl;
    return kUsage;
  }

  try {
    if (*sim) return simulate(sim_opts);
    if (*sw) return sweep(sweep_opts, param, values);
    if (*acc) return accept(accept_opts, criteria);
    return report(inputs, report_out);
  } catch (const CliError& e) {
    std::cerr << "ERROR " << e.tag << ' ' << e.what() << std::endl;
    return e.code;
  } catch (const ConfigError& e) {
    std::cerr << "ERROR config " << e.what() << std::endl;
    return kConfig;
  } catch (const RunError& e) {
    std::cerr << "ERROR run " << e.what() << std::endl;
    return kRun;
  } catch (const std::exception& e) {
    std::cerr << "ERROR run " << e.what() << std::endl;
    return kRun;
  }
}
