// Per-round CSV trace: header `rep,t,bid,m,won,v,gain,cum_regret`, floats
// with 17 significant digits, empty v on lost rounds.
#pragma once

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace vickrey {

inline constexpr const char* kRoundCsvHeader = "rep,t,bid,m,won,v,gain,cum_regret";

struct RoundRecord {
  int rep = 0;
  std::int64_t t = 0;
  double bid = 0.0;
  double m = 0.0;
  bool won = false;
  std::optional<double> v;
  double gain = 0.0;
  double cum_regret = 0.0;

  friend bool operator==(const RoundRecord&, const RoundRecord&) = default;
};

inline std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline void write_round(std::ostream& out, const RoundRecord& r) {
  out << r.rep << ',' << r.t << ',' << format_double(r.bid) << ',' << format_double(r.m) << ','
      << (r.won ? 1 : 0) << ',' << (r.v ? format_double(*r.v) : std::string()) << ','
      << format_double(r.gain) << ',' << format_double(r.cum_regret) << '\n';
}

inline void emit_csv(std::span<const RoundRecord> rounds, std::ostream& out) {
  out << kRoundCsvHeader << '\n';
  for (const auto& r : rounds) write_round(out, r);
}

inline void emit_csv(std::span<const RoundRecord> rounds, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  emit_csv(rounds, out);
  out.flush();
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

namespace detail {

inline double parse_double(const std::string& field, std::int64_t line) {
  char* end = nullptr;
  const double x = std::strtod(field.c_str(), &end);
  if (field.empty() || end != field.c_str() + field.size()) {
    throw std::runtime_error("csv line " + std::to_string(line) + ": bad number '" + field + "'");
  }
  return x;
}

}  // namespace detail

inline std::vector<RoundRecord> parse_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kRoundCsvHeader) {
    throw std::runtime_error("csv: missing or unexpected header");
  }
  std::vector<RoundRecord> rows;
  std::int64_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (!line.empty() && line.back() == ',') f.emplace_back();
    if (f.size() != 8) {
      throw std::runtime_error("csv line " + std::to_string(lineno) + ": expected 8 fields");
    }
    RoundRecord r;
    r.rep = static_cast<int>(detail::parse_double(f[0], lineno));
    r.t = static_cast<std::int64_t>(detail::parse_double(f[1], lineno));
    r.bid = detail::parse_double(f[2], lineno);
    r.m = detail::parse_double(f[3], lineno);
    if (f[4] != "0" && f[4] != "1") {
      throw std::runtime_error("csv line " + std::to_string(lineno) + ": won must be 0 or 1");
    }
    r.won = f[4] == "1";
    if (!f[5].empty()) r.v = detail::parse_double(f[5], lineno);
    r.gain = detail::parse_double(f[6], lineno);
    r.cum_regret = detail::parse_double(f[7], lineno);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace vickrey
