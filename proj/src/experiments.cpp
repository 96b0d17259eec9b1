#include "csm/experiments.hpp"

#include <sys/resource.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include "json.hpp"

#include "csm/lazy_instance.hpp"
#include "csm/matching.hpp"
#include "csm/parallel.hpp"

namespace csm {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return {};
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  for (std::string item; std::getline(ss, item, ',');) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double parse_double(const std::string& key, const std::string& text) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size())
    throw ConfigError(key + ": '" + text + "' is not a number");
  return v;
}

std::uint64_t parse_uint(const std::string& key, const std::string& text) {
  if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos)
    throw ConfigError(key + ": '" + text + "' is not a non-negative integer");
  try {
    return std::stoull(text);
  } catch (const std::exception&) {
    throw ConfigError(key + ": '" + text + "' is out of range");
  }
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "1" || text == "true" || text == "yes" || text == "on") return true;
  if (text == "0" || text == "false" || text == "no" || text == "off") return false;
  throw ConfigError(key + ": '" + text + "' is not a boolean");
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

// Value as it appears after a %.9g round trip; NaN stays NaN.
double rounded(double v) { return std::strtod(fmt(v).c_str(), nullptr); }

MCEstimate missing() { return {kNaN, kNaN, 0}; }

}  // namespace

const char* to_string(SweepStat s) {
  switch (s) {
    case SweepStat::exists_complete: return "exists_complete";
    case SweepStat::unmatched: return "unmatched";
    case SweepStat::Q_minus: return "Q_minus";
    case SweepStat::Q_plus: return "Q_plus";
    case SweepStat::R_minus: return "R_minus";
    case SweepStat::R_plus: return "R_plus";
    case SweepStat::proposals: return "proposals";
    case SweepStat::S_complete: return "S_complete";
  }
  return "?";
}

SweepStat parse_sweep_stat(const std::string& name) {
  for (auto s : {SweepStat::exists_complete, SweepStat::unmatched, SweepStat::Q_minus, SweepStat::Q_plus,
                 SweepStat::R_minus, SweepStat::R_plus, SweepStat::proposals, SweepStat::S_complete})
    if (name == to_string(s)) return s;
  throw ConfigError("unknown statistic '" + name + "'");
}

bool SweepConfig::wants(SweepStat s) const {
  return std::find(statistics.begin(), statistics.end(), s) != statistics.end();
}

void validate(const SweepConfig& config) {
  if (config.n_values.empty()) throw ConfigError("no n values given");
  for (auto n : config.n_values)
    if (n == 0) throw ConfigError("n values must be positive");
  if (config.p_values.empty() == config.c_values.empty())
    throw ConfigError("give either p values or c multipliers, not both or neither");
  for (double p : config.p_values)
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("p = " + fmt(p) + " is outside [0, 1]");
  for (double c : config.c_values)
    if (!(c >= 0.0) || !std::isfinite(c)) throw ConfigError("c = " + fmt(c) + " must be finite and non-negative");
  if (!config.c_values.empty())
    for (auto n : config.n_values)
      if (n < 2) throw ConfigError("c multipliers need n >= 2 (ln 1 = 0)");
  if (config.trials == 0) throw ConfigError("trials must be at least 1");
  if (config.statistics.empty()) throw ConfigError("no statistics selected");
  if (config.wants(SweepStat::S_complete)) {
    if (config.mode != Mode::dense) throw ConfigError("S_complete needs dense mode");
    for (auto n : config.n_values)
      if (n > config.enumeration_cap)
        throw ConfigError("S_complete needs n <= enumeration cap " + std::to_string(config.enumeration_cap));
  }
  if (config.out.empty()) throw ConfigError("output path is empty");
}

void apply_setting(SweepConfig& config, const std::string& raw_key, const std::string& raw_value) {
  const std::string key = trim(raw_key);
  const std::string value = trim(raw_value);
  if (key == "n") {
    config.n_values.clear();
    for (const auto& item : split_list(value)) config.n_values.push_back(parse_uint(key, item));
  } else if (key == "p") {
    config.p_values.clear();
    for (const auto& item : split_list(value)) config.p_values.push_back(parse_double(key, item));
  } else if (key == "c") {
    config.c_values.clear();
    for (const auto& item : split_list(value)) config.c_values.push_back(parse_double(key, item));
  } else if (key == "trials") {
    config.trials = parse_uint(key, value);
  } else if (key == "seed") {
    config.seed = parse_uint(key, value);
  } else if (key == "mode") {
    if (value == "dense")
      config.mode = Mode::dense;
    else if (value == "lazy")
      config.mode = Mode::lazy;
    else
      throw ConfigError("mode must be dense or lazy");
  } else if (key == "statistics") {
    config.statistics.clear();
    for (const auto& item : split_list(value)) config.statistics.push_back(parse_sweep_stat(item));
  } else if (key == "threads") {
    config.threads = static_cast<unsigned>(parse_uint(key, value));
  } else if (key == "timing") {
    config.timing = parse_bool(key, value);
  } else if (key == "cap") {
    config.enumeration_cap = parse_uint(key, value);
  } else if (key == "format") {
    if (value == "csv")
      config.format = Format::csv;
    else if (value == "jsonl")
      config.format = Format::jsonl;
    else
      throw ConfigError("format must be csv or jsonl");
  } else if (key == "out") {
    config.out = value;
  } else {
    throw ConfigError("unknown setting '" + key + "'");
  }
}

SweepConfig parse_config(std::istream& in, SweepConfig base) {
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": expected key=value");
    try {
      apply_setting(base, t.substr(0, eq), t.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return base;
}

SweepConfig load_config(const std::string& path, SweepConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  try {
    return parse_config(in, std::move(base));
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

double resolve_p(std::size_t n, double c) {
  const double nd = static_cast<double>(n);
  const double ln = std::log(nd);
  return std::min(1.0, c * ln * ln / nd);
}

double implied_c(std::size_t n, double p) {
  if (n < 2) return kNaN;
  const double nd = static_cast<double>(n);
  const double ln = std::log(nd);
  return p * nd / (ln * ln);
}

std::vector<Cell> plan_cells(const SweepConfig& config) {
  std::vector<Cell> cells;
  for (auto n : config.n_values) {
    if (!config.c_values.empty()) {
      for (double c : config.c_values) cells.push_back({cells.size(), n, resolve_p(n, c), c});
    } else {
      for (double p : config.p_values) cells.push_back({cells.size(), n, p, implied_c(n, p)});
    }
  }
  return cells;
}

StreamSpec trial_stream(const SweepConfig& config, const Cell& cell, std::uint64_t t) {
  return {config.seed, static_cast<std::uint64_t>(cell.index) * config.trials + t};
}

ResultRow run_cell(const SweepConfig& config, const Cell& cell) {
  const auto start = std::chrono::steady_clock::now();
  const std::uint64_t trials = config.trials;
  const bool need_women = config.wants(SweepStat::Q_plus) || config.wants(SweepStat::R_minus);
  const bool need_enum = config.wants(SweepStat::S_complete);

  struct Trial {
    double complete, unmatched, q_minus, q_plus, r_minus, r_plus, proposals, s_complete;
    bool mismatch;
  };
  std::vector<Trial> out(trials);
  parallel_for(trials, config.threads, [&](std::size_t t) {
    const StreamSpec spec = trial_stream(config, cell, t);
    Trial& r = out[t];
    r = {kNaN, kNaN, kNaN, kNaN, kNaN, kNaN, kNaN, kNaN, false};
    auto record_men = [&](const MatchOutcome& men) {
      r.complete = men.size == cell.n ? 1.0 : 0.0;
      r.unmatched = static_cast<double>(cell.n - men.size);
      r.q_minus = static_cast<double>(men.wife_rank_total);
      r.r_plus = static_cast<double>(men.husband_rank_total);
      r.proposals = static_cast<double>(men.proposals);
    };
    auto record_women = [&](const MatchOutcome& women) {
      r.q_plus = static_cast<double>(women.wife_rank_total);
      r.r_minus = static_cast<double>(women.husband_rank_total);
    };
    if (config.mode == Mode::dense) {
      const DenseInstance inst = generate_dense(cell.n, cell.p, spec);
      const MatchOutcome men = propose(inst, Side::men);
      record_men(men);
      if (need_women) {
        const MatchOutcome women = propose(inst, Side::women);
        record_women(women);
        r.mismatch = women.size != men.size;
      }
      if (need_enum)
        r.s_complete = static_cast<double>(enumerate_stable(inst, config.enumeration_cap).complete_count);
    } else {
      {
        LazyInstance lazy(cell.n, cell.p, spec, Side::men);
        record_men(propose(lazy, Side::men));
      }
      if (need_women) {
        LazyInstance lazy(cell.n, cell.p, spec.child(1), Side::women);
        record_women(propose(lazy, Side::women));
      }
    }
  });

  auto stat = [&](SweepStat which, double Trial::*field) {
    if (!config.wants(which)) return missing();
    std::vector<double> values(trials);
    for (std::size_t t = 0; t < trials; ++t) values[t] = out[t].*field;
    return summarize(values);
  };
  ResultRow row;
  row.n = cell.n;
  row.p = cell.p;
  row.c = cell.c;
  row.trials = trials;
  row.frac_complete = stat(SweepStat::exists_complete, &Trial::complete).mean;
  row.unmatched = stat(SweepStat::unmatched, &Trial::unmatched);
  row.Q_minus = stat(SweepStat::Q_minus, &Trial::q_minus);
  row.Q_plus = stat(SweepStat::Q_plus, &Trial::q_plus);
  row.R_minus = stat(SweepStat::R_minus, &Trial::r_minus);
  row.R_plus = stat(SweepStat::R_plus, &Trial::r_plus);
  row.proposals = stat(SweepStat::proposals, &Trial::proposals);
  row.S_complete = stat(SweepStat::S_complete, &Trial::s_complete);
  for (const auto& r : out) row.size_mismatches += r.mismatch;
  if (config.timing) {
    row.elapsed_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    row.peak_rss_kb = peak_rss_kb();
  }
  return row;
}

std::vector<ResultRow> run_sweep(const SweepConfig& config) {
  validate(config);
  std::vector<ResultRow> rows;
  for (const Cell& cell : plan_cells(config)) rows.push_back(run_cell(config, cell));
  return rows;
}

const char* const kCsvHeader =
    "n,p,c,trials,frac_complete,mean_unmatched,se_unmatched,mean_Q_minus,se_Q_minus,mean_Q_plus,se_Q_plus,"
    "mean_R_minus,se_R_minus,mean_R_plus,se_R_plus,mean_proposals,se_proposals,elapsed_s";

void write_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << kCsvHeader << '\n';
  for (const auto& r : rows) {
    out << r.n << ',' << fmt(r.p) << ',' << fmt(r.c) << ',' << r.trials << ',' << fmt(r.frac_complete);
    for (const MCEstimate* e : {&r.unmatched, &r.Q_minus, &r.Q_plus, &r.R_minus, &r.R_plus, &r.proposals})
      out << ',' << fmt(e->mean) << ',' << fmt(e->se);
    out << ',' << fmt(r.elapsed_s) << '\n';
  }
}

void write_jsonl(std::ostream& out, const std::vector<ResultRow>& rows, bool with_resources) {
  for (const auto& r : rows) {
    nlohmann::ordered_json j;
    j["n"] = r.n;
    j["p"] = rounded(r.p);
    j["c"] = rounded(r.c);
    j["trials"] = r.trials;
    j["frac_complete"] = rounded(r.frac_complete);
    auto put = [&](const char* name, const MCEstimate& e) {
      j[std::string("mean_") + name] = rounded(e.mean);
      j[std::string("se_") + name] = rounded(e.se);
    };
    put("unmatched", r.unmatched);
    put("Q_minus", r.Q_minus);
    put("Q_plus", r.Q_plus);
    put("R_minus", r.R_minus);
    put("R_plus", r.R_plus);
    put("proposals", r.proposals);
    j["elapsed_s"] = rounded(r.elapsed_s);
    put("S_complete", r.S_complete);
    j["size_mismatches"] = r.size_mismatches;
    if (with_resources) j["peak_rss_kb"] = r.peak_rss_kb;
    out << j.dump() << '\n';
  }
}

std::vector<ResultRow> parse_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw std::runtime_error("csv: missing or unexpected header");
  std::vector<ResultRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (f.size() != 18) throw std::runtime_error("csv: expected 18 fields, got " + std::to_string(f.size()));
    auto num = [&](std::size_t i) { return std::strtod(f[i].c_str(), nullptr); };
    ResultRow r;
    r.n = static_cast<std::size_t>(std::stoull(f[0]));
    r.p = num(1);
    r.c = num(2);
    r.trials = std::stoull(f[3]);
    r.frac_complete = num(4);
    std::size_t i = 5;
    for (MCEstimate* e : {&r.unmatched, &r.Q_minus, &r.Q_plus, &r.R_minus, &r.R_plus, &r.proposals}) {
      e->mean = num(i++);
      e->se = num(i++);
      e->count = r.trials;
    }
    r.elapsed_s = num(17);
    r.S_complete = missing();
    rows.push_back(r);
  }
  return rows;
}

void emit(const std::vector<ResultRow>& rows, Format format, const std::string& path, bool with_resources) {
  auto write = [&](std::ostream& out) {
    if (format == Format::csv)
      write_csv(out, rows);
    else
      write_jsonl(out, rows, with_resources);
  };
  if (path == "-") {
    write(std::cout);
    std::cout.flush();
    if (!std::cout) throw std::runtime_error("failed writing results to standard output");
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file " + path);
  write(out);
  out.close();
  if (!out) throw std::runtime_error("failed writing results to " + path);
}

long peak_rss_kb() {
  rusage usage{};
  getrusage(RUSAGE_SELF, &usage);
  return usage.ru_maxrss;
}

}  // namespace csm
