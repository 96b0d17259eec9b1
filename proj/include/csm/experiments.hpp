#pragma once

// Parameter sweeps over (n, p) with per-trial derived streams, aggregated
// into one ResultRow per cell and written as CSV or JSON lines.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "csm/enumeration.hpp"
#include "csm/stats.hpp"

namespace csm {

/// Invalid sweep configuration; reported before any work starts.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class SweepStat { exists_complete, unmatched, Q_minus, Q_plus, R_minus, R_plus, proposals, S_complete };

const char* to_string(SweepStat s);
SweepStat parse_sweep_stat(const std::string& name);

enum class Format { csv, jsonl };

struct SweepConfig {
  std::vector<std::size_t> n_values;
  std::vector<double> p_values;  // absolute probabilities
  std::vector<double> c_values;  // multipliers of ln^2 n / n; exclusive with p_values
  std::uint64_t trials = 1;
  std::uint64_t seed = 0;
  Mode mode = Mode::dense;
  std::vector<SweepStat> statistics = {SweepStat::exists_complete, SweepStat::unmatched, SweepStat::Q_minus,
                                       SweepStat::Q_plus,          SweepStat::R_minus,   SweepStat::R_plus,
                                       SweepStat::proposals};
  unsigned threads = 1;
  bool timing = false;  // fill elapsed_s and peak_rss_kb; output is then not reproducible
  std::size_t enumeration_cap = kDefaultEnumerationCap;
  Format format = Format::csv;
  std::string out = "-";  // "-" is standard output

  bool wants(SweepStat s) const;
};

/// Throws ConfigError describing the first problem found.
void validate(const SweepConfig& config);

/// Apply one `key = value` setting (keys mirror the CLI flags: n, p, c,
/// trials, seed, mode, statistics, threads, timing, cap, format, out).
/// List values are comma separated.
void apply_setting(SweepConfig& config, const std::string& key, const std::string& value);

/// Flat key=value file; blank lines and lines starting with '#' are skipped.
SweepConfig parse_config(std::istream& in, SweepConfig base = {});
SweepConfig load_config(const std::string& path, SweepConfig base = {});

/// min(1, c ln^2 n / n).
double resolve_p(std::size_t n, double c);
/// c such that p = c ln^2 n / n; NaN for n = 1.
double implied_c(std::size_t n, double p);

struct Cell {
  std::size_t index = 0;  // position in the sweep, n-major
  std::size_t n = 0;
  double p = 0.0;
  double c = 0.0;
};

std::vector<Cell> plan_cells(const SweepConfig& config);

/// Stream of trial t in a cell: (seed, cell.index * trials + t).
StreamSpec trial_stream(const SweepConfig& config, const Cell& cell, std::uint64_t t);

struct ResultRow {
  std::size_t n = 0;
  double p = 0.0;
  double c = 0.0;
  std::uint64_t trials = 0;
  double frac_complete = 0.0;
  MCEstimate unmatched, Q_minus, Q_plus, R_minus, R_plus, proposals, S_complete;
  std::uint64_t size_mismatches = 0;  // dense mode: men and women runs of different size
  double elapsed_s = 0.0;
  long peak_rss_kb = 0;
};

/// One cell. Trials run on `config.threads` workers; per-trial values are
/// reduced in trial order, so the row does not depend on the worker count.
/// Statistics not requested are NaN.
///
/// Q_minus and R_plus come from the men-proposing run, Q_plus and R_minus
/// from the women-proposing run. Dense mode runs both on one instance. Lazy
/// mode consumes an instance per run, so the women run uses an independent
/// instance drawn from trial_stream(...).child(1).
ResultRow run_cell(const SweepConfig& config, const Cell& cell);

std::vector<ResultRow> run_sweep(const SweepConfig& config);

extern const char* const kCsvHeader;

void write_csv(std::ostream& out, const std::vector<ResultRow>& rows);
void write_jsonl(std::ostream& out, const std::vector<ResultRow>& rows, bool with_resources = false);
/// Reads what write_csv produced.
std::vector<ResultRow> parse_csv(std::istream& in);

/// Write rows to `path` ("-" for standard output). Throws std::runtime_error
/// naming the path on I/O failure.
void emit(const std::vector<ResultRow>& rows, Format format, const std::string& path, bool with_resources = false);

/// Peak resident set size of this process in kilobytes.
long peak_rss_kb();

}  // namespace csm
