#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qimetro/qfi.hpp"
#include "qimetro/strategies.hpp"

namespace qimetro {

/// Grid of (d, T, b) points plus the numerical controls for one sweep.
struct SweepSpec {
  std::vector<int> d_values;
  std::vector<double> t_values;
  std::vector<double> b_values;
  Convention convention = Convention::paper;
  Cutoff cutoff_start{kDefaultCutoff};
  double rel_tol = kCutoffRelTol;
  int max_cutoff = kMaxCutoff;
  std::vector<double> eps_schedule = kDefaultEpsSchedule;
  std::uint64_t seed = 0;

  void validate() const;
};

/// b = 1e-4, T in {1e-1, 1e-2, 1e-3}, d = 2, 4, ..., 200.
SweepSpec default_sweep_spec();

/// Parses the sectioned key/value config format (see docs/config.md).
SweepSpec parse_sweep_config(std::string_view text);
SweepSpec load_sweep_config(const std::filesystem::path& path);

struct SweepRow {
  int d = 0;
  double t = 0;
  double b = 0;
  double iq1 = 0;
  double iq2 = 0;
  double iq3 = 0;
  double iq1_boxed = 0;
  double iq2_boxed = 0;
  double ratio_2_over_3 = 0;
  int cutoff_used = 0;
  bool converged = false;
  Convention convention = Convention::paper;
  std::string error;  // empty unless the row failed; not part of the CSV

  bool ok() const { return error.empty(); }
};

/// One row per grid point in (T, b, d) order. The coherent-state value is computed once
/// per (T, b) and shared across d. Up to `jobs` (T, b) groups are evaluated concurrently.
std::vector<SweepRow> run_sweep(const SweepSpec& spec, int jobs = 1);

inline constexpr std::string_view kCsvHeader =
    "d,T,b,iq1,iq2,iq3,iq1_boxed,iq2_boxed,ratio_2_over_3,cutoff_used,converged,convention";

/// Shortest decimal string that parses back to the same double.
std::string format_double(double x);
double parse_double(std::string_view s);

std::string to_csv(const std::vector<SweepRow>& rows);
void emit_csv(const std::vector<SweepRow>& rows, const std::filesystem::path& path);
std::vector<SweepRow> parse_csv(std::string_view text);

std::string to_json(const std::vector<SweepRow>& rows);

/// Smallest even d at which iq2 > iq3 for one (T, b) series.
struct CrossoverReport {
  double t = 0;
  double b = 0;
  std::optional<int> d_star;
  bool holds_beyond = false;  // iq2 > iq3 for every d >= d_star in the series
  double final_ratio = 0;     // iq2 / iq3 at the largest d
};

std::vector<CrossoverReport> crossover_report(const std::vector<SweepRow>& rows);

}  // namespace qimetro
