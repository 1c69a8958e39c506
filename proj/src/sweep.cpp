#include "qimetro/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace qimetro {

void SweepSpec::validate() const {
  if (d_values.empty() || t_values.empty() || b_values.empty())
    throw PreconditionError("sweep: d, T and b value lists must be nonempty");
  for (int d : d_values)
    if (d < 2 || d % 2 != 0) throw PreconditionError("sweep: d values must be even and >= 2, got " + std::to_string(d));
  for (double t : t_values)
    if (!(t > 0 && t <= 1)) throw PreconditionError("sweep: T values must lie in (0, 1], got " + format_double(t));
  for (double b : b_values)
    if (!(b >= 0) || !std::isfinite(b)) throw PreconditionError("sweep: b values must be >= 0, got " + format_double(b));
  if (!(rel_tol > 0)) throw PreconditionError("sweep: rel_tol must be > 0");
  if (max_cutoff < cutoff_start.n_max()) throw PreconditionError("sweep: max_cutoff below cutoff_start");
}

SweepSpec default_sweep_spec() {
  SweepSpec s;
  for (int d = 2; d <= 200; d += 2) s.d_values.push_back(d);
  s.t_values = {1e-1, 1e-2, 1e-3};
  s.b_values = {1e-4};
  return s;
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct CoherentValue {
  double value = kNaN;
  int cutoff_used = 0;
  bool converged = false;
  std::string error;
};

CoherentValue coherent_value(const SweepSpec& spec, double t, double b) {
  CoherentValue out;
  try {
    const ChannelParams params{t, b, 2};
    const auto r = case3_qfi_appendix3(params, CutoffPolicy{spec.cutoff_start, spec.rel_tol, spec.max_cutoff});
    out.value = r.in(spec.convention).value;
    out.cutoff_used = r.cutoff_used ? r.cutoff_used->n_max() : 0;
    out.converged = r.converged;
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  return out;
}

}  // namespace

std::vector<SweepRow> run_sweep(const SweepSpec& spec, int jobs) {
  spec.validate();
  const std::size_t groups = spec.t_values.size() * spec.b_values.size();
  std::vector<CoherentValue> coherent(groups);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t g = next++; g < groups; g = next++) {
      const double t = spec.t_values[g / spec.b_values.size()];
      const double b = spec.b_values[g % spec.b_values.size()];
      coherent[g] = coherent_value(spec, t, b);
    }
  };
  const int threads = std::clamp(jobs, 1, int(std::max<std::size_t>(groups, 1)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
  }

  std::vector<SweepRow> rows;
  rows.reserve(groups * spec.d_values.size());
  for (std::size_t g = 0; g < groups; ++g) {
    const double t = spec.t_values[g / spec.b_values.size()];
    const double b = spec.b_values[g % spec.b_values.size()];
    for (int d : spec.d_values) {
      SweepRow row;
      row.d = d;
      row.t = t;
      row.b = b;
      row.convention = spec.convention;
      row.iq3 = coherent[g].value;
      row.cutoff_used = coherent[g].cutoff_used;
      row.converged = coherent[g].converged;
      row.error = coherent[g].error;
      try {
        const ChannelParams params{t, b, d};
        row.iq1 = case1_closed(params, spec.convention).value;
        row.iq2 = case2_closed(params, spec.convention).value;
        const double boxed_scale = convention_factor(spec.convention) / convention_factor(Convention::paper);
        row.iq1_boxed = case1_boxed(params) * boxed_scale;
        row.iq2_boxed = case2_boxed(params) * boxed_scale;
      } catch (const std::exception& e) {
        row.iq1 = row.iq2 = row.iq1_boxed = row.iq2_boxed = kNaN;
        row.converged = false;
        if (row.error.empty()) row.error = e.what();
      }
      row.ratio_2_over_3 = row.iq3 > 0 ? row.iq2 / row.iq3 : kNaN;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------
// CSV

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view s) {
  if (s == "nan") return kNaN;
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double x = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw PreconditionError("not a number: '" + std::string(s) + "'");
  return x;
}

namespace {

int parse_int(std::string_view s) {
  int x = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw PreconditionError("not an integer: '" + std::string(s) + "'");
  return x;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

std::string to_csv(const std::vector<SweepRow>& rows) {
  std::string out(kCsvHeader);
  out += '\n';
  for (const auto& r : rows) {
    out += std::to_string(r.d);
    for (double v : {r.t, r.b, r.iq1, r.iq2, r.iq3, r.iq1_boxed, r.iq2_boxed, r.ratio_2_over_3}) {
      out += ',';
      out += format_double(v);
    }
    out += ',';
    out += std::to_string(r.cutoff_used);
    out += r.converged ? ",true," : ",false,";
    out += to_string(r.convention);
    out += '\n';
  }
  return out;
}

void emit_csv(const std::vector<SweepRow>& rows, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
  const std::string text = to_csv(rows);
  f.write(text.data(), std::streamsize(text.size()));
  f.close();
  if (!f) throw IoError("failed writing '" + path.string() + "'");
}

std::vector<SweepRow> parse_csv(std::string_view text) {
  std::vector<SweepRow> rows;
  bool header = true;
  std::size_t line_no = 0;
  for (std::string_view line : split(text, '\n')) {
    ++line_no;
    if (line.empty()) continue;
    if (header) {
      if (line != kCsvHeader) throw PreconditionError("CSV header mismatch");
      header = false;
      continue;
    }
    const auto f = split(line, ',');
    if (f.size() != 12) throw PreconditionError("CSV line " + std::to_string(line_no) + ": expected 12 fields");
    SweepRow r;
    r.d = parse_int(f[0]);
    r.t = parse_double(f[1]);
    r.b = parse_double(f[2]);
    r.iq1 = parse_double(f[3]);
    r.iq2 = parse_double(f[4]);
    r.iq3 = parse_double(f[5]);
    r.iq1_boxed = parse_double(f[6]);
    r.iq2_boxed = parse_double(f[7]);
    r.ratio_2_over_3 = parse_double(f[8]);
    r.cutoff_used = parse_int(f[9]);
    if (f[10] != "true" && f[10] != "false") throw PreconditionError("CSV: bad converged flag");
    r.converged = f[10] == "true";
    r.convention = parse_convention(f[11]);
    rows.push_back(std::move(r));
  }
  if (header) throw PreconditionError("CSV: missing header");
  return rows;
}

std::string to_json(const std::vector<SweepRow>& rows) {
  auto num = [](double x) -> nlohmann::json {
    if (std::isfinite(x)) return x;
    return nullptr;
  };
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json j;
    j["d"] = r.d;
    j["T"] = num(r.t);
    j["b"] = num(r.b);
    j["iq1"] = num(r.iq1);
    j["iq2"] = num(r.iq2);
    j["iq3"] = num(r.iq3);
    j["iq1_boxed"] = num(r.iq1_boxed);
    j["iq2_boxed"] = num(r.iq2_boxed);
    j["ratio_2_over_3"] = num(r.ratio_2_over_3);
    j["cutoff_used"] = r.cutoff_used;
    j["converged"] = r.converged;
    j["convention"] = std::string(to_string(r.convention));
    if (!r.ok()) j["error"] = r.error;
    arr.push_back(std::move(j));
  }
  return arr.dump(2);
}

std::vector<CrossoverReport> crossover_report(const std::vector<SweepRow>& rows) {
  // Group by (T, b) in first-appearance order.
  std::vector<std::pair<double, double>> keys;
  std::map<std::pair<double, double>, std::vector<const SweepRow*>> series;
  for (const auto& r : rows) {
    const auto key = std::make_pair(r.t, r.b);
    if (!series.count(key)) keys.push_back(key);
    series[key].push_back(&r);
  }
  std::vector<CrossoverReport> out;
  for (const auto& key : keys) {
    auto s = series[key];
    std::stable_sort(s.begin(), s.end(), [](const SweepRow* a, const SweepRow* b) { return a->d < b->d; });
    CrossoverReport rep;
    rep.t = key.first;
    rep.b = key.second;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i]->iq2 > s[i]->iq3) {
        rep.d_star = s[i]->d;
        rep.holds_beyond = std::all_of(s.begin() + std::ptrdiff_t(i), s.end(),
                                       [](const SweepRow* r) { return r->iq2 > r->iq3; });
        break;
      }
    }
    rep.final_ratio = s.back()->ratio_2_over_3;
    out.push_back(rep);
  }
  return out;
}

}  // namespace qimetro
