#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "qimetro/sweep.hpp"

namespace qimetro {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string_view unquote(std::string_view s) {
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) return s.substr(1, s.size() - 2);
  return s;
}

// "[a, b, c]" or "a, b, c".
std::vector<std::string_view> list_items(std::string_view value) {
  value = trim(value);
  if (!value.empty() && value.front() == '[') {
    if (value.back() != ']') throw PreconditionError("config: unterminated list '" + std::string(value) + "'");
    value = value.substr(1, value.size() - 2);
  }
  std::vector<std::string_view> items;
  std::size_t start = 0;
  while (start <= value.size()) {
    const std::size_t comma = value.find(',', start);
    const std::string_view item = trim(value.substr(start, comma - start));
    if (!item.empty()) items.push_back(item);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return items;
}

long long to_integer(std::string_view s, const std::string& key) {
  long long x = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw PreconditionError("config: '" + key + "' expects an integer, got '" + std::string(s) + "'");
  return x;
}

double to_real(std::string_view s, const std::string& key) {
  try {
    return parse_double(s);
  } catch (const PreconditionError&) {
    throw PreconditionError("config: '" + key + "' expects a number, got '" + std::string(s) + "'");
  }
}

std::vector<double> real_list(std::string_view v, const std::string& key) {
  std::vector<double> out;
  for (auto item : list_items(v)) out.push_back(to_real(item, key));
  if (out.empty()) throw PreconditionError("config: '" + key + "' is an empty list");
  return out;
}

// An axis given either as `values = [...]` or as `start`/`stop`/`step`.
template <typename T>
std::vector<T> axis_values(const std::map<std::string, std::string>& kv, const std::string& section) {
  const auto get = [&](const char* k) -> const std::string* {
    const auto it = kv.find(k);
    return it == kv.end() ? nullptr : &it->second;
  };
  if (const auto* v = get("values")) {
    if (get("start") || get("stop") || get("step"))
      throw PreconditionError("config: [" + section + "] mixes 'values' with a range");
    std::vector<T> out;
    for (double x : real_list(*v, section + ".values")) {
      if constexpr (std::is_integral_v<T>) {
        if (x != double(T(x))) throw PreconditionError("config: [" + section + "] values must be integers");
      }
      out.push_back(T(x));
    }
    return out;
  }
  const auto* start = get("start");
  const auto* stop = get("stop");
  if (!start || !stop) throw PreconditionError("config: [" + section + "] needs 'values' or 'start'/'stop'");
  std::vector<T> out;
  if constexpr (std::is_integral_v<T>) {
    const long long a = to_integer(trim(*start), section + ".start");
    const long long b = to_integer(trim(*stop), section + ".stop");
    const long long step = get("step") ? to_integer(trim(*get("step")), section + ".step") : 1;
    if (step <= 0) throw PreconditionError("config: [" + section + "] step must be positive");
    for (long long x = a; x <= b; x += step) out.push_back(T(x));
  } else {
    throw PreconditionError("config: [" + section + "] real axes take an explicit 'values' list");
  }
  if (out.empty()) throw PreconditionError("config: [" + section + "] range is empty");
  return out;
}

const std::map<std::string, std::set<std::string>>& allowed_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"sweep", {"convention", "seed"}},
      {"d", {"values", "start", "stop", "step"}},
      {"T", {"values"}},
      {"b", {"values"}},
      {"numerics", {"cutoff_start", "rel_tol", "max_cutoff", "eps_schedule"}},
  };
  return keys;
}

}  // namespace

SweepSpec parse_sweep_config(std::string_view text) {
  std::map<std::string, std::map<std::string, std::string>> sections;
  std::string current;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = "config line " + std::to_string(line_no) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') throw PreconditionError(where + "malformed section header");
      current = std::string(trim(line.substr(1, line.size() - 2)));
      if (!allowed_keys().count(current)) throw PreconditionError(where + "unknown section [" + current + "]");
      if (sections.count(current)) throw PreconditionError(where + "duplicate section [" + current + "]");
      sections[current];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw PreconditionError(where + "expected key = value");
    if (current.empty()) throw PreconditionError(where + "key outside of a section");
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (!allowed_keys().at(current).count(key))
      throw PreconditionError(where + "unknown key '" + key + "' in [" + current + "]");
    if (sections[current].count(key)) throw PreconditionError(where + "duplicate key '" + key + "'");
    sections[current][key] = value;
  }

  SweepSpec spec = default_sweep_spec();
  if (sections.count("d")) spec.d_values = axis_values<int>(sections["d"], "d");
  if (sections.count("T")) spec.t_values = axis_values<double>(sections["T"], "T");
  if (sections.count("b")) spec.b_values = axis_values<double>(sections["b"], "b");
  if (sections.count("sweep")) {
    auto& s = sections["sweep"];
    if (s.count("convention")) spec.convention = parse_convention(unquote(s["convention"]));
    if (s.count("seed")) {
      const long long seed = to_integer(trim(s["seed"]), "sweep.seed");
      if (seed < 0) throw PreconditionError("config: sweep.seed must be >= 0");
      spec.seed = std::uint64_t(seed);
    }
  }
  if (sections.count("numerics")) {
    auto& s = sections["numerics"];
    if (s.count("cutoff_start")) spec.cutoff_start = Cutoff(int(to_integer(trim(s["cutoff_start"]), "numerics.cutoff_start")));
    if (s.count("rel_tol")) spec.rel_tol = to_real(trim(s["rel_tol"]), "numerics.rel_tol");
    if (s.count("max_cutoff")) spec.max_cutoff = int(to_integer(trim(s["max_cutoff"]), "numerics.max_cutoff"));
    if (s.count("eps_schedule")) spec.eps_schedule = real_list(s["eps_schedule"], "numerics.eps_schedule");
  }
  spec.validate();
  return spec;
}

SweepSpec load_sweep_config(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot read config '" + path.string() + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_sweep_config(ss.str());
}

}  // namespace qimetro
