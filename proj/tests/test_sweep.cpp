#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "qimetro/cli.hpp"
#include "qimetro/sweep.hpp"

using namespace qimetro;

namespace {

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "qimetro");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  auto* old_out = std::cout.rdbuf(out.rdbuf());
  auto* old_err = std::cerr.rdbuf(err.rdbuf());
  const int code = cli_main(int(argv.size()), argv.data());
  std::cout.rdbuf(old_out);
  std::cerr.rdbuf(old_err);
  return {code, out.str(), err.str()};
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("qimetro_test_" + name);
}

SweepSpec small_spec() {
  SweepSpec s = default_sweep_spec();
  s.d_values = {2, 4, 6, 8};
  s.t_values = {0.1, 0.01};
  return s;
}

}  // namespace

TEST_CASE("default grid") {
  const auto s = default_sweep_spec();
  CHECK(s.d_values.size() == 100);
  CHECK(s.d_values.front() == 2);
  CHECK(s.d_values.back() == 200);
  CHECK(s.t_values == std::vector<double>{1e-1, 1e-2, 1e-3});
  CHECK(s.b_values == std::vector<double>{1e-4});
  CHECK(s.convention == Convention::paper);
}

TEST_CASE("sweep rows") {
  SweepSpec lossless = default_sweep_spec();
  lossless.d_values = {2};
  lossless.t_values = {1};
  lossless.b_values = {0};
  const auto one = run_sweep(lossless);
  REQUIRE(one.size() == 1);
  CHECK(one[0].iq1 == 0.5);
  CHECK(one[0].iq2 == 0.5);
  CHECK(one[0].iq3 == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(one[0].converged);

  const auto rows = run_sweep(default_sweep_spec(), 3);
  CHECK(rows.size() == 300);
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (rows[i].t == rows[i - 1].t) {
      CHECK(rows[i].iq2 > rows[i - 1].iq2);
      CHECK(rows[i].iq3 == rows[i - 1].iq3);
      CHECK(rows[i].iq1 == doctest::Approx(rows[i - 1].iq1).epsilon(1e-14));
    }
  for (const auto& r : rows) {
    CHECK(r.converged);
    CHECK(r.ratio_2_over_3 == r.iq2 / r.iq3);
    CHECK(r.iq1 >= 0);
  }
  CHECK(to_csv(rows) == to_csv(run_sweep(default_sweep_spec(), 1)));

  const auto report = crossover_report(rows);
  REQUIRE(report.size() == 3);
  for (const auto& c : report) {
    CHECK(c.d_star.has_value());
    CHECK(c.holds_beyond);
  }

  SweepSpec standard = small_spec();
  standard.convention = Convention::standard;
  const auto a = run_sweep(small_spec());
  const auto b = run_sweep(standard);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(b[i].iq1 == doctest::Approx(2 * a[i].iq1).epsilon(1e-14));
    CHECK(b[i].iq3 == doctest::Approx(2 * a[i].iq3).epsilon(1e-14));
    CHECK(b[i].iq2_boxed == doctest::Approx(2 * a[i].iq2_boxed).epsilon(1e-14));
    CHECK(b[i].ratio_2_over_3 == doctest::Approx(a[i].ratio_2_over_3).epsilon(1e-14));
  }
}

TEST_CASE("spec validation") {
  SweepSpec s = small_spec();
  s.d_values = {3};
  CHECK_THROWS_AS(s.validate(), PreconditionError);
  s = small_spec();
  s.t_values = {};
  CHECK_THROWS_AS(s.validate(), PreconditionError);
  s = small_spec();
  s.rel_tol = 0;
  CHECK_THROWS_AS(s.validate(), PreconditionError);
}

TEST_CASE("number formatting") {
  for (double x : {0.1, 1e-300, 4.902922141596392e-3, 123456789.0, -2.5, 0.0}) {
    CHECK(parse_double(format_double(x)) == x);
  }
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
  CHECK(std::isnan(parse_double("nan")));
  CHECK_THROWS_AS(parse_double("1.0x"), PreconditionError);
}

TEST_CASE("CSV output") {
  CHECK(to_csv({}) == std::string(kCsvHeader) + "\n");

  const auto rows = run_sweep(small_spec());
  const std::string text = to_csv(rows);
  CHECK(std::count(text.begin(), text.end(), '\n') == std::ptrdiff_t(rows.size() + 1));
  CHECK(text.find('\r') == std::string::npos);

  const auto back = parse_csv(text);
  REQUIRE(back.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(back[i].d == rows[i].d);
    CHECK(std::memcmp(&back[i].iq1, &rows[i].iq1, sizeof(double)) == 0);
    CHECK(std::memcmp(&back[i].iq3, &rows[i].iq3, sizeof(double)) == 0);
    CHECK(std::memcmp(&back[i].ratio_2_over_3, &rows[i].ratio_2_over_3, sizeof(double)) == 0);
    CHECK(back[i].cutoff_used == rows[i].cutoff_used);
    CHECK(back[i].converged == rows[i].converged);
    CHECK(back[i].convention == rows[i].convention);
  }
  CHECK(to_csv(back) == text);

  SweepSpec one = small_spec();
  one.d_values = {2};
  one.t_values = {0.1};
  const auto path = temp_path("one.csv");
  emit_csv(run_sweep(one), path);
  std::ifstream f(path);
  std::string line;
  int lines = 0;
  while (std::getline(f, line)) ++lines;
  CHECK(lines == 2);
  std::filesystem::remove(path);

  CHECK_THROWS_AS(emit_csv(rows, "/nonexistent-dir/x.csv"), IoError);
  CHECK_THROWS_AS(parse_csv("d,T\n1,2\n"), PreconditionError);
}

TEST_CASE("JSON output") {
  const auto rows = run_sweep(small_spec());
  const std::string j = to_json(rows);
  CHECK(j.find("\"iq2_boxed\"") != std::string::npos);
  CHECK(j.find("\"ratio_2_over_3\"") != std::string::npos);
}

TEST_CASE("config parsing") {
  const auto spec = parse_sweep_config(R"(
# small grid
[sweep]
convention = "standard"
seed = 7

[d]
start = 2
stop = 10
step = 2

[T]
values = [0.1, 0.01]

[b]
values = [1e-4]

[numerics]
cutoff_start = 12
rel_tol = 1e-9
max_cutoff = 48
eps_schedule = [0.04, 0.02, 0.01]
)");
  CHECK(spec.d_values == std::vector<int>{2, 4, 6, 8, 10});
  CHECK(spec.t_values == std::vector<double>{0.1, 0.01});
  CHECK(spec.convention == Convention::standard);
  CHECK(spec.seed == 7);
  CHECK(spec.cutoff_start.n_max() == 12);
  CHECK(spec.rel_tol == 1e-9);

  CHECK(parse_sweep_config("[d]\nvalues = 2, 4\n").d_values == std::vector<int>{2, 4});
  CHECK(parse_sweep_config("").d_values.size() == 100);

  CHECK_THROWS_AS(parse_sweep_config("[d]\nvalues = [2]\nvalues = [4]\n"), PreconditionError);
  CHECK_THROWS_AS(parse_sweep_config("[grid]\n"), PreconditionError);
  CHECK_THROWS_AS(parse_sweep_config("[d]\nfoo = 1\n"), PreconditionError);
  CHECK_THROWS_AS(parse_sweep_config("values = [2]\n"), PreconditionError);
  CHECK_THROWS_AS(parse_sweep_config("[d]\nvalues = [3]\n"), PreconditionError);
  CHECK_THROWS_AS(parse_sweep_config("[T]\nvalues = [abc]\n"), PreconditionError);
  CHECK_THROWS_AS(parse_sweep_config("[sweep]\nconvention = bures\n"), PreconditionError);
  CHECK_THROWS_AS(load_sweep_config("/nonexistent/config.toml"), IoError);
}

TEST_CASE("command line") {
  SUBCASE("single values") {
    auto r = run_cli({"case1", "--transmissivity", "1", "--noise", "0", "--modes", "2"});
    CHECK(r.code == 0);
    CHECK(r.out == "0.5\n");
    r = run_cli({"case2", "--transmissivity", "1", "--noise", "0", "--modes", "2", "--convention", "standard"});
    CHECK(r.out == "1\n");
    r = run_cli({"case1", "-T", "0.01", "-b", "1e-4"});
    CHECK(parse_double(r.out.substr(0, r.out.size() - 1)) == doctest::Approx(0.004902922141596392).epsilon(1e-15));
    r = run_cli({"case3", "-T", "0.1", "-b", "1e-4", "--json"});
    CHECK(r.code == 0);
    CHECK(r.out.find("\"converged\": true") != std::string::npos);
    CHECK(r.out.find("\"convention\": \"paper\"") != std::string::npos);
  }
  SUBCASE("usage errors") {
    CHECK(run_cli({"case1", "--bogus"}).code == kExitUsage);
    CHECK(run_cli({}).code == kExitUsage);
    CHECK(run_cli({"case1", "--modes", "3"}).code == kExitUsage);
    CHECK(run_cli({"case1", "--convention", "bures"}).code == kExitUsage);
    CHECK(run_cli({"case1", "--transmissivity", "0", "--noise", "0"}).code == kExitUsage);
    CHECK(run_cli({"--help"}).code == kExitOk);
  }
  SUBCASE("I/O errors") {
    CHECK(run_cli({"sweep", "--config", "/nonexistent/grid.toml"}).code == kExitIo);
    CHECK(run_cli({"sweep", "-d", "2", "-T", "0.1", "--out", "/nonexistent-dir/out.csv"}).code == kExitIo);
  }
  SUBCASE("convergence failure under --strict") {
    // A tolerance below roundoff cannot be certified.
    const std::vector<std::string> args{"case3", "-T", "0.5", "-b", "0.01", "--cutoff", "12", "--max-cutoff", "24",
                                        "--rel-tol", "1e-16"};
    const auto lax = run_cli(args);
    auto strict_args = args;
    strict_args.push_back("--strict");
    const auto strict = run_cli(strict_args);
    CHECK(lax.code == kExitOk);
    CHECK(lax.err.find("certificate not met") != std::string::npos);
    CHECK(strict.code == kExitNumerical);
    CHECK(run_cli({"case3", "-T", "0.9", "-b", "0.3", "--cutoff", "8", "--max-cutoff", "8"}).code == kExitNumerical);
  }
  SUBCASE("sweep to file") {
    const auto cfg = temp_path("grid.toml");
    {
      std::ofstream f(cfg);
      f << "[d]\nstart = 2\nstop = 8\nstep = 2\n[T]\nvalues = [0.1]\n";
    }
    const auto out = temp_path("grid.csv");
    const auto r = run_cli({"sweep", "--config", cfg.string(), "--out", out.string(), "--jobs", "2"});
    CHECK(r.code == 0);
    CHECK(r.err.find("entangled exceeds coherent") != std::string::npos);
    std::ifstream f(out);
    std::stringstream ss;
    ss << f.rdbuf();
    CHECK(parse_csv(ss.str()).size() == 4);
    std::filesystem::remove(cfg);
    std::filesystem::remove(out);
  }
}
