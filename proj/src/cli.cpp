#include "qimetro/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "qimetro/strategies.hpp"
#include "qimetro/sweep.hpp"
#include "qimetro/verify.hpp"

namespace qimetro {

namespace {

struct Options {
  double transmissivity = 1;
  double noise = 0;
  int modes = 2;
  std::optional<int> cutoff;
  std::optional<int> max_cutoff;
  std::optional<double> rel_tol;
  std::string convention = "paper";
  std::optional<std::string> config;
  std::optional<std::string> out;
  bool json = false;
  std::optional<std::uint64_t> seed;
  int jobs = 1;
  bool strict = false;
};

int default_jobs() {
  if (const char* env = std::getenv("QFI_JOBS")) {
    try {
      const int j = std::stoi(env);
      if (j >= 1) return j;
    } catch (const std::exception&) {
    }
    std::cerr << "warning: ignoring invalid QFI_JOBS='" << env << "'\n";
  }
  return 1;
}

void add_channel_flags(CLI::App* app, Options& o, bool with_modes) {
  app->add_option("--transmissivity,-T", o.transmissivity, "Channel transmissivity T in (0, 1]");
  app->add_option("--noise,-b", o.noise, "Mean thermal noise photons per mode, b >= 0");
  if (with_modes) app->add_option("--modes,-d", o.modes, "Number of signal modes d (even, >= 2)");
}

void add_common_flags(CLI::App* app, Options& o) {
  app->add_option("--convention", o.convention, "Fisher-information normalization")
      ->check(CLI::IsMember({"paper", "standard"}));
  app->add_flag("--json", o.json, "Print JSON instead of plain text");
  app->add_option("--out,-o", o.out, "Write output to this file");
}

void add_numeric_flags(CLI::App* app, Options& o) {
  app->add_option("--cutoff", o.cutoff, "Starting Fock cutoff per mode")->check(CLI::PositiveNumber);
  app->add_option("--max-cutoff", o.max_cutoff, "Largest cutoff tried by the convergence loop")
      ->check(CLI::PositiveNumber);
  app->add_option("--rel-tol", o.rel_tol, "Relative tolerance of the cutoff certificate")
      ->check(CLI::PositiveNumber);
  app->add_flag("--strict", o.strict, "Exit 2 when any value lacks a convergence certificate");
}

void write_text(const Options& o, const std::string& text) {
  if (!o.out) {
    std::cout << text;
    return;
  }
  std::ofstream f(*o.out, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open '" + *o.out + "' for writing");
  f << text;
  f.close();
  if (!f) throw IoError("failed writing '" + *o.out + "'");
}

nlohmann::json result_json(const QfiResult<>& r, const ChannelParams& p) {
  nlohmann::json j;
  j["strategy"] = std::string(to_string(r.strategy));
  j["value"] = r.value;
  j["convention"] = std::string(to_string(r.convention));
  j["T"] = p.transmissivity;
  j["b"] = p.noise_per_mode;
  j["d"] = p.modes;
  j["converged"] = r.converged;
  if (r.cutoff_used) {
    j["cutoff_used"] = r.cutoff_used->n_max();
    j["relative_change"] = r.relative_change;
  }
  return j;
}

int report_value(const Options& o, const QfiResult<>& r, const ChannelParams& p) {
  write_text(o, o.json ? result_json(r, p).dump(2) + "\n" : format_double(r.value) + "\n");
  if (!r.converged) {
    std::cerr << "warning: cutoff certificate not met (relative change " << r.relative_change << ")\n";
    if (o.strict) return kExitNumerical;
  }
  return kExitOk;
}

int run_case(const Options& o, Strategy s) {
  const Convention conv = parse_convention(o.convention);
  if (s == Strategy::separable) {
    const ChannelParams p{o.transmissivity, o.noise, o.modes};
    return report_value(o, case1_closed(p, conv), p);
  }
  if (s == Strategy::entangled) {
    const ChannelParams p{o.transmissivity, o.noise, o.modes};
    return report_value(o, case2_closed(p, conv), p);
  }
  const ChannelParams p{o.transmissivity, o.noise, 2};
  p.validate();
  CutoffPolicy policy;
  if (o.cutoff) policy.start = Cutoff(*o.cutoff);
  if (o.rel_tol) policy.rel_tol = *o.rel_tol;
  if (o.max_cutoff) policy.max_n = *o.max_cutoff;
  if (policy.max_n < policy.start.n_max()) throw PreconditionError("--max-cutoff is below --cutoff");
  return report_value(o, case3_qfi_appendix3(p, policy).in(conv), p);
}

int run_sweep_command(const Options& o, CLI::App* app) {
  SweepSpec spec = o.config ? load_sweep_config(*o.config) : default_sweep_spec();
  if (app->count("--transmissivity")) spec.t_values = {o.transmissivity};
  if (app->count("--noise")) spec.b_values = {o.noise};
  if (app->count("--modes")) spec.d_values = {o.modes};
  if (app->count("--convention")) spec.convention = parse_convention(o.convention);
  if (o.cutoff) spec.cutoff_start = Cutoff(*o.cutoff);
  if (o.max_cutoff) spec.max_cutoff = *o.max_cutoff;
  if (o.rel_tol) spec.rel_tol = *o.rel_tol;
  if (o.seed) spec.seed = *o.seed;
  spec.validate();

  const auto rows = run_sweep(spec, o.jobs);
  write_text(o, o.json ? to_json(rows) + "\n" : to_csv(rows));

  bool all_converged = true;
  for (const auto& r : rows) {
    if (!r.ok()) std::cerr << "error: d=" << r.d << " T=" << r.t << " b=" << r.b << ": " << r.error << "\n";
    all_converged = all_converged && r.converged;
  }
  for (const auto& c : crossover_report(rows)) {
    std::cerr << "T=" << format_double(c.t) << " b=" << format_double(c.b) << ": ";
    if (c.d_star)
      std::cerr << "entangled exceeds coherent from d=" << *c.d_star << (c.holds_beyond ? "" : " (not monotone)");
    else
      std::cerr << "entangled never exceeds coherent";
    std::cerr << ", iq2/iq3 at largest d = " << format_double(c.final_ratio) << "\n";
  }
  if (!all_converged) {
    std::cerr << "warning: some rows lack a convergence certificate\n";
    if (o.strict) return kExitNumerical;
  }
  return kExitOk;
}

int run_verify_command(const Options& o) {
  const auto checks = run_verify_suite(o.seed.value_or(0));
  bool ok = true;
  std::string text;
  for (const auto& c : checks) {
    text += std::string(c.passed ? "PASS " : "FAIL ") + c.name + ": deviation " + format_double(c.deviation) +
            " (tol " + format_double(c.tolerance) + ")";
    if (!c.detail.empty()) text += " " + c.detail;
    text += "\n";
    ok = ok && c.passed;
  }
  write_text(o, text);
  return ok ? kExitOk : kExitNumerical;
}

}  // namespace

int cli_main(int argc, char** argv) {
  CLI::App app{"Fisher information of single-photon and coherent-state phase probes"};
  app.require_subcommand(1);
  Options o;
  o.jobs = default_jobs();

  auto* c1 = app.add_subcommand("case1", "Separable single photon over d modes");
  auto* c2 = app.add_subcommand("case2", "Single photon entangled with a d-mode ancilla");
  auto* c3 = app.add_subcommand("case3", "Coherent state split over two arms with common dephasing");
  auto* sw = app.add_subcommand("sweep", "Tabulate all three strategies over a (d, T, b) grid as CSV");
  auto* vf = app.add_subcommand("verify", "Run the cross-oracle self-check");

  for (auto* sub : {c1, c2}) {
    add_channel_flags(sub, o, true);
    add_common_flags(sub, o);
  }
  add_channel_flags(c3, o, false);
  add_common_flags(c3, o);
  add_numeric_flags(c3, o);

  add_channel_flags(sw, o, true);
  add_common_flags(sw, o);
  add_numeric_flags(sw, o);
  sw->add_option("--config", o.config, "Sweep description file");
  sw->add_option("--seed", o.seed, "Seed recorded with the sweep");
  sw->add_option("--jobs,-j", o.jobs, "Worker threads (default $QFI_JOBS or 1)")->check(CLI::PositiveNumber);

  vf->add_option("--seed", o.seed, "Seed for the randomized checks");
  vf->add_option("--out,-o", o.out, "Write the report to this file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*c1) return run_case(o, Strategy::separable);
    if (*c2) return run_case(o, Strategy::entangled);
    if (*c3) return run_case(o, Strategy::coherent);
    if (*sw) return run_sweep_command(o, sw);
    if (*vf) return run_verify_command(o);
  } catch (const PreconditionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitUsage;
}

}  // namespace qimetro
