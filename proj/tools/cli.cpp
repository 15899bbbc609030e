#include "cli.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "insens/balance.hpp"
#include "insens/config.hpp"
#include "insens/error.hpp"
#include "insens/harness.hpp"
#include "insens/report.hpp"
#include "json.hpp"

namespace insens::cli {

namespace {

using json = nlohmann::ordered_json;

const char* command_name(Subcommand s) {
  switch (s) {
    case Subcommand::Solve:
      return "solve";
    case Subcommand::VerifyBalance:
      return "verify-balance";
    case Subcommand::Simulate:
      return "simulate";
    case Subcommand::Experiment:
      return "experiment";
    case Subcommand::Control:
      return "control";
  }
  return "run";
}

std::string timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
  return buf;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot write report " + path.string());
  os << text;
  if (text.empty() || text.back() != '\n') os << '\n';
}

// Applies command-line overrides to the echoed configuration and parses it
// again, so overrides pass through the same validation as the file.
ConfigDocument load(const Command& cmd) {
  ConfigDocument doc = parse_config(cmd.config);
  if (!cmd.seed && !cmd.events && !cmd.truncation && !cmd.threshold_tv) return doc;

  const bool is_plan = std::holds_alternative<PlanDocument>(doc);
  const SpecDocument& base = is_plan ? std::get<PlanDocument>(doc).base : std::get<SpecDocument>(doc);
  json j = json::parse(std::visit([](const auto& d) { return echo_config(d); }, doc));
  if (cmd.seed) j["simulation"]["seed"] = *cmd.seed;
  if (cmd.events) {
    j["simulation"]["events"] = *cmd.events;
    if (!base.sim.warmup_events) j["simulation"].erase("warmup");
  }
  if (cmd.truncation) j["truncation"] = *cmd.truncation;
  if (cmd.threshold_tv) {
    if (!is_plan) throw ConfigError("--threshold-tv applies only to experiment plans");
    j["experiment"]["thresholds"]["tv_max"] = *cmd.threshold_tv;
  }
  return parse_config_text(j.dump(2));
}

const SpecDocument& spec_of(const ConfigDocument& doc) {
  if (const auto* p = std::get_if<PlanDocument>(&doc)) return p->base;
  return std::get<SpecDocument>(doc);
}

std::string echo_of(const ConfigDocument& doc) {
  return std::visit([](const auto& d) { return echo_config(d); }, doc);
}

int solve(const Command& cmd, std::ostream& out) {
  const ConfigDocument doc = load(cmd);
  const SpecDocument& s = spec_of(doc);
  const OccupancyDistribution pi = solve_analytic(s.spec, s.truncation);
  std::ostringstream table;
  Metadata meta = {{"model", rate_model_name(s.spec.rates)},
                   {"config", cmd.config.filename().string()}};
  if (!s.truncation.empty()) {
    std::string t;
    for (int v : s.truncation) t += (t.empty() ? "" : ",") + std::to_string(v);
    meta.emplace_back("truncation", t);
  }
  write_occupancy_table(table, pi, meta);
  const auto path = report_path(cmd, ".txt");
  write_file(path, table.str());
  out << "states: " << pi.mass.size() << "\nE[|n|] = " << pi.mean_total()
      << "\nboundary mass = " << pi.boundary_mass << "\nwrote " << path.string() << '\n';
  return kPass;
}

int verify_balance(const Command& cmd, std::ostream& out) {
  const ConfigDocument doc = load(cmd);
  const SpecDocument& s = spec_of(doc);
  OccupancyDistribution pi;
  if (cmd.pi == "auto") {
    pi = solve_analytic(s.spec, s.truncation);
  } else {
    std::ifstream is(cmd.pi);
    if (!is) throw ConfigError("cannot read occupancy table " + cmd.pi);
    pi = read_occupancy_table(is);
    if (pi.num_classes != s.spec.num_classes) throw ConfigError("occupancy table has wrong dimension");
  }
  const BalanceReport report = verify_partial_balance(s.spec, pi);
  const auto path = report_path(cmd, ".json");
  write_file(path, balance_report_json(report, echo_of(doc)));
  const bool pass = report.max_relative_residual <= kBalanceTolerance && report.finiteness.pass;
  out << "max |residual| = " << report.max_abs_residual
      << "\nmax relative residual (interior) = " << report.max_relative_residual
      << "\nmax relative residual (all) = " << report.max_relative_residual_all
      << "\nstates with truncated neighbours = " << report.flagged_states
      << "\narrival flux = " << report.finiteness.arrival_flux << (report.finiteness.pass ? " (finite)" : " (tail too heavy)")
      << "\nverdict: " << (pass ? "PASS" : "FAIL") << "\nwrote " << path.string() << '\n';
  return pass ? kPass : kVerdictFail;
}

int simulate(const Command& cmd, std::ostream& out) {
  const ConfigDocument doc = load(cmd);
  const SpecDocument& s = spec_of(doc);
  const SimStats stats = s.fixed_state ? run_modified(s.spec, *s.fixed_state, s.sim) : run(s.spec, s.sim);
  const auto path = report_path(cmd, ".json");
  write_file(path, sim_report_json(stats, echo_of(doc)));
  out << "events recorded = " << stats.events_recorded << "\nhorizon = " << stats.horizon
      << "\nsnapshots = " << stats.residual_snapshots.size();
  if (stats.horizon > 0.0) out << "\nE[|n|] = " << estimate_occupancy(stats).mean_total();
  if (stats.absorbed) out << "\nabsorbed in an empty state";
  out << "\nwrote " << path.string() << '\n';
  return kPass;
}

int experiment(const Command& cmd, std::ostream& out) {
  const ConfigDocument doc = load(cmd);
  const auto* plan = std::get_if<PlanDocument>(&doc);
  if (!plan) throw ConfigError(cmd.config.string() + ": experiment needs an 'experiment' section");
  const ExperimentReport report = insensitivity_experiment(plan->plan);
  const auto path = report_path(cmd, ".json");
  write_file(path, experiment_report_json(report, echo_of(doc)));
  out << experiment_summary(report) << "wrote " << path.string() << '\n';
  return report.pass ? kPass : kVerdictFail;
}

int control(const Command& cmd, std::ostream& out) {
  const SensitivityReport report =
      sensitivity_control(cmd.rho, cmd.events.value_or(1'000'000), cmd.seed.value_or(7));
  const auto path = report_path(cmd, ".json");
  write_file(path, sensitivity_report_json(report));
  out << sensitivity_summary(report) << "wrote " << path.string() << '\n';
  return report.pass ? kPass : kVerdictFail;
}

}  // namespace

std::filesystem::path report_path(const Command& cmd, const std::string& extension) {
  if (cmd.out) return *cmd.out;
  std::filesystem::path dir = cmd.report_dir;
  std::string stem = "control";
  if (!cmd.config.empty()) {
    if (dir.empty()) dir = cmd.config.parent_path();
    stem = cmd.config.stem().string();
  }
  if (dir.empty()) dir = ".";
  return dir / (stem + "." + command_name(cmd.sub) + "." + timestamp() + extension);
}

int dispatch(const Command& cmd, std::ostream& out, std::ostream& err) {
  try {
    switch (cmd.sub) {
      case Subcommand::Solve:
        return solve(cmd, out);
      case Subcommand::VerifyBalance:
        return verify_balance(cmd, out);
      case Subcommand::Simulate:
        return simulate(cmd, out);
      case Subcommand::Experiment:
        return experiment(cmd, out);
      case Subcommand::Control:
        return control(cmd, out);
    }
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << '\n';
    return kConfigError;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumericalError;
  } catch (const SimulationError& e) {
    err << "simulation failure: " << e.what() << '\n';
    return kNumericalError;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }
  return kConfigError;
}

int run(int argc, char** argv) {
  CLI::App app{"Insensitivity checks for processor-sharing networks"};
  app.require_subcommand(1);
  Command cmd;
  std::string out_path;
  std::uint64_t seed = 0;
  std::uint64_t events = 0;
  std::vector<int> truncation;
  double threshold_tv = 0.0;

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* c = sub->add_option("--config", cmd.config, "YAML spec or experiment plan");
    if (needs_config) c->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_path, "report path (default: timestamped file beside the config)");
    sub->add_option("--seed", seed, "random seed override");
    sub->add_option("--events", events, "event budget override");
  };

  auto* solve = app.add_subcommand("solve", "analytic stationary distribution");
  add_common(solve, true);
  solve->add_option("--truncation", truncation, "per-class truncation bounds")->delimiter(',');

  auto* verify = app.add_subcommand("verify-balance", "partial-balance residuals of a distribution");
  add_common(verify, true);
  verify->add_option("--truncation", truncation, "per-class truncation bounds")->delimiter(',');
  verify->add_option("--pi", cmd.pi, "'auto' or an occupancy table written by solve");

  auto* simulate = app.add_subcommand("simulate", "event-driven simulation");
  add_common(simulate, true);

  auto* experiment = app.add_subcommand("experiment", "insensitivity experiment over workload arms");
  add_common(experiment, true);
  experiment->add_option("--truncation", truncation, "per-class truncation bounds")->delimiter(',');
  experiment->add_option("--threshold-tv", threshold_tv, "total-variation threshold override");

  auto* control = app.add_subcommand("control", "FIFO versus PS sensitivity control");
  add_common(control, false);
  control->add_option("--rho", cmd.rho, "utilization in (0, 1)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kConfigError;
  }

  CLI::App* chosen = app.get_subcommands().front();
  if (chosen == solve) cmd.sub = Subcommand::Solve;
  if (chosen == verify) cmd.sub = Subcommand::VerifyBalance;
  if (chosen == simulate) cmd.sub = Subcommand::Simulate;
  if (chosen == experiment) cmd.sub = Subcommand::Experiment;
  if (chosen == control) cmd.sub = Subcommand::Control;
  if (chosen->count("--out")) cmd.out = out_path;
  if (chosen->count("--seed")) cmd.seed = seed;
  if (chosen->count("--events")) cmd.events = events;
  if (chosen->get_option_no_throw("--truncation") && chosen->count("--truncation")) cmd.truncation = truncation;
  if (chosen->get_option_no_throw("--threshold-tv") && chosen->count("--threshold-tv"))
    cmd.threshold_tv = threshold_tv;
  if (const char* dir = std::getenv("INSENS_REPORT_DIR")) cmd.report_dir = dir;
  return dispatch(cmd, std::cout, std::cerr);
}

}  // namespace insens::cli
