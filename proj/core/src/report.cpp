#include "insens/report.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "insens/error.hpp"
#include "json.hpp"

namespace insens {

namespace {

using json = nlohmann::ordered_json;

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string fixed(double x, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

json parse_echo(const std::string& echo) {
  if (echo.empty()) return json::object();
  try {
    return json::parse(echo);
  } catch (const json::exception&) {
    return json(echo);
  }
}

json distribution_json(const OccupancyDistribution& pi) {
  json rows = json::array();
  for (const auto& [n, p] : pi.mass) rows.push_back(json{{"state", n.counts()}, {"probability", p}});
  return json{{"num_classes", pi.num_classes},
              {"boundary_mass", pi.boundary_mass},
              {"mean_total", pi.mean_total()},
              {"states", rows}};
}

json ks_json(const KsTest& t) {
  json out;
  if (t.state) out["state"] = t.state->counts();
  out["class"] = t.cls;
  out["samples"] = t.samples;
  out["statistic"] = t.statistic;
  out["threshold"] = t.threshold;
  out["verdict"] = to_string(t.verdict);
  return out;
}

json ks_list(const std::vector<KsTest>& tests) {
  json out = json::array();
  for (const auto& t : tests) out.push_back(ks_json(t));
  return out;
}

json residual_json(const ResidualCheckReport& r) {
  return json{{"pooled", ks_list(r.pooled)},
              {"conditional", ks_list(r.conditional)},
              {"arrival_flux", ks_list(r.arrival_flux)},
              {"departure_flux", ks_list(r.departure_flux)},
              {"pooled_pass", r.pooled_pass},
              {"conditional_pass", r.conditional_pass},
              {"flux_pass", r.flux_pass},
              {"flux_discrepancy", r.flux_discrepancy}};
}

json thresholds_json(const Thresholds& t) {
  return json{{"tv_max", t.tv_max},
              {"ks_alpha", t.ks_alpha},
              {"min_events", t.min_events},
              {"min_cell_samples", t.min_cell_samples}};
}

}  // namespace

void write_occupancy_table(std::ostream& os, const OccupancyDistribution& pi, const Metadata& metadata) {
  for (const auto& [key, value] : metadata) os << "# " << key << ": " << value << '\n';
  os << "# boundary_mass: " << format_double(pi.boundary_mass) << '\n';
  for (std::size_t i = 1; i <= pi.num_classes; ++i) os << 'n' << i << ' ';
  os << "probability\n";
  for (const auto& [n, p] : pi.mass) {
    for (int c : n) os << c << ' ';
    os << format_double(p) << '\n';
  }
}

OccupancyDistribution read_occupancy_table(std::istream& is) {
  OccupancyDistribution pi;
  std::string line;
  bool header_seen = false;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string key = "# boundary_mass:";
      if (line.rfind(key, 0) == 0) pi.boundary_mass = std::stod(line.substr(key.size()));
      continue;
    }
    std::istringstream fields(line);
    if (!header_seen) {
      std::string token;
      std::size_t columns = 0;
      while (fields >> token) ++columns;
      if (columns < 2) throw ConfigError("occupancy table line " + std::to_string(line_no) + ": bad header");
      pi.num_classes = columns - 1;
      header_seen = true;
      continue;
    }
    std::vector<int> counts(pi.num_classes);
    double p = 0.0;
    for (auto& c : counts) fields >> c;
    fields >> p;
    std::string extra;
    if (fields.fail() || (fields >> extra))
      throw ConfigError("occupancy table line " + std::to_string(line_no) + ": malformed row");
    pi.mass[StateVector(std::move(counts))] = p;
  }
  if (!header_seen) throw ConfigError("occupancy table has no header");
  return pi;
}

std::string balance_report_json(const BalanceReport& report, const std::string& echo) {
  json rows = json::array();
  for (const auto& r : report.residuals) {
    rows.push_back(json{{"state", r.state.counts()},
                        {"class", r.cls},
                        {"outflow", r.outflow},
                        {"inflow", r.inflow},
                        {"residual", r.residual},
                        {"relative", r.relative},
                        {"neighbor_outside", r.neighbor_outside}});
  }
  json out;
  out["kind"] = "verify-balance";
  out["config"] = parse_echo(echo);
  out["max_abs_residual"] = report.max_abs_residual;
  out["max_relative_residual"] = report.max_relative_residual;
  out["max_relative_residual_all"] = report.max_relative_residual_all;
  out["flagged_states"] = report.flagged_states;
  out["finiteness"] = json{{"arrival_flux", report.finiteness.arrival_flux},
                           {"tail_estimate", report.finiteness.tail_estimate},
                           {"pass", report.finiteness.pass}};
  out["residuals"] = rows;
  return out.dump(2);
}

std::string sim_report_json(const SimStats& stats, const std::string& echo, std::size_t max_snapshots) {
  json out;
  out["kind"] = "simulate";
  out["config"] = parse_echo(echo);
  out["horizon"] = stats.horizon;
  out["events_processed"] = stats.events_processed;
  out["events_recorded"] = stats.events_recorded;
  out["absorbed"] = stats.absorbed;
  out["snapshot_spacing"] = stats.snapshot_spacing;
  out["counts"] = json{{"arrivals", stats.counts.arrivals},
                       {"completions", stats.counts.completions},
                       {"departures", stats.counts.departures},
                       {"internal_moves", stats.counts.internal_moves},
                       {"self_moves", stats.counts.self_moves}};
  if (stats.horizon > 0.0) {
    out["occupancy"] = distribution_json(estimate_occupancy(stats));
  } else {
    out["occupancy"] = nullptr;
  }
  out["snapshot_count"] = stats.residual_snapshots.size();
  json snaps = json::array();
  const std::size_t shown = std::min(max_snapshots, stats.residual_snapshots.size());
  for (std::size_t k = 0; k < shown; ++k) {
    const auto& s = stats.residual_snapshots[k];
    snaps.push_back(json{{"state", s.state.counts()}, {"residuals", s.values}});
  }
  out["snapshots"] = snaps;
  return out.dump(2);
}

std::string experiment_report_json(const ExperimentReport& report, const std::string& echo) {
  json out;
  out["kind"] = "experiment";
  out["config"] = parse_echo(echo);
  out["thresholds"] = thresholds_json(report.thresholds);
  out["analytic_mean_total"] = report.analytic_mean_total;
  out["analytic_boundary_mass"] = report.analytic_boundary_mass;
  json arms = json::array();
  for (const auto& a : report.arms) {
    arms.push_back(json{{"name", a.name},
                        {"seed", a.seed},
                        {"events", a.events},
                        {"horizon", a.horizon},
                        {"tv", a.tv},
                        {"mean_total", a.mean_total},
                        {"snapshots", a.snapshots},
                        {"tv_pass", a.tv_pass},
                        {"residual_pass", a.residual_pass},
                        {"flux_pass", a.flux_pass},
                        {"events_pass", a.events_pass},
                        {"pass", a.pass},
                        {"residuals", residual_json(a.residuals)},
                        {"empirical", distribution_json(a.empirical)}});
  }
  out["arms"] = arms;
  out["pass"] = report.pass;
  return out.dump(2);
}

std::string sensitivity_report_json(const SensitivityReport& r) {
  json out;
  out["kind"] = "control";
  out["rho"] = r.rho;
  out["events"] = r.events;
  out["seed"] = r.seed;
  out["tolerance"] = r.tolerance;
  out["predicted"] = json{{"exponential", r.predicted_exponential},
                          {"deterministic", r.predicted_deterministic}};
  out["fifo"] = json{{"exponential_mean", r.fifo_exponential_mean},
                     {"deterministic_mean", r.fifo_deterministic_mean},
                     {"tv", r.fifo_tv},
                     {"matches_prediction", r.fifo_matches_prediction}};
  out["ps"] = json{{"exponential_mean", r.ps_exponential_mean},
                   {"deterministic_mean", r.ps_deterministic_mean},
                   {"tv", r.ps_tv},
                   {"matches_prediction", r.ps_matches_prediction}};
  out["sensitivity_visible"] = r.sensitivity_visible;
  out["pass"] = r.pass;
  return out.dump(2);
}

std::string experiment_summary(const ExperimentReport& report) {
  std::ostringstream os;
  os << "analytic E[|n|] = " << fixed(report.analytic_mean_total, 4)
     << ", boundary mass = " << report.analytic_boundary_mass << '\n';
  os << "arm                  events      TV        E[|n|]   snapshots  tv   resid flux  verdict\n";
  for (const auto& a : report.arms) {
    char line[256];
    std::snprintf(line, sizeof line, "%-20s %-11llu %-9s %-8s %-10zu %-4s %-5s %-5s %s\n", a.name.c_str(),
                  static_cast<unsigned long long>(a.events), fixed(a.tv, 5).c_str(),
                  fixed(a.mean_total, 4).c_str(), a.snapshots, a.tv_pass ? "ok" : "FAIL",
                  a.residual_pass ? "ok" : "FAIL", a.flux_pass ? "ok" : "FAIL", a.pass ? "PASS" : "FAIL");
    os << line;
  }
  os << "verdict (TV < " << report.thresholds.tv_max << ", KS alpha " << report.thresholds.ks_alpha
     << "): " << (report.pass ? "PASS" : "FAIL") << '\n';
  return os.str();
}

std::string sensitivity_summary(const SensitivityReport& r) {
  std::ostringstream os;
  os << "rho = " << r.rho << ", events = " << r.events << ", tolerance = " << r.tolerance << '\n';
  os << "discipline  workload       E[|n|]    predicted\n";
  auto row = [&os](const char* d, const char* w, double mean, double predicted) {
    char line[128];
    std::snprintf(line, sizeof line, "%-11s %-14s %-9s %s\n", d, w, fixed(mean, 4).c_str(),
                  fixed(predicted, 4).c_str());
    os << line;
  };
  row("fifo", "exponential", r.fifo_exponential_mean, r.predicted_exponential);
  row("fifo", "deterministic", r.fifo_deterministic_mean, r.predicted_deterministic);
  row("ps", "exponential", r.ps_exponential_mean, r.predicted_exponential);
  row("ps", "deterministic", r.ps_deterministic_mean, r.predicted_exponential);
  os << "FIFO sensitivity visible: " << (r.sensitivity_visible ? "yes" : "no") << '\n';
  os << "verdict: " << (r.pass ? "PASS" : "FAIL") << '\n';
  return os.str();
}

}  // namespace insens
