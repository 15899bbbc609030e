// Acceptance suite: one PASS/FAIL line per criterion, tolerances fixed here.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "insens/balance.hpp"
#include "insens/harness.hpp"
#include "insens/report.hpp"
#include "insens/sim.hpp"

namespace insens {
namespace {

using testing::det1;
using testing::erlang2;
using testing::exp1;
using testing::h2;

constexpr double kErlangTv = 0.01;
constexpr double kTandemTv = 0.02;
constexpr double kTandemResidual = 1e-12;
constexpr double kLossTv = 0.01;
constexpr double kDetailedBalance = 1e-12;
constexpr double kOracleTv = 1e-10;
constexpr double kOracleBoundaryFactor = 10.0;
constexpr double kOracleSimTv = 0.015;
constexpr double kMeanTolerance = 0.2;
constexpr double kLifoTv = 0.01;
constexpr double kModifiedKs = 0.02;
constexpr double kArmSeconds = 60.0;
constexpr double kKsAlpha = 0.01;  // 1.63 / sqrt(n)
constexpr std::size_t kMinSnapshots = 10'000;
constexpr std::size_t kModifiedSnapshots = 10'000;

struct Outcome {
  bool pass = false;
  std::string detail;
  std::string timing;  // wall-clock measurements, excluded from the determinism comparison
};

struct Line {
  int id;
  std::string name;
  Outcome outcome;
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

OccupancyDistribution from_mass(std::size_t num_classes, std::map<StateVector, double> mass,
                                double boundary = 0.0) {
  OccupancyDistribution d;
  d.num_classes = num_classes;
  d.mass = std::move(mass);
  d.boundary_mass = boundary;
  return d;
}

// (3, 6, 6, 4) / 19 by hand from the one-step recursion.
OccupancyDistribution erlang_reference() {
  return from_mass(1, {{StateVector{0}, 3.0 / 19}, {StateVector{1}, 6.0 / 19},
                       {StateVector{2}, 6.0 / 19}, {StateVector{3}, 4.0 / 19}});
}

// (1 - r) r^n on {0..K}, renormalized; boundary is the mass at K.
OccupancyDistribution geometric_reference(double r, int K) {
  std::map<StateVector, double> m;
  double z = 0.0;
  for (int n = 0; n <= K; ++n) z += m[StateVector{n}] = std::pow(r, n);
  for (auto& [n, v] : m) v /= z;
  const double boundary = m[StateVector{K}];
  return from_mass(1, std::move(m), boundary);
}

// 0.5^(n1 + n2) on the box, renormalized; boundary is the upper-face mass.
OccupancyDistribution tandem_reference(int K) {
  std::map<StateVector, double> m;
  double z = 0.0;
  for (int a = 0; a <= K; ++a)
    for (int b = 0; b <= K; ++b) z += m[StateVector{a, b}] = std::pow(0.5, a + b);
  double boundary = 0.0;
  for (auto& [n, v] : m) {
    v /= z;
    if (n[0] == K || n[1] == K) boundary += v;
  }
  return from_mass(2, std::move(m), boundary);
}

OccupancyDistribution loss_reference() { return from_mass(2, testing::loss_reference()); }

NetworkSpec jackson_tandem() { return testing::tandem_spec(1.0, BalanceFunction::product({0.5, 0.5})); }

ExperimentPlan plan(NetworkSpec spec, OccupancyDistribution analytic, std::vector<Arm> arms,
                    std::uint64_t seed, std::uint64_t events, double tv) {
  ExperimentPlan p;
  p.spec = std::move(spec);
  p.analytic = std::move(analytic);
  p.arms = std::move(arms);
  p.sim.seed = seed;
  p.sim.max_events = events;
  p.sim.snapshot_interval = 50;
  p.sim.epoch_interval = 50;
  p.thresholds.tv_max = tv;
  p.thresholds.ks_alpha = kKsAlpha;
  return p;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Suite {
  std::vector<Line> lines;
  // Every report produced, in order; compared byte for byte across reruns.
  std::string reports;

  ExperimentReport erlang, tandem, loss, lifo;
  double erlang_seconds = 0.0;
  SensitivityReport control;

  void record(const std::string& tag, const std::string& text) { reports += "== " + tag + "\n" + text + "\n"; }

  void run_experiments() {
    auto t0 = std::chrono::steady_clock::now();
    erlang = insensitivity_experiment(plan(testing::erlang_loss_spec(), erlang_reference(),
                                           {{"exponential", {exp1()}},
                                            {"deterministic", {det1()}},
                                            {"hyperexponential", {h2()}},
                                            {"erlang2", {erlang2()}}},
                                           1001, 1'000'000, kErlangTv));
    erlang_seconds = seconds_since(t0);
    record("erlang", experiment_report_json(erlang, "{}"));

    tandem = insensitivity_experiment(plan(jackson_tandem(), tandem_reference(30),
                                           {{"deterministic", {det1(), det1()}},
                                            {"exponential", {exp1(), exp1()}}},
                                           3001, 2'000'000, kTandemTv));
    record("tandem", experiment_report_json(tandem, "{}"));

    loss = insensitivity_experiment(plan(testing::loss_spec(), loss_reference(),
                                         {{"deterministic", {det1(), det1()}},
                                          {"exponential", {exp1(), exp1()}}},
                                         4001, 1'000'000, kLossTv));
    record("loss", experiment_report_json(loss, "{}"));

    control = sensitivity_control(0.8, 1'000'000, 6001, kMeanTolerance);
    record("control", sensitivity_report_json(control));

    lifo = insensitivity_experiment(plan(testing::mm1_spec(0.5, Discipline::LifoPreemptiveResume),
                                         geometric_reference(0.5, 60),
                                         {{"exponential", {exp1()}}, {"deterministic", {det1()}}},
                                         7001, 1'000'000, kLifoTv));
    record("lifo", experiment_report_json(lifo, "{}"));
  }

  Outcome criterion1() {
    Outcome o{true, ""};
    const auto solved = solve_analytic(testing::erlang_loss_spec(), {3});
    const double solver_gap = tv_distance(solved, erlang_reference());
    o.pass = solver_gap < 1e-15;
    double worst = 0.0;
    for (const auto& a : erlang.arms) {
      worst = std::max(worst, a.tv);
      o.pass = o.pass && a.tv < kErlangTv && a.events >= 900'000;
      o.detail += a.name + " TV=" + fmt("%.5f", a.tv) + " ";
    }
    const double per_arm = erlang_seconds;  // arms share one wall clock; each finishes within it
    o.pass = o.pass && per_arm < kArmSeconds;
    o.detail += "| max " + fmt("%.5f", worst) + " < 0.01";
    o.timing = "wall " + fmt("%.1f", per_arm) + " s for all arms < 60 s";
    return o;
  }

  Outcome criterion2() {
    Outcome o{true, ""};
    for (const auto& a : erlang.arms) {
      const KsTest& t = a.residuals.pooled.at(0);
      const bool ok = t.samples >= kMinSnapshots && a.snapshots >= kMinSnapshots && t.statistic < t.threshold;
      o.pass = o.pass && ok;
      o.detail += a.name + " D=" + fmt("%.4f", t.statistic) + "/" + fmt("%.4f", t.threshold) + " (n=" +
                  std::to_string(t.samples) + ") ";
    }
    return o;
  }

  Outcome criterion3() {
    const auto spec = jackson_tandem();
    const auto pi = solve_analytic(spec, {30, 30});
    const auto balance = verify_partial_balance(spec, pi);
    record("tandem-balance", fmt("%.17g", balance.max_relative_residual));
    Outcome o;
    const double gap = tv_distance(pi, tandem_reference(30));
    o.pass = balance.max_relative_residual < kTandemResidual && gap < 1e-12;
    o.detail = "residual " + fmt("%.2e", balance.max_relative_residual) + " < 1e-12";
    for (const auto& a : tandem.arms) {
      o.pass = o.pass && a.tv < kTandemTv;
      o.detail += ", " + a.name + " TV=" + fmt("%.5f", a.tv);
    }
    o.detail += " < 0.02";
    return o;
  }

  Outcome criterion4() {
    const auto spec = testing::loss_spec();
    const auto pi = solve_analytic(spec, {});
    double worst_pair = 0.0;
    for (const auto& [n, p] : pi.mass) {
      for (ClassIndex i = 1; i <= 2; ++i) {
        const StateVector up = transition(n, 0, i);
        const double lhs = p * rate(spec, n, 0, i);
        const double rhs = pi.probability(up) * (pi.mass.count(up) ? rate(spec, up, i, 0) : 0.0);
        worst_pair = std::max(worst_pair, std::abs(lhs - rhs));
      }
    }
    Outcome o;
    const double gap = tv_distance(pi, loss_reference());
    o.pass = pi.mass.size() == 9 && gap < 1e-15 && worst_pair < kDetailedBalance;
    o.detail = "9 states, pairwise flux gap " + fmt("%.2e", worst_pair) + " < 1e-12";
    for (const auto& a : loss.arms) {
      o.pass = o.pass && a.tv < kLossTv;
      o.detail += ", " + a.name + " TV=" + fmt("%.5f", a.tv);
    }
    o.detail += " < 0.01";
    return o;
  }

  Outcome criterion5() {
    struct Case {
      std::string name;
      NetworkSpec spec;
      std::vector<int> box;
      const ArmReport* sim;
    };
    SimConfig mm1;
    mm1.seed = 5001;
    mm1.max_events = 1'000'000;
    mm1.snapshot_interval = 0;
    mm1.epoch_interval = 0;
    const auto mm1_spec = testing::mm1_spec(0.8, Discipline::ProcessorSharing);
    const auto mm1_emp = estimate_occupancy(run(mm1_spec, mm1));
    ArmReport mm1_arm;
    mm1_arm.empirical = mm1_emp;

    const std::vector<Case> cases = {
        {"erlang", testing::erlang_loss_spec(), {3}, &erlang.arms.at(0)},
        {"tandem", jackson_tandem(), {30, 30}, &tandem.arms.at(1)},
        {"loss", testing::loss_spec(), {4, 2}, &loss.arms.at(1)},
        {"mm1-0.8", mm1_spec, {150}, &mm1_arm},
        {"lifo-0.5", testing::mm1_spec(0.5, Discipline::LifoPreemptiveResume), {60}, &lifo.arms.at(0)},
    };
    Outcome o{true, ""};
    for (const auto& c : cases) {
      const auto closed = solve_analytic(c.spec, c.box);
      const auto oracle = ctmc_oracle(c.spec, LatticeBox(c.box));
      const double tv = tv_distance(oracle, closed);
      const double bound = kOracleTv + kOracleBoundaryFactor * closed.boundary_mass;
      const double sim_tv = tv_distance(c.sim->empirical, oracle);
      o.pass = o.pass && tv < bound && sim_tv < kOracleSimTv;
      o.detail += c.name + " " + fmt("%.1e", tv) + "/" + fmt("%.1e", bound) + " sim " + fmt("%.4f", sim_tv) + "; ";
      record("oracle-" + c.name, fmt("%.17g", tv) + " " + fmt("%.17g", sim_tv));
    }
    return o;
  }

  Outcome criterion6() {
    Outcome o;
    o.pass = std::abs(control.fifo_exponential_mean - 4.0) <= kMeanTolerance &&
             std::abs(control.fifo_deterministic_mean - 2.4) <= kMeanTolerance &&
             std::abs(control.ps_exponential_mean - 4.0) <= kMeanTolerance &&
             std::abs(control.ps_deterministic_mean - 4.0) <= kMeanTolerance;
    o.detail = "FIFO exp " + fmt("%.3f", control.fifo_exponential_mean) + " (4.0), FIFO det " +
               fmt("%.3f", control.fifo_deterministic_mean) + " (2.4), PS exp " +
               fmt("%.3f", control.ps_exponential_mean) + " (4.0), PS det " +
               fmt("%.3f", control.ps_deterministic_mean) + " (4.0), tolerance 0.2";
    return o;
  }

  Outcome criterion7() {
    Outcome o{true, ""};
    for (const auto& a : lifo.arms) {
      o.pass = o.pass && a.tv < kLifoTv;
      o.detail += a.name + " TV=" + fmt("%.5f", a.tv) + " ";
    }
    o.detail += "< 0.01 vs geometric(0.5)";
    return o;
  }

  Outcome criterion8() {
    SimConfig config;
    config.seed = 8001;
    config.max_events = 600'000;
    config.snapshot_interval = 20;
    const auto stats = run_modified(testing::erlang_loss_spec(det1()), StateVector{2}, config);
    Outcome o;
    o.pass = stats.residual_snapshots.size() >= kModifiedSnapshots;
    double worst = 1.0;
    if (o.pass) {
      worst = 0.0;
      for (std::size_t c = 0; c < 2; ++c) {
        std::vector<double> xs;
        for (std::size_t k = 0; k < kModifiedSnapshots; ++k) xs.push_back(stats.residual_snapshots[k].values.at(c));
        worst = std::max(worst, ks_statistic(xs, [](double x) { return std::clamp(x, 0.0, 1.0); }));
      }
    }
    o.pass = o.pass && worst < kModifiedKs;
    o.detail = "max per-individual D=" + fmt("%.4f", worst) + " < 0.02 over " +
               std::to_string(kModifiedSnapshots) + " snapshots";
    record("modified", sim_report_json(stats, "{}", 100));
    return o;
  }

  void run_all() {
    run_experiments();
    lines.push_back({1, "single-class insensitivity (Erlang loss, 4 arms)", criterion1()});
    lines.push_back({2, "pooled residual law vs equilibrium", criterion2()});
    lines.push_back({3, "Whittle tandem partial balance + simulation", criterion3()});
    lines.push_back({4, "loss network product form + detailed balance", criterion4()});
    lines.push_back({5, "jump-process oracle vs closed forms and simulation", criterion5()});
    lines.push_back({6, "FIFO sensitivity control vs PS", criterion6()});
    lines.push_back({7, "LIFO-PR insensitivity", criterion7()});
    lines.push_back({8, "fixed-population residuals", criterion8()});
  }
};

}  // namespace
}  // namespace insens

int main() {
  using insens::Suite;
  const auto t0 = std::chrono::steady_clock::now();
  Suite first;
  first.run_all();
  Suite second;
  second.run_all();

  bool all = true;
  auto print = [&](int id, const std::string& name, const insens::Outcome& o) {
    const std::string timing = o.timing.empty() ? "" : ", " + o.timing;
    std::printf("%s  %d  %s: %s%s\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), o.detail.c_str(), timing.c_str());
    all = all && o.pass;
  };
  for (const auto& line : first.lines) print(line.id, line.name, line.outcome);

  insens::Outcome determinism;
  determinism.pass = first.reports == second.reports && !first.reports.empty();
  for (std::size_t k = 0; k < first.lines.size(); ++k)
    determinism.pass = determinism.pass && first.lines[k].outcome.detail == second.lines[k].outcome.detail;
  determinism.detail = std::to_string(first.reports.size()) + " report bytes " +
                       (determinism.pass ? "identical" : "differ") + " on rerun";
  print(9, "determinism", determinism);
  std::printf("total %.1f s\n", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  return all ? 0 : 1;
}
