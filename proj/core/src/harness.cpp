#include "insens/harness.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <map>

#include "insens/error.hpp"

namespace insens {

namespace {

using Cells = std::map<std::pair<StateVector, ClassIndex>, std::vector<double>>;

void collect(Cells& cells, const ResidualProfile& profile, std::size_t num_classes) {
  for (ClassIndex i = 1; i <= num_classes; ++i) {
    if (profile.state.count(i) == 0) continue;
    auto values = profile.of_class(i);
    auto& cell = cells[{profile.state, i}];
    cell.insert(cell.end(), values.begin(), values.end());
  }
}

// One family of conditional tests sharing alpha through a Bonferroni split.
std::vector<KsTest> test_cells(const Cells& cells, const std::vector<EquilibriumDistribution>& eq,
                               const ResidualCheckOptions& options, double family_alpha,
                               bool& pass, double& discrepancy) {
  std::size_t sufficient = 0;
  for (const auto& [key, values] : cells) {
    if (values.size() >= options.min_cell_samples) ++sufficient;
  }
  const double alpha = sufficient ? family_alpha / static_cast<double>(sufficient) : family_alpha;
  std::vector<KsTest> out;
  for (const auto& [key, values] : cells) {
    KsTest t;
    t.state = key.first;
    t.cls = key.second;
    t.samples = values.size();
    if (values.size() < options.min_cell_samples) {
      t.verdict = KsTest::Verdict::Insufficient;
      out.push_back(std::move(t));
      continue;
    }
    const auto& g = eq[key.second - 1];
    t.statistic = ks_statistic(values, [&](double x) { return g.cdf(x); });
    t.threshold = ks_critical_value(values.size(), alpha);
    t.verdict = t.statistic < t.threshold ? KsTest::Verdict::Pass : KsTest::Verdict::Fail;
    if (t.verdict == KsTest::Verdict::Fail) pass = false;
    discrepancy = std::max(discrepancy, t.statistic / t.threshold);
    out.push_back(std::move(t));
  }
  return out;
}

ArmReport run_arm(const ExperimentPlan& plan, std::size_t index) {
  const Arm& arm = plan.arms[index];
  NetworkSpec spec = plan.spec;
  spec.workloads = arm.workloads;
  SimConfig config = plan.sim;
  config.seed = plan.sim.seed + index;

  const SimStats stats = run(spec, config);
  ArmReport report;
  report.name = arm.name;
  report.seed = config.seed;
  report.events = stats.events_recorded;
  report.horizon = stats.horizon;
  report.empirical = estimate_occupancy(stats);
  report.tv = tv_distance(report.empirical, plan.analytic);
  report.mean_total = report.empirical.mean_total();
  report.snapshots = stats.residual_snapshots.size();
  report.tv_pass = report.tv < plan.thresholds.tv_max;
  report.events_pass = stats.events_recorded >= plan.thresholds.min_events;
  if (plan.check_residuals) {
    report.residuals = residual_profile_check(
        stats, spec, {plan.thresholds.ks_alpha, plan.thresholds.min_cell_samples});
    report.residual_pass = report.residuals.pooled_pass && report.residuals.conditional_pass;
    report.flux_pass = report.residuals.flux_pass;
  } else {
    report.residual_pass = true;
    report.flux_pass = true;
  }
  report.pass = report.tv_pass && report.events_pass && report.residual_pass && report.flux_pass;
  return report;
}

}  // namespace

OccupancyDistribution estimate_occupancy(const SimStats& stats) {
  double total = 0.0;
  for (const auto& [n, t] : stats.time_weighted_occupancy) total += t;
  if (!(total > 0.0)) throw DomainError("simulation recorded a zero horizon");
  OccupancyDistribution out;
  out.num_classes = stats.num_classes;
  out.normalizer = total;
  for (const auto& [n, t] : stats.time_weighted_occupancy) out.mass[n] = t / total;
  return out;
}

double tv_distance(const OccupancyDistribution& p, const OccupancyDistribution& q) {
  double sum = 0.0;
  auto a = p.mass.begin();
  auto b = q.mass.begin();
  while (a != p.mass.end() || b != q.mass.end()) {
    if (b == q.mass.end() || (a != p.mass.end() && a->first < b->first)) {
      sum += std::abs(a->second);
      ++a;
    } else if (a == p.mass.end() || b->first < a->first) {
      sum += std::abs(b->second);
      ++b;
    } else {
      sum += std::abs(a->second - b->second);
      ++a;
      ++b;
    }
  }
  return std::min(1.0, 0.5 * sum);
}

double ks_statistic(std::span<const double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw DomainError("KS statistic needs at least one sample");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    const double f = cdf(sorted[k]);
    d = std::max({d, (static_cast<double>(k) + 1.0) / n - f, f - static_cast<double>(k) / n});
  }
  return d;
}

double ks_critical_value(std::size_t n, double alpha) {
  if (n == 0) throw DomainError("KS critical value needs n > 0");
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
  return std::sqrt(-0.5 * std::log(0.5 * alpha)) / std::sqrt(static_cast<double>(n));
}

std::string to_string(KsTest::Verdict v) {
  switch (v) {
    case KsTest::Verdict::Pass:
      return "pass";
    case KsTest::Verdict::Fail:
      return "fail";
    case KsTest::Verdict::Insufficient:
      return "insufficient data";
  }
  return "?";
}

ResidualCheckReport residual_profile_check(const SimStats& stats, const NetworkSpec& spec,
                                           const ResidualCheckOptions& options) {
  const std::size_t N = spec.num_classes;
  std::vector<EquilibriumDistribution> eq;
  for (const auto& mu : spec.workloads) eq.emplace_back(mu);

  ResidualCheckReport report;
  Cells snapshot_cells;
  std::vector<std::vector<double>> pooled(N);
  for (const auto& snap : stats.residual_snapshots) {
    collect(snapshot_cells, snap, N);
    for (ClassIndex i = 1; i <= N; ++i) {
      auto values = snap.of_class(i);
      pooled[i - 1].insert(pooled[i - 1].end(), values.begin(), values.end());
    }
  }
  for (ClassIndex i = 1; i <= N; ++i) {
    KsTest t;
    t.cls = i;
    t.samples = pooled[i - 1].size();
    if (t.samples > 0) {
      const auto& g = eq[i - 1];
      t.statistic = ks_statistic(pooled[i - 1], [&](double x) { return g.cdf(x); });
      t.threshold = ks_critical_value(t.samples, options.alpha);
      t.verdict = t.statistic < t.threshold ? KsTest::Verdict::Pass : KsTest::Verdict::Fail;
      if (t.verdict == KsTest::Verdict::Fail) report.pooled_pass = false;
    }
    report.pooled.push_back(t);
  }

  // The snapshot, arrival and departure families share one alpha.
  const double family_alpha = options.alpha / 3.0;
  double unused = 0.0;
  report.conditional =
      test_cells(snapshot_cells, eq, options, family_alpha, report.conditional_pass, unused);

  Cells arrival_cells;
  for (const auto& ep : stats.arrival_epoch_profiles) collect(arrival_cells, ep.profile, N);
  Cells departure_cells;
  for (const auto& ep : stats.departure_epoch_profiles) collect(departure_cells, ep.profile, N);
  report.arrival_flux =
      test_cells(arrival_cells, eq, options, family_alpha, report.flux_pass, report.flux_discrepancy);
  report.departure_flux = test_cells(departure_cells, eq, options, family_alpha, report.flux_pass,
                                     report.flux_discrepancy);
  return report;
}

double default_tv_threshold(const NetworkSpec& spec) {
  return spec.num_classes == 1 ? 0.01 : 0.02;
}

ExperimentReport insensitivity_experiment(const ExperimentPlan& plan) {
  if (plan.arms.empty()) throw ConfigError("experiment plan has no arms");
  if (plan.analytic.boundary_mass > kMaxComparableBoundaryMass) {
    throw ConfigError("analytic distribution has boundary mass " +
                      std::to_string(plan.analytic.boundary_mass) +
                      " above 1e-4; enlarge the truncation");
  }
  for (const auto& arm : plan.arms) {
    if (arm.workloads.size() != plan.spec.num_classes)
      throw ConfigError("arm '" + arm.name + "' needs one workload per class");
    for (const auto& mu : arm.workloads) {
      if (std::abs(mu.mean() - 1.0) > 1e-12)
        throw ConfigError("arm '" + arm.name + "' has a workload whose mean is not 1");
    }
  }

  std::vector<std::future<ArmReport>> pending;
  for (std::size_t k = 0; k < plan.arms.size(); ++k) {
    pending.push_back(std::async(std::launch::async, run_arm, std::cref(plan), k));
  }
  ExperimentReport report;
  report.thresholds = plan.thresholds;
  report.analytic_mean_total = plan.analytic.mean_total();
  report.analytic_boundary_mass = plan.analytic.boundary_mass;
  report.pass = true;
  for (auto& f : pending) {
    report.arms.push_back(f.get());
    report.pass = report.pass && report.arms.back().pass;
  }
  return report;
}

NetworkSpec single_server_spec(double rho, Discipline discipline, WorkloadDistribution workload) {
  NetworkSpec spec;
  spec.num_classes = 1;
  spec.discipline = discipline;
  spec.rates = SingleClassRates{RateSequence::constant(rho), RateSequence{{0.0}, 1.0, 0.0}};
  spec.workloads = {std::move(workload)};
  return spec;
}

SensitivityReport sensitivity_control(double rho, std::uint64_t events, std::uint64_t seed,
                                      double tolerance) {
  if (!(rho > 0.0 && rho < 1.0)) throw ConfigError("utilization must lie in (0, 1)");
  SensitivityReport report;
  report.rho = rho;
  report.events = events;
  report.seed = seed;
  report.tolerance = tolerance;
  report.predicted_exponential = rho / (1.0 - rho);
  report.predicted_deterministic = rho + rho * rho / (2.0 * (1.0 - rho));

  const auto exp1 = make_distribution(family::Exponential{1.0});
  const auto det1 = make_distribution(family::Deterministic{1.0});
  SimConfig config;
  config.max_events = events;
  config.snapshot_interval = 0;
  config.epoch_interval = 0;

  auto simulate = [&](Discipline d, const WorkloadDistribution& mu, std::uint64_t offset) {
    config.seed = seed + offset;
    return estimate_occupancy(run(single_server_spec(rho, d, mu), config));
  };
  const auto fifo_exp = simulate(Discipline::Fifo, exp1, 0);
  const auto fifo_det = simulate(Discipline::Fifo, det1, 1);
  const auto ps_exp = simulate(Discipline::ProcessorSharing, exp1, 2);
  const auto ps_det = simulate(Discipline::ProcessorSharing, det1, 3);

  report.fifo_exponential_mean = fifo_exp.mean_total();
  report.fifo_deterministic_mean = fifo_det.mean_total();
  report.ps_exponential_mean = ps_exp.mean_total();
  report.ps_deterministic_mean = ps_det.mean_total();
  report.fifo_tv = tv_distance(fifo_exp, fifo_det);
  report.ps_tv = tv_distance(ps_exp, ps_det);
  auto near = [&](double value, double target) { return std::abs(value - target) <= tolerance; };
  report.fifo_matches_prediction =
      near(report.fifo_exponential_mean, report.predicted_exponential) &&
      near(report.fifo_deterministic_mean, report.predicted_deterministic);
  report.ps_matches_prediction = near(report.ps_exponential_mean, report.predicted_exponential) &&
                                 near(report.ps_deterministic_mean, report.predicted_exponential);
  report.sensitivity_visible =
      std::abs(report.fifo_exponential_mean - report.fifo_deterministic_mean) > 2.0 * tolerance;
  report.pass = report.fifo_matches_prediction && report.ps_matches_prediction;
  return report;
}

}  // namespace insens
