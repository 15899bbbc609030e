#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "insens/balance.hpp"
#include "insens/model.hpp"
#include "insens/sim.hpp"

namespace insens {

// Time-weighted occupancy frequencies; support is the set of visited states.
OccupancyDistribution estimate_occupancy(const SimStats& stats);

// Half the L1 distance; supports are unioned with missing mass 0.
double tv_distance(const OccupancyDistribution& p, const OccupancyDistribution& q);

// Two-sided sup |F_n - F| over the sample points.
double ks_statistic(std::span<const double> samples, const std::function<double(double)>& cdf);

// Asymptotic critical value sqrt(-ln(alpha / 2) / 2) / sqrt(n); about
// 1.63 / sqrt(n) at alpha = 0.01.
double ks_critical_value(std::size_t n, double alpha);

struct KsTest {
  enum class Verdict { Pass, Fail, Insufficient };
  std::optional<StateVector> state;  // empty for pooled tests
  ClassIndex cls = 0;
  std::size_t samples = 0;
  double statistic = 0.0;
  double threshold = 0.0;
  Verdict verdict = Verdict::Insufficient;
};

std::string to_string(KsTest::Verdict v);

struct ResidualCheckOptions {
  double alpha = 0.01;
  std::size_t min_cell_samples = 500;
};

struct ResidualCheckReport {
  // Snapshot residuals of each class pooled over all states.
  std::vector<KsTest> pooled;
  // Snapshot residuals of each class given the occupancy.
  std::vector<KsTest> conditional;
  // Pre-existing residuals at arrival epochs given the pre-arrival occupancy.
  std::vector<KsTest> arrival_flux;
  // Remaining residuals at departures given the post-departure occupancy.
  std::vector<KsTest> departure_flux;
  bool pooled_pass = true;
  bool conditional_pass = true;
  bool flux_pass = true;
  // Largest statistic / threshold over the flux cells; <= 1 passes.
  double flux_discrepancy = 0.0;
};

// Tests recorded residuals against the equilibrium law of each class.
// Pooled tests use alpha. The conditional snapshot, arrival and departure
// cells together share alpha through a Bonferroni split: alpha / 3 per
// family, divided evenly among its cells. Cells below min_cell_samples are
// reported as insufficient and never fail.
ResidualCheckReport residual_profile_check(const SimStats& stats, const NetworkSpec& spec,
                                           const ResidualCheckOptions& options = {});

struct Thresholds {
  double tv_max = 0.01;
  double ks_alpha = 0.01;
  std::uint64_t min_events = 0;
  std::size_t min_cell_samples = 500;
};

// 0.01 for single-class specs, 0.02 for multi-class ones.
double default_tv_threshold(const NetworkSpec& spec);

struct Arm {
  std::string name;
  std::vector<WorkloadDistribution> workloads;
};

struct ExperimentPlan {
  NetworkSpec spec;
  std::vector<Arm> arms;
  OccupancyDistribution analytic;
  SimConfig sim;
  Thresholds thresholds;
  bool check_residuals = true;
};

struct ArmReport {
  std::string name;
  std::uint64_t seed = 0;
  std::uint64_t events = 0;
  double horizon = 0.0;
  OccupancyDistribution empirical;
  double tv = 0.0;
  double mean_total = 0.0;
  std::size_t snapshots = 0;
  ResidualCheckReport residuals;
  bool tv_pass = false;
  bool residual_pass = false;
  bool flux_pass = false;
  bool events_pass = false;
  bool pass = false;
};

struct ExperimentReport {
  std::vector<ArmReport> arms;
  double analytic_mean_total = 0.0;
  double analytic_boundary_mass = 0.0;
  Thresholds thresholds;
  bool pass = false;
};

inline constexpr double kMaxComparableBoundaryMass = 1e-4;

// Runs every arm with seed sim.seed + arm index and compares each against
// the analytic law. Refuses analytic laws with boundary mass above 1e-4.
ExperimentReport insensitivity_experiment(const ExperimentPlan& plan);

struct SensitivityReport {
  double rho = 0.0;
  std::uint64_t events = 0;
  std::uint64_t seed = 0;
  double tolerance = 0.0;
  double predicted_exponential = 0.0;    // rho / (1 - rho)
  double predicted_deterministic = 0.0;  // rho + rho^2 / (2 (1 - rho))
  double fifo_exponential_mean = 0.0;
  double fifo_deterministic_mean = 0.0;
  double ps_exponential_mean = 0.0;
  double ps_deterministic_mean = 0.0;
  double fifo_tv = 0.0;
  double ps_tv = 0.0;
  bool fifo_matches_prediction = false;
  bool ps_matches_prediction = false;
  // FIFO means differ by more than twice the tolerance.
  bool sensitivity_visible = false;
  bool pass = false;
};

// Single-server queue at utilization rho under FIFO and PS with exponential
// and deterministic unit workloads.
SensitivityReport sensitivity_control(double rho, std::uint64_t events = 1'000'000,
                                      std::uint64_t seed = 7, double tolerance = 0.2);

// Single-server queue, arrival rate rho, service rate 1 when busy.
NetworkSpec single_server_spec(double rho, Discipline discipline, WorkloadDistribution workload);

}  // namespace insens
