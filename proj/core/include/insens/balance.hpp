#pragma once

#include <cstddef>
#include <map>
#include <vector>

#include "insens/model.hpp"
#include "insens/state.hpp"

namespace insens {

// Probability mass over a finite set of occupancy vectors.
struct OccupancyDistribution {
  std::size_t num_classes = 0;
  std::map<StateVector, double> mass;
  // Mass on states from which the truncation removes a positive-rate
  // transition. Zero when the support is exactly closed.
  double boundary_mass = 0.0;
  // Sum of unnormalized weights (1 when not meaningful).
  double normalizer = 1.0;

  double probability(const StateVector& n) const;
  double total() const;
  // E[n_1 + ... + n_N].
  double mean_total() const;
  // E[n_i], 1-based class.
  double mean_count(ClassIndex i) const;
};

// Builds a distribution from nonnegative weights given in log scale.
OccupancyDistribution normalize_log_weights(std::size_t num_classes,
                                            const std::map<StateVector, double>& log_weights);

// pi(n + 1) beta(n + 1) = pi(n) alpha(n) on {0..K}.
OccupancyDistribution solve_single_class(const RateSequence& arrival,
                                         const RateSequence& service, int truncation);

struct PartialBalanceResidual {
  StateVector state;
  ClassIndex cls = 0;
  double outflow = 0.0;
  double inflow = 0.0;
  double residual = 0.0;  // outflow - inflow
  double relative = 0.0;  // |residual| / max(outflow, inflow), 0 when both vanish
  bool neighbor_outside = false;
};

struct FinitenessCheck {
  double arrival_flux = 0.0;  // sum_n pi(n) sum_i phi_0i(n) over the support
  double tail_estimate = 0.0;
  bool pass = true;
};

struct BalanceReport {
  std::vector<PartialBalanceResidual> residuals;
  double max_abs_residual = 0.0;
  // Over states none of whose neighbours were truncated.
  double max_relative_residual = 0.0;
  // Over every state, truncated neighbours included.
  double max_relative_residual_all = 0.0;
  std::size_t flagged_states = 0;
  FinitenessCheck finiteness;
};

// Residuals pi(n) sum_j phi_ij(n) - sum_j pi(T_ij n) phi_ji(T_ij n) for
// every n in the support and i in {0..N}; residual is exactly 0 when
// n_i = 0. Neighbours outside the support count as mass 0; the state is
// flagged when such a neighbour is reachable from the support (truncated
// mass) and a positive rate links the two.
BalanceReport verify_partial_balance(const NetworkSpec& spec, const OccupancyDistribution& pi);

// Positive solution of rho_i = sum_j rho_j p_ji + nu p_0i; also checks
// nu = sum_j rho_j p_j0 to 1e-10.
std::vector<double> solve_traffic_equations(const std::vector<std::vector<double>>& routing,
                                            double nu);

// pi(n) proportional to Phi(n) prod_i rho_i^{n_i} on the box.
OccupancyDistribution solve_whittle(const WhittleRates& whittle, const LatticeBox& box);

// pi(n) proportional to prod_i kappa_i^{n_i} / n_i! on A, kappa_i = nu_i / sigma_i.
OccupancyDistribution solve_loss(const LossRates& loss, std::size_t num_classes);

// Exact stationary law of the occupancy jump process with unit-mean
// exponential workloads (n -> T_ij n at rate phi_ij(n)), restricted to the
// box with transitions leaving it disabled.
OccupancyDistribution ctmc_oracle(const NetworkSpec& spec, const LatticeBox& box);

inline constexpr std::size_t kMaxOracleStates = 10'000;

FinitenessCheck check_finiteness(const NetworkSpec& spec, const OccupancyDistribution& pi);

// Dispatches to the closed-form solver for single-class, Whittle and loss
// models, and to the jump-process oracle for tabulated ones.
OccupancyDistribution solve_analytic(const NetworkSpec& spec, const std::vector<int>& truncation);

}  // namespace insens
