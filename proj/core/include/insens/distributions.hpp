#pragma once

#include <string>
#include <variant>
#include <vector>

#include "insens/rng.hpp"

namespace insens {

namespace family {
struct Exponential {
  double rate = 1.0;
};
struct Deterministic {
  double value = 1.0;
};
struct Erlang {
  int shape = 1;
  double rate = 1.0;
};
struct HyperExponential {
  std::vector<double> weights;
  std::vector<double> rates;
};
struct Uniform {
  double lo = 0.0;
  double hi = 2.0;
};
// P(W > x) = (scale / x)^shape for x >= scale.
struct Pareto {
  double shape = 2.0;
  double scale = 0.5;
};
}  // namespace family

using FamilyParams =
    std::variant<family::Exponential, family::Deterministic, family::Erlang,
                 family::HyperExponential, family::Uniform, family::Pareto>;

std::string family_name(const FamilyParams& params);

// A workload law on the positive reals with finite mean and no atom at
// zero. Immutable; sampling draws exactly one uniform per variate through
// the quantile function.
class WorkloadDistribution {
 public:
  // Validates params; use make_distribution to also fix the mean.
  explicit WorkloadDistribution(FamilyParams params);

  const FamilyParams& params() const noexcept { return params_; }
  std::string name() const { return family_name(params_); }

  double mean() const noexcept { return mean_; }
  // +infinity for Pareto with shape <= 2.
  double second_moment() const noexcept { return second_moment_; }
  double variance() const noexcept { return second_moment_ - mean_ * mean_; }
  bool has_finite_variance() const noexcept;

  double cdf(double x) const;
  // Survival function 1 - F(x); the density of the equilibrium law.
  double survival(double x) const;
  // Generalized inverse of the CDF at u in (0, 1).
  double quantile(double u) const;
  double sample(Rng& rng) const { return quantile(rng.uniform()); }

  // Same family scaled so that the mean equals target_mean.
  WorkloadDistribution rescaled(double target_mean) const;

 private:
  FamilyParams params_;
  double mean_ = 0.0;
  double second_moment_ = 0.0;
};

WorkloadDistribution make_distribution(FamilyParams params, double target_mean = 1.0);

// Stationary residual-life law of a renewal process with unit-mean
// inter-event law F: G(x) = integral_0^x (1 - F(y)) dy.
class EquilibriumDistribution {
 public:
  // Throws ConfigError unless base has mean 1 to within 1e-12.
  explicit EquilibriumDistribution(WorkloadDistribution base);

  const WorkloadDistribution& base() const noexcept { return base_; }

  double cdf(double x) const;
  double density(double x) const { return x < 0.0 ? 0.0 : base_.survival(x); }
  double quantile(double u) const;
  double sample(Rng& rng) const { return quantile(rng.uniform()); }

  // E[W^2] / 2; infinite when the base has infinite variance.
  double mean() const noexcept { return 0.5 * base_.second_moment(); }

 private:
  WorkloadDistribution base_;
};

EquilibriumDistribution equilibrium(const WorkloadDistribution& d);

}  // namespace insens
