#include "insens/distributions.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "insens/error.hpp"

namespace insens {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// P(Erlang(k, rate) > x) = e^{-rate x} sum_{m<k} (rate x)^m / m!
double erlang_survival(int k, double rate, double x) {
  if (x <= 0.0) return 1.0;
  const double z = rate * x;
  double term = 1.0;
  double sum = 1.0;
  for (int m = 1; m < k; ++m) {
    term *= z / m;
    sum += term;
  }
  return std::exp(-z) * sum;
}

double erlang_density(int k, double rate, double x) {
  if (x < 0.0) return 0.0;
  const double z = rate * x;
  return rate * std::exp((k - 1) * std::log(z) - z - std::lgamma(static_cast<double>(k)));
}

// Solves cdf(x) = u for a continuous nondecreasing cdf on [0, inf) by
// safeguarded Newton iteration. `density` may be zero; bisection then
// carries the step.
template <class Cdf, class Density>
double invert_cdf(double u, Cdf cdf, Density density, double start) {
  double lo = 0.0;
  double hi = std::max(start, 1.0);
  while (cdf(hi) < u) {
    lo = hi;
    hi *= 2.0;
    if (!std::isfinite(hi)) throw NumericalError("quantile bracket overflow");
  }
  double x = 0.5 * (lo + hi);
  for (int iter = 0; iter < 200; ++iter) {
    const double f = cdf(x) - u;
    if (f == 0.0) return x;
    if (f < 0.0) {
      lo = x;
    } else {
      hi = x;
    }
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, hi)) break;
    const double d = density(x);
    double next = d > 0.0 ? x - f / d : lo - 1.0;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    x = next;
  }
  return x;
}

void validate(const FamilyParams& params) {
  std::visit(
      overloaded{
          [](const family::Exponential& p) {
            if (!(p.rate > 0.0) || !std::isfinite(p.rate))
              throw ConfigError("exponential rate must be positive and finite");
          },
          [](const family::Deterministic& p) {
            if (p.value == 0.0)
              throw ConfigError("deterministic(0) has an atom of probability at zero");
            if (!(p.value > 0.0) || !std::isfinite(p.value))
              throw ConfigError("deterministic value must be positive and finite");
          },
          [](const family::Erlang& p) {
            if (p.shape < 1) throw ConfigError("erlang shape must be >= 1");
            if (!(p.rate > 0.0) || !std::isfinite(p.rate))
              throw ConfigError("erlang rate must be positive and finite");
          },
          [](const family::HyperExponential& p) {
            if (p.weights.empty() || p.weights.size() != p.rates.size())
              throw ConfigError("hyperexponential needs matching nonempty weights and rates");
            double total = 0.0;
            for (std::size_t k = 0; k < p.weights.size(); ++k) {
              if (!(p.weights[k] >= 0.0))
                throw ConfigError("hyperexponential weights must be nonnegative");
              if (!(p.rates[k] > 0.0) || !std::isfinite(p.rates[k]))
                throw ConfigError(
                    "hyperexponential component rates must be positive; a nonpositive "
                    "rate puts an atom at zero or infinity");
              total += p.weights[k];
            }
            if (std::abs(total - 1.0) > 1e-12)
              throw ConfigError("hyperexponential weights must sum to 1");
          },
          [](const family::Uniform& p) {
            if (p.lo < 0.0) throw ConfigError("uniform lower bound must be >= 0");
            if (!(p.hi > p.lo) || !std::isfinite(p.hi))
              throw ConfigError("uniform needs lo < hi < infinity");
          },
          [](const family::Pareto& p) {
            if (!(p.shape > 1.0))
              throw ConfigError("pareto shape must exceed 1 for a finite mean");
            if (!(p.scale > 0.0) || !std::isfinite(p.scale))
              throw ConfigError("pareto scale must be positive and finite");
          },
      },
      params);
}

}  // namespace

std::string family_name(const FamilyParams& params) {
  return std::visit(overloaded{
                        [](const family::Exponential&) { return std::string("exponential"); },
                        [](const family::Deterministic&) { return std::string("deterministic"); },
                        [](const family::Erlang&) { return std::string("erlang"); },
                        [](const family::HyperExponential&) {
                          return std::string("hyperexponential");
                        },
                        [](const family::Uniform&) { return std::string("uniform"); },
                        [](const family::Pareto&) { return std::string("pareto"); },
                    },
                    params);
}

WorkloadDistribution::WorkloadDistribution(FamilyParams params) : params_(std::move(params)) {
  validate(params_);
  std::visit(overloaded{
                 [&](const family::Exponential& p) {
                   mean_ = 1.0 / p.rate;
                   second_moment_ = 2.0 / (p.rate * p.rate);
                 },
                 [&](const family::Deterministic& p) {
                   mean_ = p.value;
                   second_moment_ = p.value * p.value;
                 },
                 [&](const family::Erlang& p) {
                   mean_ = p.shape / p.rate;
                   second_moment_ = p.shape * (p.shape + 1.0) / (p.rate * p.rate);
                 },
                 [&](const family::HyperExponential& p) {
                   mean_ = 0.0;
                   second_moment_ = 0.0;
                   for (std::size_t k = 0; k < p.weights.size(); ++k) {
                     mean_ += p.weights[k] / p.rates[k];
                     second_moment_ += 2.0 * p.weights[k] / (p.rates[k] * p.rates[k]);
                   }
                 },
                 [&](const family::Uniform& p) {
                   mean_ = 0.5 * (p.lo + p.hi);
                   second_moment_ = (p.lo * p.lo + p.lo * p.hi + p.hi * p.hi) / 3.0;
                 },
                 [&](const family::Pareto& p) {
                   mean_ = p.shape * p.scale / (p.shape - 1.0);
                   second_moment_ =
                       p.shape > 2.0 ? p.shape * p.scale * p.scale / (p.shape - 2.0) : kInf;
                 },
             },
             params_);
}

bool WorkloadDistribution::has_finite_variance() const noexcept {
  return std::isfinite(second_moment_);
}

double WorkloadDistribution::cdf(double x) const { return 1.0 - survival(x); }

double WorkloadDistribution::survival(double x) const {
  if (x < 0.0) return 1.0;
  return std::visit(
      overloaded{
          [&](const family::Exponential& p) { return std::exp(-p.rate * x); },
          [&](const family::Deterministic& p) { return x < p.value ? 1.0 : 0.0; },
          [&](const family::Erlang& p) { return erlang_survival(p.shape, p.rate, x); },
          [&](const family::HyperExponential& p) {
            double s = 0.0;
            for (std::size_t k = 0; k < p.weights.size(); ++k)
              s += p.weights[k] * std::exp(-p.rates[k] * x);
            return s;
          },
          [&](const family::Uniform& p) {
            if (x < p.lo) return 1.0;
            if (x >= p.hi) return 0.0;
            return (p.hi - x) / (p.hi - p.lo);
          },
          [&](const family::Pareto& p) {
            return x < p.scale ? 1.0 : std::pow(p.scale / x, p.shape);
          },
      },
      params_);
}

double WorkloadDistribution::quantile(double u) const {
  if (!(u > 0.0 && u < 1.0)) throw DomainError("quantile argument must lie in (0, 1)");
  return std::visit(
      overloaded{
          [&](const family::Exponential& p) { return -std::log1p(-u) / p.rate; },
          [&](const family::Deterministic& p) { return p.value; },
          [&](const family::Erlang& p) {
            return invert_cdf(
                u, [&](double x) { return 1.0 - erlang_survival(p.shape, p.rate, x); },
                [&](double x) { return erlang_density(p.shape, p.rate, x); }, mean_);
          },
          [&](const family::HyperExponential& p) {
            return invert_cdf(
                u, [&](double x) { return cdf(x); },
                [&](double x) {
                  double d = 0.0;
                  for (std::size_t k = 0; k < p.weights.size(); ++k)
                    d += p.weights[k] * p.rates[k] * std::exp(-p.rates[k] * x);
                  return d;
                },
                mean_);
          },
          [&](const family::Uniform& p) { return p.lo + u * (p.hi - p.lo); },
          [&](const family::Pareto& p) {
            return p.scale * std::pow(1.0 - u, -1.0 / p.shape);
          },
      },
      params_);
}

WorkloadDistribution WorkloadDistribution::rescaled(double target_mean) const {
  if (!(target_mean > 0.0) || !std::isfinite(target_mean))
    throw ConfigError("target mean must be positive and finite");
  const double c = target_mean / mean_;
  FamilyParams scaled = std::visit(
      overloaded{
          [&](family::Exponential p) -> FamilyParams {
            p.rate /= c;
            return p;
          },
          [&](family::Deterministic p) -> FamilyParams {
            p.value = target_mean;
            return p;
          },
          [&](family::Erlang p) -> FamilyParams {
            p.rate = p.shape / target_mean;
            return p;
          },
          [&](family::HyperExponential p) -> FamilyParams {
            for (double& r : p.rates) r /= c;
            return p;
          },
          [&](family::Uniform p) -> FamilyParams {
            p.lo *= c;
            p.hi *= c;
            return p;
          },
          [&](family::Pareto p) -> FamilyParams {
            p.scale = target_mean * (p.shape - 1.0) / p.shape;
            return p;
          },
      },
      params_);
  WorkloadDistribution out(std::move(scaled));
  // Families whose mean is a ratio of parameters may miss by an ulp.
  out.mean_ = target_mean;
  return out;
}

WorkloadDistribution make_distribution(FamilyParams params, double target_mean) {
  return WorkloadDistribution(std::move(params)).rescaled(target_mean);
}

EquilibriumDistribution::EquilibriumDistribution(WorkloadDistribution base)
    : base_(std::move(base)) {
  if (std::abs(base_.mean() - 1.0) > 1e-12)
    throw ConfigError("equilibrium law requires a unit-mean workload distribution");
}

double EquilibriumDistribution::cdf(double x) const {
  if (x <= 0.0) return 0.0;
  return std::visit(
      overloaded{
          [&](const family::Exponential& p) { return -std::expm1(-p.rate * x); },
          [&](const family::Deterministic& p) { return std::min(x, p.value) / p.value; },
          [&](const family::Erlang& p) {
            // Uniform mixture of Erlang(m, rate), m = 1..k.
            double s = 0.0;
            for (int m = 1; m <= p.shape; ++m) s += 1.0 - erlang_survival(m, p.rate, x);
            return s / p.shape;
          },
          [&](const family::HyperExponential& p) {
            double s = 0.0;
            for (std::size_t k = 0; k < p.weights.size(); ++k)
              s += p.weights[k] / p.rates[k] * -std::expm1(-p.rates[k] * x);
            return s;
          },
          [&](const family::Uniform& p) {
            if (x < p.lo) return x;
            const double w = p.hi - p.lo;
            const double y = std::min(x, p.hi) - p.lo;
            return p.lo + y - y * y / (2.0 * w);
          },
          [&](const family::Pareto& p) {
            if (x < p.scale) return x;
            return p.scale + p.scale / (p.shape - 1.0) *
                                 (1.0 - std::pow(p.scale / x, p.shape - 1.0));
          },
      },
      base_.params());
}

double EquilibriumDistribution::quantile(double u) const {
  if (!(u > 0.0 && u < 1.0)) throw DomainError("quantile argument must lie in (0, 1)");
  return std::visit(
      overloaded{
          [&](const family::Exponential& p) { return -std::log1p(-u) / p.rate; },
          [&](const family::Deterministic& p) { return u * p.value; },
          [&](const family::Erlang&) {
            return invert_cdf(
                u, [&](double x) { return cdf(x); }, [&](double x) { return density(x); },
                mean());
          },
          [&](const family::HyperExponential&) {
            return invert_cdf(
                u, [&](double x) { return cdf(x); }, [&](double x) { return density(x); },
                mean());
          },
          [&](const family::Uniform& p) {
            if (u < p.lo) return u;
            const double w = p.hi - p.lo;
            const double disc = std::max(0.0, w * w - 2.0 * w * (u - p.lo));
            return p.lo + (w - std::sqrt(disc));
          },
          [&](const family::Pareto& p) {
            if (u < p.scale) return u;
            const double tail = 1.0 - (u - p.scale) * (p.shape - 1.0) / p.scale;
            return p.scale * std::pow(tail, -1.0 / (p.shape - 1.0));
          },
      },
      base_.params());
}

EquilibriumDistribution equilibrium(const WorkloadDistribution& d) {
  return EquilibriumDistribution(d);
}

}  // namespace insens
