#pragma once

#include <cmath>
#include <map>
#include <vector>

#include "insens/distributions.hpp"
#include "insens/model.hpp"

namespace insens::testing {

inline WorkloadDistribution exp1() { return make_distribution(family::Exponential{1.0}); }
inline WorkloadDistribution det1() { return make_distribution(family::Deterministic{1.0}); }
inline WorkloadDistribution h2() {
  return make_distribution(family::HyperExponential{{1.0 / 3.0, 2.0 / 3.0}, {0.5, 2.0}});
}
inline WorkloadDistribution erlang2() { return make_distribution(family::Erlang{2, 2.0}); }

// alpha(n) = 2 I(n < 3), beta(n) = n.
inline NetworkSpec erlang_loss_spec(WorkloadDistribution w = exp1()) {
  NetworkSpec spec;
  spec.num_classes = 1;
  spec.rates = SingleClassRates{RateSequence{{2.0, 2.0, 2.0}, 0.0, 0.0}, RateSequence::linear(1.0)};
  spec.workloads = {std::move(w)};
  return spec;
}

// alpha(n) = rho, beta(n) = I(n > 0).
inline NetworkSpec mm1_spec(double rho, Discipline d, WorkloadDistribution w = exp1()) {
  NetworkSpec spec;
  spec.num_classes = 1;
  spec.discipline = d;
  spec.rates = SingleClassRates{RateSequence::constant(rho), RateSequence{{0.0}, 1.0, 0.0}};
  spec.workloads = {std::move(w)};
  return spec;
}

inline std::vector<std::vector<double>> tandem_routing() {
  return {{0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}, {1.0, 0.0, 0.0}};
}

// Tandem 0 -> 1 -> 2 -> 0 with external rate nu and balance function phi.
inline NetworkSpec tandem_spec(double nu, BalanceFunction phi, WorkloadDistribution w1 = exp1(),
                               WorkloadDistribution w2 = exp1()) {
  NetworkSpec spec;
  spec.num_classes = 2;
  WhittleRates wr;
  wr.nu = nu;
  wr.routing = tandem_routing();
  wr.phi = std::move(phi);
  spec.rates = std::move(wr);
  spec.workloads = {std::move(w1), std::move(w2)};
  return spec;
}

// A = {n1 + 2 n2 <= 4}, nu = sigma = (1, 1).
inline NetworkSpec loss_spec(WorkloadDistribution w = exp1()) {
  NetworkSpec spec;
  spec.num_classes = 2;
  LossRates l;
  l.admissible = AdmissibleSet::from_constraints({LinearConstraint{{1.0, 2.0}, 4.0}});
  l.nu = {1.0, 1.0};
  l.sigma = {1.0, 1.0};
  spec.rates = std::move(l);
  spec.workloads = {w, w};
  return spec;
}

// Hand-normalized 1 / (n1! n2!) over the nine admissible states.
inline std::map<StateVector, double> loss_reference() {
  std::map<StateVector, double> w;
  double z = 0.0;
  for (int a = 0; a <= 4; ++a) {
    for (int b = 0; a + 2 * b <= 4; ++b) {
      const double v = 1.0 / (std::tgamma(a + 1.0) * std::tgamma(b + 1.0));
      w[StateVector{a, b}] = v;
      z += v;
    }
  }
  for (auto& [n, v] : w) v /= z;
  return w;
}

}  // namespace insens::testing
