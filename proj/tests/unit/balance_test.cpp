#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"
#include "insens/balance.hpp"
#include "insens/error.hpp"

namespace insens {
namespace {

using testing::erlang_loss_spec;
using testing::loss_reference;
using testing::loss_spec;
using testing::mm1_spec;
using testing::tandem_spec;

double max_abs_diff(const OccupancyDistribution& p, const std::map<StateVector, double>& q) {
  double worst = 0.0;
  for (const auto& [n, v] : q) worst = std::max(worst, std::abs(p.probability(n) - v));
  for (const auto& [n, v] : p.mass) worst = std::max(worst, std::abs(v - (q.count(n) ? q.at(n) : 0.0)));
  return worst;
}

double tv(const OccupancyDistribution& p, const OccupancyDistribution& q) {
  double s = 0.0;
  for (const auto& [n, v] : p.mass) s += std::abs(v - q.probability(n));
  for (const auto& [n, v] : q.mass)
    if (!p.mass.count(n)) s += v;
  return 0.5 * s;
}

// Two-class rates on the unit box with a cyclic flow 0 -> 1 -> 2 -> 0 that
// balances globally but not class by class.
NetworkSpec cyclic_tabulated_spec() {
  NetworkSpec spec;
  spec.num_classes = 2;
  TabulatedRates t;
  t.box = LatticeBox({1, 1});
  RateMatrix m00(2), m10(2), m01(2), m11(2);
  m00(0, 1) = 1.0;
  m10(1, 2) = 1.0;
  m01(2, 0) = 1.0;
  m01(0, 1) = 1.0;
  m11(1, 0) = 1.0;
  m11(2, 0) = 1.0;
  t.table = {{StateVector{0, 0}, m00}, {StateVector{1, 0}, m10}, {StateVector{0, 1}, m01}, {StateVector{1, 1}, m11}};
  spec.rates = t;
  spec.workloads = {testing::exp1(), testing::exp1()};
  return spec;
}

TEST(SolveSingleClass, ErlangLoss) {
  const auto pi = solve_single_class(RateSequence{{2, 2, 2}, 0, 0}, RateSequence::linear(1.0), 3);
  const std::map<StateVector, double> expected = {
      {StateVector{0}, 3.0 / 19}, {StateVector{1}, 6.0 / 19}, {StateVector{2}, 6.0 / 19}, {StateVector{3}, 4.0 / 19}};
  EXPECT_LT(max_abs_diff(pi, expected), 1e-15);
  EXPECT_EQ(pi.boundary_mass, 0.0);
}

TEST(SolveSingleClass, GeometricForMm1) {
  const auto pi = solve_single_class(RateSequence::constant(0.5), RateSequence{{0.0}, 1.0, 0.0}, 60);
  for (int n = 0; n <= 60; ++n) EXPECT_NEAR(pi.probability(StateVector{n}), 0.5 * std::pow(0.5, n), 1e-15);
  EXPECT_NEAR(pi.boundary_mass, std::pow(0.5, 61), 1e-20);
}

TEST(SolveSingleClass, NoArrivals) {
  const auto pi = solve_single_class(RateSequence::constant(0.0), RateSequence::linear(1.0), 10);
  EXPECT_EQ(pi.probability(StateVector{0}), 1.0);
  EXPECT_EQ(pi.mean_total(), 0.0);
}

TEST(SolveSingleClass, SatisfiesRecursion) {
  const RateSequence a{{3.0, 2.5, 1.0, 4.0}, 0.7, 0.0};
  const RateSequence b{{0.0, 1.0, 1.5}, 0.2, 0.8};
  const auto pi = solve_single_class(a, b, 25);
  EXPECT_NEAR(pi.total(), 1.0, 1e-14);
  for (int n = 0; n < 25; ++n) {
    const double lhs = pi.probability(StateVector{n + 1}) * b.at(n + 1);
    const double rhs = pi.probability(StateVector{n}) * a.at(n);
    EXPECT_NEAR(lhs, rhs, 1e-15 * std::max(1.0, rhs));
  }
}

TEST(TrafficEquations, Tandem) {
  const auto r1 = solve_traffic_equations(testing::tandem_routing(), 1.0);
  EXPECT_NEAR(r1[0], 1.0, 1e-14);
  EXPECT_NEAR(r1[1], 1.0, 1e-14);
  const auto r2 = solve_traffic_equations(testing::tandem_routing(), 2.0);
  EXPECT_NEAR(r2[0], 2.0, 1e-14);
  EXPECT_NEAR(r2[1], 2.0, 1e-14);
}

TEST(TrafficEquations, ImmediateExit) {
  const auto r = solve_traffic_equations({{0.0, 1.0}, {1.0, 0.0}}, 0.7);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_NEAR(r[0], 0.7, 1e-15);
}

TEST(TrafficEquations, ClosedNetworkRejected) {
  EXPECT_THROW(solve_traffic_equations(testing::tandem_routing(), 0.0), ConfigError);
}

TEST(SolveWhittle, ConstantBalanceFunctionIsProductOfGeometrics) {
  auto spec = tandem_spec(0.5, BalanceFunction::constant());
  const auto pi = solve_whittle(std::get<WhittleRates>(spec.rates), LatticeBox({30, 30}));
  EXPECT_EQ(pi.mass.size(), 31u * 31u);
  for (int a = 0; a <= 30; a += 3)
    for (int b = 0; b <= 30; b += 5)
      EXPECT_NEAR(pi.probability(StateVector{a, b}), 0.25 * std::pow(0.5, a + b), 1e-9);
  EXPECT_GT(pi.boundary_mass, 0.0);
  EXPECT_LT(pi.boundary_mass, 1e-8);
}

TEST(SolveWhittle, JacksonBalanceFunctionRescalesLoads) {
  WhittleRates w;
  w.nu = 0.5;
  w.routing = {{0.0, 0.5, 0.5}, {0.0, 0.0, 1.0}, {1.0, 0.0, 0.0}};
  w.phi = BalanceFunction::product({2.0, 1.0});
  const auto rho = solve_traffic_equations(w.routing, w.nu);
  EXPECT_NEAR(rho[0], 0.25, 1e-15);
  EXPECT_NEAR(rho[1], 0.5, 1e-15);
  const auto pi = solve_whittle(w, LatticeBox({30, 30}));
  for (int a = 0; a <= 10; ++a)
    for (int b = 0; b <= 10; ++b)
      EXPECT_NEAR(pi.probability(StateVector{a, b}), 0.25 * std::pow(0.5, a + b), 1e-9);
}

TEST(SolveWhittle, ClosedNetworkRejected) {
  auto spec = tandem_spec(0.0, BalanceFunction::constant());
  EXPECT_THROW(solve_whittle(std::get<WhittleRates>(spec.rates), LatticeBox({5, 5})), ConfigError);
}

TEST(SolveLoss, SingleClassMatchesErlang) {
  LossRates l;
  l.admissible = AdmissibleSet::from_constraints({LinearConstraint{{1.0}, 3.0}});
  l.nu = {2.0};
  l.sigma = {1.0};
  const auto a = solve_loss(l, 1);
  const auto b = solve_single_class(RateSequence{{2, 2, 2}, 0, 0}, RateSequence::linear(1.0), 3);
  for (int n = 0; n <= 3; ++n)
    EXPECT_NEAR(a.probability(StateVector{n}), b.probability(StateVector{n}), 1e-15);
}

TEST(SolveLoss, TwoClassEnumeration) {
  const auto spec = loss_spec();
  const auto pi = solve_loss(std::get<LossRates>(spec.rates), 2);
  EXPECT_EQ(pi.mass.size(), 9u);
  EXPECT_LT(max_abs_diff(pi, loss_reference()), 1e-15);
  EXPECT_EQ(pi.boundary_mass, 0.0);
}

TEST(SolveLoss, VanishingLoadConcentratesOnEmptyState) {
  auto spec = loss_spec();
  auto& l = std::get<LossRates>(spec.rates);
  l.nu = {1e-9, 1e-9};
  const auto pi = solve_loss(l, 2);
  EXPECT_NEAR(pi.probability(StateVector{0, 0}), 1.0, 1e-8);
}

TEST(VerifyPartialBalance, WhittleResidualsVanish) {
  const auto spec = tandem_spec(1.0, BalanceFunction::product({0.5, 0.5}));
  const auto pi = solve_whittle(std::get<WhittleRates>(spec.rates), LatticeBox({30, 30}));
  const auto r = verify_partial_balance(spec, pi);
  EXPECT_LT(r.max_relative_residual, 1e-12);
  EXPECT_GT(r.flagged_states, 0u);  // the upper faces
  EXPECT_EQ(r.residuals.size(), 31u * 31u * 3u);
}

TEST(VerifyPartialBalance, ResidualIsZeroForEmptyClasses) {
  const auto spec = tandem_spec(1.0, BalanceFunction::product({0.5, 0.5}));
  const auto pi = solve_whittle(std::get<WhittleRates>(spec.rates), LatticeBox({5, 5}));
  for (const auto& r : verify_partial_balance(spec, pi).residuals) {
    if (r.cls != 0 && r.state.count(r.cls) == 0) EXPECT_EQ(r.residual, 0.0);
  }
}

TEST(VerifyPartialBalance, LossDetailedBalance) {
  const auto spec = loss_spec();
  const auto pi = solve_loss(std::get<LossRates>(spec.rates), 2);
  const auto r = verify_partial_balance(spec, pi);
  EXPECT_LT(r.max_abs_residual, 1e-12);
  EXPECT_EQ(r.flagged_states, 0u);
  // Pairwise flux between n and T^i n.
  for (const auto& [n, p] : pi.mass) {
    for (ClassIndex i = 1; i <= 2; ++i) {
      const StateVector up = transition(n, 0, i);
      if (!pi.mass.count(up)) continue;
      EXPECT_NEAR(p * rate(spec, n, 0, i), pi.probability(up) * rate(spec, up, i, 0), 1e-12);
    }
  }
}

TEST(VerifyPartialBalance, CyclicFlowViolates) {
  const auto spec = cyclic_tabulated_spec();
  const auto pi = ctmc_oracle(spec, LatticeBox({1, 1}));
  EXPECT_EQ(pi.mass.size(), 4u);
  // Global balance holds for the oracle solution.
  for (const auto& [n, p] : pi.mass) {
    double out = 0.0, in = 0.0;
    const RateMatrix m = rates_at(spec, n);
    for (ClassIndex i = 0; i <= 2; ++i) {
      for (ClassIndex j = 0; j <= 2; ++j) {
        if (i == j || !can_transition(n, i)) continue;
        if (LatticeBox({1, 1}).contains(transition(n, i, j))) out += p * m(i, j);
      }
    }
    for (const auto& [k, q] : pi.mass) {
      if (k == n) continue;
      const RateMatrix mk = rates_at(spec, k);
      for (ClassIndex i = 0; i <= 2; ++i)
        for (ClassIndex j = 0; j <= 2; ++j)
          if (i != j && can_transition(k, i) && transition(k, i, j) == n) in += q * mk(i, j);
    }
    EXPECT_NEAR(out, in, 1e-14);
  }
  EXPECT_GT(verify_partial_balance(spec, pi).max_abs_residual, 1e-3);
}

TEST(CtmcOracle, MatchesErlangLoss) {
  const auto spec = erlang_loss_spec();
  const auto a = ctmc_oracle(spec, LatticeBox({3}));
  const auto b = solve_single_class(RateSequence{{2, 2, 2}, 0, 0}, RateSequence::linear(1.0), 3);
  EXPECT_LT(tv(a, b), 1e-10);
}

TEST(CtmcOracle, MatchesJacksonTandem) {
  const auto spec = tandem_spec(1.0, BalanceFunction::product({0.5, 0.5}));
  const auto a = ctmc_oracle(spec, LatticeBox({20, 20}));
  const auto b = solve_whittle(std::get<WhittleRates>(spec.rates), LatticeBox({20, 20}));
  EXPECT_LT(tv(a, b), 1e-10 + 10.0 * b.boundary_mass);
}

TEST(CtmcOracle, RejectsLargeBoxes) {
  const auto spec = tandem_spec(1.0, BalanceFunction::product({0.5, 0.5}));
  EXPECT_THROW(ctmc_oracle(spec, LatticeBox({200, 200})), ConfigError);
}

TEST(CheckFiniteness, ErlangLoss) {
  const auto spec = erlang_loss_spec();
  const auto pi = solve_analytic(spec, {3});
  const auto f = check_finiteness(spec, pi);
  EXPECT_NEAR(f.arrival_flux, 30.0 / 19.0, 1e-14);
  EXPECT_TRUE(f.pass);
}

TEST(CheckFiniteness, NoArrivals) {
  NetworkSpec spec = erlang_loss_spec();
  spec.rates = SingleClassRates{RateSequence::constant(0.0), RateSequence::linear(1.0)};
  const auto f = check_finiteness(spec, solve_analytic(spec, {5}));
  EXPECT_EQ(f.arrival_flux, 0.0);
  EXPECT_TRUE(f.pass);
}

TEST(CheckFiniteness, Mm1) {
  const auto spec = mm1_spec(0.5, Discipline::ProcessorSharing);
  const auto f = check_finiteness(spec, solve_analytic(spec, {60}));
  EXPECT_NEAR(f.arrival_flux, 0.5, 1e-15);
  EXPECT_TRUE(f.pass);
}

TEST(SolveAnalytic, DispatchesByModel) {
  EXPECT_EQ(solve_analytic(erlang_loss_spec(), {3}).mass.size(), 4u);
  EXPECT_EQ(solve_analytic(loss_spec(), {}).mass.size(), 9u);
  EXPECT_EQ(solve_analytic(tandem_spec(1.0, BalanceFunction::product({0.5, 0.5})), {10, 10}).mass.size(), 121u);
  EXPECT_EQ(solve_analytic(cyclic_tabulated_spec(), {}).mass.size(), 4u);
}

}  // namespace
}  // namespace insens
