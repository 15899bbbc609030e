#include "insens/balance.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>

#include "insens/error.hpp"

namespace insens {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Iterative Tarjan; returns the component id of every vertex.
std::vector<int> strongly_connected_components(
    const std::vector<std::vector<std::pair<std::size_t, double>>>& adj, int& count) {
  const std::size_t n = adj.size();
  std::vector<int> index(n, -1), low(n, 0), comp(n, -1);
  std::vector<char> on_stack(n, 0);
  std::vector<std::size_t> stack;
  std::vector<std::pair<std::size_t, std::size_t>> call;
  int next_index = 0;
  count = 0;
  for (std::size_t root = 0; root < n; ++root) {
    if (index[root] >= 0) continue;
    call.emplace_back(root, 0);
    index[root] = low[root] = next_index++;
    stack.push_back(root);
    on_stack[root] = 1;
    while (!call.empty()) {
      auto& [v, edge] = call.back();
      if (edge < adj[v].size()) {
        const std::size_t w = adj[v][edge++].first;
        if (index[w] < 0) {
          index[w] = low[w] = next_index++;
          stack.push_back(w);
          on_stack[w] = 1;
          call.emplace_back(w, 0);
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      if (low[v] == index[v]) {
        std::size_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          comp[w] = count;
        } while (w != v);
        ++count;
      }
      const std::size_t finished = v;
      call.pop_back();
      if (!call.empty()) {
        const std::size_t parent = call.back().first;
        low[parent] = std::min(low[parent], low[finished]);
      }
    }
  }
  return comp;
}

}  // namespace

double OccupancyDistribution::probability(const StateVector& n) const {
  auto it = mass.find(n);
  return it == mass.end() ? 0.0 : it->second;
}

double OccupancyDistribution::total() const {
  double s = 0.0;
  for (const auto& [n, p] : mass) s += p;
  return s;
}

double OccupancyDistribution::mean_total() const {
  double s = 0.0;
  for (const auto& [n, p] : mass) s += p * n.total();
  return s;
}

double OccupancyDistribution::mean_count(ClassIndex i) const {
  double s = 0.0;
  for (const auto& [n, p] : mass) s += p * n.count(i);
  return s;
}

OccupancyDistribution normalize_log_weights(std::size_t num_classes,
                                            const std::map<StateVector, double>& log_weights) {
  double top = kNegInf;
  for (const auto& [n, lw] : log_weights) top = std::max(top, lw);
  if (!std::isfinite(top)) throw NumericalError("all weights vanish; nothing to normalize");
  double sum = 0.0;
  for (const auto& [n, lw] : log_weights) sum += std::exp(lw - top);
  OccupancyDistribution out;
  out.num_classes = num_classes;
  for (const auto& [n, lw] : log_weights) out.mass[n] = std::exp(lw - top) / sum;
  out.normalizer = std::exp(top) * sum;
  return out;
}

OccupancyDistribution solve_single_class(const RateSequence& arrival,
                                         const RateSequence& service, int truncation) {
  if (truncation < 0) throw ConfigError("truncation must be nonnegative");
  std::vector<double> weight(static_cast<std::size_t>(truncation) + 1);
  weight[0] = 1.0;
  for (int n = 0; n < truncation; ++n) {
    const double a = arrival.at(n);
    const double b = service.at(n + 1);
    if (!(a >= 0.0) || !std::isfinite(a)) throw ConfigError("arrival rates must be nonnegative");
    if (!(b > 0.0)) {
      throw ConfigError("service rate must be positive for n >= 1 (n = " +
                        std::to_string(n + 1) + ")");
    }
    weight[n + 1] = weight[n] * a / b;
    if (!std::isfinite(weight[n + 1])) {
      throw NumericalError("balance recursion diverges: weights overflow by n = " +
                           std::to_string(n + 1));
    }
  }
  double sum = 0.0;
  for (double w : weight) sum += w;
  OccupancyDistribution out;
  out.num_classes = 1;
  out.normalizer = sum;
  for (int n = 0; n <= truncation; ++n) out.mass[StateVector{n}] = weight[n] / sum;
  if (arrival.at(truncation) > 0.0) out.boundary_mass = weight[truncation] / sum;
  return out;
}

BalanceReport verify_partial_balance(const NetworkSpec& spec, const OccupancyDistribution& pi) {
  const std::size_t N = spec.num_classes;
  BalanceReport report;
  std::map<StateVector, RateMatrix> cache;
  auto rates_for = [&](const StateVector& n) -> const RateMatrix& {
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    try {
      return cache.emplace(n, rates_at(spec, n)).first->second;
    } catch (const DomainError& e) {
      throw DomainError(std::string("support/rate-domain mismatch: ") + e.what());
    }
  };

  // States outside the support that the support feeds: truncated mass.
  // Neighbours outside a closed support carry no mass and are not flagged.
  std::set<StateVector> leaks;
  for (const auto& [n, p] : pi.mass) {
    if (n.size() != N) throw DomainError("distribution dimension does not match the spec");
    const RateMatrix& r = rates_for(n);
    for (ClassIndex i = 0; i <= N; ++i) {
      if (!can_transition(n, i)) continue;
      for (ClassIndex j = 0; j <= N; ++j) {
        if (r(i, j) <= 0.0) continue;
        StateVector m = transition(n, i, j);
        if (!pi.mass.count(m)) leaks.insert(std::move(m));
      }
    }
  }
  auto inflow_rate_outside = [&](const StateVector& m, ClassIndex j, ClassIndex i) {
    try {
      return rate(spec, m, j, i);
    } catch (const DomainError&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  for (const auto& [n, p] : pi.mass) {
    const RateMatrix& out_rates = rates_for(n);
    bool state_flagged = false;
    std::vector<PartialBalanceResidual> rows;
    for (ClassIndex i = 0; i <= N; ++i) {
      PartialBalanceResidual row{n, i};
      if (i != kExterior && n.count(i) == 0) {
        rows.push_back(row);
        continue;
      }
      row.outflow = p * out_rates.row_sum(i);
      for (ClassIndex j = 0; j <= N; ++j) {
        const StateVector m = transition(n, i, j);
        auto it = pi.mass.find(m);
        if (it == pi.mass.end()) {
          if (leaks.count(m) && (out_rates(i, j) > 0.0 || inflow_rate_outside(m, j, i) > 0.0))
            row.neighbor_outside = true;
          continue;
        }
        row.inflow += it->second * rates_for(m)(j, i);
      }
      row.residual = row.outflow - row.inflow;
      const double scale = std::max(row.outflow, row.inflow);
      row.relative = scale > 0.0 ? std::abs(row.residual) / scale : 0.0;
      state_flagged = state_flagged || row.neighbor_outside;
      rows.push_back(row);
    }
    if (state_flagged) ++report.flagged_states;
    for (const auto& row : rows) {
      report.max_abs_residual = std::max(report.max_abs_residual, std::abs(row.residual));
      report.max_relative_residual_all = std::max(report.max_relative_residual_all, row.relative);
      if (!state_flagged)
        report.max_relative_residual = std::max(report.max_relative_residual, row.relative);
      report.residuals.push_back(row);
    }
  }
  report.finiteness = check_finiteness(spec, pi);
  return report;
}

std::vector<double> solve_traffic_equations(const std::vector<std::vector<double>>& routing,
                                            double nu) {
  if (routing.size() < 2) throw ConfigError("routing matrix needs at least one class");
  const std::size_t N = routing.size() - 1;
  for (const auto& row : routing) {
    if (row.size() != N + 1) throw ConfigError("routing matrix must be square");
  }
  if (routing[0][0] != 0.0) throw ConfigError("p_00 must be 0");
  if (!(nu > 0.0)) throw ConfigError("closed networks (nu = 0) are not supported");

  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(N),
                                                static_cast<Eigen::Index>(N));
  Eigen::VectorXd b(static_cast<Eigen::Index>(N));
  for (std::size_t i = 1; i <= N; ++i) {
    b(static_cast<Eigen::Index>(i - 1)) = nu * routing[0][i];
    for (std::size_t j = 1; j <= N; ++j) {
      a(static_cast<Eigen::Index>(i - 1), static_cast<Eigen::Index>(j - 1)) -= routing[j][i];
    }
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  if (!lu.isInvertible()) throw NumericalError("traffic equations are singular");
  const Eigen::VectorXd x = lu.solve(b);
  std::vector<double> rho(N);
  double exit_flow = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    rho[i] = x(static_cast<Eigen::Index>(i));
    if (!(rho[i] > 0.0)) {
      throw NumericalError("traffic equations have a nonpositive solution for class " +
                           std::to_string(i + 1));
    }
    exit_flow += rho[i] * routing[i + 1][0];
  }
  if (std::abs(exit_flow - nu) > 1e-10 * std::max(1.0, nu)) {
    throw NumericalError("traffic equations inconsistent: exit flow " + std::to_string(exit_flow) +
                         " != nu " + std::to_string(nu));
  }
  return rho;
}

OccupancyDistribution solve_whittle(const WhittleRates& whittle, const LatticeBox& box) {
  const std::vector<double> rho = solve_traffic_equations(whittle.routing, whittle.nu);
  if (box.num_classes() != rho.size()) throw ConfigError("truncation box has wrong dimension");
  std::vector<double> log_rho;
  for (double r : rho) log_rho.push_back(std::log(r));
  std::map<StateVector, double> log_weights;
  for (std::size_t s = 0; s < box.size(); ++s) {
    StateVector n = box.state_at(s);
    const double lp = whittle.phi.log_value(n);
    if (!std::isfinite(lp)) throw ConfigError("Phi must be strictly positive on the box");
    double lw = lp;
    for (std::size_t k = 0; k < rho.size(); ++k) lw += n[k] * log_rho[k];
    log_weights.emplace(std::move(n), lw);
  }
  OccupancyDistribution out = normalize_log_weights(rho.size(), log_weights);
  for (const auto& [n, p] : out.mass) {
    if (box.on_upper_face(n)) out.boundary_mass += p;
  }
  return out;
}

OccupancyDistribution solve_loss(const LossRates& loss, std::size_t num_classes) {
  if (loss.nu.size() != num_classes || loss.sigma.size() != num_classes)
    throw ConfigError("loss model needs one nu and one sigma per class");
  std::vector<double> log_kappa(num_classes);
  for (std::size_t k = 0; k < num_classes; ++k) {
    if (!(loss.sigma[k] > 0.0)) throw ConfigError("sigma_i must be positive");
    if (!(loss.nu[k] >= 0.0)) throw ConfigError("nu_i must be nonnegative");
    log_kappa[k] = std::log(loss.nu[k] / loss.sigma[k]);
  }
  const std::vector<StateVector> members = loss.admissible.enumerate(num_classes);
  if (members.empty()) throw ConfigError("admissible set A is empty");
  std::map<StateVector, double> log_weights;
  for (const auto& n : members) {
    if (n.size() != num_classes) throw ConfigError("admissible state has wrong dimension");
    double lw = 0.0;
    for (std::size_t k = 0; k < num_classes; ++k) {
      if (n[k] == 0) continue;
      lw += n[k] * log_kappa[k] - std::lgamma(n[k] + 1.0);
    }
    log_weights.emplace(n, lw);
  }
  return normalize_log_weights(num_classes, log_weights);
}

OccupancyDistribution ctmc_oracle(const NetworkSpec& spec, const LatticeBox& box) {
  const std::size_t N = spec.num_classes;
  if (box.num_classes() != N) throw ConfigError("truncation box has wrong dimension");
  if (box.size() > kMaxOracleStates) {
    throw ConfigError("box has " + std::to_string(box.size()) + " states; the oracle accepts at most " +
                      std::to_string(kMaxOracleStates));
  }
  const std::size_t S = box.size();
  std::vector<std::vector<std::pair<std::size_t, double>>> adj(S);
  std::vector<double> out_rate(S, 0.0);
  std::vector<char> leaks(S, 0);
  for (std::size_t s = 0; s < S; ++s) {
    const StateVector n = box.state_at(s);
    const RateMatrix m = rates_at(spec, n);
    for (ClassIndex i = 0; i <= N; ++i) {
      if (i != kExterior && n.count(i) == 0) continue;
      for (ClassIndex j = 0; j <= N; ++j) {
        if (i == j) continue;  // no occupancy change
        const double r = m(i, j);
        if (!(r >= 0.0) || !std::isfinite(r))
          throw ConfigError("invalid rate at " + n.to_string());
        if (r == 0.0) continue;
        const StateVector target = transition(n, i, j);
        if (!box.contains(target)) {
          leaks[s] = 1;
          continue;
        }
        adj[s].emplace_back(box.index_of(target), r);
        out_rate[s] += r;
      }
    }
  }

  int num_components = 0;
  const std::vector<int> comp = strongly_connected_components(adj, num_components);
  std::vector<char> closed(static_cast<std::size_t>(num_components), 1);
  for (std::size_t s = 0; s < S; ++s) {
    for (const auto& [t, r] : adj[s]) {
      if (comp[t] != comp[s]) closed[static_cast<std::size_t>(comp[s])] = 0;
    }
  }
  int closed_count = 0;
  int closed_id = -1;
  for (int c = 0; c < num_components; ++c) {
    if (closed[static_cast<std::size_t>(c)]) {
      ++closed_count;
      closed_id = c;
    }
  }
  if (closed_count != 1) {
    throw NumericalError("reducible chain on the box: " + std::to_string(closed_count) +
                         " closed communicating classes");
  }

  std::vector<std::size_t> members;
  std::vector<Eigen::Index> local(S, -1);
  for (std::size_t s = 0; s < S; ++s) {
    if (comp[s] == closed_id) {
      local[s] = static_cast<Eigen::Index>(members.size());
      members.push_back(s);
    }
  }
  const auto M = static_cast<Eigen::Index>(members.size());
  Eigen::VectorXd x(M);
  if (M == 1) {
    x(0) = 1.0;
  } else {
    // Q^T x = 0 with the first equation replaced by sum(x) = 1.
    std::vector<Eigen::Triplet<double>> triplets;
    for (std::size_t s : members) {
      const Eigen::Index col = local[s];
      if (col != 0) triplets.emplace_back(col, col, -out_rate[s]);
      for (const auto& [t, r] : adj[s]) {
        const Eigen::Index row = local[t];
        if (row > 0) triplets.emplace_back(row, col, r);
      }
    }
    for (Eigen::Index c = 0; c < M; ++c) triplets.emplace_back(0, c, 1.0);
    Eigen::SparseMatrix<double> q(M, M);
    q.setFromTriplets(triplets.begin(), triplets.end());
    q.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(q);
    if (lu.info() != Eigen::Success) throw NumericalError("generator factorization failed");
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(M);
    rhs(0) = 1.0;
    x = lu.solve(rhs);
    if (lu.info() != Eigen::Success) throw NumericalError("generator solve failed");
  }

  OccupancyDistribution out;
  out.num_classes = N;
  double sum = 0.0;
  for (Eigen::Index k = 0; k < M; ++k) sum += std::max(0.0, x(k));
  for (std::size_t s = 0; s < S; ++s) {
    const double p = local[s] >= 0 ? std::max(0.0, x(local[s])) / sum : 0.0;
    out.mass[box.state_at(s)] = p;
    if (leaks[s]) out.boundary_mass += p;
  }
  return out;
}

FinitenessCheck check_finiteness(const NetworkSpec& spec, const OccupancyDistribution& pi) {
  FinitenessCheck check;
  double max_arrival = 0.0;
  for (const auto& [n, p] : pi.mass) {
    double arrivals = 0.0;
    for (ClassIndex i = 1; i <= spec.num_classes; ++i) arrivals += rate(spec, n, kExterior, i);
    check.arrival_flux += p * arrivals;
    max_arrival = std::max(max_arrival, arrivals);
  }
  check.tail_estimate = pi.boundary_mass * max_arrival;
  check.pass = check.tail_estimate <= 1e-6 * check.arrival_flux || check.tail_estimate == 0.0;
  return check;
}

OccupancyDistribution solve_analytic(const NetworkSpec& spec, const std::vector<int>& truncation) {
  auto need_box = [&]() {
    if (truncation.size() != spec.num_classes)
      throw ConfigError("truncation needs one bound per class");
    return LatticeBox(truncation);
  };
  if (const auto* s = std::get_if<SingleClassRates>(&spec.rates)) {
    if (truncation.size() != 1) throw ConfigError("single-class truncation needs one bound");
    return solve_single_class(s->arrival, s->service, truncation[0]);
  }
  if (const auto* w = std::get_if<WhittleRates>(&spec.rates)) return solve_whittle(*w, need_box());
  if (const auto* l = std::get_if<LossRates>(&spec.rates)) return solve_loss(*l, spec.num_classes);
  const auto& t = std::get<TabulatedRates>(spec.rates);
  return ctmc_oracle(spec, truncation.empty() ? t.box : need_box());
}

}  // namespace insens
