#include "insens/model.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

#include "insens/error.hpp"

namespace insens {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr double kConstraintSlack = 1e-9;

void check_index(const NetworkSpec& spec, ClassIndex i) {
  if (i > spec.num_classes) {
    throw DomainError("class index " + std::to_string(i) + " out of range 0.." +
                      std::to_string(spec.num_classes));
  }
}

double whittle_rate(const WhittleRates& w, const StateVector& n, ClassIndex i, ClassIndex j) {
  if (i == kExterior) return j == kExterior ? 0.0 : w.nu * w.routing[0][j];
  if (n.count(i) == 0) return 0.0;
  const double p = w.routing[i][j];
  if (p == 0.0) return 0.0;
  const double ratio = std::exp(w.phi.log_value(transition(n, i, kExterior)) - w.phi.log_value(n));
  return ratio * p;
}

double loss_rate(const LossRates& l, const StateVector& n, ClassIndex i, ClassIndex j) {
  if (i == kExterior) {
    if (j == kExterior) return 0.0;
    return l.admissible.contains(transition(n, kExterior, j)) ? l.nu[j - 1] : 0.0;
  }
  if (j == kExterior) return l.sigma[i - 1] * n.count(i);
  return 0.0;
}

}  // namespace

double RateSequence::at(int n) const {
  if (n < 0) throw DomainError("rate sequence queried at a negative count");
  if (static_cast<std::size_t>(n) < values.size()) return values[static_cast<std::size_t>(n)];
  return tail_constant + tail_slope * n;
}

double RateMatrix::row_sum(ClassIndex i) const {
  double s = 0.0;
  for (ClassIndex j = 0; j < dim_; ++j) s += (*this)(i, j);
  return s;
}

BalanceFunction BalanceFunction::constant() {
  BalanceFunction f;
  f.kind_ = Kind::Constant;
  f.log_phi_ = [](const StateVector&) { return 0.0; };
  f.description_ = "constant";
  return f;
}

BalanceFunction BalanceFunction::product(std::vector<double> lambda) {
  for (double l : lambda) {
    if (!(l > 0.0) || !std::isfinite(l))
      throw ConfigError("product balance function needs positive lambda");
  }
  BalanceFunction f;
  f.kind_ = Kind::Product;
  f.lambda_ = lambda;
  std::vector<double> logs;
  for (double l : lambda) logs.push_back(std::log(l));
  f.log_phi_ = [logs](const StateVector& n) {
    if (n.size() != logs.size()) throw DomainError("balance function dimension mismatch");
    double s = 0.0;
    for (std::size_t k = 0; k < logs.size(); ++k) s += n[k] * logs[k];
    return s;
  };
  f.description_ = "product";
  return f;
}

BalanceFunction BalanceFunction::tabulated(LatticeBox box, std::map<StateVector, double> values) {
  BalanceFunction f;
  f.kind_ = Kind::Tabulated;
  f.box_ = box;
  f.table_ = values;
  auto logs = std::make_shared<std::map<StateVector, double>>();
  for (const auto& [state, v] : values) {
    (*logs)[state] = v > 0.0 ? std::log(v) : -std::numeric_limits<double>::infinity();
  }
  f.log_phi_ = [box, logs](const StateVector& n) {
    if (!box.contains(n))
      throw DomainError("balance function queried outside its table at " + n.to_string());
    auto it = logs->find(n);
    if (it == logs->end())
      throw DomainError("balance function has no entry for " + n.to_string());
    return it->second;
  };
  f.description_ = "tabulated";
  return f;
}

BalanceFunction BalanceFunction::custom(std::function<double(const StateVector&)> log_phi,
                                        std::string description) {
  BalanceFunction f;
  f.kind_ = Kind::Custom;
  f.log_phi_ = std::move(log_phi);
  f.description_ = std::move(description);
  return f;
}

double BalanceFunction::value(const StateVector& n) const { return std::exp(log_phi_(n)); }

AdmissibleSet AdmissibleSet::from_states(std::set<StateVector> states) {
  AdmissibleSet a;
  a.explicit_ = true;
  a.states_ = std::move(states);
  return a;
}

AdmissibleSet AdmissibleSet::from_constraints(std::vector<LinearConstraint> constraints) {
  AdmissibleSet a;
  a.explicit_ = false;
  a.constraints_ = std::move(constraints);
  return a;
}

bool AdmissibleSet::contains(const StateVector& n) const {
  if (explicit_) return states_.count(n) > 0;
  for (const auto& c : constraints_) {
    if (c.coeffs.size() != n.size()) throw DomainError("constraint dimension mismatch");
    double load = 0.0;
    for (std::size_t k = 0; k < n.size(); ++k) load += c.coeffs[k] * n[k];
    if (load > c.capacity + kConstraintSlack) return false;
  }
  return true;
}

LatticeBox AdmissibleSet::bounding_box(std::size_t num_classes) const {
  std::vector<int> upper(num_classes, 0);
  if (explicit_) {
    for (const auto& s : states_) {
      if (s.size() != num_classes) throw ConfigError("admissible state has wrong dimension");
      for (std::size_t k = 0; k < num_classes; ++k) upper[k] = std::max(upper[k], s[k]);
    }
    return LatticeBox(upper);
  }
  for (std::size_t k = 0; k < num_classes; ++k) {
    double bound = std::numeric_limits<double>::infinity();
    for (const auto& c : constraints_) {
      if (c.coeffs.size() != num_classes) throw ConfigError("constraint has wrong dimension");
      if (c.coeffs[k] < 0.0)
        throw ConfigError("constraints with negative coefficients cannot be enumerated");
      if (c.coeffs[k] > 0.0)
        bound = std::min(bound, std::floor((c.capacity + kConstraintSlack) / c.coeffs[k]));
    }
    if (!std::isfinite(bound))
      throw ConfigError("admissible set is unbounded in class " + std::to_string(k + 1));
    if (bound < 0.0) throw ConfigError("admissible set excludes the empty state");
    upper[k] = static_cast<int>(bound);
  }
  return LatticeBox(upper);
}

std::vector<StateVector> AdmissibleSet::enumerate(std::size_t num_classes) const {
  if (explicit_) return {states_.begin(), states_.end()};
  const LatticeBox box = bounding_box(num_classes);
  if (box.size() > 10'000'000) throw ConfigError("admissible set too large to enumerate");
  std::vector<StateVector> out;
  for (std::size_t s = 0; s < box.size(); ++s) {
    StateVector n = box.state_at(s);
    if (contains(n)) out.push_back(std::move(n));
  }
  return out;
}

std::string to_string(Discipline d) {
  switch (d) {
    case Discipline::ProcessorSharing:
      return "ps";
    case Discipline::LifoPreemptiveResume:
      return "lifo-pr";
    case Discipline::Fifo:
      return "fifo";
  }
  return "?";
}

Discipline parse_discipline(const std::string& name) {
  if (name == "ps" || name == "processor-sharing") return Discipline::ProcessorSharing;
  if (name == "lifo-pr" || name == "lifo") return Discipline::LifoPreemptiveResume;
  if (name == "fifo") return Discipline::Fifo;
  throw ConfigError("unknown discipline '" + name + "' (expected ps, lifo-pr or fifo)");
}

std::string rate_model_name(const RateModel& model) {
  return std::visit(overloaded{
                        [](const TabulatedRates&) { return std::string("tabulated"); },
                        [](const SingleClassRates&) { return std::string("single-class"); },
                        [](const WhittleRates&) { return std::string("whittle"); },
                        [](const LossRates&) { return std::string("loss"); },
                    },
                    model);
}

double rate(const NetworkSpec& spec, const StateVector& n, ClassIndex i, ClassIndex j) {
  check_index(spec, i);
  check_index(spec, j);
  if (n.size() != spec.num_classes) throw DomainError("state has wrong dimension");
  if (i == kExterior && j == kExterior) return 0.0;
  return std::visit(
      overloaded{
          [&](const TabulatedRates& t) {
            if (!t.box.contains(n))
              throw DomainError("state " + n.to_string() + " outside tabulated box");
            auto it = t.table.find(n);
            return it == t.table.end() ? 0.0 : it->second(i, j);
          },
          [&](const SingleClassRates& s) {
            const int count = n[0];
            if (i == kExterior) return s.arrival.at(count);
            if (j == kExterior) return s.service.at(count);
            return 0.0;
          },
          [&](const WhittleRates& w) { return whittle_rate(w, n, i, j); },
          [&](const LossRates& l) { return loss_rate(l, n, i, j); },
      },
      spec.rates);
}

RateMatrix rates_at(const NetworkSpec& spec, const StateVector& n) {
  RateMatrix m(spec.num_classes);
  if (const auto* t = std::get_if<TabulatedRates>(&spec.rates)) {
    if (!t->box.contains(n))
      throw DomainError("state " + n.to_string() + " outside tabulated box");
    auto it = t->table.find(n);
    if (it != t->table.end()) m = it->second;
    m(kExterior, kExterior) = 0.0;
    return m;
  }
  for (ClassIndex i = 0; i <= spec.num_classes; ++i) {
    for (ClassIndex j = 0; j <= spec.num_classes; ++j) m(i, j) = rate(spec, n, i, j);
  }
  return m;
}

std::string Violation::describe() const {
  std::ostringstream os;
  os << rule;
  if (state) os << " at n=" << state->to_string();
  if (i) os << " i=" << *i;
  if (j) os << " j=" << *j;
  return os.str();
}

namespace {

void add(std::vector<Violation>& out, std::string rule, std::optional<StateVector> n = {},
         std::optional<ClassIndex> i = {}, std::optional<ClassIndex> j = {}) {
  out.push_back(Violation{std::move(n), i, j, std::move(rule)});
}

void check_structure(const NetworkSpec& spec, std::vector<Violation>& out) {
  const std::size_t N = spec.num_classes;
  if (N == 0) add(out, "num_classes must be positive");
  if (spec.discipline != Discipline::ProcessorSharing && N != 1)
    add(out, "LIFO-PR and FIFO disciplines require a single class");
  if (spec.workloads.size() != N) add(out, "one workload distribution per class is required");
  for (std::size_t k = 0; k < spec.workloads.size(); ++k) {
    if (std::abs(spec.workloads[k].mean() - 1.0) > 1e-12)
      add(out, "workload mean must be 1", {}, k + 1);
  }
  std::visit(
      overloaded{
          [&](const TabulatedRates& t) {
            if (t.box.num_classes() != N) add(out, "tabulated box has wrong dimension");
            for (const auto& [state, m] : t.table) {
              if (m.dim() != N + 1) add(out, "rate matrix must be (N+1)x(N+1)", state);
            }
          },
          [&](const SingleClassRates&) {
            if (N != 1) add(out, "single-class rate model requires num_classes = 1");
          },
          [&](const WhittleRates& w) {
            if (!(w.nu >= 0.0) || !std::isfinite(w.nu)) add(out, "nu must be nonnegative");
            if (w.routing.size() != N + 1) {
              add(out, "routing matrix must be (N+1)x(N+1)");
              return;
            }
            for (ClassIndex i = 0; i <= N; ++i) {
              if (w.routing[i].size() != N + 1) {
                add(out, "routing matrix must be (N+1)x(N+1)", {}, i);
                return;
              }
              double row = 0.0;
              for (ClassIndex j = 0; j <= N; ++j) {
                if (!(w.routing[i][j] >= 0.0)) add(out, "routing entries must be nonnegative", {}, i, j);
                row += w.routing[i][j];
              }
              if (std::abs(row - 1.0) > 1e-12) add(out, "routing rows must sum to 1", {}, i);
            }
            if (w.routing[0][0] != 0.0) add(out, "p_00 must be 0", {}, 0, 0);
          },
          [&](const LossRates& l) {
            if (l.nu.size() != N || l.sigma.size() != N) {
              add(out, "loss model needs one nu and one sigma per class");
              return;
            }
            for (std::size_t k = 0; k < N; ++k) {
              if (!(l.nu[k] > 0.0)) add(out, "nu_i must be strictly positive", {}, k + 1);
              if (!(l.sigma[k] > 0.0)) add(out, "sigma_i must be strictly positive", {}, k + 1);
            }
            if (l.admissible.is_explicit()) {
              for (const auto& s : l.admissible.states()) {
                if (s.size() != N) add(out, "admissible state has wrong dimension", s);
              }
            } else {
              for (const auto& c : l.admissible.constraints()) {
                if (c.coeffs.size() != N) add(out, "constraint has wrong dimension");
              }
            }
          },
      },
      spec.rates);
}

void check_state(const NetworkSpec& spec, const StateVector& n, std::vector<Violation>& out) {
  const std::size_t N = spec.num_classes;
  if (n.size() != N) {
    add(out, "probe state has wrong dimension", n);
    return;
  }
  if (const auto* t = std::get_if<TabulatedRates>(&spec.rates)) {
    if (!t->box.contains(n)) {
      add(out, "state outside tabulated box", n);
      return;
    }
    auto it = t->table.find(n);
    if (it != t->table.end() && it->second.dim() == N + 1 && it->second(0, 0) != 0.0)
      add(out, "phi_00 must be 0", n, 0, 0);
  }
  if (const auto* w = std::get_if<WhittleRates>(&spec.rates)) {
    try {
      const double lp = w->phi.log_value(n);
      if (!std::isfinite(lp)) add(out, "Phi must be strictly positive", n);
    } catch (const DomainError& e) {
      add(out, std::string("Phi not evaluable: ") + e.what(), n);
      return;
    }
  }
  if (const auto* l = std::get_if<LossRates>(&spec.rates)) {
    if (l->admissible.contains(n)) {
      for (ClassIndex i = 1; i <= N; ++i) {
        if (n.count(i) >= 1 && !l->admissible.contains(transition(n, i, kExterior)))
          add(out, "A must be closed under removals", n, i);
      }
    }
  }

  RateMatrix m;
  try {
    m = rates_at(spec, n);
  } catch (const Error& e) {
    add(out, std::string("rates not evaluable: ") + e.what(), n);
    return;
  }
  for (ClassIndex i = 0; i <= N; ++i) {
    for (ClassIndex j = 0; j <= N; ++j) {
      const double r = m(i, j);
      if (!(r >= 0.0) || !std::isfinite(r)) add(out, "rates must be nonnegative and finite", n, i, j);
    }
  }
  for (ClassIndex i = 1; i <= N; ++i) {
    if (n.count(i) == 0) {
      for (ClassIndex j = 0; j <= N; ++j) {
        if (m(i, j) != 0.0) add(out, "phi_ij=0 when n_i=0", n, i, j);
      }
    } else if (!(m.row_sum(i) > 0.0)) {
      add(out, "phi_i>0 iff n_i>0", n, i);
    }
  }
}

}  // namespace

std::vector<Violation> validate_spec(const NetworkSpec& spec,
                                     const std::vector<StateVector>& probe_states) {
  std::vector<Violation> out;
  check_structure(spec, out);
  if (!out.empty()) return out;
  for (const auto& n : probe_states) check_state(spec, n, out);
  return out;
}

}  // namespace insens
