#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "insens/distributions.hpp"
#include "insens/state.hpp"

namespace insens {

// A function of a single count n: explicit values for n < values.size(),
// then tail_constant + tail_slope * n. Covers alpha * I(n < C), n * beta,
// min(n, m) * beta and constants.
struct RateSequence {
  std::vector<double> values;
  double tail_constant = 0.0;
  double tail_slope = 0.0;

  double at(int n) const;

  static RateSequence constant(double c) { return {{}, c, 0.0}; }
  static RateSequence linear(double slope) { return {{}, 0.0, slope}; }
};

// Square (N+1) x (N+1) matrix of rates phi_ij(n), row i = source class.
class RateMatrix {
 public:
  RateMatrix() = default;
  explicit RateMatrix(std::size_t num_classes)
      : dim_(num_classes + 1), data_(dim_ * dim_, 0.0) {}

  std::size_t dim() const noexcept { return dim_; }
  double& operator()(ClassIndex i, ClassIndex j) { return data_[i * dim_ + j]; }
  double operator()(ClassIndex i, ClassIndex j) const { return data_[i * dim_ + j]; }
  // phi_i(n) = sum_j phi_ij(n).
  double row_sum(ClassIndex i) const;

 private:
  std::size_t dim_ = 0;
  std::vector<double> data_;
};

// Rates tabulated on an explicit box; states inside the box with no entry
// carry all-zero rates, states outside the box are a DomainError.
struct TabulatedRates {
  LatticeBox box;
  std::map<StateVector, RateMatrix> table;
};

// alpha(n) arrivals and total service rate beta(n).
struct SingleClassRates {
  RateSequence arrival;
  RateSequence service;
};

// Positive function on the lattice, stored through its logarithm.
class BalanceFunction {
 public:
  // Phi == 1.
  static BalanceFunction constant();
  // Phi(n) = prod_i lambda_i^{n_i}; yields Jackson networks.
  static BalanceFunction product(std::vector<double> lambda);
  // Explicit values on a box, as (state, value) pairs covering the box.
  static BalanceFunction tabulated(LatticeBox box, std::map<StateVector, double> values);
  // Arbitrary log Phi; not serializable.
  static BalanceFunction custom(std::function<double(const StateVector&)> log_phi,
                                std::string description);

  double log_value(const StateVector& n) const { return log_phi_(n); }
  double value(const StateVector& n) const;

  enum class Kind { Constant, Product, Tabulated, Custom };
  Kind kind() const noexcept { return kind_; }
  const std::vector<double>& lambda() const noexcept { return lambda_; }
  const std::optional<LatticeBox>& box() const noexcept { return box_; }
  const std::map<StateVector, double>& table() const noexcept { return table_; }
  const std::string& description() const noexcept { return description_; }

 private:
  Kind kind_ = Kind::Constant;
  std::function<double(const StateVector&)> log_phi_;
  std::vector<double> lambda_;
  std::optional<LatticeBox> box_;
  std::map<StateVector, double> table_;
  std::string description_;
};

struct WhittleRates {
  BalanceFunction phi = BalanceFunction::constant();
  // (N+1) x (N+1) routing matrix P, row/column 0 is the exterior.
  std::vector<std::vector<double>> routing;
  double nu = 0.0;
};

// sum_i coeffs[i] * n_i <= capacity
struct LinearConstraint {
  std::vector<double> coeffs;
  double capacity = 0.0;
};

class AdmissibleSet {
 public:
  static AdmissibleSet from_states(std::set<StateVector> states);
  static AdmissibleSet from_constraints(std::vector<LinearConstraint> constraints);

  bool contains(const StateVector& n) const;
  bool is_explicit() const noexcept { return explicit_; }
  const std::set<StateVector>& states() const noexcept { return states_; }
  const std::vector<LinearConstraint>& constraints() const noexcept { return constraints_; }

  // All members; throws ConfigError when the set is unbounded.
  std::vector<StateVector> enumerate(std::size_t num_classes) const;
  // Smallest box containing every member.
  LatticeBox bounding_box(std::size_t num_classes) const;

 private:
  bool explicit_ = true;
  std::set<StateVector> states_;
  std::vector<LinearConstraint> constraints_;
};

struct LossRates {
  AdmissibleSet admissible;
  std::vector<double> nu;
  std::vector<double> sigma;
};

using RateModel = std::variant<TabulatedRates, SingleClassRates, WhittleRates, LossRates>;

enum class Discipline { ProcessorSharing, LifoPreemptiveResume, Fifo };

std::string to_string(Discipline d);
Discipline parse_discipline(const std::string& name);

struct NetworkSpec {
  std::size_t num_classes = 1;
  RateModel rates;
  Discipline discipline = Discipline::ProcessorSharing;
  // mu^i for classes 1..N, stored at index i - 1; each of unit mean.
  std::vector<WorkloadDistribution> workloads;
};

std::string rate_model_name(const RateModel& model);

// phi_ij(n). Throws DomainError for indices above N or a state outside a
// tabulated box.
double rate(const NetworkSpec& spec, const StateVector& n, ClassIndex i, ClassIndex j);

// All phi_ij(n) at once; equivalent to calling rate() for every pair.
RateMatrix rates_at(const NetworkSpec& spec, const StateVector& n);

struct Violation {
  std::optional<StateVector> state;  // empty for structural rules
  std::optional<ClassIndex> i;
  std::optional<ClassIndex> j;
  std::string rule;

  std::string describe() const;
};

// Checks every structural constraint of the spec and the rate invariants
// at each probe state. Violations are returned, never thrown.
std::vector<Violation> validate_spec(const NetworkSpec& spec,
                                     const std::vector<StateVector>& probe_states);

}  // namespace insens
