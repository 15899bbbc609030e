#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <variant>
#include <vector>

#include "insens/balance.hpp"
#include "insens/distributions.hpp"
#include "insens/model.hpp"
#include "insens/rng.hpp"
#include "insens/state.hpp"

namespace insens {

// Occupancy plus the residual workload of every individual. residuals[k]
// belongs to class k + 1 and is kept in arrival order.
struct SystemState {
  StateVector counts;
  std::vector<std::vector<double>> residuals;
  double clock = 0.0;
};

struct Event {
  enum class Kind { Arrival, Completion };
  Kind kind = Kind::Arrival;
  // Arrival: destination class. Completion: class of the finishing individual.
  ClassIndex cls = 0;
  // Completion only: position in residuals[cls - 1] and routing target.
  std::size_t individual = 0;
  ClassIndex route = kExterior;
  double delay = 0.0;  // time from the current clock
  double time = 0.0;   // absolute event time
};

struct EmptyStart {};
struct StationaryStart {
  OccupancyDistribution pi;
};
using Initialization = std::variant<EmptyStart, StationaryStart>;

struct SimConfig {
  std::uint64_t seed = 1;
  std::uint64_t max_events = 1'000'000;
  // Unset: 10% of max_events for an empty start, 0 for a stationary one.
  std::optional<std::uint64_t> warmup_events;
  // Mean number of events between residual snapshots; 0 disables them.
  std::uint64_t snapshot_interval = 50;
  // Arrivals (resp. departures) between recorded epoch profiles; 0 disables.
  std::uint64_t epoch_interval = 50;
  // Overrides the mean time between snapshots; otherwise estimated from a
  // short pilot run so that one snapshot falls per snapshot_interval events.
  std::optional<double> snapshot_spacing;
  Initialization init = EmptyStart{};

  std::uint64_t effective_warmup() const;
};

// Residual workloads of a state, flattened class by class.
struct ResidualProfile {
  StateVector state;
  std::vector<double> values;

  // Residuals of class i (1-based).
  std::vector<double> of_class(ClassIndex i) const;
};

// Profile recorded at an arrival (pre-arrival state, pre-existing
// residuals) or a departure (post-departure state, remaining residuals).
struct EpochProfile {
  ResidualProfile profile;
  ClassIndex cls = 0;
};

struct EventCounts {
  std::uint64_t arrivals = 0;
  std::uint64_t completions = 0;
  std::uint64_t departures = 0;  // completions routed to the exterior
  std::uint64_t internal_moves = 0;
  std::uint64_t self_moves = 0;
};

struct SimStats {
  std::size_t num_classes = 0;
  std::map<StateVector, double> time_weighted_occupancy;
  double horizon = 0.0;
  std::uint64_t events_processed = 0;  // including warmup
  std::uint64_t events_recorded = 0;   // after warmup
  bool absorbed = false;  // stopped early in a state with no pending event
  double snapshot_spacing = 0.0;
  std::vector<ResidualProfile> residual_snapshots;
  std::vector<EpochProfile> arrival_epoch_profiles;
  std::vector<EpochProfile> departure_epoch_profiles;
  EventCounts counts;
  SimConfig config;
};

// Sums occupancy times and counters, concatenates samples.
void merge(SimStats& into, const SimStats& from);

SystemState init_state(const NetworkSpec& spec, const SimConfig& config, Rng& rng);

// Next arrival or completion from `state`, or nullopt when every rate is
// zero. Exponential arrival clocks are drawn per class in index order;
// completion routing draws one more uniform.
std::optional<Event> next_event(const SystemState& state, const NetworkSpec& spec, Rng& rng);

// Drains residuals over event.delay, then applies the jump. Fresh
// workloads are drawn from rng.
void apply_event(SystemState& state, const Event& event, const NetworkSpec& spec, Rng& rng);

SimStats run(const NetworkSpec& spec, const SimConfig& config);

// Fixed-population variant: no arrivals, and each completion is replaced in
// place by an individual with a fresh workload of the same class.
SimStats run_modified(const NetworkSpec& spec, const StateVector& fixed_n, const SimConfig& config);

}  // namespace insens
