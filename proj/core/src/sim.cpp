#include "insens/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "insens/error.hpp"

namespace insens {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kRoundOff = 1e-12;
constexpr std::uint64_t kSnapshotStream = 1;
constexpr std::uint64_t kPilotStream = 2;
constexpr std::uint64_t kPilotEvents = 20'000;

// Per-individual drain rate of individual k of class i in state counts.
struct DrainPlan {
  const NetworkSpec& spec;
  const RateMatrix& rates;
  const StateVector& counts;

  double rate_of(ClassIndex i, std::size_t k) const {
    const int n_i = counts.count(i);
    if (n_i == 0) return 0.0;
    const double total = rates.row_sum(i);
    switch (spec.discipline) {
      case Discipline::ProcessorSharing:
        return total / n_i;
      case Discipline::LifoPreemptiveResume:
        return k + 1 == static_cast<std::size_t>(n_i) ? total : 0.0;
      case Discipline::Fifo:
        return k == 0 ? total : 0.0;
    }
    return 0.0;
  }
};

struct CompletionCandidate {
  ClassIndex cls = 0;
  std::size_t individual = 0;
  double delay = kInf;
};

CompletionCandidate earliest_completion(const SystemState& state, const NetworkSpec& spec,
                                        const RateMatrix& rates) {
  CompletionCandidate best;
  const DrainPlan plan{spec, rates, state.counts};
  for (ClassIndex i = 1; i <= spec.num_classes; ++i) {
    const auto& res = state.residuals[i - 1];
    for (std::size_t k = 0; k < res.size(); ++k) {
      const double r = plan.rate_of(i, k);
      if (!(r > 0.0)) continue;
      const double delay = res[k] / r;
      if (delay < best.delay) best = {i, k, delay};
    }
  }
  return best;
}

ClassIndex draw_route(const RateMatrix& rates, ClassIndex i, Rng& rng) {
  const double total = rates.row_sum(i);
  const double target = rng.uniform() * total;
  double cum = 0.0;
  ClassIndex last_positive = kExterior;
  for (ClassIndex j = 0; j < rates.dim(); ++j) {
    const double r = rates(i, j);
    if (r <= 0.0) continue;
    last_positive = j;
    cum += r;
    if (target < cum) return j;
  }
  return last_positive;
}

std::optional<Event> next_event_with(const SystemState& state, const NetworkSpec& spec,
                                     const RateMatrix& rates, Rng& rng, bool arrivals) {
  const CompletionCandidate done = earliest_completion(state, spec, rates);
  double arrival_delay = kInf;
  ClassIndex arrival_cls = 0;
  if (arrivals) {
    for (ClassIndex j = 1; j <= spec.num_classes; ++j) {
      const double r = rates(kExterior, j);
      if (!(r > 0.0)) continue;
      const double d = -std::log(rng.uniform()) / r;
      if (d < arrival_delay) {
        arrival_delay = d;
        arrival_cls = j;
      }
    }
  }
  if (!std::isfinite(done.delay) && !std::isfinite(arrival_delay)) return std::nullopt;
  Event ev;
  if (done.delay <= arrival_delay) {
    ev.kind = Event::Kind::Completion;
    ev.cls = done.cls;
    ev.individual = done.individual;
    ev.delay = done.delay;
    ev.route = draw_route(rates, done.cls, rng);
  } else {
    ev.kind = Event::Kind::Arrival;
    ev.cls = arrival_cls;
    ev.delay = arrival_delay;
  }
  ev.time = state.clock + ev.delay;
  return ev;
}

void drain(SystemState& state, const NetworkSpec& spec, const RateMatrix& rates, double dt,
           const Event* completing) {
  const DrainPlan plan{spec, rates, state.counts};
  for (ClassIndex i = 1; i <= spec.num_classes; ++i) {
    auto& res = state.residuals[i - 1];
    for (std::size_t k = 0; k < res.size(); ++k) {
      const double r = plan.rate_of(i, k);
      if (r == 0.0) continue;
      if (completing && completing->kind == Event::Kind::Completion && completing->cls == i &&
          completing->individual == k) {
        res[k] = 0.0;
        continue;
      }
      const double before = res[k];
      double after = before - r * dt;
      if (after <= 0.0) {
        if (after < -kRoundOff * std::max(1.0, before)) {
          throw SimulationError("residual workload drained below zero: internal inconsistency");
        }
        after = 0.0;
      }
      res[k] = after;
    }
  }
}

ResidualProfile profile_of(const SystemState& state) {
  ResidualProfile p{state.counts, {}};
  for (const auto& res : state.residuals) p.values.insert(p.values.end(), res.begin(), res.end());
  return p;
}

// Profile at clock + dt without touching the state.
ResidualProfile drained_profile(const SystemState& state, const NetworkSpec& spec,
                                const RateMatrix& rates, double dt) {
  SystemState copy = state;
  drain(copy, spec, rates, dt, nullptr);
  return profile_of(copy);
}

void apply_with(SystemState& state, const Event& event, const NetworkSpec& spec,
                const RateMatrix& rates, Rng& rng) {
  drain(state, spec, rates, event.delay, &event);
  state.clock += event.delay;
  if (event.kind == Event::Kind::Arrival) {
    state.residuals[event.cls - 1].push_back(spec.workloads[event.cls - 1].sample(rng));
    state.counts = transition(state.counts, kExterior, event.cls);
    return;
  }
  auto& res = state.residuals[event.cls - 1];
  if (event.individual >= res.size()) throw SimulationError("completion of a missing individual");
  res.erase(res.begin() + static_cast<std::ptrdiff_t>(event.individual));
  state.counts = transition(state.counts, event.cls, event.route);
  if (event.route != kExterior) {
    state.residuals[event.route - 1].push_back(spec.workloads[event.route - 1].sample(rng));
  }
}

void check_spec_shape(const NetworkSpec& spec) {
  if (spec.workloads.size() != spec.num_classes)
    throw ConfigError("one workload distribution per class is required");
  if (spec.discipline != Discipline::ProcessorSharing && spec.num_classes != 1)
    throw ConfigError("LIFO-PR and FIFO disciplines require a single class");
}

enum class Mode { Open, FixedPopulation };

class Engine {
 public:
  Engine(const NetworkSpec& spec, const SimConfig& config, Mode mode, Rng rng)
      : spec_(spec), config_(config), mode_(mode), rng_(std::move(rng)),
        sampler_(derive_seed(config.seed, kSnapshotStream)) {}

  SimStats run(SystemState state, double spacing) {
    SimStats stats;
    stats.num_classes = spec_.num_classes;
    stats.config = config_;
    stats.snapshot_spacing = spacing;
    const std::uint64_t warmup = config_.effective_warmup();
    if (config_.max_events <= warmup)
      throw ConfigError("max_events must exceed warmup_events");
    const StateVector fixed = state.counts;
    double next_snapshot = kInf;
    std::uint64_t arrivals_seen = 0;
    std::uint64_t departures_seen = 0;

    for (std::uint64_t k = 0; k < config_.max_events; ++k) {
      const bool recording = k >= warmup;
      if (recording && k == warmup && std::isfinite(spacing) && spacing > 0.0) {
        next_snapshot = state.clock + exponential(spacing);
      }
      const RateMatrix rates = rates_at(spec_, state.counts);
      const auto ev = next_event_with(state, spec_, rates, rng_, mode_ == Mode::Open);
      if (!ev) {
        stats.absorbed = true;
        break;
      }
      ++stats.events_processed;
      if (recording) {
        ++stats.events_recorded;
        stats.time_weighted_occupancy[state.counts] += ev->delay;
        stats.horizon += ev->delay;
        while (next_snapshot < ev->time) {
          stats.residual_snapshots.push_back(
              drained_profile(state, spec_, rates, next_snapshot - state.clock));
          next_snapshot += exponential(spacing);
        }
      }

      if (mode_ == Mode::FixedPopulation) {
        drain(state, spec_, rates, ev->delay, &*ev);
        state.clock += ev->delay;
        state.residuals[ev->cls - 1][ev->individual] = spec_.workloads[ev->cls - 1].sample(rng_);
        if (state.counts != fixed) throw SimulationError("occupancy changed in fixed-population run");
      } else {
        apply_with(state, *ev, spec_, rates, rng_);
      }
      if (!recording) continue;

      if (ev->kind == Event::Kind::Arrival) {
        ++stats.counts.arrivals;
        if (config_.epoch_interval && ++arrivals_seen % config_.epoch_interval == 0) {
          EpochProfile ep{profile_without_newest(state, ev->cls), ev->cls};
          stats.arrival_epoch_profiles.push_back(std::move(ep));
        }
        continue;
      }
      ++stats.counts.completions;
      if (mode_ == Mode::FixedPopulation) continue;
      if (ev->route == kExterior) {
        ++stats.counts.departures;
        if (config_.epoch_interval && ++departures_seen % config_.epoch_interval == 0) {
          stats.departure_epoch_profiles.push_back(EpochProfile{profile_of(state), ev->cls});
        }
      } else if (ev->route == ev->cls) {
        ++stats.counts.self_moves;
      } else {
        ++stats.counts.internal_moves;
      }
    }
    return stats;
  }

 private:
  double exponential(double mean) { return -std::log(sampler_.uniform()) * mean; }

  static ResidualProfile profile_without_newest(const SystemState& state, ClassIndex cls) {
    SystemState before = state;
    before.residuals[cls - 1].pop_back();
    before.counts = transition(state.counts, cls, kExterior);
    return profile_of(before);
  }

  const NetworkSpec& spec_;
  const SimConfig& config_;
  Mode mode_;
  Rng rng_;
  Rng sampler_;
};

SystemState fixed_population_start(const NetworkSpec& spec, const StateVector& fixed_n,
                                   const SimConfig& config, Rng& rng) {
  SystemState state;
  state.counts = fixed_n;
  state.residuals.assign(spec.num_classes, {});
  const bool stationary = std::holds_alternative<StationaryStart>(config.init);
  for (ClassIndex i = 1; i <= spec.num_classes; ++i) {
    const auto& mu = spec.workloads[i - 1];
    std::optional<EquilibriumDistribution> eq;
    if (stationary) eq.emplace(mu);
    for (int k = 0; k < fixed_n.count(i); ++k) {
      state.residuals[i - 1].push_back(eq ? eq->sample(rng) : mu.sample(rng));
    }
  }
  return state;
}

double pilot_spacing(const NetworkSpec& spec, const SimConfig& config, Mode mode,
                     const StateVector* fixed_n) {
  if (config.snapshot_interval == 0) return kInf;
  if (config.snapshot_spacing) return *config.snapshot_spacing;
  SimConfig pilot = config;
  pilot.seed = derive_seed(config.seed, kPilotStream);
  pilot.max_events = std::min<std::uint64_t>(config.max_events, kPilotEvents);
  pilot.warmup_events = std::holds_alternative<EmptyStart>(config.init) ? pilot.max_events / 10 : 0;
  pilot.snapshot_interval = 0;
  pilot.epoch_interval = 0;
  if (pilot.max_events <= *pilot.warmup_events) return kInf;
  Rng rng(pilot.seed);
  SystemState start = mode == Mode::Open ? init_state(spec, pilot, rng)
                                         : fixed_population_start(spec, *fixed_n, pilot, rng);
  Engine engine(spec, pilot, mode, std::move(rng));
  const SimStats stats = engine.run(std::move(start), kInf);
  if (stats.events_recorded == 0 || !(stats.horizon > 0.0)) return kInf;
  return static_cast<double>(config.snapshot_interval) * stats.horizon /
         static_cast<double>(stats.events_recorded);
}

}  // namespace

std::uint64_t SimConfig::effective_warmup() const {
  if (warmup_events) return *warmup_events;
  return std::holds_alternative<EmptyStart>(init) ? max_events / 10 : 0;
}

std::vector<double> ResidualProfile::of_class(ClassIndex i) const {
  std::size_t offset = 0;
  for (ClassIndex k = 1; k < i; ++k) offset += static_cast<std::size_t>(state.count(k));
  const auto begin = values.begin() + static_cast<std::ptrdiff_t>(offset);
  return {begin, begin + state.count(i)};
}

void merge(SimStats& into, const SimStats& from) {
  if (into.num_classes == 0) into.num_classes = from.num_classes;
  for (const auto& [n, t] : from.time_weighted_occupancy) into.time_weighted_occupancy[n] += t;
  into.horizon += from.horizon;
  into.events_processed += from.events_processed;
  into.events_recorded += from.events_recorded;
  into.absorbed = into.absorbed || from.absorbed;
  auto append = [](auto& dst, const auto& src) { dst.insert(dst.end(), src.begin(), src.end()); };
  append(into.residual_snapshots, from.residual_snapshots);
  append(into.arrival_epoch_profiles, from.arrival_epoch_profiles);
  append(into.departure_epoch_profiles, from.departure_epoch_profiles);
  into.counts.arrivals += from.counts.arrivals;
  into.counts.completions += from.counts.completions;
  into.counts.departures += from.counts.departures;
  into.counts.internal_moves += from.counts.internal_moves;
  into.counts.self_moves += from.counts.self_moves;
}

SystemState init_state(const NetworkSpec& spec, const SimConfig& config, Rng& rng) {
  check_spec_shape(spec);
  SystemState state;
  state.counts = StateVector(spec.num_classes);
  state.residuals.assign(spec.num_classes, {});
  const auto* start = std::get_if<StationaryStart>(&config.init);
  if (!start) return state;
  if (start->pi.mass.empty()) throw ConfigError("stationary start needs an occupancy distribution");

  const double u = rng.uniform() * start->pi.total();
  double cum = 0.0;
  const StateVector* chosen = nullptr;
  for (const auto& [n, p] : start->pi.mass) {
    if (p <= 0.0) continue;
    chosen = &n;
    cum += p;
    if (u < cum) break;
  }
  if (!chosen) throw ConfigError("stationary start distribution has no mass");
  if (chosen->size() != spec.num_classes) throw ConfigError("start distribution has wrong dimension");
  state.counts = *chosen;
  for (ClassIndex i = 1; i <= spec.num_classes; ++i) {
    const EquilibriumDistribution eq(spec.workloads[i - 1]);
    for (int k = 0; k < state.counts.count(i); ++k) state.residuals[i - 1].push_back(eq.sample(rng));
  }
  return state;
}

std::optional<Event> next_event(const SystemState& state, const NetworkSpec& spec, Rng& rng) {
  return next_event_with(state, spec, rates_at(spec, state.counts), rng, true);
}

void apply_event(SystemState& state, const Event& event, const NetworkSpec& spec, Rng& rng) {
  apply_with(state, event, spec, rates_at(spec, state.counts), rng);
}

SimStats run(const NetworkSpec& spec, const SimConfig& config) {
  check_spec_shape(spec);
  const double spacing = pilot_spacing(spec, config, Mode::Open, nullptr);
  Rng rng(config.seed);
  SystemState start = init_state(spec, config, rng);
  Engine engine(spec, config, Mode::Open, std::move(rng));
  return engine.run(std::move(start), spacing);
}

SimStats run_modified(const NetworkSpec& spec, const StateVector& fixed_n, const SimConfig& config) {
  check_spec_shape(spec);
  if (fixed_n.size() != spec.num_classes) throw ConfigError("fixed state has wrong dimension");
  const RateMatrix rates = rates_at(spec, fixed_n);
  for (ClassIndex i = 1; i <= spec.num_classes; ++i) {
    if (fixed_n.count(i) > 0 && !(rates.row_sum(i) > 0.0)) {
      throw ConfigError("phi_i must be positive for every occupied class of the fixed state");
    }
  }
  if (fixed_n.is_zero()) {
    SimStats empty;
    empty.num_classes = spec.num_classes;
    empty.config = config;
    return empty;
  }
  const double spacing = pilot_spacing(spec, config, Mode::FixedPopulation, &fixed_n);
  Rng rng(config.seed);
  SystemState start = fixed_population_start(spec, fixed_n, config, rng);
  Engine engine(spec, config, Mode::FixedPopulation, std::move(rng));
  return engine.run(std::move(start), spacing);
}

}  // namespace insens
