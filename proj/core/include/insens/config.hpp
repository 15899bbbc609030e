#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "insens/harness.hpp"
#include "insens/model.hpp"
#include "insens/sim.hpp"

namespace insens {

// A network spec together with the solver truncation and simulation
// settings found beside it in the same document.
struct SpecDocument {
  NetworkSpec spec;
  std::vector<int> truncation;
  SimConfig sim;
  // Present when the document asks for the fixed-population process.
  std::optional<StateVector> fixed_state;
  bool stationary_start = false;
};

struct PlanDocument {
  SpecDocument base;
  ExperimentPlan plan;
};

using ConfigDocument = std::variant<SpecDocument, PlanDocument>;

// Parses a YAML (or JSON) document. Defaults are applied, every workload is
// normalized to unit mean and the spec is validated on its probe states;
// any problem raises ConfigError with the offending line and field.
ConfigDocument parse_config_text(const std::string& text);
ConfigDocument parse_config(const std::filesystem::path& path);

SpecDocument parse_spec_text(const std::string& text);
PlanDocument parse_plan_text(const std::string& text);

// States probed by validate_spec for a parsed document: the truncation box,
// the admissible set, or the tabulated box, capped at kMaxOracleStates.
std::vector<StateVector> probe_states(const NetworkSpec& spec, const std::vector<int>& truncation);

// Parses "n1 + 2 n2 <= 4" style capacity constraints.
LinearConstraint parse_linear_constraint(const std::string& text, std::size_t num_classes);

// Full effective configuration as JSON; feeding it back to
// parse_config_text reproduces the same document.
std::string echo_config(const SpecDocument& doc);
std::string echo_config(const PlanDocument& doc);

}  // namespace insens
