#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "insens/balance.hpp"
#include "insens/harness.hpp"
#include "insens/sim.hpp"

namespace insens {

using Metadata = std::vector<std::pair<std::string, std::string>>;

// Tabular text: "# key: value" header lines, a column header
// "n1 ... nN probability", then one row per state.
void write_occupancy_table(std::ostream& os, const OccupancyDistribution& pi,
                           const Metadata& metadata = {});
OccupancyDistribution read_occupancy_table(std::istream& is);

// Machine-readable reports. `echo` is the JSON produced by echo_config and
// is embedded verbatim under "config".
std::string balance_report_json(const BalanceReport& report, const std::string& echo);
std::string sim_report_json(const SimStats& stats, const std::string& echo,
                            std::size_t max_snapshots = 1000);
std::string experiment_report_json(const ExperimentReport& report, const std::string& echo);
std::string sensitivity_report_json(const SensitivityReport& report);

// Human-readable tables.
std::string experiment_summary(const ExperimentReport& report);
std::string sensitivity_summary(const SensitivityReport& report);

}  // namespace insens
