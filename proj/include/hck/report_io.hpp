#pragma once

#include <string>

#include <json.hpp>

#include "hck/simulation.hpp"

namespace hck {

// Version of the JSON report layout {version, command, config_echo, results,
// diagnostics}; bump on any incompatible change.
inline constexpr int kReportVersion = 1;

// Full-precision number formatting shared by the CSV writers ("%.17g", NaN as
// empty, infinities as "inf"/"-inf").
std::string format_full(double v);
// Six significant digits for text tables.
std::string format_short(double v);

nlohmann::json simulation_config_json(const SimulationSpec& spec, const SimulationOptions& options);
nlohmann::json simulation_to_json(const SimulationReport& report);
std::string render_simulation_text(const SimulationReport& report);
std::string render_simulation_csv(const SimulationReport& report);

}  // namespace hck
