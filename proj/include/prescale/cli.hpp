#pragma once

#include "prescale/simulator.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace prescale {

enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitRuntime = 3 };

/// Scenario from a JSON file, or a built-in name (ramp, spike, zero) when no such
/// file exists. Overrides are dotted `key=value` pairs applied to the JSON form;
/// values are parsed as JSON and fall back to plain strings.
Scenario load_scenario(const std::string& path_or_name, const std::vector<std::string>& overrides = {});

void apply_override(nlohmann::json& doc, const std::string& assignment);

/// Entry point shared by the executable and the tests.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace prescale
