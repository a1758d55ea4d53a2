#pragma once

// Flat `key = value` configuration for simulation runs.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>

#include "commcost/optimizer.hpp"

namespace commcost {

using KeyValues = std::map<std::string, std::string>;

/// Parses `key = value` lines; `#` starts a comment, blank lines are skipped.
/// Throws ParseError on lines without '=' or repeated keys.
KeyValues parse_key_values(std::istream& in);

/// Every key a simulation config may contain.
const std::map<std::string, std::string>& simulation_defaults();

/// Resolved simulation run: the problem recipe plus the optimizer config.
struct SimulationSettings {
  KeyValues resolved;  // defaults overlaid with the user's keys
  ProblemKind problem = ProblemKind::mean;
  std::uint64_t n = 0;
  std::uint64_t d = 0;
  SimConfig sim;

  Problem make_problem() const;
};

/// Overlays `overrides` on the defaults and validates.  Unknown keys are a ConfigError.
SimulationSettings resolve_simulation(const KeyValues& overrides);

}  // namespace commcost
