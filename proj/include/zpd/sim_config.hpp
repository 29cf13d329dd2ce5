#pragma once

#include <iosfwd>
#include <string>

#include "zpd/distill_sim.hpp"

namespace zpd::sim {

/// Parses an INI-style config. Sections: [world], [rollout], [weighting],
/// [training], [run]. Missing keys keep their defaults; unknown sections or
/// keys and malformed values throw ErrorKind::config naming the key.
SimConfig parse_sim_config(std::istream& in);
SimConfig parse_sim_config_string(const std::string& text);
SimConfig load_sim_config(const std::string& path);

/// Writes every key in a form parse_sim_config reads back unchanged.
std::string format_sim_config(const SimConfig& config);

}  // namespace zpd::sim
