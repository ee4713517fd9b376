#pragma once

#include "bfd/integrator.hpp"

#include <string>
#include <vector>

namespace bfd {

/// Reads a sectioned INI file ([grid], [kernel], [time], [init], [output], [verify]),
/// applies "section.key=value" overrides, fills defaults and validates.
///
/// Errors: parse-error with the line number, validation-error naming the key (unknown
/// keys, malformed values, out-of-range values).
SimulationConfig parse_config(const std::string& path, const std::vector<std::string>& overrides = {});
SimulationConfig parse_config_text(const std::string& text, const std::vector<std::string>& overrides = {});

/// Canonical INI text of the effective configuration; parses back to the same config.
std::string config_echo(const SimulationConfig& config);

/// 64-bit FNV-1a of the echo (thread count excluded), as 16 hex digits.
std::string config_fingerprint(const SimulationConfig& config);

}  // namespace bfd
