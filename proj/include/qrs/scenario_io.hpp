#pragma once

#include <istream>
#include <string>

#include "qrs/netsim.hpp"

namespace qrs::scenario_io {

/// Parses the sectioned plain-text scenario format. Strict: unknown
/// sections or keys, missing fields, and malformed values all throw
/// netsim::ScenarioInvalid naming section, key, and line.
netsim::Scenario parse(std::istream& in, const std::string& name = "<stream>");
netsim::Scenario load_file(const std::string& file);

}  // namespace qrs::scenario_io
