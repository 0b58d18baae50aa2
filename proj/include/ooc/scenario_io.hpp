#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ooc/sim.hpp"

namespace ooc {

/// Names of the built-in presets ("example1", "example2").
std::vector<std::string> preset_names();

/// The JSON document of a built-in preset. Throws InvalidArgument for
/// unknown names.
nlohmann::json preset_json(std::string_view name);

/// Validates a scenario document and builds the Scenario. Unknown keys and
/// malformed values raise SchemaError with the offending field path.
/// "auto" gains are resolved here; the resolution is written to `log`.
Scenario parse_scenario(const nlohmann::json& doc, std::ostream* log = nullptr);

/// Parses JSON text; syntax errors become SchemaError.
Scenario parse_scenario_text(std::string_view text, std::ostream* log = nullptr);

/// A preset name or a path to a JSON file. Throws IoError if the file
/// cannot be read.
Scenario load_scenario(std::string_view source, std::ostream* log = nullptr);

}  // namespace ooc
