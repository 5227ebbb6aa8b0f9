#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

#include "tsm/simulation.hpp"

namespace tsm {

// Malformed scenario text; line and column are 1-based.
class ScenarioParseError : public std::runtime_error {
 public:
  ScenarioParseError(const std::string& what, std::size_t line, std::size_t column)
      : std::runtime_error(what), line_(line), column_(column) {}
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_, column_;
};

// Scenario document: an optional "preset" followed by field overrides.
// Unknown fields and type mismatches raise ScenarioError naming the field path.
CrossoverScenario parse_scenario(std::string_view text);
// A preset name or a path to a scenario file.
CrossoverScenario load_scenario(const std::string& name_or_path);

nlohmann::json scenario_to_json(const CrossoverScenario& sc);

}  // namespace tsm
