#pragma once

#include <filesystem>

#include "deropt/core/scenario.hpp"
#include "json.hpp"

namespace deropt {

// Reads the nested scenario document (top-level keys Site, PV, Wind,
// Generator, Storage, ElectricTariff, LoadProfile, Financial). Structural
// problems (wrong JSON types, unknown enum names, series of the wrong length)
// throw Error(InvalidInput); semantic checks are left to validate_scenario.
//
// `base_dir` resolves relative fixture paths such as LoadProfile.loads_fixture.
Scenario scenario_from_json(const nlohmann::json& doc,
                            const std::filesystem::path& base_dir = {});

nlohmann::json scenario_to_json(const Scenario& s);

Scenario load_scenario_file(const std::filesystem::path& path);

// Infinite bounds travel as JSON null.
nlohmann::json bound_to_json(double v);

// Reads a single-column CSV of numbers (blank lines and '#' comments skipped).
std::vector<double> read_csv_column(const std::filesystem::path& path);

}  // namespace deropt
