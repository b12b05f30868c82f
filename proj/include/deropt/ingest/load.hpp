#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "deropt/core/scenario.hpp"

namespace deropt::ingest {

// Built-in synthetic reference shapes: "flat", "office", "retail".
const std::vector<std::string>& building_types();
bool is_known_building_type(std::string_view name);

// Annual consumption used when a reference load is not user scaled.
double default_annual_kwh(std::string_view building_type);

// Unnormalized shape of `building_type` on `grid` (arbitrary positive units).
Eigen::VectorXd reference_shape(std::string_view building_type,
                                const TimeGrid& grid);

// kW load series for the spec on `grid`.
TimeSeries build_load(const LoadSpec& spec, const TimeGrid& grid);

// Critical load: fraction x load, or the user series verbatim.
TimeSeries critical_load(const TimeSeries& load, const LoadSpec& spec);

}  // namespace deropt::ingest
