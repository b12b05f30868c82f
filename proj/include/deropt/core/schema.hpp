#pragma once

#include <string_view>

namespace deropt {

// docs/scenario_schema.json, compiled in.
std::string_view scenario_schema_text();

}  // namespace deropt
