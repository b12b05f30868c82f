#pragma once

#include <string>
#include <string_view>

#include "deropt/model/milp_model.hpp"

namespace deropt::model {

// CPLEX LP text. Brackets in names are written as parentheses; every
// variable is listed in the Bounds section in id order so that read_lp
// reproduces the ids.
std::string write_lp(const MilpModel& m);

// Reads the subset produced by write_lp: one objective or row per line,
// sections Minimize, Subject To, Bounds, Binaries, End. Throws
// Error(InvalidInput) on anything it does not understand.
MilpModel read_lp(std::string_view text);

}  // namespace deropt::model
