#include "deropt/core/error.hpp"
#include "deropt/core/time_grid.hpp"
#include "deropt/core/time_series.hpp"

#include <string>

namespace deropt {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::MissingSchedule: return "MissingSchedule";
    case ErrorCode::DecliningBlockUnsupported: return "DecliningBlockUnsupported";
    case ErrorCode::InfeasibleBoundsDetected: return "InfeasibleBoundsDetected";
    case ErrorCode::ReserveWithoutCapability: return "ReserveWithoutCapability";
    case ErrorCode::UnknownBuildingType: return "UnknownBuildingType";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::FractionOutOfRange: return "FractionOutOfRange";
    case ErrorCode::ProviderUnavailable: return "ProviderUnavailable";
    case ErrorCode::UnitMismatch: return "UnitMismatch";
    case ErrorCode::NumericalBreakdown: return "NumericalBreakdown";
    case ErrorCode::StatusMismatch: return "StatusMismatch";
    case ErrorCode::MissingSoc: return "MissingSoc";
  }
  return "Unknown";
}

int month_of_day(int day_of_year) {
  int d = day_of_year % 365;
  for (int m = 0; m < 12; ++m) {
    if (d < kDaysPerMonth[m]) return m;
    d -= kDaysPerMonth[m];
  }
  return 11;
}

int TimeGrid::month(int step) const { return month_of_day(day_of_year(step)); }

std::string_view to_string(Unit unit) {
  switch (unit) {
    case Unit::kW: return "kW";
    case Unit::kWh: return "kWh";
    case Unit::DollarsPerKWh: return "$/kWh";
    case Unit::Fraction: return "fraction";
    case Unit::KgPerKWh: return "kg/kWh";
  }
  return "?";
}

TimeSeries::TimeSeries(const TimeGrid& grid, Eigen::VectorXd values, Unit unit)
    : grid_(grid), values_(std::move(values)), unit_(unit) {
  if (values_.size() != grid_.horizon_steps) {
    throw Error(ErrorCode::LengthMismatch,
                "series has " + std::to_string(values_.size()) +
                    " values, grid has " + std::to_string(grid_.horizon_steps) +
                    " steps");
  }
}

TimeSeries TimeSeries::constant(const TimeGrid& grid, double value, Unit unit) {
  return TimeSeries(grid, Eigen::VectorXd::Constant(grid.horizon_steps, value),
                    unit);
}

void require_series(const TimeSeries& s, const TimeGrid& grid, Unit unit,
                    std::string_view what) {
  if (s.unit() != unit) {
    throw Error(ErrorCode::UnitMismatch,
                std::string(what) + " has unit " + std::string(to_string(s.unit())) +
                    ", expected " + std::string(to_string(unit)));
  }
  if (!(s.grid() == grid) || s.size() != grid.horizon_steps) {
    throw Error(ErrorCode::LengthMismatch,
                std::string(what) + " is not on the scenario grid");
  }
}

}  // namespace deropt
