#pragma once

#include <array>

namespace deropt {

// Uniform time discretization of the analysis horizon. Step 0 starts at
// midnight of `start_day` (0 = January 1) of a non-leap year whose January 1
// is a Monday.
struct TimeGrid {
  int steps_per_hour = 1;
  int horizon_steps = 24;
  int start_day = 0;

  double delta_hours() const { return 1.0 / steps_per_hour; }
  int steps_per_day() const { return 24 * steps_per_hour; }
  double horizon_hours() const { return horizon_steps * delta_hours(); }

  int day_of_year(int step) const {
    return (start_day + step / steps_per_day()) % 365;
  }
  int hour_of_day(int step) const {
    return (step / steps_per_hour) % 24;
  }
  // 0 = January.
  int month(int step) const;
  // 0 = Monday ... 6 = Sunday.
  int day_of_week(int step) const { return day_of_year(step) % 7; }
  bool is_weekend(int step) const { return day_of_week(step) >= 5; }

  bool whole_days() const { return horizon_steps % steps_per_day() == 0; }

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;
};

inline constexpr std::array<int, 12> kDaysPerMonth = {31, 28, 31, 30, 31, 30,
                                                      31, 31, 30, 31, 30, 31};

int month_of_day(int day_of_year);

// An hourly grid covering one full year.
inline TimeGrid full_year_hourly() { return TimeGrid{1, 8760, 0}; }

}  // namespace deropt
