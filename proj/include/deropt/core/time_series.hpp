#pragma once

#include <Eigen/Dense>
#include <string_view>

#include "deropt/core/time_grid.hpp"

namespace deropt {

enum class Unit { kW, kWh, DollarsPerKWh, Fraction, KgPerKWh };

std::string_view to_string(Unit unit);

// A value per step of a TimeGrid with an immutable unit tag.
class TimeSeries {
 public:
  TimeSeries() = default;
  TimeSeries(const TimeGrid& grid, Eigen::VectorXd values, Unit unit);

  static TimeSeries constant(const TimeGrid& grid, double value, Unit unit);
  static TimeSeries zeros(const TimeGrid& grid, Unit unit) {
    return constant(grid, 0.0, unit);
  }

  const TimeGrid& grid() const { return grid_; }
  Unit unit() const { return unit_; }
  const Eigen::VectorXd& values() const { return values_; }
  int size() const { return static_cast<int>(values_.size()); }
  double operator[](int step) const { return values_[step]; }

  // Energy over the horizon for a power series (kW x hours).
  double energy_kwh() const { return values_.sum() * grid_.delta_hours(); }

  friend bool operator==(const TimeSeries& a, const TimeSeries& b) {
    return a.grid_ == b.grid_ && a.unit_ == b.unit_ &&
           a.values_.size() == b.values_.size() && a.values_ == b.values_;
  }

 private:
  TimeGrid grid_{};
  Eigen::VectorXd values_{};
  Unit unit_ = Unit::kW;
};

// Throws UnitMismatch / LengthMismatch when `s` does not live on `grid` with
// unit `unit`.
void require_series(const TimeSeries& s, const TimeGrid& grid, Unit unit,
                    std::string_view what);

}  // namespace deropt
