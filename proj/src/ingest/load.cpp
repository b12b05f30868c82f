#include "deropt/ingest/load.hpp"

#include <cmath>
#include <numbers>

#include "deropt/core/error.hpp"

namespace deropt::ingest {

namespace {

double bump(double hour, double center, double width) {
  double z = (hour - center) / width;
  return std::exp(-0.5 * z * z);
}

// Relative demand at fractional hour-of-day `hour`.
double shape_value(std::string_view type, double hour, bool weekend) {
  if (type == "flat") return 1.0;
  if (type == "office") {
    if (weekend) return 0.3 + 0.05 * bump(hour, 13.0, 3.0);
    return 0.3 + 0.7 * bump(hour, 10.0, 1.8) + 0.6 * bump(hour, 15.0, 2.0);
  }
  if (type == "retail") {
    bool open = hour >= 9.0 && hour < 21.0;
    double level = open ? 1.0 : 0.3;
    return weekend ? level * 1.15 : level;
  }
  throw Error(ErrorCode::UnknownBuildingType, std::string(type));
}

Eigen::VectorXd normalized(std::string_view type, const TimeGrid& grid) {
  Eigen::VectorXd shape = reference_shape(type, grid);
  return shape / (shape.sum() * grid.delta_hours());
}

double horizon_fraction(const TimeGrid& grid) { return grid.horizon_hours() / 8760.0; }

}  // namespace

const std::vector<std::string>& building_types() {
  static const std::vector<std::string> types = {"flat", "office", "retail"};
  return types;
}

bool is_known_building_type(std::string_view name) {
  for (const auto& t : building_types()) {
    if (t == name) return true;
  }
  return false;
}

double default_annual_kwh(std::string_view building_type) {
  if (building_type == "flat") return 8760.0;
  if (building_type == "office") return 250000.0;
  if (building_type == "retail") return 150000.0;
  throw Error(ErrorCode::UnknownBuildingType, std::string(building_type));
}

Eigen::VectorXd reference_shape(std::string_view building_type,
                                const TimeGrid& grid) {
  if (!is_known_building_type(building_type)) {
    throw Error(ErrorCode::UnknownBuildingType, std::string(building_type));
  }
  Eigen::VectorXd out(grid.horizon_steps);
  const double dt = grid.delta_hours();
  for (int h = 0; h < grid.horizon_steps; ++h) {
    double hour = grid.hour_of_day(h) + (h % grid.steps_per_hour) * dt + 0.5 * dt;
    out[h] = shape_value(building_type, hour, grid.is_weekend(h));
  }
  return out;
}

TimeSeries build_load(const LoadSpec& spec, const TimeGrid& grid) {
  struct Builder {
    const TimeGrid& grid;

    TimeSeries operator()(const ReferenceLoad& r) const {
      Eigen::VectorXd v = normalized(r.building_type, grid) *
                          (default_annual_kwh(r.building_type) * horizon_fraction(grid));
      return TimeSeries(grid, std::move(v), Unit::kW);
    }

    TimeSeries operator()(const ReferenceScaledLoad& r) const {
      if (r.annual_kwh) {
        return TimeSeries(grid, normalized(r.building_type, grid) * *r.annual_kwh,
                          Unit::kW);
      }
      if (!r.monthly_kwh || r.monthly_kwh->size() != 12) {
        throw Error(ErrorCode::InvalidInput,
                    "scaled reference load needs annual_kwh or 12 monthly totals");
      }
      // Months only partly inside the horizon are scaled to the covered share
      // of their total.
      Eigen::VectorXd shape = reference_shape(r.building_type, grid);
      std::array<double, 12> shape_kwh{};
      std::array<int, 12> steps{};
      for (int h = 0; h < grid.horizon_steps; ++h) {
        shape_kwh[grid.month(h)] += shape[h] * grid.delta_hours();
        ++steps[grid.month(h)];
      }
      Eigen::VectorXd out(grid.horizon_steps);
      for (int h = 0; h < grid.horizon_steps; ++h) {
        int m = grid.month(h);
        double month_steps = kDaysPerMonth[m] * grid.steps_per_day();
        double target = (*r.monthly_kwh)[m] * std::min(1.0, steps[m] / month_steps);
        out[h] = shape[h] / shape_kwh[m] * target;
      }
      return TimeSeries(grid, std::move(out), Unit::kW);
    }

    TimeSeries operator()(const UserSeriesLoad& u) const {
      if (u.series.size() != grid.horizon_steps || !(u.series.grid() == grid)) {
        throw Error(ErrorCode::LengthMismatch, "user load is not on the scenario grid");
      }
      require_series(u.series, grid, Unit::kW, "user load");
      return u.series;
    }

    TimeSeries operator()(const HybridLoad& hy) const {
      Eigen::VectorXd out = Eigen::VectorXd::Zero(grid.horizon_steps);
      double default_scale = 0.0;
      for (const auto& [type, weight] : hy.blend) {
        out += weight * normalized(type, grid);
        default_scale += weight * default_annual_kwh(type) * horizon_fraction(grid);
      }
      out *= hy.annual_kwh.value_or(default_scale);
      return TimeSeries(grid, std::move(out), Unit::kW);
    }
  };
  return std::visit(Builder{grid}, spec.mode);
}

TimeSeries critical_load(const TimeSeries& load, const LoadSpec& spec) {
  if (const double* fraction = std::get_if<double>(&spec.critical)) {
    if (!(*fraction >= 0.0 && *fraction <= 1.0)) {
      throw Error(ErrorCode::FractionOutOfRange,
                  "critical load fraction " + std::to_string(*fraction));
    }
    return TimeSeries(load.grid(), load.values() * *fraction, Unit::kW);
  }
  const TimeSeries& series = std::get<TimeSeries>(spec.critical);
  require_series(series, load.grid(), Unit::kW, "critical load");
  return series;
}

}  // namespace deropt::ingest
