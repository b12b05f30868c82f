#pragma once

#include <array>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "deropt/core/time_series.hpp"
#include "json.hpp"

namespace deropt::outage {

struct Renewable {
  std::string name;
  double kw = 0.0;
  TimeSeries production_factor;
};

struct Generator {
  std::string name;
  double kw = 0.0;
  Eigen::VectorXd availability;  // per step in [0, 1]; empty means always 1
  double fuel_slope = 0.0;       // fuel per kWh
  double fuel_intercept = 0.0;   // fuel per hour while running
  double fuel_available = std::numeric_limits<double>::infinity();
  double min_turndown = 0.0;
};

struct Battery {
  double kw = 0.0;
  double kwh = 0.0;
  double eta_charge = 1.0;
  double eta_discharge = 1.0;
  double soc_min_kwh = 0.0;
};

struct Resources {
  std::vector<Renewable> renewables;
  std::vector<Generator> generators;
  Battery battery;
};

struct OutageSimResult {
  std::vector<int> survived_steps;  // per start step
  int duration_steps = 0;
  double prob_annual = 0.0;
  std::array<double, 12> prob_by_month{};
  std::array<double, 24> prob_by_hour{};
};

// Marches an outage from every start step, wrapping at the end of the
// horizon, with renewables serving first, then the battery (starting from
// soc[s]), then generators. Renewable surplus charges the battery;
// generator surplus is curtailed. survived_steps[s] is the number of steps
// fully served, capped at the horizon length. Throws Error(MissingSoc) when
// the battery has energy capacity and `soc` is absent.
OutageSimResult simulate_outages(const Resources& r, const std::optional<TimeSeries>& soc,
                                 const TimeSeries& critical, int duration_steps);

nlohmann::json to_json(const OutageSimResult& r);

// "start_step,survived_steps" rows.
std::string to_csv(const OutageSimResult& r);

}  // namespace deropt::outage
