#pragma once

#include <array>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "deropt/core/time_grid.hpp"
#include "deropt/core/time_series.hpp"
#include "json.hpp"

namespace deropt {

inline constexpr double kUnbounded = std::numeric_limits<double>::infinity();

// A candidate generation technology. Fuel use per hour is
// fuel_slope * output_kw + fuel_intercept * on.
struct TechSpec {
  std::string name;
  std::string class_name;
  bool dispatchable = false;
  double cost_per_kw = 0.0;
  double om_fixed = 0.0;     // $/kW/yr
  double om_variable = 0.0;  // $/kWh
  double fuel_slope = 0.0;
  double fuel_intercept = 0.0;
  double fuel_available = kUnbounded;
  double fuel_cost = 0.0;  // $/fuel-unit
  double min_kw = 0.0;
  double max_kw = kUnbounded;
  double min_turndown = 0.0;
  std::string production_factor_source;
  bool can_net_meter = false;
  bool can_export = false;
  bool can_charge_storage = true;
  double itc_fraction = 0.0;
  double rebate_per_kw = 0.0;
  double rebate_cap = kUnbounded;
  double pbi_per_kwh = 0.0;
  double pbi_cap = kUnbounded;  // $/yr

  friend bool operator==(const TechSpec&, const TechSpec&) = default;
};

struct StorageSpec {
  double cost_per_kw = 0.0;
  double cost_per_kwh = 0.0;
  double round_trip_efficiency = 1.0;
  double soc_min = 0.0;
  double soc_init = 0.5;
  double min_kw = 0.0;
  double max_kw = kUnbounded;
  double min_kwh = 0.0;
  double max_kwh = kUnbounded;
  // nullopt means every generating source, the grid included, may charge.
  std::optional<std::set<std::string>> allowed_chargers;

  friend bool operator==(const StorageSpec&, const StorageSpec&) = default;
};

struct FinancialSpec {
  int analysis_years = 25;
  double discount_rate = 0.08;
  double inflation_rate = 0.025;
  double electricity_escalation = 0.023;

  friend bool operator==(const FinancialSpec&, const FinancialSpec&) = default;
};

// Half-open window [start_step, end_step) of grid unavailability.
struct OutageSpec {
  int start_step = 0;
  int end_step = 0;

  int length() const { return end_step - start_step; }
  bool contains(int step) const {
    return step >= start_step && step < end_step;
  }
  friend bool operator==(const OutageSpec&, const OutageSpec&) = default;
};

struct ReferenceLoad {
  std::string building_type;
  std::string city;
  friend bool operator==(const ReferenceLoad&, const ReferenceLoad&) = default;
};

struct ReferenceScaledLoad {
  std::string building_type;
  std::string city;
  std::optional<double> annual_kwh;
  std::optional<std::vector<double>> monthly_kwh;
  friend bool operator==(const ReferenceScaledLoad&,
                         const ReferenceScaledLoad&) = default;
};

struct UserSeriesLoad {
  TimeSeries series;
  friend bool operator==(const UserSeriesLoad&, const UserSeriesLoad&) = default;
};

struct HybridLoad {
  std::vector<std::pair<std::string, double>> blend;
  std::optional<double> annual_kwh;
  friend bool operator==(const HybridLoad&, const HybridLoad&) = default;
};

using LoadMode =
    std::variant<ReferenceLoad, ReferenceScaledLoad, UserSeriesLoad, HybridLoad>;

// Fraction of the typical load, or an explicit kW series.
using CriticalLoad = std::variant<double, TimeSeries>;

struct LoadSpec {
  LoadMode mode = ReferenceLoad{"flat", ""};
  CriticalLoad critical = 1.0;
  friend bool operator==(const LoadSpec&, const LoadSpec&) = default;
};

// Rate document in the URDB v7 layout plus the site-level export policy.
struct TariffSpec {
  nlohmann::json urdb = nlohmann::json::object();
  double net_metering_limit_kw = 0.0;
  double wholesale_rate = 0.0;
  friend bool operator==(const TariffSpec&, const TariffSpec&) = default;
};

enum class AnalysisType { Financial, Resilience };

struct Scenario {
  TimeGrid grid;
  std::vector<TechSpec> techs;
  std::optional<StorageSpec> storage;
  TariffSpec tariff;
  LoadSpec load;
  FinancialSpec financial;
  std::optional<OutageSpec> outage;
  std::optional<TimeSeries> spinning_reserve;  // kW
  std::optional<TimeSeries> emission_factors;  // kg CO2 / kWh
  AnalysisType analysis_type = AnalysisType::Financial;
  double size_cap_kw = 1e7;

  const TechSpec* find_tech(std::string_view name) const;
  friend bool operator==(const Scenario&, const Scenario&) = default;
};

struct Violation {
  std::string path;
  std::string message;
  friend bool operator==(const Violation&, const Violation&) = default;
};

// Checks every type invariant and cross reference. Pure.
std::vector<Violation> validate_scenario(const Scenario& s);

}  // namespace deropt
