#pragma once

#include <array>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "deropt/core/scenario.hpp"
#include "deropt/core/time_series.hpp"
#include "json.hpp"

namespace deropt::tariff {

// One block of a tiered charge. `upper` is cumulative (kWh per month for
// energy, kW for demand); the last tier is unbounded.
struct Tier {
  double upper = std::numeric_limits<double>::infinity();
  double rate = 0.0;
  friend bool operator==(const Tier&, const Tier&) = default;
};

using TierList = std::vector<Tier>;

// A rate structure expanded onto a TimeGrid.
struct Tariff {
  TimeGrid grid;
  std::vector<int> energy_period;        // per step
  std::vector<TierList> energy_tiers;    // per energy period
  std::array<TierList, 12> demand_flat;  // per calendar month, may be empty
  std::vector<int> demand_period;        // per step, -1 when no TOU demand
  std::vector<TierList> demand_tou_tiers;
  double fixed_monthly_charge = 0.0;
  double annual_min_charge = 0.0;
  double monthly_min_charge = 0.0;
  double net_metering_limit_kw = 0.0;
  double wholesale_rate = 0.0;
  bool declining_block = false;
  std::vector<std::string> warnings;

  // Retail rate credited to net-metered export: first tier of the step's
  // energy period.
  double retail_export_rate(int step) const {
    return energy_tiers[energy_period[step]].front().rate;
  }
  // Calendar months that contain at least one step of the horizon.
  std::vector<int> months_in_horizon() const;
};

// Parses the URDB v7 subset described in docs/urdb_subset.md. Throws
// Error(MissingSchedule) for a rate structure without its schedule and
// Error(InvalidInput) for malformed tiers. Declining blocks are flagged, not
// rejected.
Tariff parse_urdb(const nlohmann::json& doc, const TimeGrid& grid,
                  double net_metering_limit_kw = 0.0,
                  double wholesale_rate = 0.0);

inline Tariff parse_tariff(const TariffSpec& spec, const TimeGrid& grid) {
  return parse_urdb(spec.urdb, grid, spec.net_metering_limit_kw,
                    spec.wholesale_rate);
}

// URDB document for a single flat energy rate and flat monthly demand rate.
nlohmann::json blended_rate_document(double energy_rate, double demand_rate);

// Cost of `quantity` filled through `tiers` in order.
double tiered_charge(const TierList& tiers, double quantity);

enum class ExportClass { NetMetered, Wholesale };

struct MonthlyBill {
  double energy_cost = 0.0;
  double demand_cost_flat = 0.0;
  double demand_cost_tou = 0.0;
  double fixed_cost = 0.0;
  double min_charge_adder = 0.0;
  double export_credit = 0.0;  // <= 0

  double total() const {
    return energy_cost + demand_cost_flat + demand_cost_tou + fixed_cost +
           min_charge_adder + export_credit;
  }
  MonthlyBill& operator+=(const MonthlyBill& o);
};

struct BillBreakdown {
  std::array<MonthlyBill, 12> months{};
  MonthlyBill annual{};
  double credited_export_kwh = 0.0;

  double total() const { return annual.total(); }
};

// Deterministic bill for a purchase series and export series per class.
// Export is credited chronologically, net-metered before wholesale within a
// step, until cumulative credited energy reaches `annual_load_kwh`.
BillBreakdown compute_bill(const Tariff& t, const TimeSeries& grid_purchase,
                           const std::map<ExportClass, TimeSeries>& exports,
                           double annual_load_kwh);

nlohmann::json to_json(const BillBreakdown& b);

}  // namespace deropt::tariff
