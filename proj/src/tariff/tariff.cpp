#include "deropt/tariff/tariff.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "deropt/core/error.hpp"

namespace deropt::tariff {

using nlohmann::json;

namespace {

const std::set<std::string>& known_fields() {
  static const std::set<std::string> fields = {
      "energyratestructure", "energyweekdayschedule", "energyweekendschedule",
      "demandratestructure", "demandweekdayschedule", "demandweekendschedule",
      "flatdemandstructure", "flatdemandmonths",      "fixedchargefirstmeter",
      "fixedmonthlycharge",  "fixedchargeunits",      "mincharge",
      "minchargeunits",      "label",                 "name",
      "utility",             "lookbackMonths",        "lookbackPercent",
      "lookbackRange",       "demandunits",           "flatdemandunit"};
  return fields;
}

double number_or(const json& obj, const char* key, double fallback) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return fallback;
  if (!it->is_number()) {
    throw Error(ErrorCode::InvalidInput,
                std::string("field '") + key + "' must be a number");
  }
  return it->get<double>();
}

// Reads an array of periods, each an array of {max, rate, adj} tiers.
std::vector<TierList> parse_structure(const json& doc, const char* key,
                                      bool& declining) {
  std::vector<TierList> periods;
  const json& arr = doc.at(key);
  if (!arr.is_array() || arr.empty()) {
    throw Error(ErrorCode::InvalidInput,
                std::string(key) + " must be a non-empty array of periods");
  }
  for (std::size_t p = 0; p < arr.size(); ++p) {
    const json& tiers = arr[p];
    if (!tiers.is_array() || tiers.empty()) {
      throw Error(ErrorCode::InvalidInput, std::string(key) + "[" +
                                               std::to_string(p) +
                                               "] must be a non-empty array");
    }
    TierList list;
    for (std::size_t k = 0; k < tiers.size(); ++k) {
      const json& tier = tiers[k];
      Tier t;
      t.rate = number_or(tier, "rate", 0.0) + number_or(tier, "adj", 0.0);
      t.upper = number_or(tier, "max", std::numeric_limits<double>::infinity());
      if (t.rate < 0.0) {
        throw Error(ErrorCode::InvalidInput,
                    std::string(key) + ": negative rate in period " +
                        std::to_string(p));
      }
      if (!list.empty()) {
        if (!(t.upper > list.back().upper)) {
          throw Error(ErrorCode::InvalidInput,
                      std::string(key) +
                          ": tier bounds must be strictly increasing in period " +
                          std::to_string(p));
        }
        if (t.rate < list.back().rate) declining = true;
      }
      list.push_back(t);
    }
    // Usage beyond the last stated max is billed at the last rate.
    list.back().upper = std::numeric_limits<double>::infinity();
    periods.push_back(std::move(list));
  }
  return periods;
}

using Schedule = std::array<std::array<int, 24>, 12>;

Schedule parse_schedule(const json& doc, const char* key, std::size_t n_periods) {
  const json& arr = doc.at(key);
  if (!arr.is_array() || arr.size() != 12) {
    throw Error(ErrorCode::InvalidInput, std::string(key) + " must have 12 months");
  }
  Schedule s{};
  for (int m = 0; m < 12; ++m) {
    if (!arr[m].is_array() || arr[m].size() != 24) {
      throw Error(ErrorCode::InvalidInput,
                  std::string(key) + " month " + std::to_string(m) +
                      " must have 24 hours");
    }
    for (int h = 0; h < 24; ++h) {
      int p = arr[m][h].get<int>();
      if (p < 0 || static_cast<std::size_t>(p) >= n_periods) {
        throw Error(ErrorCode::InvalidInput,
                    std::string(key) + " references undefined period " +
                        std::to_string(p));
      }
      s[m][h] = p;
    }
  }
  return s;
}

std::vector<int> expand(const Schedule& weekday, const Schedule& weekend,
                        const TimeGrid& grid) {
  std::vector<int> out(grid.horizon_steps);
  for (int h = 0; h < grid.horizon_steps; ++h) {
    const Schedule& s = grid.is_weekend(h) ? weekend : weekday;
    out[h] = s[grid.month(h)][grid.hour_of_day(h)];
  }
  return out;
}

}  // namespace

std::vector<int> Tariff::months_in_horizon() const {
  std::vector<int> months;
  for (int h = 0; h < grid.horizon_steps; ++h) {
    int m = grid.month(h);
    if (std::find(months.begin(), months.end(), m) == months.end()) {
      months.push_back(m);
    }
  }
  return months;
}

Tariff parse_urdb(const json& doc, const TimeGrid& grid,
                  double net_metering_limit_kw, double wholesale_rate) {
  if (!doc.is_object()) {
    throw Error(ErrorCode::InvalidInput, "rate document must be a JSON object");
  }
  Tariff t;
  t.grid = grid;
  t.net_metering_limit_kw = net_metering_limit_kw;
  t.wholesale_rate = wholesale_rate;

  for (const auto& [key, value] : doc.items()) {
    if (!known_fields().contains(key)) {
      t.warnings.push_back("ignored unrecognized field '" + key + "'");
    } else if (key.rfind("lookback", 0) == 0) {
      t.warnings.push_back("demand lookback field '" + key + "' is not modeled");
    }
  }

  if (doc.contains("energyratestructure")) {
    t.energy_tiers = parse_structure(doc, "energyratestructure", t.declining_block);
    if (!doc.contains("energyweekdayschedule") ||
        !doc.contains("energyweekendschedule")) {
      throw Error(ErrorCode::MissingSchedule,
                  "energyratestructure requires energyweekdayschedule and "
                  "energyweekendschedule");
    }
    auto wd = parse_schedule(doc, "energyweekdayschedule", t.energy_tiers.size());
    auto we = parse_schedule(doc, "energyweekendschedule", t.energy_tiers.size());
    t.energy_period = expand(wd, we, grid);
  } else {
    t.energy_tiers = {TierList{Tier{}}};
    t.energy_period.assign(grid.horizon_steps, 0);
  }

  t.demand_period.assign(grid.horizon_steps, -1);
  if (doc.contains("demandratestructure")) {
    t.demand_tou_tiers =
        parse_structure(doc, "demandratestructure", t.declining_block);
    if (!doc.contains("demandweekdayschedule") ||
        !doc.contains("demandweekendschedule")) {
      throw Error(ErrorCode::MissingSchedule,
                  "demandratestructure requires demandweekdayschedule and "
                  "demandweekendschedule");
    }
    auto wd = parse_schedule(doc, "demandweekdayschedule", t.demand_tou_tiers.size());
    auto we = parse_schedule(doc, "demandweekendschedule", t.demand_tou_tiers.size());
    t.demand_period = expand(wd, we, grid);
  }

  if (doc.contains("flatdemandstructure")) {
    auto periods = parse_structure(doc, "flatdemandstructure", t.declining_block);
    std::array<int, 12> months{};
    if (doc.contains("flatdemandmonths")) {
      const json& fm = doc.at("flatdemandmonths");
      if (!fm.is_array() || fm.size() != 12) {
        throw Error(ErrorCode::InvalidInput, "flatdemandmonths must have 12 entries");
      }
      for (int m = 0; m < 12; ++m) {
        months[m] = fm[m].get<int>();
        if (months[m] < 0 || static_cast<std::size_t>(months[m]) >= periods.size()) {
          throw Error(ErrorCode::InvalidInput,
                      "flatdemandmonths references undefined period");
        }
      }
    } else if (periods.size() > 1) {
      throw Error(ErrorCode::MissingSchedule,
                  "flatdemandstructure with several periods requires flatdemandmonths");
    }
    for (int m = 0; m < 12; ++m) t.demand_flat[m] = periods[months[m]];
  }

  t.fixed_monthly_charge = number_or(doc, "fixedchargefirstmeter",
                                     number_or(doc, "fixedmonthlycharge", 0.0));
  if (doc.contains("fixedchargeunits") &&
      doc.at("fixedchargeunits").get<std::string>() != "$/month") {
    throw Error(ErrorCode::InvalidInput, "only fixedchargeunits \"$/month\" is supported");
  }
  double min_charge = number_or(doc, "mincharge", 0.0);
  std::string min_units = doc.value("minchargeunits", std::string("$/month"));
  if (min_units == "$/month") {
    t.monthly_min_charge = min_charge;
  } else if (min_units == "$/year") {
    t.annual_min_charge = min_charge;
  } else {
    throw Error(ErrorCode::InvalidInput, "minchargeunits must be $/month or $/year");
  }
  if (t.fixed_monthly_charge < 0 || min_charge < 0) {
    throw Error(ErrorCode::InvalidInput, "charges must be non-negative");
  }
  return t;
}

json blended_rate_document(double energy_rate, double demand_rate) {
  json zeros = json::array();
  for (int m = 0; m < 12; ++m) zeros.push_back(std::vector<int>(24, 0));
  json doc = {{"energyratestructure", json::array({json::array({{{"rate", energy_rate}}})})},
              {"energyweekdayschedule", zeros},
              {"energyweekendschedule", zeros}};
  if (demand_rate > 0.0) {
    doc["flatdemandstructure"] = json::array({json::array({{{"rate", demand_rate}}})});
    doc["flatdemandmonths"] = std::vector<int>(12, 0);
  }
  return doc;
}

double tiered_charge(const TierList& tiers, double quantity) {
  double cost = 0.0;
  double lower = 0.0;
  for (const Tier& tier : tiers) {
    if (quantity <= lower) break;
    double filled = std::min(quantity, tier.upper) - lower;
    cost += filled * tier.rate;
    lower = tier.upper;
  }
  return cost;
}

MonthlyBill& MonthlyBill::operator+=(const MonthlyBill& o) {
  energy_cost += o.energy_cost;
  demand_cost_flat += o.demand_cost_flat;
  demand_cost_tou += o.demand_cost_tou;
  fixed_cost += o.fixed_cost;
  min_charge_adder += o.min_charge_adder;
  export_credit += o.export_credit;
  return *this;
}

BillBreakdown compute_bill(const Tariff& t, const TimeSeries& grid_purchase,
                           const std::map<ExportClass, TimeSeries>& exports,
                           double annual_load_kwh) {
  const TimeGrid& grid = t.grid;
  require_series(grid_purchase, grid, Unit::kW, "grid_purchase");
  for (const auto& [cls, series] : exports) {
    require_series(series, grid, Unit::kW, "export");
  }
  const double dt = grid.delta_hours();
  const int n_periods = static_cast<int>(t.energy_tiers.size());
  const int n_dperiods = static_cast<int>(t.demand_tou_tiers.size());

  std::array<std::vector<double>, 12> energy_kwh;
  std::array<std::vector<double>, 12> tou_peak;
  std::array<double, 12> flat_peak{};
  for (int m = 0; m < 12; ++m) {
    energy_kwh[m].assign(n_periods, 0.0);
    tou_peak[m].assign(n_dperiods, 0.0);
  }

  BillBreakdown bill;
  double credited = 0.0;
  auto credit_step = [&](int h, ExportClass cls, double rate) {
    auto it = exports.find(cls);
    if (it == exports.end()) return;
    double kwh = std::max(0.0, it->second[h]) * dt;
    double allowed = std::clamp(annual_load_kwh - credited, 0.0, kwh);
    credited += allowed;
    bill.months[grid.month(h)].export_credit -= allowed * rate;
  };

  for (int h = 0; h < grid.horizon_steps; ++h) {
    int m = grid.month(h);
    double kw = grid_purchase[h];
    energy_kwh[m][t.energy_period[h]] += kw * dt;
    flat_peak[m] = std::max(flat_peak[m], kw);
    if (t.demand_period[h] >= 0) {
      double& peak = tou_peak[m][t.demand_period[h]];
      peak = std::max(peak, kw);
    }
    credit_step(h, ExportClass::NetMetered, t.retail_export_rate(h));
    credit_step(h, ExportClass::Wholesale, t.wholesale_rate);
  }
  bill.credited_export_kwh = credited;

  const std::vector<int> months = t.months_in_horizon();
  for (int m : months) {
    MonthlyBill& mb = bill.months[m];
    for (int p = 0; p < n_periods; ++p) {
      mb.energy_cost += tiered_charge(t.energy_tiers[p], energy_kwh[m][p]);
    }
    mb.demand_cost_flat = tiered_charge(t.demand_flat[m], flat_peak[m]);
    for (int p = 0; p < n_dperiods; ++p) {
      mb.demand_cost_tou += tiered_charge(t.demand_tou_tiers[p], tou_peak[m][p]);
    }
    mb.fixed_cost = t.fixed_monthly_charge;
    mb.min_charge_adder = std::max(0.0, t.monthly_min_charge - mb.total());
  }

  double running = 0.0;
  for (int m : months) running += bill.months[m].total();
  if (!months.empty()) {
    bill.months[months.back()].min_charge_adder +=
        std::max(0.0, t.annual_min_charge - running);
  }
  for (const MonthlyBill& mb : bill.months) bill.annual += mb;
  return bill;
}

json to_json(const BillBreakdown& b) {
  auto one = [](const MonthlyBill& m) {
    return json{{"energy_cost", m.energy_cost},
                {"demand_cost_flat", m.demand_cost_flat},
                {"demand_cost_tou", m.demand_cost_tou},
                {"fixed_cost", m.fixed_cost},
                {"min_charge_adder", m.min_charge_adder},
                {"export_credit", m.export_credit},
                {"total", m.total()}};
  };
  json months = json::array();
  for (const MonthlyBill& m : b.months) months.push_back(one(m));
  return json{{"annual", one(b.annual)},
              {"monthly", months},
              {"credited_export_kwh", b.credited_export_kwh}};
}

}  // namespace deropt::tariff
