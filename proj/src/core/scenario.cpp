#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "deropt/core/error.hpp"
#include "deropt/core/scenario.hpp"
#include "deropt/core/scenario_json.hpp"
#include "deropt/ingest/load.hpp"
#include "deropt/ingest/production.hpp"
#include "deropt/tariff/tariff.hpp"

namespace deropt {

using nlohmann::json;

const TechSpec* Scenario::find_tech(std::string_view name) const {
  for (const TechSpec& t : techs) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

namespace {

struct Checker {
  std::vector<Violation>& out;
  void require(bool ok, std::string path, std::string message) {
    if (!ok) out.push_back({std::move(path), std::move(message)});
  }
};

bool in_range(double v, double lo, double hi) { return v >= lo && v <= hi; }

void check_series(Checker& c, const TimeSeries& s, const TimeGrid& grid,
                  const std::string& path, bool nonnegative) {
  c.require(s.grid() == grid && s.size() == grid.horizon_steps, path,
            "series is not on the scenario grid");
  if (nonnegative) {
    c.require(s.values().size() == 0 || s.values().minCoeff() >= 0.0, path,
              "series values must be non-negative");
  }
}

void check_tech(Checker& c, const TechSpec& t) {
  const std::string p = t.name.empty() ? std::string("tech") : t.name;
  c.require(!t.name.empty(), p + ".name", "technology name must be non-empty");
  c.require(!t.class_name.empty(), p + ".class_name", "class name must be non-empty");
  c.require(t.min_kw >= 0.0, p + ".min_kw", "must be >= 0");
  c.require(t.min_kw <= t.max_kw, p + ".max_kw", "must be >= min_kw");
  c.require(in_range(t.min_turndown, 0.0, 1.0), p + ".min_turndown", "must lie in [0, 1]");
  c.require(in_range(t.itc_fraction, 0.0, 1.0), p + ".itc_fraction", "must lie in [0, 1]");
  const std::pair<const char*, double> costs[] = {
      {"cost_per_kw", t.cost_per_kw},     {"om_fixed", t.om_fixed},
      {"om_variable", t.om_variable},     {"fuel_slope", t.fuel_slope},
      {"fuel_intercept", t.fuel_intercept}, {"fuel_available", t.fuel_available},
      {"fuel_cost", t.fuel_cost},         {"rebate_per_kw", t.rebate_per_kw},
      {"rebate_cap", t.rebate_cap},       {"pbi_per_kwh", t.pbi_per_kwh},
      {"pbi_cap", t.pbi_cap}};
  for (const auto& [field, value] : costs) {
    c.require(value >= 0.0, p + "." + field, "must be >= 0");
  }
  try {
    ingest::parse_provider(t.production_factor_source);
  } catch (const Error& e) {
    c.require(false, p + ".production_factor", e.what());
  }
}

void check_load(Checker& c, const LoadSpec& load, const TimeGrid& grid) {
  auto known = [&](const std::string& type, const std::string& path) {
    c.require(ingest::is_known_building_type(type), path,
              "unknown building type '" + type + "'");
  };
  if (const auto* r = std::get_if<ReferenceLoad>(&load.mode)) {
    known(r->building_type, "LoadProfile.doe_reference_name");
  } else if (const auto* rs = std::get_if<ReferenceScaledLoad>(&load.mode)) {
    known(rs->building_type, "LoadProfile.doe_reference_name");
    c.require(rs->annual_kwh.has_value() != rs->monthly_kwh.has_value(),
              "LoadProfile.annual_kwh",
              "scaled reference load takes exactly one of annual_kwh, monthly_totals_kwh");
    if (rs->annual_kwh) {
      c.require(*rs->annual_kwh >= 0.0, "LoadProfile.annual_kwh", "must be >= 0");
    }
    if (rs->monthly_kwh) {
      c.require(rs->monthly_kwh->size() == 12, "LoadProfile.monthly_totals_kwh",
                "must have 12 entries");
      bool nonneg = true;
      for (double v : *rs->monthly_kwh) nonneg = nonneg && v >= 0.0;
      c.require(nonneg, "LoadProfile.monthly_totals_kwh", "entries must be >= 0");
    }
  } else if (const auto* u = std::get_if<UserSeriesLoad>(&load.mode)) {
    check_series(c, u->series, grid, "LoadProfile.loads_kw", true);
  } else {
    const auto& hy = std::get<HybridLoad>(load.mode);
    c.require(!hy.blend.empty(), "LoadProfile.blend", "needs at least one building type");
    double sum = 0.0;
    for (std::size_t i = 0; i < hy.blend.size(); ++i) {
      const auto& [type, weight] = hy.blend[i];
      known(type, "LoadProfile.blend[" + std::to_string(i) + "].doe_reference_name");
      c.require(weight >= 0.0, "LoadProfile.blend[" + std::to_string(i) + "].weight",
                "must be >= 0");
      sum += weight;
    }
    c.require(std::abs(sum - 1.0) <= 1e-9, "LoadProfile.blend", "weights must sum to 1");
    if (hy.annual_kwh) {
      c.require(*hy.annual_kwh >= 0.0, "LoadProfile.annual_kwh", "must be >= 0");
    }
  }
  if (const double* f = std::get_if<double>(&load.critical)) {
    c.require(in_range(*f, 0.0, 1.0), "LoadProfile.critical_load_fraction",
              "must lie in [0, 1]");
  } else {
    check_series(c, std::get<TimeSeries>(load.critical), grid,
                 "LoadProfile.critical_loads_kw", true);
  }
}

}  // namespace

std::vector<Violation> validate_scenario(const Scenario& s) {
  std::vector<Violation> out;
  Checker c{out};
  const TimeGrid& g = s.grid;

  c.require(g.steps_per_hour == 1 || g.steps_per_hour == 2 || g.steps_per_hour == 4,
            "Site.steps_per_hour", "must be 1, 2 or 4");
  c.require(g.horizon_steps > 0, "Site.horizon_steps", "must be positive");
  if (g.horizon_steps > 0 && g.steps_per_hour > 0) {
    c.require(g.horizon_steps % (24 * g.steps_per_hour) == 0, "Site.horizon_steps",
              "horizon must cover whole days");
  }
  c.require(g.start_day >= 0 && g.start_day < 365, "Site.start_day", "must lie in [0, 365)");
  c.require(s.size_cap_kw > 0.0 && std::isfinite(s.size_cap_kw), "Site.size_cap_kw",
            "must be positive and finite");
  if (!out.empty()) return out;  // the grid is needed for every later check

  std::set<std::string> names;
  for (const TechSpec& t : s.techs) {
    check_tech(c, t);
    c.require(names.insert(t.name).second, t.name + ".name", "duplicate technology name");
    c.require(t.name != "grid", t.name + ".name", "'grid' is reserved for the utility");
  }

  if (s.storage) {
    const StorageSpec& b = *s.storage;
    c.require(b.round_trip_efficiency > 0.0 && b.round_trip_efficiency <= 1.0,
              "Storage.round_trip_efficiency", "must lie in (0, 1]");
    c.require(in_range(b.soc_min, 0.0, 1.0), "Storage.soc_min", "must lie in [0, 1]");
    c.require(in_range(b.soc_init, 0.0, 1.0), "Storage.soc_init", "must lie in [0, 1]");
    c.require(b.soc_min <= b.soc_init, "Storage.soc_init", "must be >= soc_min");
    c.require(b.min_kw >= 0.0 && b.min_kw <= b.max_kw, "Storage.max_kw",
              "requires 0 <= min_kw <= max_kw");
    c.require(b.min_kwh >= 0.0 && b.min_kwh <= b.max_kwh, "Storage.max_kwh",
              "requires 0 <= min_kwh <= max_kwh");
    c.require(b.cost_per_kw >= 0.0, "Storage.cost_per_kw", "must be >= 0");
    c.require(b.cost_per_kwh >= 0.0, "Storage.cost_per_kwh", "must be >= 0");
    if (b.allowed_chargers) {
      for (const std::string& name : *b.allowed_chargers) {
        c.require(name == "grid" || s.find_tech(name) != nullptr,
                  "Storage.allowed_chargers", "unknown charger '" + name + "'");
      }
    }
  }

  const FinancialSpec& f = s.financial;
  c.require(f.analysis_years >= 1, "Financial.analysis_years", "must be >= 1");
  c.require(in_range(f.discount_rate, -0.5, 1.0), "Financial.discount_rate",
            "must lie in [-0.5, 1]");
  c.require(in_range(f.inflation_rate, -0.5, 1.0), "Financial.inflation_rate",
            "must lie in [-0.5, 1]");
  c.require(in_range(f.electricity_escalation, -0.5, 1.0),
            "Financial.electricity_escalation", "must lie in [-0.5, 1]");

  if (s.outage) {
    c.require(s.outage->start_step >= 0 && s.outage->start_step < s.outage->end_step &&
                  s.outage->end_step <= g.horizon_steps,
              "LoadProfile.outage_start_step",
              "outage window must satisfy 0 <= start < end <= horizon_steps");
  }
  c.require(s.analysis_type != AnalysisType::Resilience || s.outage.has_value(),
            "Site.analysis_type", "Resilience analysis requires an outage window");

  check_load(c, s.load, g);
  if (s.spinning_reserve) {
    check_series(c, *s.spinning_reserve, g, "Site.spinning_reserve_kw", true);
  }
  if (s.emission_factors) {
    check_series(c, *s.emission_factors, g, "Site.emission_factors_kg_per_kwh", true);
  }

  c.require(s.tariff.net_metering_limit_kw >= 0.0, "ElectricTariff.net_metering_limit_kw",
            "must be >= 0");
  c.require(s.tariff.wholesale_rate >= 0.0, "ElectricTariff.wholesale_rate", "must be >= 0");
  try {
    tariff::parse_tariff(s.tariff, g);
  } catch (const Error& e) {
    c.require(false, "ElectricTariff.urdb_response", e.what());
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

[[noreturn]] void bad(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::InvalidInput, path + ": " + what);
}

double get_number(const json& obj, const std::string& path, const char* key,
                  double fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (it->is_null()) return kUnbounded;
  if (!it->is_number()) bad(path + "." + key, "expected a number");
  return it->get<double>();
}

int get_int(const json& obj, const std::string& path, const char* key, int fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_number_integer()) bad(path + "." + key, "expected an integer");
  return it->get<int>();
}

bool get_bool(const json& obj, const std::string& path, const char* key, bool fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_boolean()) bad(path + "." + key, "expected a boolean");
  return it->get<bool>();
}

std::string get_string(const json& obj, const std::string& path, const char* key,
                       const std::string& fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_string()) bad(path + "." + key, "expected a string");
  return it->get<std::string>();
}

std::vector<double> get_numbers(const json& v, const std::string& path) {
  if (!v.is_array()) bad(path, "expected an array of numbers");
  std::vector<double> out;
  out.reserve(v.size());
  for (const json& x : v) {
    if (!x.is_number()) bad(path, "expected an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

TimeSeries get_series(const json& v, const std::string& path, const TimeGrid& grid,
                      Unit unit) {
  std::vector<double> values = get_numbers(v, path);
  if (static_cast<int>(values.size()) != grid.horizon_steps) {
    bad(path, "expected " + std::to_string(grid.horizon_steps) + " values, got " +
                  std::to_string(values.size()));
  }
  return TimeSeries(grid, Eigen::Map<const Eigen::VectorXd>(values.data(), values.size()),
                    unit);
}

json series_json(const TimeSeries& s) {
  return std::vector<double>(s.values().data(), s.values().data() + s.size());
}

const json& object_at(const json& doc, const char* key) {
  const json& v = doc.at(key);
  if (!v.is_object()) bad(key, "expected an object");
  return v;
}

TechSpec tech_defaults(const std::string& key) {
  TechSpec t;
  t.name = key;
  t.class_name = key;
  if (key == "PV") {
    t.production_factor_source = "synthetic:solar";
    t.can_net_meter = true;
    t.can_export = true;
  } else if (key == "Wind") {
    t.production_factor_source = "synthetic:wind";
    t.can_net_meter = true;
    t.can_export = true;
  } else {
    t.dispatchable = true;
    t.production_factor_source = "backup";
    t.min_turndown = 0.0;
  }
  return t;
}

TechSpec parse_tech(const json& obj, const std::string& key) {
  TechSpec t = tech_defaults(key);
  const std::string& p = key;
  t.class_name = get_string(obj, p, "class_name", t.class_name);
  t.dispatchable = get_bool(obj, p, "dispatchable", t.dispatchable);
  t.cost_per_kw = get_number(obj, p, "cost_per_kw", t.cost_per_kw);
  t.om_fixed = get_number(obj, p, "om_fixed", t.om_fixed);
  t.om_variable = get_number(obj, p, "om_variable", t.om_variable);
  t.fuel_slope = get_number(obj, p, "fuel_slope", t.fuel_slope);
  t.fuel_intercept = get_number(obj, p, "fuel_intercept", t.fuel_intercept);
  t.fuel_available = get_number(obj, p, "fuel_available", t.fuel_available);
  t.fuel_cost = get_number(obj, p, "fuel_cost", t.fuel_cost);
  t.min_kw = get_number(obj, p, "min_kw", t.min_kw);
  t.max_kw = get_number(obj, p, "max_kw", t.max_kw);
  t.min_turndown = get_number(obj, p, "min_turndown", t.min_turndown);
  t.production_factor_source =
      get_string(obj, p, "production_factor", t.production_factor_source);
  t.can_net_meter = get_bool(obj, p, "can_net_meter", t.can_net_meter);
  t.can_export = get_bool(obj, p, "can_export", t.can_export);
  t.can_charge_storage = get_bool(obj, p, "can_charge_storage", t.can_charge_storage);
  t.itc_fraction = get_number(obj, p, "itc_fraction", t.itc_fraction);
  t.rebate_per_kw = get_number(obj, p, "rebate_per_kw", t.rebate_per_kw);
  t.rebate_cap = get_number(obj, p, "rebate_cap", t.rebate_cap);
  t.pbi_per_kwh = get_number(obj, p, "pbi_per_kwh", t.pbi_per_kwh);
  t.pbi_cap = get_number(obj, p, "pbi_cap", t.pbi_cap);
  return t;
}

json tech_json(const TechSpec& t) {
  return json{{"class_name", t.class_name},
              {"dispatchable", t.dispatchable},
              {"cost_per_kw", t.cost_per_kw},
              {"om_fixed", t.om_fixed},
              {"om_variable", t.om_variable},
              {"fuel_slope", t.fuel_slope},
              {"fuel_intercept", t.fuel_intercept},
              {"fuel_available", bound_to_json(t.fuel_available)},
              {"fuel_cost", t.fuel_cost},
              {"min_kw", t.min_kw},
              {"max_kw", bound_to_json(t.max_kw)},
              {"min_turndown", t.min_turndown},
              {"production_factor", t.production_factor_source},
              {"can_net_meter", t.can_net_meter},
              {"can_export", t.can_export},
              {"can_charge_storage", t.can_charge_storage},
              {"itc_fraction", t.itc_fraction},
              {"rebate_per_kw", t.rebate_per_kw},
              {"rebate_cap", bound_to_json(t.rebate_cap)},
              {"pbi_per_kwh", t.pbi_per_kwh},
              {"pbi_cap", bound_to_json(t.pbi_cap)}};
}

const char* const kTechKeys[] = {"PV", "Wind", "Generator"};

}  // namespace

json bound_to_json(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::vector<double> read_csv_column(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidInput, "cannot open " + path.string());
  std::vector<double> values;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    auto comma = line.find(',');
    std::string cell = line.substr(first, comma == std::string::npos ? std::string::npos
                                                                     : comma - first);
    try {
      std::size_t used = 0;
      values.push_back(std::stod(cell, &used));
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidInput,
                  path.string() + ":" + std::to_string(line_no) + ": not a number");
    }
  }
  return values;
}

Scenario scenario_from_json(const json& doc, const std::filesystem::path& base_dir) {
  if (!doc.is_object()) bad("$", "scenario must be a JSON object");
  static const std::set<std::string> top = {"Site",    "PV",        "Wind",
                                            "Generator", "Storage", "ElectricTariff",
                                            "LoadProfile", "Financial"};
  for (const auto& [key, value] : doc.items()) {
    if (!top.contains(key)) bad(key, "unknown top-level key");
  }
  Scenario s;
  const json empty = json::object();
  const json& site = doc.contains("Site") ? object_at(doc, "Site") : empty;
  s.grid.steps_per_hour = get_int(site, "Site", "steps_per_hour", 1);
  s.grid.horizon_steps = get_int(site, "Site", "horizon_steps", 8760);
  s.grid.start_day = get_int(site, "Site", "start_day", 0);
  if (s.grid.steps_per_hour <= 0 || s.grid.horizon_steps <= 0) {
    bad("Site", "steps_per_hour and horizon_steps must be positive");
  }
  std::string analysis = get_string(site, "Site", "analysis_type", "Financial");
  if (analysis == "Financial") {
    s.analysis_type = AnalysisType::Financial;
  } else if (analysis == "Resilience") {
    s.analysis_type = AnalysisType::Resilience;
  } else {
    bad("Site.analysis_type", "must be \"Financial\" or \"Resilience\"");
  }
  s.size_cap_kw = get_number(site, "Site", "size_cap_kw", 1e7);
  if (site.contains("spinning_reserve_kw")) {
    s.spinning_reserve = get_series(site.at("spinning_reserve_kw"),
                                    "Site.spinning_reserve_kw", s.grid, Unit::kW);
  }
  if (site.contains("emission_factors_kg_per_kwh")) {
    s.emission_factors =
        get_series(site.at("emission_factors_kg_per_kwh"),
                   "Site.emission_factors_kg_per_kwh", s.grid, Unit::KgPerKWh);
  }

  for (const char* key : kTechKeys) {
    if (doc.contains(key)) s.techs.push_back(parse_tech(object_at(doc, key), key));
  }

  if (doc.contains("Storage")) {
    const json& st = object_at(doc, "Storage");
    StorageSpec b;
    b.cost_per_kw = get_number(st, "Storage", "cost_per_kw", b.cost_per_kw);
    b.cost_per_kwh = get_number(st, "Storage", "cost_per_kwh", b.cost_per_kwh);
    b.round_trip_efficiency =
        get_number(st, "Storage", "round_trip_efficiency", b.round_trip_efficiency);
    b.soc_min = get_number(st, "Storage", "soc_min", b.soc_min);
    b.soc_init = get_number(st, "Storage", "soc_init", b.soc_init);
    b.min_kw = get_number(st, "Storage", "min_kw", b.min_kw);
    b.max_kw = get_number(st, "Storage", "max_kw", b.max_kw);
    b.min_kwh = get_number(st, "Storage", "min_kwh", b.min_kwh);
    b.max_kwh = get_number(st, "Storage", "max_kwh", b.max_kwh);
    if (st.contains("allowed_chargers")) {
      const json& ch = st.at("allowed_chargers");
      if (ch.is_string() && ch.get<std::string>() == "all") {
        b.allowed_chargers.reset();
      } else if (ch.is_array()) {
        std::set<std::string> names;
        for (const json& n : ch) {
          if (!n.is_string()) bad("Storage.allowed_chargers", "expected strings");
          names.insert(n.get<std::string>());
        }
        b.allowed_chargers = std::move(names);
      } else {
        bad("Storage.allowed_chargers", "expected \"all\" or an array of names");
      }
    }
    s.storage = b;
  }

  if (doc.contains("ElectricTariff")) {
    const json& et = object_at(doc, "ElectricTariff");
    if (et.contains("urdb_response")) {
      s.tariff.urdb = et.at("urdb_response");
      if (!s.tariff.urdb.is_object()) bad("ElectricTariff.urdb_response", "expected an object");
    } else if (et.contains("blended_annual_energy_rate")) {
      s.tariff.urdb = tariff::blended_rate_document(
          get_number(et, "ElectricTariff", "blended_annual_energy_rate", 0.0),
          get_number(et, "ElectricTariff", "blended_annual_demand_rate", 0.0));
    } else {
      bad("ElectricTariff", "needs urdb_response or blended_annual_energy_rate");
    }
    s.tariff.net_metering_limit_kw =
        get_number(et, "ElectricTariff", "net_metering_limit_kw", 0.0);
    s.tariff.wholesale_rate = get_number(et, "ElectricTariff", "wholesale_rate", 0.0);
  } else {
    bad("ElectricTariff", "required");
  }

  if (!doc.contains("LoadProfile")) bad("LoadProfile", "required");
  const json& lp = object_at(doc, "LoadProfile");
  const std::string P = "LoadProfile";
  std::string city = get_string(lp, P, "city", "");
  std::optional<double> annual;
  if (lp.contains("annual_kwh")) annual = get_number(lp, P, "annual_kwh", 0.0);
  std::optional<std::vector<double>> monthly;
  if (lp.contains("monthly_totals_kwh")) {
    monthly = get_numbers(lp.at("monthly_totals_kwh"), P + ".monthly_totals_kwh");
  }
  if (lp.contains("loads_kw")) {
    s.load.mode = UserSeriesLoad{get_series(lp.at("loads_kw"), P + ".loads_kw", s.grid, Unit::kW)};
  } else if (lp.contains("loads_fixture")) {
    std::filesystem::path path = get_string(lp, P, "loads_fixture", "");
    if (path.is_relative()) path = base_dir / path;
    std::vector<double> values = read_csv_column(path);
    if (static_cast<int>(values.size()) != s.grid.horizon_steps) {
      bad(P + ".loads_fixture", "expected " + std::to_string(s.grid.horizon_steps) +
                                    " values, got " + std::to_string(values.size()));
    }
    s.load.mode = UserSeriesLoad{TimeSeries(
        s.grid, Eigen::Map<const Eigen::VectorXd>(values.data(), values.size()), Unit::kW)};
  } else if (lp.contains("blend")) {
    HybridLoad hy;
    const json& blend = lp.at("blend");
    if (!blend.is_array()) bad(P + ".blend", "expected an array");
    for (const json& item : blend) {
      hy.blend.emplace_back(get_string(item, P + ".blend", "doe_reference_name", ""),
                            get_number(item, P + ".blend", "weight", 0.0));
    }
    hy.annual_kwh = annual;
    s.load.mode = std::move(hy);
  } else {
    std::string type = get_string(lp, P, "doe_reference_name", "flat");
    if (annual || monthly) {
      s.load.mode = ReferenceScaledLoad{type, city, annual, monthly};
    } else {
      s.load.mode = ReferenceLoad{type, city};
    }
  }
  if (lp.contains("critical_loads_kw")) {
    s.load.critical =
        get_series(lp.at("critical_loads_kw"), P + ".critical_loads_kw", s.grid, Unit::kW);
  } else {
    s.load.critical = get_number(lp, P, "critical_load_fraction", 1.0);
  }
  if (lp.contains("outage_start_step") || lp.contains("outage_end_step")) {
    s.outage = OutageSpec{get_int(lp, P, "outage_start_step", 0),
                          get_int(lp, P, "outage_end_step", 0)};
  }

  if (doc.contains("Financial")) {
    const json& fin = object_at(doc, "Financial");
    FinancialSpec& f = s.financial;
    f.analysis_years = get_int(fin, "Financial", "analysis_years", f.analysis_years);
    f.discount_rate = get_number(fin, "Financial", "discount_rate", f.discount_rate);
    f.inflation_rate = get_number(fin, "Financial", "inflation_rate", f.inflation_rate);
    f.electricity_escalation =
        get_number(fin, "Financial", "electricity_escalation", f.electricity_escalation);
  }
  return s;
}

json scenario_to_json(const Scenario& s) {
  json doc;
  json site = {{"steps_per_hour", s.grid.steps_per_hour},
               {"horizon_steps", s.grid.horizon_steps},
               {"start_day", s.grid.start_day},
               {"analysis_type",
                s.analysis_type == AnalysisType::Financial ? "Financial" : "Resilience"},
               {"size_cap_kw", s.size_cap_kw}};
  if (s.spinning_reserve) site["spinning_reserve_kw"] = series_json(*s.spinning_reserve);
  if (s.emission_factors) {
    site["emission_factors_kg_per_kwh"] = series_json(*s.emission_factors);
  }
  doc["Site"] = site;
  for (const TechSpec& t : s.techs) doc[t.name] = tech_json(t);
  if (s.storage) {
    const StorageSpec& b = *s.storage;
    json st = {{"cost_per_kw", b.cost_per_kw},
               {"cost_per_kwh", b.cost_per_kwh},
               {"round_trip_efficiency", b.round_trip_efficiency},
               {"soc_min", b.soc_min},
               {"soc_init", b.soc_init},
               {"min_kw", b.min_kw},
               {"max_kw", bound_to_json(b.max_kw)},
               {"min_kwh", b.min_kwh},
               {"max_kwh", bound_to_json(b.max_kwh)}};
    if (b.allowed_chargers) {
      st["allowed_chargers"] = std::vector<std::string>(b.allowed_chargers->begin(),
                                                        b.allowed_chargers->end());
    } else {
      st["allowed_chargers"] = "all";
    }
    doc["Storage"] = st;
  }
  doc["ElectricTariff"] = {{"urdb_response", s.tariff.urdb},
                           {"net_metering_limit_kw", s.tariff.net_metering_limit_kw},
                           {"wholesale_rate", s.tariff.wholesale_rate}};
  json lp = json::object();
  if (const auto* r = std::get_if<ReferenceLoad>(&s.load.mode)) {
    lp["doe_reference_name"] = r->building_type;
    lp["city"] = r->city;
  } else if (const auto* rs = std::get_if<ReferenceScaledLoad>(&s.load.mode)) {
    lp["doe_reference_name"] = rs->building_type;
    lp["city"] = rs->city;
    if (rs->annual_kwh) lp["annual_kwh"] = *rs->annual_kwh;
    if (rs->monthly_kwh) lp["monthly_totals_kwh"] = *rs->monthly_kwh;
  } else if (const auto* u = std::get_if<UserSeriesLoad>(&s.load.mode)) {
    lp["loads_kw"] = series_json(u->series);
  } else {
    const auto& hy = std::get<HybridLoad>(s.load.mode);
    json blend = json::array();
    for (const auto& [type, weight] : hy.blend) {
      blend.push_back({{"doe_reference_name", type}, {"weight", weight}});
    }
    lp["blend"] = blend;
    if (hy.annual_kwh) lp["annual_kwh"] = *hy.annual_kwh;
  }
  if (const double* f = std::get_if<double>(&s.load.critical)) {
    lp["critical_load_fraction"] = *f;
  } else {
    lp["critical_loads_kw"] = series_json(std::get<TimeSeries>(s.load.critical));
  }
  if (s.outage) {
    lp["outage_start_step"] = s.outage->start_step;
    lp["outage_end_step"] = s.outage->end_step;
  }
  doc["LoadProfile"] = lp;
  doc["Financial"] = {{"analysis_years", s.financial.analysis_years},
                      {"discount_rate", s.financial.discount_rate},
                      {"inflation_rate", s.financial.inflation_rate},
                      {"electricity_escalation", s.financial.electricity_escalation}};
  return doc;
}

Scenario load_scenario_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidInput, "cannot open " + path.string());
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded()) {
    throw Error(ErrorCode::InvalidInput, path.string() + " is not valid JSON");
  }
  return scenario_from_json(doc, path.parent_path());
}

}  // namespace deropt
