#include "deropt/econ/economics.hpp"

#include <cmath>
#include <iomanip>
#include <map>
#include <sstream>

#include "deropt/core/error.hpp"

namespace deropt::econ {

using nlohmann::json;

double present_worth(double growth, double discount, int years) {
  const double ratio = (1.0 + growth) / (1.0 + discount);
  double sum = 0.0;
  double term = 1.0;
  for (int y = 1; y <= years; ++y) {
    term *= ratio;
    sum += term;
  }
  return sum;
}

PresentWorthFactors present_worth_factors(const FinancialSpec& f) {
  return {present_worth(f.electricity_escalation, f.discount_rate, f.analysis_years),
          present_worth(f.inflation_rate, f.discount_rate, f.analysis_years),
          present_worth(0.0, f.discount_rate, f.analysis_years)};
}

namespace {

Eigen::VectorXd values_of(const std::vector<model::Var>& vars, const solver::Solution& s,
                          int n, double scale = 1.0) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
  for (std::size_t h = 0; h < vars.size(); ++h) v[h] = scale * s.value(vars[h]);
  return v;
}

std::vector<double> to_vector(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

bool usable(const solver::Solution& s) {
  return (s.status == solver::SolveStatus::Optimal ||
          s.status == solver::SolveStatus::Feasible) &&
         s.has_values();
}

}  // namespace

Eigen::VectorXd Dispatch::total_export(bool net_metered) const {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(grid.horizon_steps);
  for (const auto& t : techs) {
    if (t.net_metered == net_metered) v += t.exported;
  }
  return v;
}

Dispatch extract_dispatch(const model::BuiltModel& m, const solver::Solution& s) {
  const auto& d = m.data;
  const auto& lay = m.layout;
  const int H = d.grid.horizon_steps;
  Dispatch out;
  out.grid = d.grid;
  out.load.resize(H);
  for (int h = 0; h < H; ++h) out.load[h] = d.islanded[h] ? d.critical[h] : d.load[h];
  out.grid_purchase = values_of(lay.grid, s, H);
  for (std::size_t i = 0; i < d.techs.size(); ++i) {
    const auto& inst = d.techs[i];
    const auto& iv = lay.techs[i];
    TechDispatch t;
    t.id = inst.id();
    t.name = inst.base.name;
    t.net_metered = inst.net_metered();
    t.dispatchable = inst.base.dispatchable;
    t.size_kw = s.value(iv.size);
    t.output = values_of(iv.prod, s, H).cwiseProduct(inst.production_factor.values());
    t.to_storage = values_of(iv.charge, s, H);
    t.exported = values_of(iv.exports, s, H);
    if (t.dispatchable) t.on = values_of(iv.on, s, H);
    out.techs.push_back(std::move(t));
  }
  if (lay.storage) {
    const auto& sv = *lay.storage;
    out.has_storage = true;
    out.storage_kw = s.value(sv.kw);
    out.storage_kwh = s.value(sv.kwh);
    out.soc = values_of(sv.soc, s, H + 1);
    out.grid_charge = values_of(sv.grid_charge, s, H);
    out.discharge = values_of(sv.discharge, s, H);
    out.charge = out.grid_charge;
    for (const auto& t : out.techs) out.charge += t.to_storage;
  }
  return out;
}

std::string dispatch_csv(const Dispatch& d) {
  std::ostringstream os;
  os << std::setprecision(10);
  os << "step,load_kw";
  for (const auto& t : d.techs) os << ',' << t.id << "_kw";
  os << ",charge_kw,discharge_kw,soc_kwh,grid_purchase_kw,export_kw\n";
  const int H = d.grid.horizon_steps;
  for (int h = 0; h < H; ++h) {
    double exported = 0.0;
    os << h << ',' << d.load[h];
    for (const auto& t : d.techs) {
      os << ',' << t.output[h];
      exported += t.exported[h];
    }
    if (d.has_storage) {
      os << ',' << d.charge[h] << ',' << d.discharge[h] << ',' << d.soc[h];
    } else {
      os << ",0,0,0";
    }
    os << ',' << d.grid_purchase[h] << ',' << exported << '\n';
  }
  return os.str();
}

tariff::BillBreakdown dispatch_bill(const model::BuiltModel& m, const Dispatch& d) {
  const TimeGrid& g = d.grid;
  std::map<tariff::ExportClass, TimeSeries> exports;
  exports.emplace(tariff::ExportClass::NetMetered, TimeSeries(g, d.total_export(true), Unit::kW));
  exports.emplace(tariff::ExportClass::Wholesale, TimeSeries(g, d.total_export(false), Unit::kW));
  return tariff::compute_bill(m.data.tariff, TimeSeries(g, d.grid_purchase, Unit::kW), exports,
                              m.data.annual_load_kwh);
}

double emissions_kg(const Eigen::VectorXd& grid_purchase, const TimeSeries& factors) {
  return grid_purchase.dot(factors.values()) * factors.grid().delta_hours();
}

outage::OutageSimResult simulate_design(const model::BuiltModel& m, const Dispatch& d,
                                        const Scenario& s) {
  outage::Resources r;
  for (std::size_t i = 0; i < d.techs.size(); ++i) {
    const auto& t = d.techs[i];
    const auto& inst = m.data.techs[i];
    if (t.size_kw <= 0.0) continue;
    if (!inst.base.dispatchable) {
      r.renewables.push_back({t.id, t.size_kw, inst.production_factor});
      continue;
    }
    outage::Generator g;
    g.name = t.id;
    g.kw = t.size_kw;
    if (!ingest::is_backup(ingest::parse_provider(inst.base.production_factor_source))) {
      g.availability = inst.production_factor.values();
    }
    g.fuel_slope = inst.base.fuel_slope;
    g.fuel_intercept = inst.base.fuel_intercept;
    g.fuel_available = inst.base.fuel_available;
    g.min_turndown = inst.base.min_turndown;
    r.generators.push_back(std::move(g));
  }
  std::optional<TimeSeries> soc;
  if (d.has_storage && m.layout.storage) {
    const auto& sv = *m.layout.storage;
    r.battery.kw = d.storage_kw;
    r.battery.kwh = d.storage_kwh;
    r.battery.eta_charge = sv.eta_charge;
    r.battery.eta_discharge = sv.eta_discharge;
    r.battery.soc_min_kwh = m.data.storage->soc_min * d.storage_kwh;
    soc = TimeSeries(d.grid, d.soc.head(d.grid.horizon_steps), Unit::kWh);
  }
  const int duration = s.outage ? s.outage->length() : 0;
  return outage::simulate_outages(r, soc, m.data.critical, duration);
}

json assemble_results(const model::BuiltModel& bau_model, const solver::Solution& bau,
                      const model::BuiltModel& opt_model, const solver::Solution& opt,
                      const Scenario& s) {
  if (!usable(bau) || !usable(opt)) {
    throw Error(ErrorCode::StatusMismatch,
                "cannot assemble results: BAU " + std::string(solver::to_string(bau.status)) +
                    ", optimal " + std::string(solver::to_string(opt.status)));
  }
  const auto d_bau = extract_dispatch(bau_model, bau);
  const auto d_opt = extract_dispatch(opt_model, opt);
  const auto bill_bau = dispatch_bill(bau_model, d_bau);
  const auto bill_opt = dispatch_bill(opt_model, d_opt);
  const auto& lay = opt_model.layout;
  const auto& pwf = opt_model.data.pwf;
  const auto& mm = opt_model.milp;
  const int H = d_opt.grid.horizon_steps;
  const double dt = d_opt.grid.delta_hours();

  json doc;
  doc["state"] = "Complete";

  // Technologies, keyed by name with the segments summed.
  std::map<std::string, json> techs;
  for (const auto& t : d_opt.techs) {
    auto& j = techs[t.name];
    if (j.is_null()) {
      j = {{"size_kw", 0.0},
           {"size_kw_net_metered", 0.0},
           {"year_one_energy_kwh", 0.0},
           {"production_kw", std::vector<double>(H, 0.0)},
           {"to_storage_kw", std::vector<double>(H, 0.0)},
           {"export_kw", std::vector<double>(H, 0.0)}};
    }
    j["size_kw"] = j["size_kw"].get<double>() + t.size_kw;
    if (t.net_metered) j["size_kw_net_metered"] = j["size_kw_net_metered"].get<double>() + t.size_kw;
    j["year_one_energy_kwh"] = j["year_one_energy_kwh"].get<double>() + t.output.sum() * dt;
    for (int h = 0; h < H; ++h) {
      j["production_kw"][h] = j["production_kw"][h].get<double>() + t.output[h];
      j["to_storage_kw"][h] = j["to_storage_kw"][h].get<double>() + t.to_storage[h];
      j["export_kw"][h] = j["export_kw"][h].get<double>() + t.exported[h];
    }
    if (t.dispatchable) j["on"] = to_vector(t.on);
  }
  for (const auto& [name, j] : techs) doc[name] = j;

  if (d_opt.has_storage) {
    doc["Storage"] = {{"size_kw", d_opt.storage_kw},
                      {"size_kwh", d_opt.storage_kwh},
                      {"soc_kwh", to_vector(d_opt.soc)},
                      {"charge_kw", to_vector(d_opt.charge)},
                      {"grid_charge_kw", to_vector(d_opt.grid_charge)},
                      {"discharge_kw", to_vector(d_opt.discharge)}};
  }

  json tariff_doc = {{"year_one_bill", bill_opt.total()},
                     {"year_one_bill_bau", bill_bau.total()},
                     {"bill", tariff::to_json(bill_opt)},
                     {"bill_bau", tariff::to_json(bill_bau)},
                     {"grid_purchase_kw", to_vector(d_opt.grid_purchase)},
                     {"grid_purchase_kw_bau", to_vector(d_bau.grid_purchase)},
                     {"year_one_energy_kwh", d_opt.grid_purchase.sum() * dt},
                     {"year_one_energy_kwh_bau", d_bau.grid_purchase.sum() * dt}};
  if (s.emission_factors) {
    tariff_doc["year_one_co2_kg"] = emissions_kg(d_opt.grid_purchase, *s.emission_factors);
    tariff_doc["year_one_co2_kg_bau"] = emissions_kg(d_bau.grid_purchase, *s.emission_factors);
  } else {
    tariff_doc["year_one_co2_kg"] = nullptr;
    tariff_doc["year_one_co2_kg_bau"] = nullptr;
  }
  if (!opt_model.data.tariff.warnings.empty()) tariff_doc["warnings"] = opt_model.data.tariff.warnings;
  doc["ElectricTariff"] = tariff_doc;

  const double lcc_bau = bau.objective;
  const double lcc = opt.objective;
  doc["Financial"] = {{"lcc_bau", lcc_bau},
                      {"lcc", lcc},
                      {"npv", lcc_bau - lcc},
                      {"capital_cost", mm.evaluate(lay.capital_cost, opt.values)},
                      {"incentives_present_value", mm.evaluate(lay.incentives, opt.values)},
                      {"om_cost_present_value", pwf.pwf_om * mm.evaluate(lay.om_cost, opt.values)},
                      {"utility_cost_present_value",
                       pwf.pwf_e * mm.evaluate(lay.utility_cost(), opt.values)},
                      {"utility_cost_present_value_bau",
                       pwf.pwf_e * bau_model.milp.evaluate(bau_model.layout.utility_cost(), bau.values)},
                      {"pwf_e", pwf.pwf_e},
                      {"pwf_om", pwf.pwf_om},
                      {"analysis_years", s.financial.analysis_years},
                      {"analysis_type",
                       s.analysis_type == AnalysisType::Resilience ? "Resilience" : "Financial"}};

  if (s.outage) {
    auto sim = simulate_design(opt_model, d_opt, s);
    json o = outage::to_json(sim);
    o["outage_start_step"] = s.outage->start_step;
    o["outage_end_step"] = s.outage->end_step;
    doc["Outage"] = o;
  } else {
    doc["Outage"] = nullptr;
  }

  doc["Solver"] = {{"status", solver::to_string(opt.status)},
                   {"status_bau", solver::to_string(bau.status)},
                   {"gap", opt.gap},
                   {"node_count", opt.node_count},
                   {"node_count_bau", bau.node_count},
                   {"num_variables", mm.num_vars()},
                   {"num_constraints", mm.num_constraints()},
                   {"num_binaries", mm.num_binaries()}};
  return doc;
}

}  // namespace deropt::econ
