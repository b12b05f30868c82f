#include "deropt/model/builder.hpp"

#include <cmath>
#include <map>
#include <set>

#include "deropt/core/error.hpp"
#include "deropt/ingest/load.hpp"

namespace deropt::model {

namespace {

std::string idx(std::string_view base, std::string_view a) {
  return std::string(base) + "[" + std::string(a) + "]";
}
std::string idx(std::string_view base, std::string_view a, int b) {
  return std::string(base) + "[" + std::string(a) + "," + std::to_string(b) + "]";
}
std::string idx(std::string_view base, int a) {
  return std::string(base) + "[" + std::to_string(a) + "]";
}
std::string idx(std::string_view base, int a, int b) {
  return std::string(base) + "[" + std::to_string(a) + "," + std::to_string(b) + "]";
}
std::string idx(std::string_view base, int a, int b, int c) {
  return std::string(base) + "[" + std::to_string(a) + "," + std::to_string(b) +
         "," + std::to_string(c) + "]";
}

double upper_or_cap(double upper, double cap) {
  return std::isfinite(upper) ? upper : cap;
}

bool may_charge(const StorageSpec& st, const std::string& source) {
  return !st.allowed_chargers || st.allowed_chargers->count(source) > 0;
}

void check_bounds(std::string_view what, double lo, double hi) {
  if (lo > hi) {
    throw Error(ErrorCode::InfeasibleBoundsDetected,
                std::string(what) + ": minimum " + std::to_string(lo) +
                    " exceeds maximum " + std::to_string(hi));
  }
}

// Adds tier variables covering `quantity` and returns their cost expression.
// Single-tier charges are priced directly on `quantity`.
LinearExpr tiered(MilpModel& m, const tariff::TierList& tiers, const LinearExpr& quantity,
                  Sense sense, const std::string& name) {
  if (tiers.size() == 1) return tiers.front().rate * quantity;
  LinearExpr cost;
  LinearExpr total;
  double lower = 0.0;
  for (std::size_t k = 0; k < tiers.size(); ++k) {
    const double width = tiers[k].upper - lower;
    Var v = m.add_var(name + "," + std::to_string(k) + "]", 0.0, width);
    total += v;
    cost.add(v, tiers[k].rate);
    lower = tiers[k].upper;
  }
  m.add_constraint(PendingConstraint{total - quantity, sense}, "fill_" + name + "]");
  return cost;
}

}  // namespace

std::string TechInstance::id() const {
  return net_metered() ? base.name + "_NM" : base.name;
}

std::vector<TechInstance> expand_techs(const Scenario& s, const ingest::ProviderContext& ctx) {
  std::vector<TechInstance> out;
  for (const auto& t : s.techs) {
    TechSpec base = t;
    if (base.class_name.empty()) base.class_name = base.name;
    const auto pf =
        ingest::production_factor(ingest::parse_provider(t.production_factor_source), t,
                                  s.grid, s.outage, ctx);
    if (t.can_net_meter) {
      out.push_back(TechInstance{base, Segment::NetMetered, pf, true});
      out.push_back(TechInstance{base, Segment::NonNetMetered, pf, true});
    } else {
      out.push_back(TechInstance{base, Segment::NonNetMetered, pf, false});
    }
  }
  return out;
}

ModelData prepare_model_data(const Scenario& s, const ingest::ProviderContext& ctx) {
  ModelData d;
  d.grid = s.grid;
  d.load = ingest::build_load(s.load, s.grid);
  d.critical = ingest::critical_load(d.load, s.load);
  d.grid_availability = ingest::grid_availability(s.grid, s.outage);
  d.tariff = tariff::parse_tariff(s.tariff, s.grid);
  d.techs = expand_techs(s, ctx);
  d.storage = s.storage;
  d.pwf = econ::present_worth_factors(s.financial);
  d.islanded.assign(s.grid.horizon_steps, false);
  if (s.analysis_type == AnalysisType::Resilience && s.outage) {
    for (int h = 0; h < s.grid.horizon_steps; ++h) d.islanded[h] = s.outage->contains(h);
  }
  d.annual_load_kwh = d.load.energy_kwh();
  d.size_cap_kw = s.size_cap_kw;
  return d;
}

BuiltModel build_model(const Scenario& s, const ingest::ProviderContext& ctx) {
  return build_model(s, prepare_model_data(s, ctx));
}

BuiltModel build_model(const Scenario& s, ModelData data) {
  (void)s;
  if (data.tariff.declining_block) {
    throw Error(ErrorCode::DecliningBlockUnsupported,
                "tariff has tiers with decreasing rates");
  }
  BuiltModel out;
  out.data = std::move(data);
  const ModelData& d = out.data;
  MilpModel& m = out.milp;
  ModelLayout& lay = out.layout;
  const int H = d.grid.horizon_steps;
  const double dt = d.grid.delta_hours();
  const auto& pwf = d.pwf;
  const auto& tar = d.tariff;

  // Grid purchase.
  lay.grid.reserve(H);
  for (int h = 0; h < H; ++h) {
    lay.grid.push_back(m.add_var(idx("prod", "grid", h), 0.0, d.islanded[h] ? 0.0 : kInf));
  }

  // Storage.
  const bool has_storage = d.storage.has_value();
  if (has_storage) {
    const auto& st = *d.storage;
    check_bounds("Storage kw", st.min_kw, st.max_kw);
    check_bounds("Storage kwh", st.min_kwh, st.max_kwh);
    StorageVars sv;
    const double kw_ub = upper_or_cap(st.max_kw, d.size_cap_kw);
    const double kwh_ub = upper_or_cap(st.max_kwh, d.size_cap_kw);
    sv.kw = m.add_var("size[storage_kw]", 0.0, kw_ub);
    sv.kwh = m.add_var("size[storage_kwh]", 0.0, kwh_ub);
    if (st.min_kw > 0.0 || st.min_kwh > 0.0) {
      Var z = m.add_binary("z[storage]");
      sv.installed = z;
      m.add_constraint(LinearExpr(sv.kw) - st.min_kw * z >= 0.0, "storage_min_kw");
      m.add_constraint(LinearExpr(sv.kw) - kw_ub * z <= 0.0, "storage_max_kw");
      m.add_constraint(LinearExpr(sv.kwh) - st.min_kwh * z >= 0.0, "storage_min_kwh");
      m.add_constraint(LinearExpr(sv.kwh) - kwh_ub * z <= 0.0, "storage_max_kwh");
    }
    sv.eta_charge = std::sqrt(st.round_trip_efficiency);
    sv.eta_discharge = sv.eta_charge;
    for (int k = 0; k <= H; ++k) sv.soc.push_back(m.add_var(idx("soc", k), 0.0, kwh_ub));
    for (int h = 0; h < H; ++h) sv.discharge.push_back(m.add_var(idx("discharge", h), 0.0, kw_ub));
    if (may_charge(st, "grid")) {
      for (int h = 0; h < H; ++h) {
        sv.grid_charge.push_back(m.add_var(idx("charge", "grid", h), 0.0, kw_ub));
        m.add_constraint(LinearExpr(sv.grid_charge[h]) - LinearExpr(lay.grid[h]) <= 0.0,
                         idx("grid_charge_cap", h));
      }
    }
    lay.capital_cost += st.cost_per_kw * sv.kw + st.cost_per_kwh * sv.kwh;
    lay.storage = std::move(sv);
  }

  // Technologies.
  std::map<std::string, std::vector<int>> classes;
  LinearExpr nm_size, nm_generation, total_export;
  for (std::size_t i = 0; i < d.techs.size(); ++i) {
    const auto& inst = d.techs[i];
    const auto& t = inst.base;
    const std::string id = inst.id();
    check_bounds(t.name + " kw", t.min_kw, t.max_kw);
    const auto& f = inst.production_factor.values();
    InstanceVars iv;
    iv.big_m = upper_or_cap(t.max_kw, d.size_cap_kw);
    iv.size = m.add_var(idx("size", id), 0.0, iv.big_m);
    if (t.min_kw > 0.0 || inst.paired) {
      Var z = m.add_binary(idx("z", id));
      iv.installed = z;
      m.add_constraint(LinearExpr(iv.size) - t.min_kw * z >= 0.0, idx("min_size", id));
      m.add_constraint(LinearExpr(iv.size) - iv.big_m * z <= 0.0, idx("max_size", id));
    }
    classes[t.class_name].push_back(static_cast<int>(i));

    const bool exports = t.can_export;
    const bool charges = has_storage && t.can_charge_storage && may_charge(*d.storage, t.name);
    LinearExpr generation;  // kWh over the horizon
    LinearExpr fuel;
    for (int h = 0; h < H; ++h) {
      Var p = m.add_var(idx("prod", id, h), 0.0, iv.big_m);
      iv.prod.push_back(p);
      generation.add(p, f[h] * dt);
      if (t.dispatchable) {
        Var on = m.add_binary(idx("on", id, h));
        Var y = m.add_var(idx("Y", id, h), 0.0, iv.big_m);
        if (f[h] == 0.0) m.set_bounds(on, 0.0, 0.0);
        iv.on.push_back(on);
        iv.rated_on.push_back(y);
        m.add_constraint(LinearExpr(y) - LinearExpr(iv.size) <= 0.0, idx("Y_size", id, h));
        m.add_constraint(LinearExpr(y) - iv.big_m * on <= 0.0, idx("Y_on", id, h));
        m.add_constraint(LinearExpr(y) - LinearExpr(iv.size) - iv.big_m * on >= -iv.big_m,
                         idx("Y_link", id, h));
        m.add_constraint(LinearExpr(p) - LinearExpr(y) <= 0.0, idx("cap", id, h));
        if (t.min_turndown > 0.0) {
          m.add_constraint(LinearExpr(p) - t.min_turndown * y >= 0.0, idx("turndown", id, h));
        }
        fuel += (t.fuel_slope * f[h] * dt) * p;
        fuel += (t.fuel_intercept * dt) * on;
      } else {
        m.add_constraint(LinearExpr(p) - LinearExpr(iv.size) <= 0.0, idx("cap", id, h));
        if (t.fuel_slope != 0.0) fuel += (t.fuel_slope * f[h] * dt) * p;
      }
      LinearExpr used;
      if (exports) {
        Var e = m.add_var(idx("export", id, h), 0.0, d.islanded[h] ? 0.0 : iv.big_m);
        iv.exports.push_back(e);
        used += e;
        total_export.add(e, dt);
        const double rate =
            inst.net_metered() ? tar.retail_export_rate(h) : tar.wholesale_rate;
        lay.export_credit.add(e, rate * dt);
      }
      if (charges) {
        Var c = m.add_var(idx("charge", id, h), 0.0, iv.big_m);
        iv.charge.push_back(c);
        used += c;
      }
      if (exports || charges) {
        m.add_constraint(used - f[h] * p <= 0.0, idx("source", id, h));
      }
    }

    lay.capital_cost.add(iv.size, (1.0 - t.itc_fraction) * t.cost_per_kw);
    lay.om_cost.add(iv.size, t.om_fixed);
    lay.om_cost += t.om_variable * generation;
    if (!fuel.terms().empty()) {
      if (std::isfinite(t.fuel_available)) {
        m.add_constraint(fuel <= t.fuel_available, idx("fuel", id));
      }
      lay.om_cost += t.fuel_cost * fuel;
    }
    if (t.rebate_per_kw > 0.0) {
      Var c = m.add_var(idx("rebate", id), 0.0, t.rebate_cap);
      m.add_constraint(LinearExpr(c) - t.rebate_per_kw * iv.size <= 0.0, idx("rebate_cap", id));
      lay.incentives += c;
    }
    if (t.pbi_per_kwh > 0.0) {
      Var c = m.add_var(idx("pbi", id), 0.0, t.pbi_cap);
      m.add_constraint(LinearExpr(c) - t.pbi_per_kwh * generation <= 0.0, idx("pbi_cap", id));
      lay.incentives += pwf.pwf_flat * LinearExpr(c);
    }
    if (inst.net_metered()) {
      nm_size += iv.size;
      nm_generation += generation;
    }
    lay.techs.push_back(std::move(iv));
  }

  // Technology classes: one segment per class and a shared size limit.
  for (const auto& [name, members] : classes) {
    if (members.size() < 2) continue;
    LinearExpr zs, sizes;
    for (int i : members) {
      if (lay.techs[i].installed) zs += *lay.techs[i].installed;
      sizes += lay.techs[i].size;
    }
    m.add_constraint(zs <= 1.0, idx("one_segment", name));
    const double cap = d.techs[members.front()].base.max_kw;
    if (std::isfinite(cap)) m.add_constraint(sizes <= cap, idx("class_max", name));
  }

  // Net-metering policy.
  if (!nm_size.terms().empty()) {
    m.add_constraint(nm_size <= tar.net_metering_limit_kw, "net_metering_limit");
    m.add_constraint(nm_generation <= d.annual_load_kwh, "net_metering_consumption_cap");
  }
  if (!total_export.terms().empty()) {
    m.add_constraint(total_export <= d.annual_load_kwh, "export_cap");
  }

  // Storage dynamics.
  if (lay.storage) {
    const auto& st = *d.storage;
    const auto& sv = *lay.storage;
    m.add_constraint(LinearExpr(sv.soc[0]) - st.soc_init * sv.kwh == 0.0, "soc_init");
    m.add_constraint(LinearExpr(sv.soc[H]) - st.soc_init * sv.kwh >= 0.0, "soc_final");
    for (int h = 0; h < H; ++h) {
      LinearExpr charge;
      if (!sv.grid_charge.empty()) charge += sv.grid_charge[h];
      for (const auto& iv : lay.techs) {
        if (!iv.charge.empty()) charge += iv.charge[h];
      }
      m.add_constraint(LinearExpr(sv.soc[h + 1]) - LinearExpr(sv.soc[h]) -
                               (sv.eta_charge * dt) * charge +
                               (dt / sv.eta_discharge) * sv.discharge[h] ==
                           0.0,
                       idx("soc_balance", h));
      m.add_constraint(charge - LinearExpr(sv.kw) <= 0.0, idx("charge_rate", h));
      m.add_constraint(LinearExpr(sv.discharge[h]) - LinearExpr(sv.kw) <= 0.0,
                       idx("discharge_rate", h));
    }
    for (int k = 1; k <= H; ++k) {
      m.add_constraint(LinearExpr(sv.soc[k]) - LinearExpr(sv.kwh) <= 0.0, idx("soc_max", k));
      if (st.soc_min > 0.0) {
        m.add_constraint(LinearExpr(sv.soc[k]) - st.soc_min * sv.kwh >= 0.0, idx("soc_min", k));
      }
    }
  }

  // Energy balance.
  for (int h = 0; h < H; ++h) {
    LinearExpr supply(lay.grid[h]);
    for (std::size_t i = 0; i < d.techs.size(); ++i) {
      const auto& iv = lay.techs[i];
      supply.add(iv.prod[h], d.techs[i].production_factor[h]);
      for (const auto* v : {&iv.exports, &iv.charge}) {
        if (!v->empty()) supply.add((*v)[h], -1.0);
      }
    }
    if (lay.storage) {
      supply += lay.storage->discharge[h];
      if (!lay.storage->grid_charge.empty()) supply.add(lay.storage->grid_charge[h], -1.0);
    }
    const double load = d.islanded[h] ? d.critical[h] : d.load[h];
    m.add_constraint(supply == load, idx("balance", h));
  }

  // Utility bill.
  std::map<std::pair<int, int>, LinearExpr> energy_by_group;
  std::map<int, std::vector<int>> steps_by_month;
  std::map<std::pair<int, int>, std::vector<int>> tou_steps;
  for (int h = 0; h < H; ++h) {
    const int month = d.grid.month(h);
    energy_by_group[{month, tar.energy_period[h]}].add(lay.grid[h], dt);
    if (!d.islanded[h]) {
      steps_by_month[month].push_back(h);
      if (tar.demand_period[h] >= 0) tou_steps[{month, tar.demand_period[h]}].push_back(h);
    }
  }
  std::map<int, LinearExpr> month_cost, month_credit;
  for (const auto& [key, kwh] : energy_by_group) {
    const auto [month, period] = key;
    auto cost = tiered(m, tar.energy_tiers[period], kwh, Sense::Equal,
                       "energy[" + std::to_string(month) + "," + std::to_string(period));
    month_cost[month] += cost;
    lay.energy_cost += cost;
  }
  for (const auto& [month, steps] : steps_by_month) {
    const auto& tiers = tar.demand_flat[month];
    bool priced = false;
    for (const auto& tier : tiers) priced = priced || tier.rate > 0.0;
    if (!priced) continue;
    LinearExpr peak;
    if (tiers.size() == 1) {
      Var p = m.add_var(idx("peak", month));
      peak = LinearExpr(p);
      lay.demand_flat_cost.add(p, tiers.front().rate);
      month_cost[month].add(p, tiers.front().rate);
    } else {
      double lower = 0.0;
      for (std::size_t k = 0; k < tiers.size(); ++k) {
        Var p = m.add_var(idx("peak", month, static_cast<int>(k)), 0.0, tiers[k].upper - lower);
        peak += p;
        lay.demand_flat_cost.add(p, tiers[k].rate);
        month_cost[month].add(p, tiers[k].rate);
        lower = tiers[k].upper;
      }
    }
    for (int h : steps) {
      m.add_constraint(peak - LinearExpr(lay.grid[h]) >= 0.0, idx("peak_flat", month, h));
    }
  }
  for (const auto& [key, steps] : tou_steps) {
    const auto [month, period] = key;
    const auto& tiers = tar.demand_tou_tiers[period];
    bool priced = false;
    for (const auto& tier : tiers) priced = priced || tier.rate > 0.0;
    if (!priced) continue;
    LinearExpr peak;
    double lower = 0.0;
    for (std::size_t k = 0; k < tiers.size(); ++k) {
      Var p = tiers.size() == 1
                  ? m.add_var(idx("peak_tou", month, period))
                  : m.add_var(idx("peak_tou", month, period, static_cast<int>(k)), 0.0,
                              tiers[k].upper - lower);
      peak += p;
      lay.demand_tou_cost.add(p, tiers[k].rate);
      month_cost[month].add(p, tiers[k].rate);
      lower = tiers[k].upper;
    }
    for (int h : steps) {
      m.add_constraint(peak - LinearExpr(lay.grid[h]) >= 0.0, idx("peak_tou", month, h));
    }
  }
  for (std::size_t i = 0; i < d.techs.size(); ++i) {
    const auto& iv = lay.techs[i];
    for (int h = 0; h < static_cast<int>(iv.exports.size()); ++h) {
      const double rate =
          d.techs[i].net_metered() ? tar.retail_export_rate(h) : tar.wholesale_rate;
      month_credit[d.grid.month(h)].add(iv.exports[h], rate * dt);
    }
  }
  const auto months = tar.months_in_horizon();
  lay.fixed_cost = tar.fixed_monthly_charge * static_cast<double>(months.size());
  LinearExpr annual_net(lay.fixed_cost);
  for (int month : months) {
    LinearExpr net = month_cost[month] + LinearExpr(tar.fixed_monthly_charge) - month_credit[month];
    if (tar.monthly_min_charge > 0.0) {
      Var a = m.add_var(idx("min_adder", month));
      m.add_constraint(net + LinearExpr(a) >= tar.monthly_min_charge, idx("min_charge", month));
      lay.min_charge_cost += a;
      annual_net += a;
    }
    annual_net += month_cost[month] - month_credit[month];
  }
  if (tar.annual_min_charge > 0.0) {
    Var a = m.add_var("min_adder[annual]");
    m.add_constraint(annual_net + LinearExpr(a) >= tar.annual_min_charge, "min_charge_annual");
    lay.min_charge_cost += a;
  }

  m.add_objective(lay.capital_cost);
  m.add_objective(-1.0 * lay.incentives);
  m.add_objective(pwf.pwf_om * lay.om_cost);
  m.add_objective(pwf.pwf_e * lay.utility_cost());
  return out;
}

void add_spinning_reserve(BuiltModel& bm, const Scenario& s) {
  if (!s.spinning_reserve) return;
  const auto& d = bm.data;
  auto& m = bm.milp;
  auto& lay = bm.layout;
  std::vector<int> dispatchable;
  for (std::size_t i = 0; i < d.techs.size(); ++i) {
    if (d.techs[i].base.dispatchable) dispatchable.push_back(static_cast<int>(i));
  }
  if (dispatchable.empty() && !lay.storage) {
    throw Error(ErrorCode::ReserveWithoutCapability,
                "spinning reserve needs storage or a dispatchable technology");
  }
  require_series(*s.spinning_reserve, d.grid, Unit::kW, "spinning reserve");
  const int H = d.grid.horizon_steps;
  const double dt = d.grid.delta_hours();
  for (int h = 0; h < H; ++h) {
    const double need = (*s.spinning_reserve)[h];
    LinearExpr down, up;
    for (int i : dispatchable) {
      const double f = d.techs[i].production_factor[h];
      down.add(lay.techs[i].prod[h], f);
      up += lay.techs[i].rated_on[h];
      up.add(lay.techs[i].prod[h], -f);
    }
    if (lay.storage) {
      const auto& sv = *lay.storage;
      Var mdn = m.add_var(idx("M_dn", h));
      Var mup = m.add_var(idx("M_up", h));
      lay.reserve_down.push_back(mdn);
      lay.reserve_up.push_back(mup);
      m.add_constraint(LinearExpr(mdn) - LinearExpr(sv.kw) <= 0.0, idx("M_dn_kw", h));
      m.add_constraint(dt * mdn - LinearExpr(sv.kwh) + LinearExpr(sv.soc[h]) <= 0.0,
                       idx("M_dn_soc", h));
      m.add_constraint(LinearExpr(mup) - LinearExpr(sv.kw) <= 0.0, idx("M_up_kw", h));
      m.add_constraint(dt * mup - LinearExpr(sv.soc[h]) <= 0.0, idx("M_up_soc", h));
      down += mdn;
      up += mup;
    }
    m.add_constraint(down >= need, idx("reserve_down", h));
    m.add_constraint(up >= need, idx("reserve_up", h));
  }
}

BuiltModel build_scenario_model(const Scenario& s, const ingest::ProviderContext& ctx) {
  auto bm = build_model(s, ctx);
  if (s.spinning_reserve) add_spinning_reserve(bm, s);
  return bm;
}

Scenario business_as_usual(const Scenario& s) {
  Scenario b = s;
  b.techs.clear();
  b.storage.reset();
  b.outage.reset();
  b.spinning_reserve.reset();
  b.analysis_type = AnalysisType::Financial;
  return b;
}

}  // namespace deropt::model
