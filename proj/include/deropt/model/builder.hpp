#pragma once

#include <optional>
#include <string>
#include <vector>

#include "deropt/core/scenario.hpp"
#include "deropt/econ/present_worth.hpp"
#include "deropt/ingest/production.hpp"
#include "deropt/model/milp_model.hpp"
#include "deropt/tariff/tariff.hpp"

namespace deropt::model {

enum class Segment { NetMetered, NonNetMetered };

// A technology variant seen by the optimizer. Net-meterable technologies
// appear twice, once per segment; `base.class_name` ties the pair together.
struct TechInstance {
  TechSpec base;
  Segment segment = Segment::NonNetMetered;
  TimeSeries production_factor;
  bool paired = false;  // true when the other segment also exists

  std::string id() const;
  bool net_metered() const { return segment == Segment::NetMetered; }
};

std::vector<TechInstance> expand_techs(const Scenario& s,
                                       const ingest::ProviderContext& ctx = {});

// Everything the formulation consumes, resolved onto the scenario grid.
struct ModelData {
  TimeGrid grid;
  TimeSeries load;
  TimeSeries critical;
  TimeSeries grid_availability;
  tariff::Tariff tariff;
  std::vector<TechInstance> techs;
  std::optional<StorageSpec> storage;
  econ::PresentWorthFactors pwf;
  std::vector<bool> islanded;  // steps with the outage constraint active
  double annual_load_kwh = 0.0;
  double size_cap_kw = 1e7;
};

ModelData prepare_model_data(const Scenario& s, const ingest::ProviderContext& ctx = {});

struct InstanceVars {
  Var size;
  std::optional<Var> installed;  // z[t], only when min_kw > 0 or paired
  std::vector<Var> prod;    // rated production, actual output = f * prod
  std::vector<Var> exports;  // empty when the tech cannot export
  std::vector<Var> charge;   // empty when the tech cannot charge storage
  std::vector<Var> on, rated_on;  // dispatchable only: on[h], Y[h] = on[h] * size
  double big_m = 0.0;
};

struct StorageVars {
  Var kw, kwh;
  std::optional<Var> installed;
  std::vector<Var> soc;  // H + 1 states, soc[h] at the start of step h
  std::vector<Var> discharge;
  std::vector<Var> grid_charge;  // empty when the grid may not charge
  double eta_charge = 1.0;
  double eta_discharge = 1.0;
};

// Variable handles and the year-one utility bill terms as expressions.
struct ModelLayout {
  std::vector<InstanceVars> techs;
  std::optional<StorageVars> storage;
  std::vector<Var> grid;  // purchase kW per step
  std::vector<Var> reserve_down, reserve_up;
  LinearExpr energy_cost, demand_flat_cost, demand_tou_cost, min_charge_cost,
      export_credit;  // export_credit is a positive amount of $
  double fixed_cost = 0.0;
  LinearExpr capital_cost, om_cost, incentives;

  LinearExpr utility_cost() const {
    return energy_cost + demand_flat_cost + demand_tou_cost + min_charge_cost +
           LinearExpr(fixed_cost) - export_credit;
  }
};

struct BuiltModel {
  MilpModel milp;
  ModelLayout layout;
  ModelData data;
};

// Full life-cycle-cost MILP for the scenario (no reserve rows). Throws
// DecliningBlockUnsupported for declining tiers and InfeasibleBoundsDetected
// for min_kw > max_kw.
BuiltModel build_model(const Scenario& s, const ingest::ProviderContext& ctx = {});
BuiltModel build_model(const Scenario& s, ModelData data);

// Adds the upward and downward spinning-reserve rows for s.spinning_reserve.
// Throws ReserveWithoutCapability when neither storage nor a dispatchable
// technology exists.
void add_spinning_reserve(BuiltModel& m, const Scenario& s);

// build_model plus reserve rows when the scenario carries a reserve series.
BuiltModel build_scenario_model(const Scenario& s, const ingest::ProviderContext& ctx = {});

// The business-as-usual counterpart: no candidate techs, no storage, no
// outage constraint and no reserve requirement.
Scenario business_as_usual(const Scenario& s);

}  // namespace deropt::model
