#pragma once

#include <string>
#include <vector>

#include "deropt/econ/present_worth.hpp"
#include "deropt/model/builder.hpp"
#include "deropt/outage/simulator.hpp"
#include "deropt/solver/milp.hpp"
#include "json.hpp"

namespace deropt::econ {

struct TechDispatch {
  std::string id;    // instance id, e.g. PV_NM
  std::string name;  // technology name, e.g. PV
  bool net_metered = false;
  bool dispatchable = false;
  double size_kw = 0.0;
  Eigen::VectorXd output;      // kW actually produced, f * prod
  Eigen::VectorXd to_storage;  // kW
  Eigen::VectorXd exported;    // kW
  Eigen::VectorXd on;          // dispatchable only
};

struct Dispatch {
  TimeGrid grid;
  Eigen::VectorXd load;  // kW served, critical load on islanded steps
  Eigen::VectorXd grid_purchase;
  std::vector<TechDispatch> techs;
  bool has_storage = false;
  double storage_kw = 0.0;
  double storage_kwh = 0.0;
  Eigen::VectorXd soc;  // H + 1 states
  Eigen::VectorXd charge;
  Eigen::VectorXd grid_charge;
  Eigen::VectorXd discharge;

  Eigen::VectorXd total_export(bool net_metered) const;
};

Dispatch extract_dispatch(const model::BuiltModel& m, const solver::Solution& s);

// step, load, one column per technology instance, charge, discharge, soc,
// grid purchase, export.
std::string dispatch_csv(const Dispatch& d);

// Year-one bill of the dispatch under the model's tariff.
tariff::BillBreakdown dispatch_bill(const model::BuiltModel& m, const Dispatch& d);

double emissions_kg(const Eigen::VectorXd& grid_purchase, const TimeSeries& factors);

// Outage survival for the optimal design; requires s.outage.
outage::OutageSimResult simulate_design(const model::BuiltModel& m, const Dispatch& d,
                                        const Scenario& s);

// The nested results document; pure. Throws Error(StatusMismatch) unless
// both solutions are Optimal or Feasible.
nlohmann::json assemble_results(const model::BuiltModel& bau_model, const solver::Solution& bau,
                                const model::BuiltModel& opt_model, const solver::Solution& opt,
                                const Scenario& s);

}  // namespace deropt::econ
