#include <cmath>

#include "doctest.h"
#include "deropt/core/error.hpp"
#include "deropt/core/scenario_json.hpp"
#include "deropt/econ/economics.hpp"
#include "deropt/service/pipeline.hpp"
#include "support/builders.hpp"

using namespace deropt;
using namespace deropt::econ;
using namespace deropt::testing;

namespace {

// Closed-form geometric series r (1 - r^N) / (1 - r).
double geometric(double g, double d, int n) {
  const double r = (1 + g) / (1 + d);
  return r == 1.0 ? n : r * (1 - std::pow(r, n)) / (1 - r);
}

service::PipelineResult run(const Scenario& s, double gap = 1e-7) {
  service::PipelineConfig cfg;
  cfg.solve.mip_gap_rel = gap;
  cfg.providers.fixture_dir = DEROPT_FIXTURE_DIR;
  return service::run_pipeline(s, cfg);
}

Scenario fixture(const char* name) {
  return load_scenario_file(std::string(DEROPT_FIXTURE_DIR) + "/" + name);
}

}  // namespace

TEST_SUITE("econ") {

TEST_CASE("present worth factors") {
  CHECK(present_worth(0.0, 0.0, 25) == doctest::Approx(25.0));
  CHECK(present_worth(0.05, 0.05, 10) == doctest::Approx(10.0));
  const double r = 1.02 / 1.08;
  CHECK(present_worth(0.02, 0.08, 3) == doctest::Approx(r + r * r + r * r * r).epsilon(1e-14));
  CHECK(present_worth(0.02, 0.08, 3) == doctest::Approx(2.678840).epsilon(1e-6));
  for (int n : {1, 7, 25, 40}) {
    CHECK(present_worth(0.023, 0.083, n) == doctest::Approx(geometric(0.023, 0.083, n)).epsilon(1e-12));
  }
  FinancialSpec f;
  const auto p = present_worth_factors(f);
  CHECK(p.pwf_e == doctest::Approx(geometric(f.electricity_escalation, f.discount_rate, f.analysis_years)));
  CHECK(p.pwf_om == doctest::Approx(geometric(f.inflation_rate, f.discount_rate, f.analysis_years)));
  CHECK(p.pwf_flat == doctest::Approx(geometric(0.0, f.discount_rate, f.analysis_years)));
}

TEST_CASE("emissions of a constant purchase") {
  const TimeGrid g{1, 24, 0};
  CHECK(emissions_kg(Eigen::VectorXd::Ones(24), TimeSeries::constant(g, 0.5, Unit::KgPerKWh)) ==
        doctest::Approx(12.0));
}

TEST_CASE("no candidate technologies gives NPV of exactly zero") {
  const auto res = run(fixture("grid_only.json"));
  REQUIRE(res.complete);
  CHECK(res.document["Financial"]["npv"].get<double>() == 0.0);
  CHECK(res.document["Financial"]["lcc"] == res.document["Financial"]["lcc_bau"]);
  CHECK(res.document["state"] == "Complete");
  CHECK(res.document["Outage"].is_null());
}

TEST_CASE("PV and storage scenario") {
  const Scenario s = fixture("pv_battery.json");
  const auto res = run(s);
  REQUIRE(res.complete);
  const auto& fin = res.document["Financial"];
  const double lcc_bau = fin["lcc_bau"].get<double>();
  CHECK(fin["npv"].get<double>() >= -1e-6 * lcc_bau);
  const double parts = fin["capital_cost"].get<double>() - fin["incentives_present_value"].get<double>() +
                       fin["om_cost_present_value"].get<double>() +
                       fin["utility_cost_present_value"].get<double>();
  CHECK(fin["lcc"].get<double>() == doctest::Approx(parts).epsilon(1e-9));
  CHECK(fin["utility_cost_present_value_bau"].get<double>() == doctest::Approx(lcc_bau).epsilon(1e-9));

  const auto& et = res.document["ElectricTariff"];
  CHECK(et["year_one_co2_kg_bau"].get<double>() ==
        doctest::Approx(0.45 * et["year_one_energy_kwh_bau"].get<double>()));
  // The year-one bill recomputed by the tariff engine matches the model's bill terms.
  const auto& bm = *res.opt_model;
  const auto d = extract_dispatch(bm, *res.opt_solution);
  CHECK(dispatch_bill(bm, d).total() ==
        doctest::Approx(bm.milp.evaluate(bm.layout.utility_cost(), res.opt_solution->values)).epsilon(1e-7));
  CHECK(et["year_one_bill"].get<double>() == doctest::Approx(dispatch_bill(bm, d).total()));
  CHECK(res.document["Storage"]["soc_kwh"].size() == 49);
}

TEST_CASE("dispatch CSV layout") {
  const auto res = run(fixture("pv_battery.json"));
  REQUIRE(res.complete);
  const auto csv = dispatch_csv(extract_dispatch(*res.opt_model, *res.opt_solution));
  const auto header = csv.substr(0, csv.find('\n'));
  CHECK(header == "step,load_kw,PV_NM_kw,PV_kw,charge_kw,discharge_kw,soc_kwh,grid_purchase_kw,export_kw");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 49);
}

TEST_CASE("assemble_results is pure and rejects unusable solutions") {
  const Scenario s = fixture("pv_battery.json");
  const auto opt = model::build_scenario_model(s);
  const auto bau = model::build_scenario_model(model::business_as_usual(s));
  solver::SolveConfig cfg;
  const auto so = solver::solve_milp(opt.milp, cfg);
  const auto sb = solver::solve_milp(bau.milp, cfg);
  const auto a = assemble_results(bau, sb, opt, so, s);
  const auto b = assemble_results(bau, sb, opt, so, s);
  CHECK(a == b);

  solver::Solution failed;
  failed.status = solver::SolveStatus::Infeasible;
  try {
    assemble_results(bau, sb, opt, failed, s);
    FAIL("expected StatusMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::StatusMismatch);
  }
}

TEST_CASE("resilience run reports the outage and islands the site") {
  TimeGrid g{1, 24, 0};
  Scenario s = grid_only(g, std::vector<double>(24, 10.0), flat_energy_urdb(0.1));
  s.techs.push_back(generator_tech(300.0, 50.0));
  s.techs.back().fuel_slope = 0.08;
  s.techs.back().fuel_cost = 2.0;
  s.load.critical = 0.5;
  s.outage = OutageSpec{6, 10};
  s.analysis_type = AnalysisType::Resilience;
  const auto res = run(s);
  REQUIRE(res.complete);
  const auto& doc = res.document;
  CHECK(doc["Financial"]["analysis_type"] == "Resilience");
  // Negative NPV is allowed here: the generator exists only for the outage.
  CHECK(doc["Financial"]["npv"].get<double>() < 0.0);
  for (int h = 6; h < 10; ++h) {
    CHECK(doc["ElectricTariff"]["grid_purchase_kw"][h].get<double>() == doctest::Approx(0.0));
  }
  CHECK(doc["Generator"]["size_kw"].get<double>() == doctest::Approx(5.0));
  CHECK(doc["Outage"]["outage_start_step"] == 6);
  CHECK(doc["Outage"]["survived_steps"].size() == 24);
  for (const auto& v : doc["Outage"]["survived_steps"]) CHECK(v.get<int>() == 24);
}

TEST_CASE("infeasible optimal model yields an error document") {
  const auto res = run(fixture("reserve_infeasible.json"));
  CHECK_FALSE(res.complete);
  CHECK(res.document["state"] == "Error");
  CHECK(res.document["Solver"]["status"] == "Infeasible");
  CHECK(res.document["Solver"]["status_bau"] == "Optimal");
}

TEST_CASE("pipeline is reproducible") {
  const Scenario s = fixture("pv_battery.json");
  const auto a = run(s, 1e-4), b = run(s, 1e-4);
  REQUIRE(a.complete);
  CHECK(service::dump_document(a.document) == service::dump_document(b.document));
}

}  // TEST_SUITE
