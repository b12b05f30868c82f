#include <cmath>

#include "doctest.h"
#include "deropt/core/error.hpp"
#include "deropt/model/builder.hpp"
#include "deropt/model/lp_format.hpp"
#include "deropt/solver/milp.hpp"
#include "support/builders.hpp"

using namespace deropt;
using namespace deropt::model;
using namespace deropt::testing;
using solver::SolveStatus;

namespace {

solver::Solution solve(const BuiltModel& bm, double gap = 1e-9) {
  solver::SolveConfig cfg;
  cfg.mip_gap_rel = gap;
  return solver::solve_milp(bm.milp, cfg);
}

double value(const BuiltModel& bm, const solver::Solution& s, std::string_view name) {
  return s.values[bm.milp.var(name).id];
}

// Six hourly steps with TOU energy, a constant-output generator and storage.
Scenario small_hybrid() {
  TimeGrid g{1, 6, 0};
  Scenario s = grid_only(g, {4, 6, 9, 12, 7, 5}, hourly_energy_urdb({0.10, 0.10, 0.30, 0.45, 0.30, 0.10}));
  TechSpec gen = generator_tech(40.0, 20.0);
  gen.production_factor_source = "constant:1";
  gen.fuel_slope = 0.1;
  gen.fuel_cost = 1.5;
  gen.min_turndown = 0.3;
  s.techs.push_back(gen);
  StorageSpec b;
  b.cost_per_kw = 15.0;
  b.cost_per_kwh = 10.0;
  b.round_trip_efficiency = 0.9;
  b.soc_init = 0.5;
  s.storage = b;
  s.financial.analysis_years = 1;
  return s;
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("one step grid-only model costs one dollar") {
  TimeGrid g{1, 1, 0};
  const Scenario s = grid_only(g, {10.0}, flat_energy_urdb(0.1));
  const auto bm = build_model(s);
  CHECK(bm.milp.well_formedness_errors().empty());
  const auto sol = solve(bm);
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.objective == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(value(bm, sol, "prod[grid,0]") == doctest::Approx(10.0));
}

TEST_CASE("two-step free battery shifts purchase to the cheap step") {
  TimeGrid g{1, 2, 0};
  Scenario s = grid_only(g, {0.0, 10.0}, hourly_energy_urdb({0.1, 1.0}));
  const auto without = solve(build_model(s));
  REQUIRE(without.status == SolveStatus::Optimal);
  CHECK(without.objective == doctest::Approx(10.0));

  s.storage = free_lossless_storage();
  const auto bm = build_model(s);
  const auto sol = solve(bm);
  REQUIRE(sol.status == SolveStatus::Optimal);

  // Lattice: buy c0 kWh at step 0 into the battery, the rest at step 1.
  double best = 1e300;
  for (int c0 = 0; c0 <= 10; ++c0) best = std::min(best, 0.1 * c0 + 1.0 * (10 - c0));
  CHECK(best == doctest::Approx(1.0));
  CHECK(sol.objective == doctest::Approx(best).epsilon(1e-9));
  CHECK(value(bm, sol, "charge[grid,0]") == doctest::Approx(10.0));
  CHECK(value(bm, sol, "discharge[1]") == doctest::Approx(10.0));
}

TEST_CASE("net-metering limit of zero forces the NM instance to zero") {
  TimeGrid g{1, 24, 0};
  Scenario s = grid_only(g, std::vector<double>(24, 20.0), flat_energy_urdb(0.3));
  TechSpec pv = pv_tech(0.5);
  pv.can_net_meter = true;
  pv.can_export = true;
  s.techs.push_back(pv);
  s.tariff.net_metering_limit_kw = 0.0;
  const auto bm = build_model(s);
  REQUIRE(bm.layout.techs.size() == 2);
  const auto sol = solve(bm);
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(value(bm, sol, "size[PV_NM]") == doctest::Approx(0.0));
  CHECK(value(bm, sol, "size[PV]") > 1.0);
}

TEST_CASE("technology expansion by segment") {
  Scenario s;
  s.grid = TimeGrid{1, 24, 0};
  TechSpec pv = pv_tech(1.0);
  pv.can_net_meter = true;
  s.techs = {pv};
  auto one = expand_techs(s);
  REQUIRE(one.size() == 2);
  CHECK(one[0].id() == "PV_NM");
  CHECK(one[1].id() == "PV");
  CHECK(one[0].base.class_name == one[1].base.class_name);

  s.techs = {generator_tech(1.0, 10.0)};
  CHECK(expand_techs(s).size() == 1);

  TechSpec wind = pv;
  wind.name = wind.class_name = "Wind";
  wind.production_factor_source = "synthetic:wind";
  s.techs = {pv, wind};
  CHECK(expand_techs(s).size() == 4);
}

TEST_CASE("grid-only model reproduces the tariff bill") {
  TimeGrid g{1, 48, 40};
  std::mt19937_64 rng(3);
  const auto load = uniform_vector(rng, 48, 5.0, 40.0);
  auto urdb = hourly_energy_urdb({0.07, 0.11, 0.19});
  urdb["energyratestructure"][1] = nlohmann::json::array({{{"rate", 0.09}, {"max", 60.0}}, {{"rate", 0.15}}});
  urdb["flatdemandstructure"] = nlohmann::json::array({nlohmann::json::array({{{"rate", 6.0}}})});
  urdb["flatdemandmonths"] = std::vector<int>(12, 0);
  urdb["demandratestructure"] = nlohmann::json::array(
      {nlohmann::json::array({{{"rate", 0.0}}}),
       nlohmann::json::array({{{"rate", 3.0}, {"max", 20.0}}, {{"rate", 5.0}}})});
  std::array<int, 24> peak{};
  for (int h = 12; h < 20; ++h) peak[h] = 1;
  urdb["demandweekdayschedule"] = month_hour_schedule(peak);
  urdb["demandweekendschedule"] = flat_schedule();
  urdb["fixedmonthlycharge"] = 12.5;
  const Scenario s = grid_only(g, load, urdb);

  const auto bm = build_model(s);
  const auto sol = solve(bm);
  REQUIRE(sol.status == SolveStatus::Optimal);
  const auto bill = tariff::compute_bill(bm.data.tariff, series(g, load), {}, bm.data.annual_load_kwh);
  CHECK(bm.milp.evaluate(bm.layout.utility_cost(), sol.values) ==
        doctest::Approx(bill.total()).epsilon(1e-9));
  CHECK(sol.objective == doctest::Approx(bill.total()).epsilon(1e-9));
}

TEST_CASE("monthly minimum charge is an adder in the model") {
  TimeGrid g{1, 24, 0};
  auto urdb = flat_energy_urdb(0.1);
  urdb["mincharge"] = 100.0;
  urdb["minchargeunits"] = "$/month";
  const Scenario s = grid_only(g, std::vector<double>(24, 10.0), urdb);
  const auto bm = build_model(s);
  const auto sol = solve(bm);
  REQUIRE(sol.status == SolveStatus::Optimal);
  const auto bill = tariff::compute_bill(bm.data.tariff, series(g, std::vector<double>(24, 10.0)), {},
                                         bm.data.annual_load_kwh);
  CHECK(bill.total() == doctest::Approx(100.0));
  CHECK(sol.objective == doctest::Approx(bill.total()));
}

TEST_CASE("declining blocks and inverted bounds are rejected") {
  TimeGrid g{1, 24, 0};
  auto urdb = flat_energy_urdb(0.12);
  urdb["energyratestructure"][0] = nlohmann::json::array({{{"rate", 0.12}, {"max", 500.0}}, {{"rate", 0.08}}});
  Scenario s = grid_only(g, std::vector<double>(24, 10.0), urdb);
  try {
    build_model(s);
    FAIL("expected DecliningBlockUnsupported");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DecliningBlockUnsupported);
  }

  s = grid_only(g, std::vector<double>(24, 10.0), flat_energy_urdb(0.1));
  TechSpec pv = pv_tech(1.0);
  pv.min_kw = 10.0;
  pv.max_kw = 5.0;
  s.techs.push_back(pv);
  try {
    build_model(s);
    FAIL("expected InfeasibleBoundsDetected");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InfeasibleBoundsDetected);
  }
}

TEST_CASE("charging is restricted to the allowed sources") {
  TimeGrid g{1, 24, 0};
  Scenario s = grid_only(g, std::vector<double>(24, 10.0), flat_energy_urdb(0.1));
  s.techs.push_back(pv_tech(1.0));
  s.storage = free_lossless_storage();
  s.storage->allowed_chargers = std::set<std::string>{"PV"};
  const auto bm = build_model(s);
  CHECK(bm.layout.storage->grid_charge.empty());
  CHECK_FALSE(bm.milp.find("charge[grid,0]").has_value());
  CHECK(bm.milp.find("charge[PV,0]").has_value());
}

TEST_CASE("storage dynamics hold at the optimum") {
  const Scenario s = small_hybrid();
  const auto bm = build_model(s);
  const auto sol = solve(bm, 1e-7);
  REQUIRE(sol.status == SolveStatus::Optimal);
  const auto& sv = *bm.layout.storage;
  const auto& x = sol.values;
  const double kwh = x[sv.kwh.id], kw = x[sv.kw.id];
  CHECK(sv.eta_charge == doctest::Approx(std::sqrt(0.9)));
  CHECK(x[sv.soc[0].id] == doctest::Approx(0.5 * kwh));
  CHECK(x[sv.soc.back().id] >= 0.5 * kwh - 1e-7);
  for (int h = 0; h < 6; ++h) {
    double charge = sv.grid_charge.empty() ? 0.0 : x[sv.grid_charge[h].id];
    for (const auto& t : bm.layout.techs) {
      if (!t.charge.empty()) charge += x[t.charge[h].id];
    }
    CHECK(charge <= kw + 1e-7);
    CHECK(x[sv.discharge[h].id] <= kw + 1e-7);
    CHECK(x[sv.soc[h + 1].id] == doctest::Approx(x[sv.soc[h].id] + sv.eta_charge * charge -
                                                 x[sv.discharge[h].id] / sv.eta_discharge));
  }
}

TEST_CASE("zero reserve leaves the optimum unchanged") {
  Scenario s = small_hybrid();
  const auto base = solve(build_model(s), 1e-9);
  s.spinning_reserve = TimeSeries::zeros(s.grid, Unit::kW);
  const auto with = solve(build_scenario_model(s), 1e-9);
  REQUIRE(base.status == SolveStatus::Optimal);
  REQUIRE(with.status == SolveStatus::Optimal);
  CHECK(with.objective == doctest::Approx(base.objective).epsilon(1e-8));
}

TEST_CASE("reserve rows and linearization hold at the optimum") {
  Scenario s = small_hybrid();
  s.spinning_reserve = series(s.grid, {2, 3, 4, 4, 3, 2});
  const auto bm = build_scenario_model(s);
  const auto base = solve(build_model(small_hybrid()), 1e-9);
  const auto sol = solve(bm, 1e-9);
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.objective >= base.objective - 1e-7 * std::abs(base.objective));
  const auto& x = sol.values;
  const auto& sv = *bm.layout.storage;
  const auto& gen = bm.layout.techs[0];
  const double size = x[gen.size.id], kw = x[sv.kw.id], kwh = x[sv.kwh.id];
  for (int h = 0; h < 6; ++h) {
    const double on = x[gen.on[h].id], y = x[gen.rated_on[h].id], prod = x[gen.prod[h].id];
    CHECK(std::abs(y - on * size) <= 1e-6);
    const double soc = x[sv.soc[h].id];
    const double down = prod + std::min(kw, kwh - soc);
    const double up = (y - prod) + std::min(kw, soc);
    CHECK(down >= (*s.spinning_reserve)[h] - 1e-6);
    CHECK(up >= (*s.spinning_reserve)[h] - 1e-6);
  }
}

TEST_CASE("battery pinned full cannot hold downward reserve") {
  TimeGrid g{1, 24, 0};
  Scenario s = grid_only(g, std::vector<double>(24, 3.0), flat_energy_urdb(0.1));
  StorageSpec b = free_lossless_storage();
  b.min_kw = b.max_kw = 10.0;
  b.min_kwh = b.max_kwh = 20.0;
  b.soc_init = 1.0;
  s.storage = b;
  s.spinning_reserve = TimeSeries::constant(g, 5.0, Unit::kW);
  // Downward headroom at step 0 is min{10, 20 - 20} = 0 < 5.
  CHECK(std::min(10.0, 20.0 - 20.0) < 5.0);
  const auto sol = solve(build_scenario_model(s));
  CHECK(sol.status == SolveStatus::Infeasible);
}

TEST_CASE("reserve without storage or dispatchables is rejected") {
  TimeGrid g{1, 24, 0};
  Scenario s = grid_only(g, std::vector<double>(24, 3.0), flat_energy_urdb(0.1));
  s.techs.push_back(pv_tech(1.0));
  s.spinning_reserve = TimeSeries::constant(g, 1.0, Unit::kW);
  try {
    build_scenario_model(s);
    FAIL("expected ReserveWithoutCapability");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ReserveWithoutCapability);
  }
}

TEST_CASE("online generator covers upward reserve with its own headroom") {
  TimeGrid g{1, 1, 0};
  Scenario s = grid_only(g, {10.0}, flat_energy_urdb(0.1));
  TechSpec gen = generator_tech(1.0, 15.0);
  gen.production_factor_source = "constant:1";
  gen.min_kw = 15.0;
  s.techs.push_back(gen);
  s.spinning_reserve = TimeSeries::constant(g, 5.0, Unit::kW);
  auto bm = build_scenario_model(s);
  bm.milp.set_bounds(bm.layout.grid[0], 0.0, 0.0);
  CHECK(bm.layout.reserve_up.empty());  // no storage, so no M_up term
  const auto sol = solve(bm);
  REQUIRE(sol.status == SolveStatus::Optimal);
  const auto& t = bm.layout.techs[0];
  CHECK(sol.value(t.size) == doctest::Approx(15.0));
  CHECK(sol.value(t.on[0]) == doctest::Approx(1.0));
  CHECK(sol.value(t.prod[0]) == doctest::Approx(10.0));
  CHECK(sol.value(t.rated_on[0]) - sol.value(t.prod[0]) >= 5.0 - 1e-9);
}

TEST_CASE("outage steps island the site on critical load") {
  TimeGrid g{1, 24, 0};
  Scenario s = grid_only(g, std::vector<double>(24, 10.0), flat_energy_urdb(0.1));
  s.techs.push_back(generator_tech(50.0, 100.0));
  s.load.critical = 0.5;
  s.outage = OutageSpec{10, 14};
  s.analysis_type = AnalysisType::Resilience;
  const auto bm = build_model(s);
  const auto sol = solve(bm);
  REQUIRE(sol.status == SolveStatus::Optimal);
  for (int h = 10; h < 14; ++h) {
    CHECK(sol.value(bm.layout.grid[h]) == doctest::Approx(0.0));
    CHECK(sol.value(bm.layout.techs[0].prod[h]) == doctest::Approx(5.0));
  }
  CHECK(sol.value(bm.layout.techs[0].size) == doctest::Approx(5.0));
}

TEST_CASE("business-as-usual strips candidate assets") {
  Scenario s = small_hybrid();
  s.spinning_reserve = TimeSeries::constant(s.grid, 1.0, Unit::kW);
  s.outage = OutageSpec{1, 3};
  s.analysis_type = AnalysisType::Resilience;
  const Scenario bau = business_as_usual(s);
  CHECK(bau.techs.empty());
  CHECK_FALSE(bau.storage.has_value());
  CHECK_FALSE(bau.outage.has_value());
  CHECK_FALSE(bau.spinning_reserve.has_value());
  CHECK(bau.analysis_type == AnalysisType::Financial);
}

TEST_CASE("LP text round trip") {
  Scenario s = small_hybrid();
  s.spinning_reserve = TimeSeries::constant(s.grid, 2.0, Unit::kW);
  const auto bm = build_scenario_model(s);
  const std::string text = write_lp(bm.milp);
  const MilpModel back = read_lp(text);
  CHECK(back.num_vars() == bm.milp.num_vars());
  CHECK(back.num_constraints() == bm.milp.num_constraints());
  CHECK(back.num_binaries() == bm.milp.num_binaries());
  CHECK(write_lp(back) == text);
  CHECK(back.var("size[Generator]").id == bm.milp.var("size[Generator]").id);
  solver::SolveConfig cfg;
  cfg.mip_gap_rel = 1e-9;
  const auto a = solver::solve_milp(bm.milp, cfg);
  const auto b = solver::solve_milp(back, cfg);
  REQUIRE(a.status == SolveStatus::Optimal);
  CHECK(b.objective == doctest::Approx(a.objective).epsilon(1e-9));

  CHECK_THROWS_AS(read_lp("Maximize\n obj: x\nEnd\n"), Error);
}

}  // TEST_SUITE
