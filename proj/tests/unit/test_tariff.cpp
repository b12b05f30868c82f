#include <random>

#include "doctest.h"
#include "deropt/core/error.hpp"
#include "deropt/tariff/tariff.hpp"
#include "support/builders.hpp"

using namespace deropt;
using namespace deropt::tariff;
using namespace deropt::testing;

namespace {

const TimeGrid kDay{1, 24, 0};

TimeSeries constant_kw(const TimeGrid& g, double kw) { return TimeSeries::constant(g, kw, Unit::kW); }

nlohmann::json tiered_urdb() {
  auto u = flat_energy_urdb(0.0);
  u["energyratestructure"][0] = nlohmann::json::array({{{"rate", 0.08}, {"max", 500.0}}, {{"rate", 0.12}}});
  return u;
}

// Per-kWh marginal pricing of the two-block schedule.
double marginal_loop(int kwh) {
  double cost = 0.0;
  for (int k = 0; k < kwh; ++k) cost += k < 500 ? 0.08 : 0.12;
  return cost;
}

nlohmann::json random_urdb(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> r(0.03, 0.3), d(0.0, 12.0);
  auto u = hourly_energy_urdb({r(rng), r(rng), r(rng)});
  const double a = r(rng);
  u["energyratestructure"][2] =
      nlohmann::json::array({{{"rate", a}, {"max", 40.0}}, {{"rate", a + 0.05}}});
  u["flatdemandstructure"] = nlohmann::json::array({nlohmann::json::array({{{"rate", d(rng)}}})});
  u["flatdemandmonths"] = std::vector<int>(12, 0);
  u["fixedmonthlycharge"] = d(rng);
  return u;
}

}  // namespace

TEST_SUITE("tariff") {

TEST_CASE("flat rate parses to one period with one tier") {
  const Tariff t = parse_urdb(flat_energy_urdb(0.10), kDay);
  REQUIRE(t.energy_tiers.size() == 1);
  REQUIRE(t.energy_tiers[0].size() == 1);
  CHECK(t.energy_tiers[0][0].rate == 0.10);
  for (int p : t.energy_period) CHECK(p == 0);
  CHECK(t.demand_tou_tiers.empty());
}

TEST_CASE("weekday afternoon TOU schedule") {
  std::array<int, 24> wd{};
  for (int h = 14; h < 18; ++h) wd[h] = 1;
  nlohmann::json u = {{"energyratestructure", {{{{"rate", 0.1}}}, {{{"rate", 0.3}}}}},
                      {"energyweekdayschedule", month_hour_schedule(wd)},
                      {"energyweekendschedule", flat_schedule()}};
  const Tariff t = parse_urdb(u, TimeGrid{1, 24 * 7, 0});
  CHECK(t.energy_period[15] == 1);
  CHECK(t.energy_period[13] == 0);
  CHECK(t.energy_period[18] == 0);
  CHECK(t.energy_period[5 * 24 + 15] == 0);  // Saturday
}

TEST_CASE("tiered energy block bounds") {
  const Tariff t = parse_urdb(tiered_urdb(), kDay);
  REQUIRE(t.energy_tiers[0].size() == 2);
  CHECK(t.energy_tiers[0][0].upper == 500.0);
  CHECK(t.energy_tiers[0][1].upper == std::numeric_limits<double>::infinity());
  CHECK_FALSE(t.declining_block);
}

TEST_CASE("bill examples") {
  const auto load = constant_kw(kDay, 100.0);
  CHECK(compute_bill(parse_urdb(flat_energy_urdb(0.10), kDay), load, {}, 2400).total() ==
        doctest::Approx(240.0));

  const Tariff with_demand = parse_urdb(blended_rate_document(0.10, 5.0), kDay);
  const auto b = compute_bill(with_demand, load, {}, 2400);
  CHECK(b.annual.demand_cost_flat == doctest::Approx(500.0));
  CHECK(b.total() == doctest::Approx(740.0));

  const auto tiered = compute_bill(parse_urdb(tiered_urdb(), kDay), load, {}, 2400);
  CHECK(marginal_loop(2400) == doctest::Approx(268.0));
  CHECK(tiered.total() == doctest::Approx(marginal_loop(2400)));
}

TEST_CASE("TOU demand tiers per window") {
  auto u = flat_energy_urdb(0.0);
  u["demandratestructure"] = nlohmann::json::array(
      {nlohmann::json::array({{{"rate", 1.0}}}),
       nlohmann::json::array({{{"rate", 4.0}, {"max", 10.0}}, {{"rate", 9.0}}})});
  std::array<int, 24> wd{};
  for (int h = 12; h < 16; ++h) wd[h] = 1;
  u["demandweekdayschedule"] = month_hour_schedule(wd);
  u["demandweekendschedule"] = flat_schedule();
  std::vector<double> kw(24, 5.0);
  kw[13] = 25.0;
  kw[3] = 8.0;
  const auto bill = compute_bill(parse_urdb(u, kDay), series(kDay, kw), {}, 1e9);
  CHECK(bill.annual.demand_cost_tou == doctest::Approx(8.0 * 1.0 + 10.0 * 4.0 + 15.0 * 9.0));
}

TEST_CASE("bill splits by calendar month") {
  const TimeGrid g{1, 48, 30};  // Jan 31 and Feb 1
  const Tariff t = parse_urdb(blended_rate_document(0.1, 2.0), g);
  std::vector<double> kw(48, 1.0);
  kw[30] = 7.0;
  const auto b = compute_bill(t, series(g, kw), {}, 1e9);
  CHECK(b.months[0].demand_cost_flat == doctest::Approx(2.0));
  CHECK(b.months[1].demand_cost_flat == doctest::Approx(14.0));
  CHECK(t.months_in_horizon() == std::vector<int>{0, 1});
}

TEST_CASE("zero purchase leaves only fixed and minimum charges") {
  auto u = random_urdb(*std::make_unique<std::mt19937_64>(9));
  u["mincharge"] = 30.0;
  const Tariff t = parse_urdb(u, kDay);
  const auto b = compute_bill(t, constant_kw(kDay, 0.0), {}, 100.0);
  CHECK(b.annual.energy_cost == 0.0);
  CHECK(b.annual.demand_cost_flat == 0.0);
  CHECK(b.total() == doctest::Approx(b.annual.fixed_cost + b.annual.min_charge_adder));
  CHECK(b.total() == doctest::Approx(std::max(30.0, t.fixed_monthly_charge)));
}

TEST_CASE("bill components are monotone in purchase") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    const Tariff t = parse_urdb(random_urdb(rng), kDay);
    auto lo = uniform_vector(rng, 24, 0.0, 30.0);
    auto hi = lo;
    const auto bump = uniform_vector(rng, 24, 0.0, 10.0);
    for (int h = 0; h < 24; ++h) hi[h] += bump[h];
    const auto a = compute_bill(t, series(kDay, lo), {}, 1e9).annual;
    const auto b = compute_bill(t, series(kDay, hi), {}, 1e9).annual;
    CHECK(b.energy_cost >= a.energy_cost - 1e-12);
    CHECK(b.demand_cost_flat >= a.demand_cost_flat - 1e-12);
    CHECK(b.demand_cost_tou >= a.demand_cost_tou - 1e-12);
    CHECK(b.fixed_cost == a.fixed_cost);
  }
}

TEST_CASE("flat energy bill is linear in load") {
  std::mt19937_64 rng(4);
  const Tariff t = parse_urdb(flat_energy_urdb(0.137), kDay);
  const auto load = uniform_vector(rng, 24, 0.0, 50.0);
  const double base = compute_bill(t, series(kDay, load), {}, 1e9).total();
  for (double c : {0.0, 0.5, 3.0, 17.25}) {
    auto scaled = load;
    for (auto& x : scaled) x *= c;
    CHECK(compute_bill(t, series(kDay, scaled), {}, 1e9).total() == doctest::Approx(c * base));
  }
}

TEST_CASE("export credit stops at annual load") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    Tariff t = parse_urdb(random_urdb(rng), kDay, 100.0, 0.03);
    const auto nm = uniform_vector(rng, 24, 0.0, 20.0);
    const auto ws = uniform_vector(rng, 24, 0.0, 20.0);
    const double cap = uniform_vector(rng, 1, 0.0, 600.0)[0];
    const auto b = compute_bill(t, constant_kw(kDay, 1.0),
                                {{ExportClass::NetMetered, series(kDay, nm)},
                                 {ExportClass::Wholesale, series(kDay, ws)}},
                                cap);
    CHECK(b.credited_export_kwh <= cap + 1e-9);
    CHECK(b.annual.export_credit <= 0.0);
  }
  // Chronological: the first step's export is credited at the retail rate.
  const Tariff t = parse_urdb(flat_energy_urdb(0.2), kDay, 100.0, 0.05);
  std::vector<double> nm(24, 0.0);
  nm[0] = 10.0;
  const auto b = compute_bill(t, constant_kw(kDay, 0.0), {{ExportClass::NetMetered, series(kDay, nm)}}, 4.0);
  CHECK(b.credited_export_kwh == doctest::Approx(4.0));
  CHECK(b.annual.export_credit == doctest::Approx(-0.8));
}

TEST_CASE("annual minimum charge lands in the last month") {
  auto u = flat_energy_urdb(0.01);
  u["mincharge"] = 500.0;
  u["minchargeunits"] = "$/year";
  const Tariff t = parse_urdb(u, kDay);
  CHECK(compute_bill(t, constant_kw(kDay, 1.0), {}, 1e9).total() == doctest::Approx(500.0));
}

TEST_CASE("parse errors and warnings") {
  nlohmann::json missing = {{"energyratestructure", {{{{"rate", 0.1}}}}}};
  try {
    parse_urdb(missing, kDay);
    FAIL("expected MissingSchedule");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MissingSchedule);
  }

  auto declining = flat_energy_urdb(0.2);
  declining["energyratestructure"][0] = nlohmann::json::array({{{"rate", 0.2}, {"max", 100.0}}, {{"rate", 0.1}}});
  CHECK(parse_urdb(declining, kDay).declining_block);

  auto lookback = flat_energy_urdb(0.1);
  lookback["lookbackPercent"] = 0.5;
  CHECK_FALSE(parse_urdb(lookback, kDay).warnings.empty());

  auto bad_period = flat_energy_urdb(0.1);
  bad_period["energyweekdayschedule"][0][3] = 4;
  CHECK_THROWS_AS(parse_urdb(bad_period, kDay), Error);
}

}  // TEST_SUITE
