#include "doctest.h"
#include "deropt/core/error.hpp"
#include "support/builders.hpp"
#include "support/outage_cases.hpp"

using namespace deropt;
using namespace deropt::outage;
using namespace deropt::testing;

namespace {

const TimeGrid kDay{1, 24, 0};

Resources battery_only(double kw, double kwh, double eta_d = 1.0) {
  Resources r;
  r.battery = {kw, kwh, 1.0, eta_d, 0.0};
  return r;
}

}  // namespace

TEST_SUITE("outage") {

TEST_CASE("full battery serving one kW lasts ten steps") {
  const auto critical = TimeSeries::constant(kDay, 1.0, Unit::kW);
  const auto soc = TimeSeries::constant(kDay, 10.0, Unit::kWh);
  const auto r = simulate_outages(battery_only(10.0, 10.0), soc, critical, 10);
  for (int s = 0; s < 24; ++s) {
    CHECK(r.survived_steps[s] == 10);
    CHECK(r.survived_steps[s] == reservoir_oracle(10.0, 10.0, 1.0, 1.0, std::vector<double>(24, 1.0), s));
  }
  CHECK(r.prob_annual == 1.0);
  CHECK(simulate_outages(battery_only(10.0, 10.0), soc, critical, 11).prob_annual == 0.0);
}

TEST_CASE("zero critical load survives the whole horizon") {
  const auto r = simulate_outages(Resources{}, std::nullopt, TimeSeries::zeros(kDay, Unit::kW), 5);
  for (int s : r.survived_steps) CHECK(s == 24);
  CHECK(r.prob_annual == 1.0);
}

TEST_CASE("no resources survive nothing") {
  const auto r = simulate_outages(Resources{}, std::nullopt, TimeSeries::constant(kDay, 0.1, Unit::kW), 1);
  for (int s : r.survived_steps) CHECK(s == 0);
  CHECK(r.prob_annual == 0.0);
}

TEST_CASE("battery-only survival matches the cumulative reservoir") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 40; ++trial) {
    const int H = 24 * (1 + trial % 2);
    const TimeGrid g{1, H, 0};
    const auto crit = uniform_vector(rng, H, 0.2, 3.0);
    const double kw = 1.0 + 3.0 * uniform_vector(rng, 1, 0, 1)[0];
    const double kwh = 2.0 + 10.0 * uniform_vector(rng, 1, 0, 1)[0];
    const double eta = 0.9;
    const double floor = 0.1 * kwh;
    const auto start = uniform_vector(rng, H, floor, kwh);
    Resources r = battery_only(kw, kwh, eta);
    r.battery.soc_min_kwh = floor;
    const auto res = simulate_outages(r, series(g, start, Unit::kWh), series(g, crit), 1);
    for (int s = 0; s < H; ++s) {
      CHECK(res.survived_steps[s] == reservoir_oracle(kw, start[s] - floor, eta, 1.0, crit, s));
    }
  }
}

TEST_CASE("random systems match the step-marching oracle") {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 60; ++trial) {
    const int H = trial % 3 == 0 ? 48 : 24;
    const auto c = random_outage_case(rng, H);
    CHECK(simulate_case(c) == survival_oracle(c.sys, c.critical, c.soc));
  }
}

TEST_CASE("generator turndown and fuel limits") {
  Resources r;
  Generator g;
  g.name = "Generator";
  g.kw = 10.0;
  g.fuel_slope = 0.1;
  g.fuel_available = 2.0;  // 20 kWh at slope 0.1
  g.min_turndown = 0.5;    // at least 5 kW when running
  r.generators.push_back(g);
  // 2 kW load forces 5 kW output: 0.5 fuel per step, 4 steps.
  auto res = simulate_outages(r, std::nullopt, TimeSeries::constant(kDay, 2.0, Unit::kW), 4);
  CHECK(res.survived_steps[0] == 4);
  // 6 kW load: 0.6 per step, 3 full steps, then 0.2 fuel left for 2 kW < need.
  res = simulate_outages(r, std::nullopt, TimeSeries::constant(kDay, 6.0, Unit::kW), 4);
  CHECK(res.survived_steps[0] == 3);
}

TEST_CASE("generator availability gates output") {
  Resources r;
  Generator g;
  g.kw = 5.0;
  g.availability = Eigen::VectorXd::Ones(24);
  g.availability[3] = 0.0;
  r.generators.push_back(g);
  const auto res = simulate_outages(r, std::nullopt, TimeSeries::constant(kDay, 1.0, Unit::kW), 1);
  CHECK(res.survived_steps[0] == 3);
  CHECK(res.survived_steps[3] == 0);
  CHECK(res.survived_steps[4] == 23);
}

TEST_CASE("aggregates by month and hour") {
  const TimeGrid g{1, 48, 30};
  std::vector<double> crit(48, 1.0);
  for (int h = 24; h < 48; ++h) crit[h] = 0.0;
  const auto res = simulate_outages(Resources{}, std::nullopt, series(g, crit), 1);
  CHECK(res.prob_by_month[0] == 0.0);
  CHECK(res.prob_by_month[1] == 1.0);
  CHECK(res.prob_by_month[5] == 0.0);
  CHECK(res.prob_by_hour[7] == 0.5);
  CHECK(res.prob_annual == 0.5);
  const auto j = to_json(res);
  CHECK(j["survived_steps"].size() == 48);
  CHECK(to_csv(res).rfind("start_step,survived_steps\n0,0\n", 0) == 0);
}

TEST_CASE("monotone in battery energy and in load") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    auto c = random_outage_case(rng, 24);
    if (c.sys.batt_kwh <= 0) {
      c.sys.batt_kw = 2.0;
      c.sys.batt_kwh = 5.0;
      c.soc.assign(24, 2.5);
    }
    const auto base = simulate_case(c);

    auto bigger = c;
    const double k = 1.0 + 2.0 * uniform_vector(rng, 1, 0, 1)[0];
    bigger.sys.batt_kwh *= k;
    bigger.sys.floor_kwh *= k;
    for (auto& x : bigger.soc) x *= k;
    const auto more = simulate_case(bigger);

    auto heavier = c;
    const auto extra = uniform_vector(rng, 24, 0.0, 1.0);
    for (int h = 0; h < 24; ++h) heavier.critical[h] += extra[h];
    const auto less = simulate_case(heavier);

    for (int s = 0; s < 24; ++s) {
      CHECK(more[s] >= base[s]);
      CHECK(less[s] <= base[s]);
    }
  }
}

TEST_CASE("sized battery without state of charge") {
  try {
    simulate_outages(battery_only(1, 1), std::nullopt, TimeSeries::constant(kDay, 1.0, Unit::kW), 1);
    FAIL("expected MissingSoc");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MissingSoc);
  }
}

}  // TEST_SUITE
