#include "deropt/outage/simulator.hpp"

#include <algorithm>
#include <sstream>

#include "deropt/core/error.hpp"

namespace deropt::outage {

namespace {

constexpr double kTol = 1e-9;

int march(const Resources& r, double soc, const TimeSeries& critical, int start) {
  const TimeGrid& g = critical.grid();
  const int H = g.horizon_steps;
  const double dt = g.delta_hours();
  const Battery& b = r.battery;
  std::vector<double> fuel;
  for (const auto& gen : r.generators) fuel.push_back(gen.fuel_available);

  for (int k = 0; k < H; ++k) {
    const int t = (start + k) % H;
    double need = critical[t];
    double renewable = 0.0;
    for (const auto& re : r.renewables) renewable += re.kw * re.production_factor[t];
    if (renewable >= need) {
      const double surplus = std::min(renewable - need, b.kw);
      soc = std::min(b.kwh, soc + surplus * b.eta_charge * dt);
      continue;
    }
    need -= renewable;

    const double stored = std::max(0.0, soc - b.soc_min_kwh);
    const double discharge = std::min({need, b.kw, stored * b.eta_discharge / dt});
    if (discharge > 0.0) {
      soc -= discharge * dt / b.eta_discharge;
      need -= discharge;
    }

    for (std::size_t i = 0; i < r.generators.size() && need > kTol; ++i) {
      const auto& gen = r.generators[i];
      const double avail = gen.availability.size() > 0 ? gen.availability[t] : 1.0;
      const double cap = gen.kw * avail;
      if (cap <= 0.0) continue;
      const double floor = gen.min_turndown * cap;
      double out = std::min(cap, std::max(need, floor));
      const double burn = (gen.fuel_slope * out + gen.fuel_intercept) * dt;
      if (burn > fuel[i]) {
        if (gen.fuel_slope <= 0.0) continue;
        out = (fuel[i] / dt - gen.fuel_intercept) / gen.fuel_slope;
        if (out < floor || out <= 0.0) continue;
      }
      fuel[i] -= (gen.fuel_slope * out + gen.fuel_intercept) * dt;
      need -= std::min(out, need);
    }
    if (need > kTol) return k;
  }
  return H;
}

}  // namespace

OutageSimResult simulate_outages(const Resources& r, const std::optional<TimeSeries>& soc,
                                 const TimeSeries& critical, int duration_steps) {
  const TimeGrid& g = critical.grid();
  const int H = g.horizon_steps;
  if (r.battery.kwh > 0.0 && !soc) {
    throw Error(ErrorCode::MissingSoc, "storage is sized but no state of charge was given");
  }
  if (soc && soc->size() != H) {
    throw Error(ErrorCode::LengthMismatch, "state of charge does not match the critical load");
  }
  OutageSimResult out;
  out.duration_steps = duration_steps;
  out.survived_steps.resize(H);
  std::array<int, 12> month_n{}, month_ok{};
  std::array<int, 24> hour_n{}, hour_ok{};
  int ok = 0;
  for (int s = 0; s < H; ++s) {
    const double start_soc = r.battery.kwh > 0.0 ? (*soc)[s] : 0.0;
    out.survived_steps[s] = march(r, start_soc, critical, s);
    const bool survived = out.survived_steps[s] >= duration_steps;
    ok += survived;
    const int m = g.month(s);
    const int hr = g.hour_of_day(s);
    ++month_n[m];
    ++hour_n[hr];
    month_ok[m] += survived;
    hour_ok[hr] += survived;
  }
  out.prob_annual = H > 0 ? static_cast<double>(ok) / H : 0.0;
  for (int m = 0; m < 12; ++m) {
    out.prob_by_month[m] = month_n[m] > 0 ? static_cast<double>(month_ok[m]) / month_n[m] : 0.0;
  }
  for (int h = 0; h < 24; ++h) {
    out.prob_by_hour[h] = hour_n[h] > 0 ? static_cast<double>(hour_ok[h]) / hour_n[h] : 0.0;
  }
  return out;
}

nlohmann::json to_json(const OutageSimResult& r) {
  return {{"survived_steps", r.survived_steps},
          {"duration_steps", r.duration_steps},
          {"prob_annual", r.prob_annual},
          {"prob_by_month", r.prob_by_month},
          {"prob_by_hour", r.prob_by_hour}};
}

std::string to_csv(const OutageSimResult& r) {
  std::ostringstream os;
  os << "start_step,survived_steps\n";
  for (std::size_t s = 0; s < r.survived_steps.size(); ++s) {
    os << s << ',' << r.survived_steps[s] << '\n';
  }
  return os.str();
}

}  // namespace deropt::outage
