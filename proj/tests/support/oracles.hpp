#pragma once

// Brute-force reference solutions used by the unit and acceptance tests.
// None of these call into the solver or the simulator.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <vector>

namespace deropt::testing {

inline constexpr double kNoValue = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// LP: min c'x s.t. rows (<= when sign = +1, >= when sign = -1), 0 <= x <= u.

struct DenseLp {
  Eigen::MatrixXd a;
  Eigen::VectorXd b;
  std::vector<int> sign;  // +1 for <=, -1 for >=
  Eigen::VectorXd c;
  Eigen::VectorXd upper;
};

inline DenseLp random_lp(std::mt19937_64& rng, int m, int n) {
  std::uniform_real_distribution<double> coef(-5.0, 5.0), up(1.0, 6.0), slack(0.0, 3.0);
  DenseLp lp;
  lp.a = Eigen::MatrixXd::NullaryExpr(m, n, [&] { return std::round(coef(rng) * 4) / 4; });
  lp.c = Eigen::VectorXd::NullaryExpr(n, [&] { return std::round(coef(rng) * 4) / 4; });
  lp.upper = Eigen::VectorXd::NullaryExpr(n, [&] { return std::round(up(rng)); });
  Eigen::VectorXd x0(n);
  for (int j = 0; j < n; ++j) {
    std::uniform_real_distribution<double> in(0.0, lp.upper[j]);
    x0[j] = in(rng);
  }
  lp.b.resize(m);
  for (int i = 0; i < m; ++i) {
    const int s = (rng() % 3 == 0) ? -1 : 1;
    lp.sign.push_back(s);
    lp.b[i] = lp.a.row(i).dot(x0) + s * slack(rng);
  }
  return lp;
}

// Enumerates every choice of n active constraints among the rows and the
// 2n bounds; returns the best feasible vertex objective.
inline double lp_vertex_oracle(const DenseLp& lp) {
  const int m = static_cast<int>(lp.a.rows());
  const int n = static_cast<int>(lp.a.cols());
  const int total = m + 2 * n;
  Eigen::MatrixXd g(total, n);
  Eigen::VectorXd h(total);
  for (int i = 0; i < m; ++i) {
    g.row(i) = lp.sign[i] * lp.a.row(i);
    h[i] = lp.sign[i] * lp.b[i];
  }
  for (int j = 0; j < n; ++j) {
    g.row(m + j).setZero();
    g(m + j, j) = -1.0;
    h[m + j] = 0.0;
    g.row(m + n + j).setZero();
    g(m + n + j, j) = 1.0;
    h[m + n + j] = lp.upper[j];
  }
  double best = kNoValue;
  std::vector<int> pick(n);
  std::function<void(int, int)> rec = [&](int start, int depth) {
    if (depth == n) {
      Eigen::MatrixXd sq(n, n);
      Eigen::VectorXd rhs(n);
      for (int k = 0; k < n; ++k) {
        sq.row(k) = g.row(pick[k]);
        rhs[k] = h[pick[k]];
      }
      Eigen::FullPivLU<Eigen::MatrixXd> lu(sq);
      if (lu.rank() < n) return;
      Eigen::VectorXd x = lu.solve(rhs);
      if (((g * x - h).array() > 1e-9 * (1.0 + h.array().abs())).any()) return;
      best = std::min(best, lp.c.dot(x));
      return;
    }
    for (int i = start; i <= total - (n - depth); ++i) {
      pick[depth] = i;
      rec(i + 1, depth + 1);
    }
  };
  rec(0, 0);
  return best;
}

// ---------------------------------------------------------------------------
// Pure binary programs: min c'y s.t. A y <= b, y in {0,1}^n.

inline double binary_enumeration_oracle(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                                        const Eigen::VectorXd& c) {
  const int n = static_cast<int>(c.size());
  double best = kNoValue;
  for (long mask = 0; mask < (1L << n); ++mask) {
    Eigen::VectorXd y(n);
    for (int j = 0; j < n; ++j) y[j] = (mask >> j) & 1;
    if (((a * y - b).array() > 1e-12).any()) continue;
    best = std::min(best, c.dot(y));
  }
  return best;
}

// Fixed-charge covering: min sum f_j y_j + c_j x_j s.t. sum x_j >= demand,
// 0 <= x_j <= cap_j y_j with unit_j >= 0. For each open set the continuous part is a greedy
// fill in order of unit cost.
inline double fixed_charge_oracle(const std::vector<double>& fixed, const std::vector<double>& unit,
                                  const std::vector<double>& cap, double demand) {
  const int n = static_cast<int>(fixed.size());
  double best = kNoValue;
  for (long mask = 0; mask < (1L << n); ++mask) {
    std::vector<int> open;
    double cost = 0.0, capacity = 0.0;
    for (int j = 0; j < n; ++j) {
      if ((mask >> j) & 1) {
        open.push_back(j);
        cost += fixed[j];
        capacity += cap[j];
      }
    }
    if (capacity + 1e-12 < demand) continue;
    std::sort(open.begin(), open.end(), [&](int p, int q) { return unit[p] < unit[q]; });
    double left = demand;
    for (int j : open) {
      const double take = std::min(left, cap[j]);
      cost += take * unit[j];
      left -= take;
    }
    best = std::min(best, cost);
  }
  return best;
}

// ---------------------------------------------------------------------------
// Dispatch lattice: integer battery flows, lossless, no export, hourly steps.

struct LatticeCase {
  std::vector<int> load;       // kW per step
  std::vector<double> rate;    // $/kWh per step
  std::vector<double> pv_factor;  // per step, times pv_kw must be integral
  double pv_cost = 0, kw_cost = 0, kwh_cost = 0;
};

// Least dispatch cost for fixed integer sizes, or kNoValue if infeasible.
// The battery starts empty and must not end below its start.
inline double lattice_dispatch_cost(const LatticeCase& c, int pv_kw, int batt_kw, int batt_kwh) {
  const int H = static_cast<int>(c.load.size());
  double best = kNoValue;
  std::function<void(int, int, double)> rec = [&](int h, int soc, double cost) {
    if (cost >= best) return;
    if (h == H) {
      best = std::min(best, cost);
      return;
    }
    const double pv = c.pv_factor[h] * pv_kw;
    for (int flow = -batt_kw; flow <= batt_kw; ++flow) {  // + charges
      const int next = soc + flow;
      if (next < 0 || next > batt_kwh) continue;
      if (-flow > c.load[h]) continue;  // surplus discharge has nowhere to go
      const double grid = std::max(0.0, c.load[h] + flow - pv);
      rec(h + 1, next, cost + c.rate[h] * grid);
    }
  };
  rec(0, 0, 0.0);
  return best;
}

inline double lattice_total_cost(const LatticeCase& c, int pv_kw, int batt_kw, int batt_kwh) {
  const double d = lattice_dispatch_cost(c, pv_kw, batt_kw, batt_kwh);
  if (d == kNoValue) return d;
  return d + c.pv_cost * pv_kw + c.kw_cost * batt_kw + c.kwh_cost * batt_kwh;
}

// ---------------------------------------------------------------------------
// Outage survival, recomputed from scratch for every prefix length.

struct OracleGenerator {
  double kw = 0, slope = 0, intercept = 0, fuel = kNoValue, turndown = 0;
};

struct OracleSystem {
  std::vector<double> renewable_kw;  // available renewable kW per step
  double batt_kw = 0, batt_kwh = 0, eta_c = 1, eta_d = 1, floor_kwh = 0;
  std::vector<OracleGenerator> gens;
  double dt = 1.0;
};

// True if an outage from `start` serves `steps` consecutive steps.
inline bool serves(const OracleSystem& sys, const std::vector<double>& critical,
                   const std::vector<double>& soc0, int start, int steps) {
  const int H = static_cast<int>(critical.size());
  double energy = soc0[start];
  std::vector<double> fuel;
  for (const auto& g : sys.gens) fuel.push_back(g.fuel);
  for (int k = 0; k < steps; ++k) {
    const int t = (start + k) % H;
    const double load = critical[t];
    const double ren = sys.renewable_kw[t];
    if (ren >= load) {
      energy = std::min(sys.batt_kwh, energy + std::min(ren - load, sys.batt_kw) * sys.eta_c * sys.dt);
      continue;
    }
    double gap = load - ren;
    const double can = std::min(sys.batt_kw, std::max(0.0, energy - sys.floor_kwh) * sys.eta_d / sys.dt);
    const double use = std::min(gap, can);
    energy -= use * sys.dt / sys.eta_d;
    gap -= use;
    for (std::size_t i = 0; i < sys.gens.size(); ++i) {
      if (gap <= 1e-9) break;
      const auto& g = sys.gens[i];
      if (g.kw <= 0) continue;
      double out = std::min(g.kw, std::max(gap, g.turndown * g.kw));
      if ((g.slope * out + g.intercept) * sys.dt > fuel[i]) {
        if (g.slope <= 0) continue;
        out = (fuel[i] / sys.dt - g.intercept) / g.slope;
        if (out < g.turndown * g.kw || out <= 0) continue;
      }
      fuel[i] -= (g.slope * out + g.intercept) * sys.dt;
      gap -= std::min(gap, out);
    }
    if (gap > 1e-9) return false;
  }
  return true;
}

inline std::vector<int> survival_oracle(const OracleSystem& sys, const std::vector<double>& critical,
                                        const std::vector<double>& soc0) {
  const int H = static_cast<int>(critical.size());
  std::vector<int> out(H, 0);
  for (int s = 0; s < H; ++s) {
    int k = 0;
    while (k < H && serves(sys, critical, soc0, s, k + 1)) ++k;
    out[s] = k;
  }
  return out;
}

// Battery only: survival is the first step where the cumulative energy
// drawn exceeds the usable reservoir or the load exceeds the power rating.
inline int reservoir_oracle(double kw, double usable_kwh, double eta_d, double dt,
                            const std::vector<double>& critical, int start) {
  const int H = static_cast<int>(critical.size());
  double drawn = 0.0;
  for (int k = 0; k < H; ++k) {
    const double load = critical[(start + k) % H];
    drawn += load * dt / eta_d;
    if (load > kw + 1e-12 || drawn > usable_kwh + 1e-9) return k;
  }
  return H;
}

}  // namespace deropt::testing
