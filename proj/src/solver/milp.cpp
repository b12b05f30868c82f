#include "deropt/solver/milp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <queue>
#include <vector>

#include "deropt/core/error.hpp"

namespace deropt::solver {

using model::Integrality;
using model::MilpModel;

std::string_view to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "Optimal";
    case SolveStatus::Feasible: return "Feasible";
    case SolveStatus::Infeasible: return "Infeasible";
    case SolveStatus::Unbounded: return "Unbounded";
    case SolveStatus::TimeLimit: return "TimeLimit";
  }
  return "Unknown";
}

LpProblem<double> relaxation(const MilpModel& m) {
  LpProblem<double> lp;
  std::vector<Eigen::Triplet<double>> triplets;
  lp.b.resize(m.num_constraints());
  lp.sense.resize(m.num_constraints());
  for (int i = 0; i < m.num_constraints(); ++i) {
    const auto& row = m.constraints()[i];
    for (const auto& [id, coef] : row.terms) triplets.emplace_back(i, id, coef);
    lp.b[i] = row.rhs;
    lp.sense[i] = row.sense;
  }
  lp.a.resize(m.num_constraints(), m.num_vars());
  lp.a.setFromTriplets(triplets.begin(), triplets.end());
  lp.a.makeCompressed();
  lp.c = m.objective();
  lp.lower.resize(m.num_vars());
  lp.upper.resize(m.num_vars());
  for (int j = 0; j < m.num_vars(); ++j) {
    lp.lower[j] = m.variables()[j].lower;
    lp.upper[j] = m.variables()[j].upper;
  }
  return lp;
}

namespace {

using Clock = std::chrono::steady_clock;

SimplexOptions simplex_options(const SolveConfig&, Clock::time_point deadline) {
  SimplexOptions o;
  o.deadline = deadline;
  return o;
}

Clock::time_point deadline_for(const SolveConfig& cfg) {
  auto limit = std::chrono::duration<double>(std::max(0.0, cfg.time_limit_s));
  return Clock::now() + std::chrono::duration_cast<Clock::duration>(limit);
}

void recheck(const MilpModel& m, const Solution& s, const SolveConfig& cfg) {
  if (!s.has_values()) return;
  const double v = model::max_violation(m, s.values);
  if (v > cfg.feas_tol) {
    throw Error(ErrorCode::NumericalBreakdown,
                "solution violates the model by " + std::to_string(v));
  }
}

struct Node {
  long id = 0;
  double bound = -std::numeric_limits<double>::infinity();
  std::vector<std::pair<int, double>> fixes;  // binary id -> fixed value
  int branch_var = -1;
  bool branch_up = false;
  double branch_frac = 0.0;
  double parent_objective = 0.0;
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    return a.id > b.id;
  }
};

struct PseudoCosts {
  std::vector<double> down_sum, up_sum;
  std::vector<int> down_n, up_n;

  explicit PseudoCosts(int n) : down_sum(n, 0.0), up_sum(n, 0.0), down_n(n, 0), up_n(n, 0) {}

  void record(int var, bool up, double frac, double gain) {
    const double unit = gain / std::max(1e-9, up ? 1.0 - frac : frac);
    if (up) {
      up_sum[var] += unit;
      ++up_n[var];
    } else {
      down_sum[var] += unit;
      ++down_n[var];
    }
  }

  double estimate(int var, bool up) const {
    const int n = up ? up_n[var] : down_n[var];
    if (n > 0) return (up ? up_sum[var] : down_sum[var]) / n;
    double total = 0.0;
    int count = 0;
    for (std::size_t j = 0; j < up_n.size(); ++j) {
      const int nj = up ? up_n[j] : down_n[j];
      if (nj > 0) {
        total += (up ? up_sum[j] : down_sum[j]) / nj;
        ++count;
      }
    }
    return count > 0 ? total / count : 1.0;
  }
};

double relative_gap(double incumbent, double bound) {
  const double diff = incumbent - bound;
  if (diff <= 1e-9) return 0.0;
  return diff / std::max(std::abs(incumbent), 1e-9);
}

}  // namespace

Solution solve_lp(const MilpModel& m, const SolveConfig& cfg) {
  const auto lp = relaxation(m);
  const auto r = solve_bounded_lp(lp, simplex_options(cfg, deadline_for(cfg)));
  Solution s;
  s.lp_iterations = r.iterations;
  s.node_count = 1;
  switch (r.status) {
    case LpStatus::Optimal:
      s.status = SolveStatus::Optimal;
      s.values = r.x;
      s.objective = r.objective + m.objective_offset();
      s.best_bound = s.objective;
      s.root_bound = s.objective;
      recheck(m, s, cfg);
      break;
    case LpStatus::Infeasible: s.status = SolveStatus::Infeasible; break;
    case LpStatus::Unbounded: s.status = SolveStatus::Unbounded; break;
    case LpStatus::IterationLimit:
      throw Error(ErrorCode::NumericalBreakdown, "simplex iteration limit reached");
    case LpStatus::TimeLimit: s.status = SolveStatus::TimeLimit; break;
  }
  return s;
}

Solution solve_milp(const MilpModel& m, const SolveConfig& cfg) {
  const auto deadline = deadline_for(cfg);
  const auto options = simplex_options(cfg, deadline);
  const auto base = relaxation(m);

  std::vector<int> binaries;
  for (int j = 0; j < m.num_vars(); ++j) {
    if (m.variables()[j].integrality == Integrality::Binary) binaries.push_back(j);
  }

  Solution best;
  best.status = SolveStatus::Infeasible;
  double incumbent = std::numeric_limits<double>::infinity();
  PseudoCosts pseudo(m.num_vars());
  bool timed_out = false;
  bool node_limited = false;

  std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
  long next_id = 0;
  Node root_node;
  root_node.id = next_id++;
  open.push(root_node);

  auto solve_with = [&](const std::vector<std::pair<int, double>>& fixes) {
    LpProblem<double> lp = base;
    for (const auto& [id, value] : fixes) {
      lp.lower[id] = value;
      lp.upper[id] = value;
    }
    auto r = solve_bounded_lp(lp, options);
    best.lp_iterations += r.iterations;
    if (r.status == LpStatus::IterationLimit) {
      throw Error(ErrorCode::NumericalBreakdown, "simplex iteration limit reached");
    }
    return r;
  };

  auto prune_threshold = [&]() {
    if (!std::isfinite(incumbent)) return incumbent;
    return incumbent - std::max(1e-9, cfg.mip_gap_rel * std::abs(incumbent));
  };

  bool root = true;
  while (!open.empty()) {
    Node node = open.top();
    if (std::isfinite(incumbent) && node.bound >= prune_threshold()) break;
    if (best.node_count >= cfg.node_limit) {
      node_limited = true;
      break;
    }
    if (Clock::now() > deadline) {
      timed_out = true;
      break;
    }
    open.pop();
    ++best.node_count;

    auto r = solve_with(node.fixes);
    if (r.status == LpStatus::TimeLimit) {
      timed_out = true;
      break;
    }
    if (r.status == LpStatus::Unbounded) {
      if (root) {
        best.status = SolveStatus::Unbounded;
        return best;
      }
      continue;
    }
    if (r.status != LpStatus::Optimal) {
      root = false;
      continue;
    }
    const double obj = r.objective + m.objective_offset();
    if (root) {
      best.root_bound = obj;
      root = false;
    }
    if (node.branch_var >= 0) {
      pseudo.record(node.branch_var, node.branch_up, node.branch_frac,
                    std::max(0.0, obj - node.parent_objective));
    }
    if (obj >= prune_threshold()) continue;

    // Pick a branching variable.
    int branch = -1;
    double branch_frac = 0.0;
    double best_score = -1.0;
    double worst_dev = 0.0;
    for (int j : binaries) {
      const double v = r.x[j];
      const double frac = v - std::floor(v);
      const double dev = std::min(frac, 1.0 - frac);
      worst_dev = std::max(worst_dev, dev);
      if (dev <= cfg.int_tol) continue;
      double score = dev;
      if (cfg.branch_rule == BranchRule::PseudoCost) {
        score = std::max(1e-6, pseudo.estimate(j, false) * frac) *
                std::max(1e-6, pseudo.estimate(j, true) * (1.0 - frac));
      }
      if (score > best_score) {
        best_score = score;
        branch = j;
        branch_frac = frac;
      }
    }

    if (branch < 0) {
      // Integral within tolerance; polish by fixing every binary to its
      // rounded value so that products with big-M rows come out exact.
      Eigen::VectorXd x = r.x;
      double value = obj;
      if (worst_dev > 0.0 && !binaries.empty()) {
        auto fixes = node.fixes;
        for (int j : binaries) fixes.emplace_back(j, std::round(r.x[j]));
        auto polished = solve_with(fixes);
        const bool kept =
            polished.status == LpStatus::Optimal &&
            polished.objective + m.objective_offset() <=
                obj + std::max(1e-9, cfg.mip_gap_rel * std::abs(obj));
        if (polished.status == LpStatus::Optimal &&
            polished.objective + m.objective_offset() < incumbent) {
          incumbent = polished.objective + m.objective_offset();
          best.values = polished.x;
          best.objective = incumbent;
        }
        if (kept) {
          x = polished.x;
          value = polished.objective + m.objective_offset();
        } else {
          // Fall back to branching on the least integral binary.
          for (int j : binaries) {
            const double frac = r.x[j] - std::floor(r.x[j]);
            if (std::min(frac, 1.0 - frac) == worst_dev) {
              branch = j;
              branch_frac = frac;
              break;
            }
          }
        }
      }
      if (branch < 0) {
        if (value < incumbent) {
          incumbent = value;
          best.values = x;
          best.objective = value;
        }
        continue;
      }
    }

    for (int side = 0; side < 2; ++side) {
      Node child;
      child.id = next_id++;
      child.bound = obj;
      child.fixes = node.fixes;
      child.fixes.emplace_back(branch, side == 0 ? 0.0 : 1.0);
      child.branch_var = branch;
      child.branch_up = side == 1;
      child.branch_frac = branch_frac;
      child.parent_objective = obj;
      open.push(std::move(child));
    }
  }

  if (best.has_values()) {
    const double bound = open.empty() ? incumbent : std::min(incumbent, open.top().bound);
    best.best_bound = bound;
    best.gap = relative_gap(incumbent, bound);
    if (timed_out) {
      best.status = SolveStatus::TimeLimit;
    } else if (node_limited && best.gap > cfg.mip_gap_rel) {
      best.status = SolveStatus::Feasible;
    } else {
      best.status = SolveStatus::Optimal;
    }
    recheck(m, best, cfg);
    if (best.status == SolveStatus::Optimal &&
        model::max_integrality_violation(m, best.values) > cfg.int_tol) {
      throw Error(ErrorCode::NumericalBreakdown, "incumbent is not integral");
    }
  } else if (timed_out || node_limited) {
    best.status = SolveStatus::TimeLimit;
  } else if (best.status != SolveStatus::Unbounded) {
    best.status = SolveStatus::Infeasible;
  }
  return best;
}

}  // namespace deropt::solver
