#include "deropt/model/milp_model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "deropt/core/error.hpp"

namespace deropt::model {

namespace {

std::vector<std::pair<int, double>> merge_terms(std::vector<std::pair<int, double>> terms) {
  std::sort(terms.begin(), terms.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<std::pair<int, double>> out;
  for (const auto& [id, coef] : terms) {
    if (!out.empty() && out.back().first == id) {
      out.back().second += coef;
    } else {
      out.emplace_back(id, coef);
    }
  }
  std::erase_if(out, [](const auto& t) { return t.second == 0.0; });
  return out;
}

}  // namespace

Var MilpModel::add_var(std::string name, double lower, double upper,
                       Integrality integrality) {
  if (lower > upper) {
    throw Error(ErrorCode::InfeasibleBoundsDetected,
                "variable '" + name + "' has lower bound above upper bound");
  }
  const int id = num_vars();
  if (!index_.emplace(name, id).second) {
    throw Error(ErrorCode::InvalidInput, "duplicate variable name '" + name + "'");
  }
  variables_.push_back({std::move(name), lower, upper, integrality});
  objective_.conservativeResize(id + 1);
  objective_[id] = 0.0;
  return Var{id};
}

int MilpModel::add_constraint(PendingConstraint c, std::string name) {
  return add_constraint(c.lhs, c.sense, 0.0, std::move(name));
}

int MilpModel::add_constraint(const LinearExpr& lhs, Sense sense, double rhs,
                              std::string name) {
  Constraint row;
  row.name = name.empty() ? "c" + std::to_string(num_constraints()) : std::move(name);
  row.terms = merge_terms(lhs.terms());
  row.sense = sense;
  row.rhs = rhs - lhs.constant();
  constraints_.push_back(std::move(row));
  return num_constraints() - 1;
}

void MilpModel::add_objective(const LinearExpr& e) {
  for (const auto& [id, coef] : e.terms()) objective_[id] += coef;
  objective_offset_ += e.constant();
}

void MilpModel::set_bounds(Var v, double lower, double upper) {
  if (lower > upper) {
    throw Error(ErrorCode::InfeasibleBoundsDetected,
                "variable '" + variables_.at(v.id).name +
                    "' has lower bound above upper bound");
  }
  variables_.at(v.id).lower = lower;
  variables_.at(v.id).upper = upper;
}

int MilpModel::num_binaries() const {
  return static_cast<int>(std::count_if(variables_.begin(), variables_.end(), [](const auto& v) {
    return v.integrality == Integrality::Binary;
  }));
}

std::optional<Var> MilpModel::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return Var{it->second};
}

Var MilpModel::var(std::string_view name) const {
  auto v = find(name);
  if (!v) throw std::out_of_range("no variable named '" + std::string(name) + "'");
  return *v;
}

double MilpModel::evaluate(const LinearExpr& e, const Eigen::VectorXd& x) const {
  double v = e.constant();
  for (const auto& [id, coef] : e.terms()) v += coef * x[id];
  return v;
}

std::vector<std::string> MilpModel::well_formedness_errors() const {
  std::vector<std::string> errors;
  if (index_.size() != variables_.size()) errors.push_back("variable names are not unique");
  for (const auto& [name, id] : index_) {
    if (id < 0 || id >= num_vars() || variables_[id].name != name) {
      errors.push_back("var_index entry '" + name + "' does not match its variable");
    }
  }
  for (const Variable& v : variables_) {
    if (v.integrality == Integrality::Binary && (v.lower < 0.0 || v.upper > 1.0)) {
      errors.push_back("binary '" + v.name + "' has bounds outside [0, 1]");
    }
    if (v.lower > v.upper) errors.push_back("variable '" + v.name + "' has crossed bounds");
  }
  for (const Constraint& c : constraints_) {
    for (const auto& [id, coef] : c.terms) {
      if (id < 0 || id >= num_vars()) {
        errors.push_back("constraint '" + c.name + "' references undeclared variable " +
                         std::to_string(id));
      }
      if (!std::isfinite(coef)) {
        errors.push_back("constraint '" + c.name + "' has a non-finite coefficient");
      }
    }
    if (!std::isfinite(c.rhs)) errors.push_back("constraint '" + c.name + "' has non-finite rhs");
  }
  return errors;
}

Eigen::SparseMatrix<double, Eigen::RowMajor> MilpModel::constraint_matrix() const {
  std::vector<Eigen::Triplet<double>> triplets;
  for (int i = 0; i < num_constraints(); ++i) {
    for (const auto& [id, coef] : constraints_[i].terms) triplets.emplace_back(i, id, coef);
  }
  Eigen::SparseMatrix<double, Eigen::RowMajor> a(num_constraints(), num_vars());
  a.setFromTriplets(triplets.begin(), triplets.end());
  return a;
}

double max_violation(const MilpModel& m, const Eigen::VectorXd& x) {
  double worst = 0.0;
  const auto& vars = m.variables();
  for (int j = 0; j < m.num_vars(); ++j) {
    const double scale = 1.0 + std::abs(x[j]);
    worst = std::max(worst, (vars[j].lower - x[j]) / scale);
    worst = std::max(worst, (x[j] - vars[j].upper) / scale);
  }
  for (const Constraint& c : m.constraints()) {
    double lhs = 0.0;
    for (const auto& [id, coef] : c.terms) lhs += coef * x[id];
    double v = 0.0;
    switch (c.sense) {
      case Sense::LessEqual: v = lhs - c.rhs; break;
      case Sense::GreaterEqual: v = c.rhs - lhs; break;
      case Sense::Equal: v = std::abs(lhs - c.rhs); break;
    }
    worst = std::max(worst, v / (1.0 + std::abs(c.rhs)));
  }
  return worst;
}

double max_integrality_violation(const MilpModel& m, const Eigen::VectorXd& x) {
  double worst = 0.0;
  for (int j = 0; j < m.num_vars(); ++j) {
    if (m.variables()[j].integrality == Integrality::Binary) {
      worst = std::max(worst, std::abs(x[j] - std::round(x[j])));
    }
  }
  return worst;
}

}  // namespace deropt::model
