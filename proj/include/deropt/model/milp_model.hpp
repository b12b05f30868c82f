#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace deropt::model {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Integrality { Continuous, Binary };
enum class Sense { LessEqual, Equal, GreaterEqual };

struct Variable {
  std::string name;
  double lower = 0.0;
  double upper = kInf;
  Integrality integrality = Integrality::Continuous;
};

// Handle to a declared variable.
struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
  friend bool operator==(Var, Var) = default;
};

// Sum of coefficient * variable terms plus a constant. Terms are kept
// unmerged until the expression is committed to a model.
class LinearExpr {
 public:
  LinearExpr() = default;
  LinearExpr(double constant) : constant_(constant) {}
  LinearExpr(Var v) { terms_.emplace_back(v.id, 1.0); }

  LinearExpr& add(Var v, double coef) {
    if (coef != 0.0) terms_.emplace_back(v.id, coef);
    return *this;
  }
  LinearExpr& operator+=(const LinearExpr& o) {
    terms_.insert(terms_.end(), o.terms_.begin(), o.terms_.end());
    constant_ += o.constant_;
    return *this;
  }
  LinearExpr& operator-=(const LinearExpr& o) {
    for (const auto& [id, coef] : o.terms_) terms_.emplace_back(id, -coef);
    constant_ -= o.constant_;
    return *this;
  }
  LinearExpr& operator*=(double k) {
    for (auto& t : terms_) t.second *= k;
    constant_ *= k;
    return *this;
  }

  const std::vector<std::pair<int, double>>& terms() const { return terms_; }
  double constant() const { return constant_; }

 private:
  std::vector<std::pair<int, double>> terms_;
  double constant_ = 0.0;
};

inline LinearExpr operator*(double k, LinearExpr e) { return e *= k; }
inline LinearExpr operator*(LinearExpr e, double k) { return e *= k; }
inline LinearExpr operator+(LinearExpr a, const LinearExpr& b) { return a += b; }
inline LinearExpr operator-(LinearExpr a, const LinearExpr& b) {
  for (const auto& [id, coef] : b.terms()) a.add(Var{id}, -coef);
  return a += LinearExpr(-b.constant());
}
inline LinearExpr operator-(LinearExpr a) { return a *= -1.0; }
inline LinearExpr operator*(double k, Var v) { return LinearExpr().add(v, k); }
inline LinearExpr operator*(Var v, double k) { return LinearExpr().add(v, k); }
inline LinearExpr operator+(Var a, Var b) { return LinearExpr(a) + LinearExpr(b); }
inline LinearExpr operator-(Var a, Var b) { return LinearExpr(a) - LinearExpr(b); }

// `lhs sense 0` after moving every constant to the right-hand side.
struct PendingConstraint {
  LinearExpr lhs;
  Sense sense;
};

inline PendingConstraint operator<=(const LinearExpr& a, const LinearExpr& b) {
  return {a - b, Sense::LessEqual};
}
inline PendingConstraint operator>=(const LinearExpr& a, const LinearExpr& b) {
  return {a - b, Sense::GreaterEqual};
}
inline PendingConstraint operator==(const LinearExpr& a, const LinearExpr& b) {
  return {a - b, Sense::Equal};
}

struct Constraint {
  std::string name;
  std::vector<std::pair<int, double>> terms;  // merged, sorted by variable id
  Sense sense = Sense::LessEqual;
  double rhs = 0.0;
};

// A minimization MILP with named variables.
class MilpModel {
 public:
  Var add_var(std::string name, double lower = 0.0, double upper = kInf,
              Integrality integrality = Integrality::Continuous);
  Var add_binary(std::string name) {
    return add_var(std::move(name), 0.0, 1.0, Integrality::Binary);
  }

  int add_constraint(PendingConstraint c, std::string name = {});
  int add_constraint(const LinearExpr& lhs, Sense sense, double rhs,
                     std::string name = {});

  // Objective terms accumulate; constants go to the offset.
  void add_objective(const LinearExpr& e);

  void set_bounds(Var v, double lower, double upper);

  const std::vector<Variable>& variables() const { return variables_; }
  const std::vector<Constraint>& constraints() const { return constraints_; }
  const Eigen::VectorXd& objective() const { return objective_; }
  double objective_offset() const { return objective_offset_; }
  int num_vars() const { return static_cast<int>(variables_.size()); }
  int num_constraints() const { return static_cast<int>(constraints_.size()); }
  int num_binaries() const;

  std::optional<Var> find(std::string_view name) const;
  // Throws std::out_of_range for an unknown name.
  Var var(std::string_view name) const;
  const std::unordered_map<std::string, int>& var_index() const { return index_; }

  double evaluate(const LinearExpr& e, const Eigen::VectorXd& x) const;
  double objective_value(const Eigen::VectorXd& x) const {
    return objective_.dot(x) + objective_offset_;
  }

  // Empty when every constraint references declared variables, binaries have
  // bounds within [0, 1] and names are unique.
  std::vector<std::string> well_formedness_errors() const;

  Eigen::SparseMatrix<double, Eigen::RowMajor> constraint_matrix() const;

 private:
  std::vector<Variable> variables_;
  std::vector<Constraint> constraints_;
  Eigen::VectorXd objective_;
  double objective_offset_ = 0.0;
  std::unordered_map<std::string, int> index_;
};

// Largest violation of a row or bound by `x`, each row's violation divided by
// (1 + |rhs|). Computed from the model rows only.
double max_violation(const MilpModel& m, const Eigen::VectorXd& x);

// Largest distance of a binary variable from {0, 1}.
double max_integrality_violation(const MilpModel& m, const Eigen::VectorXd& x);

}  // namespace deropt::model
