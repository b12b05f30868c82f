#pragma once

#include "deropt/core/scenario.hpp"

namespace deropt::econ {

// sum_{y=1..years} ((1 + growth) / (1 + discount))^y
double present_worth(double growth, double discount, int years);

struct PresentWorthFactors {
  double pwf_e = 1.0;     // utility costs, escalated at electricity_escalation
  double pwf_om = 1.0;    // O&M and fuel, escalated at inflation_rate
  double pwf_flat = 1.0;  // unescalated annual amounts (production incentives)
};

PresentWorthFactors present_worth_factors(const FinancialSpec& f);

}  // namespace deropt::econ
