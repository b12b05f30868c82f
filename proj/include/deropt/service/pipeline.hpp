#pragma once

#include <functional>
#include <optional>
#include <string>

#include "deropt/core/scenario.hpp"
#include "deropt/econ/economics.hpp"
#include "deropt/ingest/production.hpp"
#include "deropt/model/builder.hpp"
#include "deropt/solver/milp.hpp"
#include "json.hpp"

namespace deropt::service {

enum class Stage { Solving, Postprocessing };

struct PipelineConfig {
  solver::SolveConfig solve;
  ingest::ProviderContext providers;
};

struct PipelineResult {
  bool complete = false;
  nlohmann::json document;  // the results document, or an error document
  std::string message;
  std::optional<solver::SolveStatus> bau_status, opt_status;
  std::optional<model::BuiltModel> opt_model;
  std::optional<solver::Solution> opt_solution;
};

// Builds the BAU and optimal models, solves both concurrently and assembles
// the results. `s` must already be valid. Failures are reported in the
// result, never thrown.
PipelineResult run_pipeline(const Scenario& s, const PipelineConfig& cfg,
                            const std::function<void(Stage)>& on_stage = {});

// Serialization shared by the CLI and the service so both emit the same bytes.
std::string dump_document(const nlohmann::json& doc);

nlohmann::json violations_json(const std::vector<Violation>& v);

}  // namespace deropt::service
