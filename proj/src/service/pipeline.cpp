#include "deropt/service/pipeline.hpp"

#include <future>

#include "deropt/core/error.hpp"

namespace deropt::service {

namespace {

struct Solved {
  model::BuiltModel model;
  solver::Solution solution;
};

Solved build_and_solve(const Scenario& s, const PipelineConfig& cfg) {
  auto bm = model::build_scenario_model(s, cfg.providers);
  auto sol = solver::solve_milp(bm.milp, cfg.solve);
  return {std::move(bm), std::move(sol)};
}

nlohmann::json error_document(const std::string& message, const PipelineResult& r) {
  nlohmann::json doc = {{"state", "Error"}, {"message", message}};
  nlohmann::json solver_doc = nlohmann::json::object();
  if (r.opt_status) solver_doc["status"] = solver::to_string(*r.opt_status);
  if (r.bau_status) solver_doc["status_bau"] = solver::to_string(*r.bau_status);
  doc["Solver"] = solver_doc;
  return doc;
}

}  // namespace

PipelineResult run_pipeline(const Scenario& s, const PipelineConfig& cfg,
                            const std::function<void(Stage)>& on_stage) {
  PipelineResult r;
  try {
    if (on_stage) on_stage(Stage::Solving);
    const Scenario bau_scenario = model::business_as_usual(s);
    auto bau_future = std::async(std::launch::async, [&] { return build_and_solve(bau_scenario, cfg); });
    std::optional<Solved> opt;
    std::exception_ptr opt_error;
    try {
      opt = build_and_solve(s, cfg);
    } catch (...) {
      opt_error = std::current_exception();
    }
    Solved bau = bau_future.get();
    if (opt_error) std::rethrow_exception(opt_error);
    r.bau_status = bau.solution.status;
    r.opt_status = opt->solution.status;

    if (on_stage) on_stage(Stage::Postprocessing);
    r.document = econ::assemble_results(bau.model, bau.solution, opt->model, opt->solution, s);
    r.opt_model = std::move(opt->model);
    r.opt_solution = std::move(opt->solution);
    r.complete = true;
  } catch (const std::exception& e) {
    r.complete = false;
    r.message = e.what();
    r.document = error_document(r.message, r);
  }
  return r;
}

std::string dump_document(const nlohmann::json& doc) { return doc.dump(1) + "\n"; }

nlohmann::json violations_json(const std::vector<Violation>& v) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& x : v) out.push_back({{"path", x.path}, {"message", x.message}});
  return out;
}

}  // namespace deropt::service
