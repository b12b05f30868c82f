#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "deropt/core/error.hpp"
#include "deropt/core/scenario_json.hpp"
#include "deropt/core/schema.hpp"
#include "deropt/model/lp_format.hpp"
#include "deropt/outage/simulator.hpp"
#include "deropt/service/server.hpp"

namespace fs = std::filesystem;
using namespace deropt;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInvalid = 2;
constexpr int kExitSolver = 3;

struct RunOptions {
  std::string scenario;
  std::string out = ".";
  std::vector<std::string> emit{"results-json"};
  double mip_gap = 1e-4;
  double time_limit = 600.0;
  std::string fixture_dir;
};

struct ServeOptions {
  std::string host = "127.0.0.1";
  int port = 8080;
  int workers = 2;
  std::string db = "deropt.db";
  double mip_gap = 1e-4;
  double time_limit = 600.0;
  std::string fixture_dir = ".";
};

bool write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) {
    std::cerr << "error: cannot write " << path << "\n";
    return false;
  }
  return true;
}

int run(const RunOptions& o) {
  const std::set<std::string> emit(o.emit.begin(), o.emit.end());
  std::error_code ec;
  fs::create_directories(o.out, ec);
  if (ec) {
    std::cerr << "error: cannot create " << o.out << ": " << ec.message() << "\n";
    return kExitUsage;
  }

  Scenario s;
  fs::path scenario_path(o.scenario);
  try {
    std::ifstream in(scenario_path);
    if (!in) {
      std::cerr << "error: cannot open " << scenario_path << "\n";
      return kExitUsage;
    }
    const auto doc = nlohmann::json::parse(in);
    s = scenario_from_json(doc, scenario_path.parent_path());
  } catch (const nlohmann::json::parse_error& e) {
    std::cerr << "invalid: malformed JSON: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const Error& e) {
    std::cerr << "invalid: " << e.what() << "\n";
    return kExitInvalid;
  }
  const auto violations = validate_scenario(s);
  if (!violations.empty()) {
    for (const auto& v : violations) std::cerr << "invalid: " << v.path << ": " << v.message << "\n";
    return kExitInvalid;
  }

  service::PipelineConfig pc;
  pc.solve.mip_gap_rel = o.mip_gap;
  pc.solve.time_limit_s = o.time_limit;
  pc.providers.fixture_dir = o.fixture_dir.empty() ? scenario_path.parent_path() : fs::path(o.fixture_dir);

  if (emit.count("lp-dump")) {
    try {
      const auto bm = model::build_scenario_model(s, pc.providers);
      if (!write_file(fs::path(o.out) / "model.lp", model::write_lp(bm.milp))) return kExitUsage;
    } catch (const Error& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kExitSolver;
    }
  }

  auto result = service::run_pipeline(s, pc);
  if (emit.count("results-json")) {
    if (!write_file(fs::path(o.out) / "results.json", service::dump_document(result.document))) {
      return kExitUsage;
    }
  }
  if (!result.complete) {
    std::cerr << "solver failure: " << result.message << "\n";
    return kExitSolver;
  }
  const auto dispatch = econ::extract_dispatch(*result.opt_model, *result.opt_solution);
  if (emit.count("dispatch-csv")) {
    if (!write_file(fs::path(o.out) / "dispatch.csv", econ::dispatch_csv(dispatch))) return kExitUsage;
  }
  if (emit.count("outage-csv")) {
    if (!s.outage) {
      std::cerr << "note: no outage window in the scenario; outage.csv not written\n";
    } else {
      const auto sim = econ::simulate_design(*result.opt_model, dispatch, s);
      if (!write_file(fs::path(o.out) / "outage.csv", outage::to_csv(sim))) return kExitUsage;
    }
  }
  const auto& fin = result.document["Financial"];
  std::cout << "status " << result.document["Solver"]["status"].get<std::string>() << "  LCC "
            << fin["lcc"].get<double>() << "  BAU " << fin["lcc_bau"].get<double>() << "  NPV "
            << fin["npv"].get<double>() << "\n";
  return kExitOk;
}

service::HttpServer* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

int serve(const ServeOptions& o) {
  service::ServiceConfig cfg;
  cfg.db_path = o.db;
  cfg.workers = o.workers;
  cfg.solve.mip_gap_rel = o.mip_gap;
  cfg.solve.time_limit_s = o.time_limit;
  cfg.fixture_dir = o.fixture_dir;
  service::JobService svc(cfg);
  service::HttpServer http(svc);
  g_server = &http;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::cerr << "listening on http://" << o.host << ":" << o.port << "/v1/\n";
  const bool ok = http.listen(o.host, o.port);
  g_server = nullptr;
  if (!ok) {
    std::cerr << "error: cannot listen on " << o.host << ":" << o.port << "\n";
    return kExitUsage;
  }
  return kExitOk;
}

template <typename T>
void from_env(const char* name, T& value) {
  if (const char* v = std::getenv(name)) {
    std::istringstream is(v);
    T parsed;
    if (is >> parsed) value = parsed;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Behind-the-meter DER sizing and dispatch optimizer"};
  app.require_subcommand(1);

  RunOptions ro;
  auto* run_cmd = app.add_subcommand("run", "Solve one scenario file");
  run_cmd->add_option("--scenario", ro.scenario, "Scenario JSON")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--out", ro.out, "Output directory");
  run_cmd->add_option("--emit", ro.emit, "Artifacts to write")
      ->delimiter(',')
      ->check(CLI::IsMember({"results-json", "dispatch-csv", "outage-csv", "lp-dump"}));
  run_cmd->add_option("--mip-gap", ro.mip_gap, "Relative MIP gap")->check(CLI::PositiveNumber);
  run_cmd->add_option("--time-limit", ro.time_limit, "Solver time limit, seconds")
      ->check(CLI::PositiveNumber);
  run_cmd->add_option("--fixture-dir", ro.fixture_dir,
                      "Directory for fixture: references (default: the scenario's directory)");

  ServeOptions so;
  from_env("DEROPT_PORT", so.port);
  from_env("DEROPT_WORKERS", so.workers);
  from_env("DEROPT_TIME_LIMIT", so.time_limit);
  from_env("DEROPT_FIXTURE_DIR", so.fixture_dir);
  from_env("DEROPT_DB", so.db);
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP job service");
  serve_cmd->add_option("--host", so.host);
  serve_cmd->add_option("--port", so.port)->check(CLI::Range(1, 65535));
  serve_cmd->add_option("--workers", so.workers)->check(CLI::Range(1, 256));
  serve_cmd->add_option("--db", so.db, "SQLite file for jobs and results");
  serve_cmd->add_option("--mip-gap", so.mip_gap)->check(CLI::PositiveNumber);
  serve_cmd->add_option("--time-limit", so.time_limit)->check(CLI::PositiveNumber);
  serve_cmd->add_option("--fixture-dir", so.fixture_dir);

  auto* schema_cmd = app.add_subcommand("schema", "Print the scenario JSON schema");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }
  if (run_cmd->parsed()) return run(ro);
  if (serve_cmd->parsed()) return serve(so);
  if (schema_cmd->parsed()) {
    std::cout << scenario_schema_text();
    return kExitOk;
  }
  return kExitUsage;
}
