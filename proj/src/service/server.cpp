#include "deropt/service/server.hpp"

#include "httplib.h"

#include "deropt/core/error.hpp"
#include "deropt/core/scenario_json.hpp"
#include "deropt/core/schema.hpp"
#include "deropt/ingest/load.hpp"

namespace deropt::service {

using nlohmann::json;

namespace {

Response json_response(int status, const json& body) {
  return {status, body.dump() + "\n", "application/json"};
}

Response error_response(int status, const std::string& message,
                        const json& violations = json::array()) {
  return json_response(status, {{"error", message}, {"violations", violations}});
}

}  // namespace

JobService::JobService(ServiceConfig cfg) : cfg_(std::move(cfg)), store_(cfg_.db_path) {
  store_.recover_interrupted();
  for (int i = 0; i < cfg_.workers; ++i) threads_.emplace_back([this] { worker_loop(); });
}

JobService::~JobService() { stop(); }

void JobService::stop() {
  {
    std::lock_guard lock(mu_);
    stopping_ = true;
  }
  cv_.notify_all();
  for (auto& t : threads_) {
    if (t.joinable()) t.join();
  }
  threads_.clear();
}

void JobService::wait_idle() {
  std::unique_lock lock(mu_);
  idle_cv_.wait(lock, [this] { return (queue_.empty() || threads_.empty()) && running_ == 0; });
}

Response JobService::post_job(const std::string& body) {
  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::parse_error& e) {
    return error_response(400, std::string("malformed JSON: ") + e.what());
  }
  Scenario s;
  try {
    s = scenario_from_json(doc, cfg_.fixture_dir);
  } catch (const Error& e) {
    return error_response(400, e.what());
  }
  const auto violations = validate_scenario(s);
  if (!violations.empty()) {
    return error_response(400, "scenario failed validation", violations_json(violations));
  }
  const std::string id = new_uuid();
  store_.create(id, doc.dump());
  {
    std::lock_guard lock(mu_);
    queue_.push_back(id);
  }
  cv_.notify_one();
  return json_response(201, {{"run_uuid", id}});
}

Response JobService::get_results(const std::string& run_uuid) const {
  const auto rec = store_.get(run_uuid);
  if (!rec) return error_response(404, "unknown run_uuid " + run_uuid);
  if (rec->state == JobState::Complete && rec->results) {
    return {200, *rec->results, "application/json"};
  }
  json body = {{"run_uuid", run_uuid}, {"state", to_string(rec->state)}};
  if (!rec->message.empty()) body["message"] = rec->message;
  return json_response(200, body);
}

Response JobService::help() const { return {200, std::string(scenario_schema_text()), "application/json"}; }

Response JobService::simulated_load(const std::map<std::string, std::string>& params) const {
  const auto name_it = params.find("doe_reference_name");
  if (name_it == params.end()) return error_response(400, "doe_reference_name is required");
  const std::string& name = name_it->second;
  if (!ingest::is_known_building_type(name)) {
    return error_response(400, "unknown building type " + name);
  }
  LoadSpec spec;
  const TimeGrid grid = full_year_hourly();
  if (auto it = params.find("annual_kwh"); it != params.end()) {
    double annual;
    try {
      std::size_t used = 0;
      annual = std::stod(it->second, &used);
      if (used != it->second.size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      return error_response(400, "annual_kwh must be a number");
    }
    if (!(annual > 0.0)) return error_response(400, "annual_kwh must be positive");
    spec.mode = ReferenceScaledLoad{name, "", annual, std::nullopt};
  } else {
    spec.mode = ReferenceLoad{name, ""};
  }
  const TimeSeries load = ingest::build_load(spec, grid);
  const auto& v = load.values();
  json body = {{"doe_reference_name", name},
               {"annual_kwh", load.energy_kwh()},
               {"min_kw", v.minCoeff()},
               {"max_kw", v.maxCoeff()},
               {"mean_kw", v.mean()},
               {"loads_kw", std::vector<double>(v.data(), v.data() + v.size())}};
  return json_response(200, body);
}

Response JobService::not_implemented(const std::string& what) {
  return error_response(501, what + " is not implemented");
}

void JobService::worker_loop() {
  for (;;) {
    std::string id;
    {
      std::unique_lock lock(mu_);
      cv_.wait(lock, [this] { return stopping_ || !queue_.empty(); });
      if (stopping_) return;
      id = queue_.front();
      queue_.pop_front();
      ++running_;
    }
    try {
      run_job(id);
    } catch (const std::exception& e) {
      store_.advance(id, JobState::Error, e.what());
    }
    {
      std::lock_guard lock(mu_);
      --running_;
    }
    idle_cv_.notify_all();
  }
}

void JobService::run_job(const std::string& id) {
  store_.advance(id, JobState::Validating);
  const auto rec = store_.get(id);
  if (!rec) return;
  Scenario s;
  try {
    s = scenario_from_json(json::parse(rec->scenario), cfg_.fixture_dir);
  } catch (const std::exception& e) {
    store_.advance(id, JobState::Error, e.what());
    return;
  }
  if (const auto v = validate_scenario(s); !v.empty()) {
    store_.advance(id, JobState::Error, v.front().path + ": " + v.front().message);
    return;
  }
  PipelineConfig pc;
  pc.solve = cfg_.solve;
  pc.providers.fixture_dir = cfg_.fixture_dir;
  auto result = run_pipeline(s, pc, [&](Stage st) {
    store_.advance(id, st == Stage::Solving ? JobState::Solving : JobState::Postprocessing);
  });
  if (result.complete) {
    store_.complete(id, dump_document(result.document));
  } else {
    store_.advance(id, JobState::Error, result.message);
  }
}

HttpServer::HttpServer(JobService& service)
    : service_(service), http_(std::make_unique<httplib::Server>()) {
  auto reply = [](httplib::Response& res, const Response& r) {
    res.status = r.status;
    res.set_content(r.body, r.content_type.c_str());
  };
  auto& svc = service_;
  http_->Post("/v1/job", [&svc, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, svc.post_job(req.body));
  });
  http_->Post("/v1/job/", [&svc, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, svc.post_job(req.body));
  });
  http_->Get(R"(/v1/job/([0-9a-fA-F\-]+)/results/?)",
             [&svc, reply](const httplib::Request& req, httplib::Response& res) {
               reply(res, svc.get_results(req.matches[1]));
             });
  http_->Get(R"(/v1/job/([^/]+)/proforma/?)",
             [reply](const httplib::Request&, httplib::Response& res) {
               reply(res, JobService::not_implemented("proforma"));
             });
  http_->Get(R"(/v1/help/?)", [&svc, reply](const httplib::Request&, httplib::Response& res) {
    reply(res, svc.help());
  });
  http_->Get(R"(/v1/simulated_load/?)",
             [&svc, reply](const httplib::Request& req, httplib::Response& res) {
               std::map<std::string, std::string> params;
               for (const auto& [k, v] : req.params) params[k] = v;
               reply(res, svc.simulated_load(params));
             });
  for (const char* path : {R"(/v1/generator_efficiency/?)", R"(/v1/annual_kwh/?)"}) {
    const std::string name = std::string(path).substr(4, std::string(path).size() - 6);
    http_->Get(path, [name, reply](const httplib::Request&, httplib::Response& res) {
      reply(res, JobService::not_implemented(name));
    });
  }
  http_->Get(R"(/v1/user/([^/]+)/summary/?)",
             [reply](const httplib::Request&, httplib::Response& res) {
               reply(res, JobService::not_implemented("user summary"));
             });
}

HttpServer::~HttpServer() { stop(); }

bool HttpServer::listen(const std::string& host, int port) { return http_->listen(host, port); }

int HttpServer::bind_to_any_port(const std::string& host) { return http_->bind_to_any_port(host); }

bool HttpServer::listen_after_bind() { return http_->listen_after_bind(); }

void HttpServer::stop() {
  if (http_) http_->stop();
}

void HttpServer::wait_until_ready() const { http_->wait_until_ready(); }

}  // namespace deropt::service
