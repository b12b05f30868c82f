#pragma once

#include <condition_variable>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "deropt/service/job_store.hpp"
#include "deropt/service/pipeline.hpp"

namespace httplib {
class Server;
}

namespace deropt::service {

struct ServiceConfig {
  std::string db_path = ":memory:";
  int workers = 1;  // 0 leaves jobs queued
  solver::SolveConfig solve;
  std::filesystem::path fixture_dir;
};

struct Response {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

// The job service without the transport: handlers return status + body.
class JobService {
 public:
  explicit JobService(ServiceConfig cfg);
  ~JobService();
  JobService(const JobService&) = delete;
  JobService& operator=(const JobService&) = delete;

  Response post_job(const std::string& body);
  Response get_results(const std::string& run_uuid) const;
  Response help() const;
  Response simulated_load(const std::map<std::string, std::string>& params) const;
  static Response not_implemented(const std::string& what);

  // Blocks until the queue is empty and no job is running.
  void wait_idle();
  void stop();

  JobStore& store() { return store_; }
  const ServiceConfig& config() const { return cfg_; }

 private:
  void worker_loop();
  void run_job(const std::string& run_uuid);

  ServiceConfig cfg_;
  JobStore store_;
  std::mutex mu_;
  std::condition_variable cv_, idle_cv_;
  std::deque<std::string> queue_;
  int running_ = 0;
  bool stopping_ = false;
  std::vector<std::thread> threads_;
};

// Routes /v1/... onto a JobService.
class HttpServer {
 public:
  explicit HttpServer(JobService& service);
  ~HttpServer();

  // Binds and serves until stop(); returns false if the port is unavailable.
  bool listen(const std::string& host, int port);
  // Binds to a free port and returns it; serve with listen_after_bind().
  int bind_to_any_port(const std::string& host);
  bool listen_after_bind();
  void stop();
  void wait_until_ready() const;

 private:
  JobService& service_;
  std::unique_ptr<httplib::Server> http_;
};

}  // namespace deropt::service
