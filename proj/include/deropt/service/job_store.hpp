#pragma once

#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

struct sqlite3;

namespace deropt::service {

enum class JobState { Queued, Validating, Solving, Postprocessing, Complete, Error };

std::string_view to_string(JobState s);
std::optional<JobState> job_state_from_string(std::string_view s);
bool is_terminal(JobState s);

struct JobRecord {
  std::string run_uuid;
  JobState state = JobState::Queued;
  std::string message;
  std::string scenario;               // JSON text as posted
  std::optional<std::string> results;  // document text once Complete
  double created_at = 0.0;             // seconds since the epoch
  double updated_at = 0.0;
};

std::string new_uuid();

// Embedded SQLite store with a jobs table and a results table. All methods
// are thread safe; transitions are forward-only.
class JobStore {
 public:
  explicit JobStore(const std::string& path = ":memory:");
  ~JobStore();
  JobStore(const JobStore&) = delete;
  JobStore& operator=(const JobStore&) = delete;

  void create(const std::string& run_uuid, const std::string& scenario);
  // False when `to` is not later than the current state or the job is unknown.
  bool advance(const std::string& run_uuid, JobState to, const std::string& message = {});
  // Writes the results row and the Complete state in one transaction.
  bool complete(const std::string& run_uuid, const std::string& results);
  std::optional<JobRecord> get(const std::string& run_uuid) const;
  // Non-terminal jobs left over from a previous process become Error.
  int recover_interrupted();
  std::size_t count() const;

 private:
  void exec(const char* sql) const;

  sqlite3* db_ = nullptr;
  mutable std::mutex mu_;
};

}  // namespace deropt::service
