#include "deropt/service/job_store.hpp"

#include <sqlite3.h>

#include <chrono>
#include <cstdio>
#include <random>
#include <stdexcept>

namespace deropt::service {

namespace {

double now_seconds() {
  using namespace std::chrono;
  return duration<double>(system_clock::now().time_since_epoch()).count();
}

class Statement {
 public:
  Statement(sqlite3* db, const char* sql) {
    if (sqlite3_prepare_v2(db, sql, -1, &stmt_, nullptr) != SQLITE_OK) {
      throw std::runtime_error(std::string("sqlite prepare: ") + sqlite3_errmsg(db));
    }
  }
  ~Statement() { sqlite3_finalize(stmt_); }
  Statement(const Statement&) = delete;
  Statement& operator=(const Statement&) = delete;

  Statement& bind(int i, const std::string& v) {
    sqlite3_bind_text(stmt_, i, v.data(), static_cast<int>(v.size()), SQLITE_TRANSIENT);
    return *this;
  }
  Statement& bind(int i, double v) {
    sqlite3_bind_double(stmt_, i, v);
    return *this;
  }
  Statement& bind(int i, int v) {
    sqlite3_bind_int(stmt_, i, v);
    return *this;
  }
  bool step() {
    const int rc = sqlite3_step(stmt_);
    if (rc == SQLITE_ROW) return true;
    if (rc == SQLITE_DONE) return false;
    throw std::runtime_error(std::string("sqlite step: ") +
                             sqlite3_errmsg(sqlite3_db_handle(stmt_)));
  }
  std::string text(int col) const {
    const auto* p = sqlite3_column_text(stmt_, col);
    return p ? std::string(reinterpret_cast<const char*>(p), sqlite3_column_bytes(stmt_, col))
             : std::string();
  }
  bool is_null(int col) const { return sqlite3_column_type(stmt_, col) == SQLITE_NULL; }
  double real(int col) const { return sqlite3_column_double(stmt_, col); }
  int integer(int col) const { return sqlite3_column_int(stmt_, col); }

 private:
  sqlite3_stmt* stmt_ = nullptr;
};

}  // namespace

std::string_view to_string(JobState s) {
  switch (s) {
    case JobState::Queued: return "Queued";
    case JobState::Validating: return "Validating";
    case JobState::Solving: return "Solving";
    case JobState::Postprocessing: return "Postprocessing";
    case JobState::Complete: return "Complete";
    case JobState::Error: return "Error";
  }
  return "Error";
}

std::optional<JobState> job_state_from_string(std::string_view s) {
  for (auto st : {JobState::Queued, JobState::Validating, JobState::Solving,
                  JobState::Postprocessing, JobState::Complete, JobState::Error}) {
    if (to_string(st) == s) return st;
  }
  return std::nullopt;
}

bool is_terminal(JobState s) { return s == JobState::Complete || s == JobState::Error; }

std::string new_uuid() {
  static std::mutex mu;
  static std::mt19937_64 rng{std::random_device{}()};
  std::uint64_t hi, lo;
  {
    std::lock_guard lock(mu);
    hi = rng();
    lo = rng();
  }
  hi = (hi & 0xFFFFFFFFFFFF0FFFULL) | 0x0000000000004000ULL;
  lo = (lo & 0x3FFFFFFFFFFFFFFFULL) | 0x8000000000000000ULL;
  char buf[37];
  std::snprintf(buf, sizeof buf, "%08x-%04x-%04x-%04x-%012llx",
                static_cast<unsigned>(hi >> 32), static_cast<unsigned>((hi >> 16) & 0xFFFF),
                static_cast<unsigned>(hi & 0xFFFF), static_cast<unsigned>(lo >> 48),
                static_cast<unsigned long long>(lo & 0xFFFFFFFFFFFFULL));
  return buf;
}

JobStore::JobStore(const std::string& path) {
  if (sqlite3_open_v2(path.c_str(), &db_,
                      SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE | SQLITE_OPEN_FULLMUTEX,
                      nullptr) != SQLITE_OK) {
    std::string msg = db_ ? sqlite3_errmsg(db_) : "out of memory";
    sqlite3_close(db_);
    throw std::runtime_error("cannot open job store " + path + ": " + msg);
  }
  sqlite3_busy_timeout(db_, 5000);
  exec("PRAGMA journal_mode=WAL");
  exec(
      "CREATE TABLE IF NOT EXISTS jobs ("
      " run_uuid TEXT PRIMARY KEY,"
      " state INTEGER NOT NULL,"
      " message TEXT NOT NULL DEFAULT '',"
      " scenario TEXT NOT NULL,"
      " created_at REAL NOT NULL,"
      " updated_at REAL NOT NULL)");
  exec(
      "CREATE TABLE IF NOT EXISTS results ("
      " run_uuid TEXT PRIMARY KEY REFERENCES jobs(run_uuid),"
      " document TEXT NOT NULL)");
}

JobStore::~JobStore() { sqlite3_close(db_); }

void JobStore::exec(const char* sql) const {
  char* err = nullptr;
  if (sqlite3_exec(db_, sql, nullptr, nullptr, &err) != SQLITE_OK) {
    std::string msg = err ? err : "unknown error";
    sqlite3_free(err);
    throw std::runtime_error("sqlite: " + msg);
  }
}

void JobStore::create(const std::string& run_uuid, const std::string& scenario) {
  std::lock_guard lock(mu_);
  const double t = now_seconds();
  Statement st(db_,
               "INSERT INTO jobs (run_uuid, state, scenario, created_at, updated_at) "
               "VALUES (?, ?, ?, ?, ?)");
  st.bind(1, run_uuid).bind(2, static_cast<int>(JobState::Queued)).bind(3, scenario);
  st.bind(4, t).bind(5, t);
  st.step();
}

bool JobStore::advance(const std::string& run_uuid, JobState to, const std::string& message) {
  if (to == JobState::Complete) {
    throw std::logic_error("use JobStore::complete to finish a job");
  }
  std::lock_guard lock(mu_);
  Statement st(db_,
               "UPDATE jobs SET state = ?, message = ?, updated_at = ? "
               "WHERE run_uuid = ? AND state < ? AND state < ?");
  st.bind(1, static_cast<int>(to)).bind(2, message).bind(3, now_seconds());
  st.bind(4, run_uuid).bind(5, static_cast<int>(to));
  st.bind(6, static_cast<int>(JobState::Complete));
  st.step();
  return sqlite3_changes(db_) > 0;
}

bool JobStore::complete(const std::string& run_uuid, const std::string& results) {
  std::lock_guard lock(mu_);
  exec("BEGIN IMMEDIATE");
  try {
    Statement up(db_,
                 "UPDATE jobs SET state = ?, message = '', updated_at = ? "
                 "WHERE run_uuid = ? AND state < ?");
    up.bind(1, static_cast<int>(JobState::Complete)).bind(2, now_seconds()).bind(3, run_uuid);
    up.bind(4, static_cast<int>(JobState::Complete));
    up.step();
    if (sqlite3_changes(db_) == 0) {
      exec("ROLLBACK");
      return false;
    }
    Statement ins(db_, "INSERT INTO results (run_uuid, document) VALUES (?, ?)");
    ins.bind(1, run_uuid).bind(2, results);
    ins.step();
    exec("COMMIT");
    return true;
  } catch (...) {
    exec("ROLLBACK");
    throw;
  }
}

std::optional<JobRecord> JobStore::get(const std::string& run_uuid) const {
  std::lock_guard lock(mu_);
  Statement st(db_,
               "SELECT j.state, j.message, j.scenario, j.created_at, j.updated_at, r.document "
               "FROM jobs j LEFT JOIN results r ON r.run_uuid = j.run_uuid "
               "WHERE j.run_uuid = ?");
  st.bind(1, run_uuid);
  if (!st.step()) return std::nullopt;
  JobRecord r;
  r.run_uuid = run_uuid;
  r.state = static_cast<JobState>(st.integer(0));
  r.message = st.text(1);
  r.scenario = st.text(2);
  r.created_at = st.real(3);
  r.updated_at = st.real(4);
  if (!st.is_null(5)) r.results = st.text(5);
  return r;
}

int JobStore::recover_interrupted() {
  std::lock_guard lock(mu_);
  Statement st(db_,
               "UPDATE jobs SET state = ?, message = 'interrupted before completion', "
               "updated_at = ? WHERE state < ?");
  st.bind(1, static_cast<int>(JobState::Error)).bind(2, now_seconds());
  st.bind(3, static_cast<int>(JobState::Complete));
  st.step();
  return sqlite3_changes(db_);
}

std::size_t JobStore::count() const {
  std::lock_guard lock(mu_);
  Statement st(db_, "SELECT COUNT(*) FROM jobs");
  st.step();
  return static_cast<std::size_t>(st.integer(0));
}

}  // namespace deropt::service
