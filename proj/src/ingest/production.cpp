#include "deropt/ingest/production.hpp"

#include <charconv>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "deropt/core/error.hpp"
#include "deropt/core/scenario_json.hpp"
#include "httplib.h"
#include "json.hpp"

namespace deropt::ingest {

namespace {

double parse_number(std::string_view text, std::string_view ref) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error(ErrorCode::InvalidInput,
                "bad number in provider reference '" + std::string(ref) + "'");
  }
  return v;
}

double step_hour(const TimeGrid& grid, int h) {
  double dt = grid.delta_hours();
  return grid.hour_of_day(h) + (h % grid.steps_per_hour) * dt + 0.5 * dt;
}

Eigen::VectorXd synthetic_solar(const TimeGrid& grid, double peak) {
  Eigen::VectorXd v(grid.horizon_steps);
  for (int h = 0; h < grid.horizon_steps; ++h) {
    double hour = step_hour(grid, h);
    double sun = (hour > 6.0 && hour < 18.0)
                     ? std::sin(std::numbers::pi * (hour - 6.0) / 12.0)
                     : 0.0;
    double season =
        0.75 + 0.25 * std::cos(2.0 * std::numbers::pi * (grid.day_of_year(h) - 172) / 365.0);
    v[h] = std::clamp(peak * season * sun, 0.0, 1.0);
  }
  return v;
}

Eigen::VectorXd synthetic_wind(const TimeGrid& grid, double scale) {
  Eigen::VectorXd v(grid.horizon_steps);
  for (int h = 0; h < grid.horizon_steps; ++h) {
    double hour = step_hour(grid, h);
    double day = grid.day_of_year(h) + hour / 24.0;
    double raw = 0.35 + 0.2 * std::sin(2.0 * std::numbers::pi * hour / 24.0 + 1.3) +
                 0.15 * std::sin(2.0 * std::numbers::pi * day / 7.3);
    v[h] = std::clamp(scale * raw, 0.0, 1.0);
  }
  return v;
}

void check_unit_interval(const Eigen::VectorXd& v, std::string_view what) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!(v[i] >= 0.0 && v[i] <= 1.0)) {
      throw Error(ErrorCode::InvalidInput,
                  std::string(what) + ": production factor " + std::to_string(v[i]) +
                      " at step " + std::to_string(i) + " outside [0, 1]");
    }
  }
}

struct RemoteCache {
  std::mutex mutex;
  std::map<std::pair<std::string, int>, Eigen::VectorXd> entries;
};

RemoteCache& remote_cache() {
  static RemoteCache cache;
  return cache;
}

Eigen::VectorXd fetch_remote(const std::string& url, int steps) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorCode::ProviderUnavailable, "remote url without scheme: " + url);
  }
  auto path_start = url.find('/', scheme_end + 3);
  std::string host = url.substr(0, path_start);
  std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);
  httplib::Client client(host);
  client.set_connection_timeout(5, 0);
  client.set_read_timeout(30, 0);
  auto res = client.Get(path);
  if (!res) {
    throw Error(ErrorCode::ProviderUnavailable,
                "GET " + url + " failed: " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw Error(ErrorCode::ProviderUnavailable,
                "GET " + url + " returned HTTP " + std::to_string(res->status));
  }
  nlohmann::json body = nlohmann::json::parse(res->body, nullptr, false);
  if (!body.is_array()) {
    throw Error(ErrorCode::ProviderUnavailable, "GET " + url + " did not return an array");
  }
  if (static_cast<int>(body.size()) != steps) {
    throw Error(ErrorCode::LengthMismatch, "remote factors have " +
                                               std::to_string(body.size()) +
                                               " values, expected " + std::to_string(steps));
  }
  Eigen::VectorXd v(steps);
  for (int i = 0; i < steps; ++i) v[i] = body[i].get<double>();
  return v;
}

}  // namespace

ProductionProvider parse_provider(std::string_view ref) {
  auto colon = ref.find(':');
  std::string_view head = ref.substr(0, colon);
  std::string_view rest = colon == std::string_view::npos ? "" : ref.substr(colon + 1);
  if (head == "backup" && rest.empty()) {
    return {SyntheticSource{SyntheticKind::Backup, 1.0}};
  }
  if (head == "constant" && !rest.empty()) {
    double v = parse_number(rest, ref);
    if (!(v >= 0.0 && v <= 1.0)) {
      throw Error(ErrorCode::InvalidInput, "constant factor must lie in [0, 1]");
    }
    return {SyntheticSource{SyntheticKind::Constant, v}};
  }
  if (head == "synthetic") {
    auto sep = rest.find(':');
    std::string_view kind = rest.substr(0, sep);
    double value = sep == std::string_view::npos ? 1.0 : parse_number(rest.substr(sep + 1), ref);
    if (!(value >= 0.0 && value <= 1.0)) {
      throw Error(ErrorCode::InvalidInput, "synthetic scale must lie in [0, 1]");
    }
    if (kind == "solar") return {SyntheticSource{SyntheticKind::Solar, value}};
    if (kind == "wind") return {SyntheticSource{SyntheticKind::Wind, value}};
  }
  if (head == "fixture" && !rest.empty()) {
    return {FixtureSource{std::filesystem::path(std::string(rest))}};
  }
  if (head == "remote" && !rest.empty()) {
    return {RemoteSource{std::string(rest)}};
  }
  throw Error(ErrorCode::InvalidInput,
              "unrecognized production factor source '" + std::string(ref) + "'");
}

bool is_backup(const ProductionProvider& p) {
  const auto* s = std::get_if<SyntheticSource>(&p.kind);
  return s && s->kind == SyntheticKind::Backup;
}

TimeSeries grid_availability(const TimeGrid& grid,
                             const std::optional<OutageSpec>& outage) {
  Eigen::VectorXd v = Eigen::VectorXd::Ones(grid.horizon_steps);
  if (outage) {
    for (int h = std::max(0, outage->start_step);
         h < std::min(grid.horizon_steps, outage->end_step); ++h) {
      v[h] = 0.0;
    }
  }
  return TimeSeries(grid, std::move(v), Unit::Fraction);
}

TimeSeries production_factor(const ProductionProvider& p, const TechSpec& tech,
                             const TimeGrid& grid,
                             const std::optional<OutageSpec>& outage,
                             const ProviderContext& ctx) {
  Eigen::VectorXd v;
  if (const auto* s = std::get_if<SyntheticSource>(&p.kind)) {
    switch (s->kind) {
      case SyntheticKind::Solar: v = synthetic_solar(grid, s->value); break;
      case SyntheticKind::Wind: v = synthetic_wind(grid, s->value); break;
      case SyntheticKind::Constant:
        v = Eigen::VectorXd::Constant(grid.horizon_steps, s->value);
        break;
      case SyntheticKind::Backup:
        v = Eigen::VectorXd::Ones(grid.horizon_steps) -
            grid_availability(grid, outage).values();
        if (!outage) v.setZero();
        break;
    }
  } else if (const auto* f = std::get_if<FixtureSource>(&p.kind)) {
    std::filesystem::path path = f->path.is_absolute() ? f->path : ctx.fixture_dir / f->path;
    std::vector<double> values;
    try {
      values = read_csv_column(path);
    } catch (const Error& e) {
      throw Error(ErrorCode::ProviderUnavailable, e.what());
    }
    if (static_cast<int>(values.size()) != grid.horizon_steps) {
      throw Error(ErrorCode::LengthMismatch,
                  "fixture " + path.string() + " has " + std::to_string(values.size()) +
                      " values, expected " + std::to_string(grid.horizon_steps));
    }
    v = Eigen::Map<const Eigen::VectorXd>(values.data(), grid.horizon_steps);
  } else {
    const auto& r = std::get<RemoteSource>(p.kind);
    RemoteCache& cache = remote_cache();
    const auto key = std::make_pair(r.url, grid.horizon_steps);
    bool hit = false;
    if (p.use_cache) {
      std::lock_guard lock(cache.mutex);
      if (auto it = cache.entries.find(key); it != cache.entries.end()) {
        v = it->second;
        hit = true;
      }
    }
    if (!hit) {
      v = fetch_remote(r.url, grid.horizon_steps);
      if (p.use_cache) {
        std::lock_guard lock(cache.mutex);
        cache.entries.emplace(key, v);
      }
    }
  }
  check_unit_interval(v, tech.name);
  return TimeSeries(grid, std::move(v), Unit::Fraction);
}

void clear_remote_cache() {
  RemoteCache& cache = remote_cache();
  std::lock_guard lock(cache.mutex);
  cache.entries.clear();
}

}  // namespace deropt::ingest
