#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "deropt/core/scenario.hpp"

namespace deropt::ingest {

struct FixtureSource {
  std::filesystem::path path;
};

enum class SyntheticKind { Solar, Wind, Constant, Backup };

struct SyntheticSource {
  SyntheticKind kind = SyntheticKind::Solar;
  double value = 1.0;  // peak for Solar/Wind amplitude scale, level for Constant
};

// HTTP GET returning a JSON array with one factor per step.
struct RemoteSource {
  std::string url;
};

struct ProductionProvider {
  std::variant<FixtureSource, SyntheticSource, RemoteSource> kind;
  bool use_cache = true;
};

// Parses a provider reference string:
//   synthetic:solar[:peak]   synthetic:wind[:scale]   constant:<v>   backup
//   fixture:<path.csv>       remote:<http://host:port/path>
// Throws Error(InvalidInput) on anything else.
ProductionProvider parse_provider(std::string_view ref);

struct ProviderContext {
  std::filesystem::path fixture_dir;
};

// Per-kW production factor on `grid`, every value in [0, 1]. Backup sources
// are 1 inside the outage window and 0 elsewhere.
TimeSeries production_factor(const ProductionProvider& p, const TechSpec& tech,
                             const TimeGrid& grid,
                             const std::optional<OutageSpec>& outage,
                             const ProviderContext& ctx = {});

// Utility availability: all ones, zero inside the outage window.
TimeSeries grid_availability(const TimeGrid& grid,
                             const std::optional<OutageSpec>& outage);

bool is_backup(const ProductionProvider& p);

// Drops everything held by the remote-provider cache.
void clear_remote_cache();

}  // namespace deropt::ingest
