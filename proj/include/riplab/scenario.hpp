#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "riplab/config_space.hpp"
#include "riplab/model.hpp"

namespace riplab {

using Schedule = std::function<double(Occupation)>;

// Named d_N schedules. "inverse-log-squared" is registered by default.
void register_schedule(const std::string& name, Schedule schedule);
std::optional<Schedule> find_schedule(const std::string& name);
std::vector<std::string> schedule_names();

struct DSchedule {
  // A registry name, or "explicit" with one value per N.
  std::string name = "inverse-log-squared";
  std::vector<double> values;

  double at(std::size_t index, Occupation n_particles) const;
};

struct SweepPoint {
  Occupation n = 0;
  double d = 0.0;
};

inline constexpr Index kDefaultStateGuard = 20'000'000;

struct Scenario {
  explicit Scenario(SiteKernel k) : kernel(std::move(k)) {}

  std::string name;
  std::filesystem::path origin;
  SiteKernel kernel;
  std::vector<Occupation> n_values;
  DSchedule schedule;
  int scale = 0;
  // Start condensate site and target sites; empty target means S* without
  // the source.
  std::optional<Site> source;
  std::vector<Site> target;
  std::size_t trials = 0;
  std::uint64_t seed = 1;
  double horizon = 10.0;
  double epsilon = 0.05;
  std::uint64_t event_cap = 10'000'000'000ULL;
  Index state_guard = kDefaultStateGuard;

  std::vector<SweepPoint> sweep() const;
  Site source_site() const;
  std::vector<Site> target_sites() const;
};

// Parses a scenario YAML document. The kernel is either inline (a mapping
// with `rates`, optional `measure` and `labels`) or a path to such a file,
// resolved against base_dir. Throws ParseError naming the field and line, or
// the kernel validation error.
Scenario parse_scenario(const std::string& text, const std::filesystem::path& base_dir = ".");
Scenario load_scenario(const std::filesystem::path& path);

SiteKernel parse_kernel(const std::string& text);

}  // namespace riplab
