#include "riplab/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>

#include "riplab/error.hpp"
#include "riplab/measure.hpp"

namespace riplab {

namespace {

std::mutex& registry_lock() {
  static std::mutex lock;
  return lock;
}

std::map<std::string, Schedule>& registry() {
  static std::map<std::string, Schedule> table{{"inverse-log-squared", inverse_log_squared}};
  return table;
}

[[noreturn]] void parse_failure(const YAML::Node& node, const std::string& field, const std::string& why) {
  std::ostringstream os;
  os << "field '" << field << "'";
  if (node.IsDefined() && node.Mark().line >= 0) os << " at line " << node.Mark().line + 1;
  os << ": " << why;
  throw Error(Errc::ParseError, os.str());
}

template <class T>
T scalar(const YAML::Node& node, const std::string& field) {
  if (!node.IsScalar()) parse_failure(node, field, "expected a scalar");
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    parse_failure(node, field, "cannot read '" + node.Scalar() + "'");
  }
}

std::vector<double> number_list(const YAML::Node& node, const std::string& field) {
  if (!node.IsSequence()) parse_failure(node, field, "expected a list");
  std::vector<double> out;
  for (std::size_t i = 0; i < node.size(); ++i)
    out.push_back(scalar<double>(node[i], field + "[" + std::to_string(i) + "]"));
  return out;
}

void reject_unknown_keys(const YAML::Node& node, const std::string& where,
                         std::initializer_list<const char*> known) {
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (std::find_if(known.begin(), known.end(), [&](const char* k) { return key == k; }) == known.end())
      parse_failure(kv.first, where.empty() ? key : where + "." + key, "unknown key");
  }
}

SiteKernel kernel_from(const YAML::Node& node) {
  if (!node.IsMap()) parse_failure(node, "kernel", "expected a mapping with 'sites' and 'rates'");
  reject_unknown_keys(node, "kernel", {"sites", "rates", "measure"});

  const auto sites_node = node["sites"];
  if (!sites_node) parse_failure(node, "kernel.sites", "missing");
  if (!sites_node.IsSequence()) parse_failure(sites_node, "kernel.sites", "expected a list of site labels");
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < sites_node.size(); ++i) {
    labels.push_back(scalar<std::string>(sites_node[i], "kernel.sites[" + std::to_string(i) + "]"));
    if (std::count(labels.begin(), labels.end(), labels.back()) > 1)
      parse_failure(sites_node[i], "kernel.sites", "duplicate site '" + labels.back() + "'");
  }
  auto index_of = [&](const YAML::Node& n, const std::string& field) {
    const auto label = scalar<std::string>(n, field);
    const auto it = std::find(labels.begin(), labels.end(), label);
    if (it == labels.end()) parse_failure(n, field, "unknown site '" + label + "'");
    return static_cast<std::size_t>(it - labels.begin());
  };

  const auto rates_node = node["rates"];
  if (!rates_node) parse_failure(node, "kernel.rates", "missing");
  if (!rates_node.IsSequence()) parse_failure(rates_node, "kernel.rates", "expected a list of [from, to, rate]");
  std::vector<std::vector<double>> rates(labels.size(), std::vector<double>(labels.size(), 0.0));
  for (std::size_t i = 0; i < rates_node.size(); ++i) {
    const auto entry = rates_node[i];
    const std::string field = "kernel.rates[" + std::to_string(i) + "]";
    if (!entry.IsSequence() || entry.size() != 3) parse_failure(entry, field, "expected [from, to, rate]");
    const auto x = index_of(entry[0], field + ".from");
    const auto y = index_of(entry[1], field + ".to");
    rates[x][y] = scalar<double>(entry[2], field + ".rate");
  }

  std::optional<std::vector<double>> measure;
  if (const auto m = node["measure"]) {
    measure = number_list(m, "kernel.measure");
    if (measure->size() != labels.size()) parse_failure(m, "kernel.measure", "needs one value per site");
  }
  return build_kernel(rates, std::move(measure), std::move(labels));
}

YAML::Node load_yaml(const std::string& text) {
  try {
    return YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    std::ostringstream os;
    os << "line " << e.mark.line + 1 << ": " << e.msg;
    throw Error(Errc::ParseError, os.str());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::ParseError, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Site site_field(const SiteKernel& kernel, const YAML::Node& node, const std::string& field) {
  const auto label = scalar<std::string>(node, field);
  try {
    return kernel.site_of(label);
  } catch (const Error&) {
    parse_failure(node, field, "unknown site '" + label + "'");
  }
}

}  // namespace

void register_schedule(const std::string& name, Schedule schedule) {
  std::lock_guard<std::mutex> lock(registry_lock());
  registry()[name] = std::move(schedule);
}

std::optional<Schedule> find_schedule(const std::string& name) {
  std::lock_guard<std::mutex> lock(registry_lock());
  const auto it = registry().find(name);
  if (it == registry().end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> schedule_names() {
  std::lock_guard<std::mutex> lock(registry_lock());
  std::vector<std::string> names;
  for (const auto& [name, fn] : registry()) names.push_back(name);
  return names;
}

double DSchedule::at(std::size_t index, Occupation n_particles) const {
  if (name == "explicit") {
    if (index >= values.size()) throw Error(Errc::BadParameter, "explicit d_N list is shorter than the N list");
    return values[index];
  }
  const auto fn = find_schedule(name);
  if (!fn) throw Error(Errc::BadParameter, "unknown d_N schedule '" + name + "'");
  return (*fn)(n_particles);
}

std::vector<SweepPoint> Scenario::sweep() const {
  std::vector<SweepPoint> points;
  for (std::size_t i = 0; i < n_values.size(); ++i) points.push_back({n_values[i], schedule.at(i, n_values[i])});
  return points;
}

Site Scenario::source_site() const { return source.value_or(kernel.s_star().front()); }

std::vector<Site> Scenario::target_sites() const {
  if (!target.empty()) return target;
  std::vector<Site> out;
  for (Site y : kernel.s_star())
    if (y != source_site()) out.push_back(y);
  return out;
}

SiteKernel parse_kernel(const std::string& text) { return kernel_from(load_yaml(text)); }

Scenario parse_scenario(const std::string& text, const std::filesystem::path& base_dir) {
  const YAML::Node root = load_yaml(text);
  if (!root.IsMap()) parse_failure(root, "scenario", "expected a mapping");
  reject_unknown_keys(root, "", {"name", "kernel", "N", "d", "scale", "source", "target", "trials", "seed",
                                 "horizon", "epsilon", "event_cap", "max_states"});

  const auto kernel_node = root["kernel"];
  if (!kernel_node) parse_failure(root, "kernel", "missing");
  SiteKernel kernel = kernel_node.IsScalar()
                          ? parse_kernel(read_file(base_dir / scalar<std::string>(kernel_node, "kernel")))
                          : kernel_from(kernel_node);

  Scenario s(std::move(kernel));
  s.origin = base_dir;
  if (const auto n = root["name"]) s.name = scalar<std::string>(n, "name");

  const auto n_node = root["N"];
  if (!n_node) parse_failure(root, "N", "missing");
  if (n_node.IsScalar()) {
    s.n_values.push_back(scalar<Occupation>(n_node, "N"));
  } else if (n_node.IsSequence()) {
    for (std::size_t i = 0; i < n_node.size(); ++i)
      s.n_values.push_back(scalar<Occupation>(n_node[i], "N[" + std::to_string(i) + "]"));
  } else {
    parse_failure(n_node, "N", "expected an integer or a list");
  }
  if (s.n_values.empty()) parse_failure(n_node, "N", "empty list");
  for (Occupation n : s.n_values)
    if (n < 2) parse_failure(n_node, "N", "every N must be at least 2");

  if (const auto d = root["d"]) {
    if (d.IsScalar()) {
      s.schedule.name = scalar<std::string>(d, "d");
      if (!find_schedule(s.schedule.name)) {
        // A bare number is a constant explicit schedule.
        try {
          const double v = d.as<double>();
          s.schedule.name = "explicit";
          s.schedule.values.assign(s.n_values.size(), v);
        } catch (const YAML::Exception&) {
          parse_failure(d, "d", "unknown schedule '" + s.schedule.name + "'");
        }
      }
    } else if (d.IsSequence()) {
      s.schedule.name = "explicit";
      s.schedule.values = number_list(d, "d");
      if (s.schedule.values.size() != s.n_values.size())
        parse_failure(d, "d", "explicit list needs one value per N");
    } else {
      parse_failure(d, "d", "expected a schedule name, a number or a list");
    }
  }
  for (double v : s.schedule.values)
    if (!(v > 0.0)) parse_failure(root["d"], "d", "every d_N must be positive");

  if (const auto v = root["scale"]) {
    s.scale = scalar<int>(v, "scale");
    if (s.scale < 1 || s.scale > 3) parse_failure(v, "scale", "must be 1, 2 or 3");
  }
  if (const auto v = root["source"]) s.source = site_field(s.kernel, v, "source");
  if (const auto v = root["target"]) {
    if (v.IsSequence()) {
      for (std::size_t i = 0; i < v.size(); ++i)
        s.target.push_back(site_field(s.kernel, v[i], "target[" + std::to_string(i) + "]"));
    } else {
      s.target.push_back(site_field(s.kernel, v, "target"));
    }
  }
  if (const auto v = root["trials"]) s.trials = scalar<std::size_t>(v, "trials");
  if (const auto v = root["seed"]) s.seed = scalar<std::uint64_t>(v, "seed");
  if (const auto v = root["horizon"]) s.horizon = scalar<double>(v, "horizon");
  if (const auto v = root["epsilon"]) s.epsilon = scalar<double>(v, "epsilon");
  if (const auto v = root["event_cap"]) s.event_cap = scalar<std::uint64_t>(v, "event_cap");
  if (const auto v = root["max_states"]) s.state_guard = scalar<Index>(v, "max_states");

  const Site src = s.source_site();
  if (!s.kernel.in_s_star(src)) parse_failure(root["source"], "source", "must be a site of S*");
  for (Site y : s.target_sites())
    if (y == src) parse_failure(root["target"], "target", "must not contain the source");
  for (Occupation n : s.n_values)
    if (space_size(n, s.kernel.size()) > s.state_guard)
      parse_failure(n_node, "N", "N = " + std::to_string(n) + " exceeds the state-space guard");
  for (const auto& p : s.sweep())
    if (!(p.d > 0.0) || !std::isfinite(p.d)) parse_failure(root["d"], "d", "schedule produced d_N <= 0");
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  return parse_scenario(read_file(path), path.parent_path().empty() ? "." : path.parent_path());
}

}  // namespace riplab
