#include "riplab/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <sstream>
#include <thread>

#include "riplab/asymptotics.hpp"
#include "riplab/error.hpp"
#include "riplab/generator.hpp"
#include "riplab/measure.hpp"
#include "riplab/potential.hpp"
#include "riplab/simulator.hpp"

namespace riplab {

namespace {

struct Point {
  SweepPoint at;
  WeightTable weights;
  ConfigSpace space;
  SparseGenerator gen;
};

Point build_point(const Scenario& s, SweepPoint at) {
  auto weights = build_weights(at.n, at.d);
  ConfigSpace space(at.n, s.kernel.size());
  auto gen = build_generator(s.kernel, weights, space);
  return Point{at, std::move(weights), space, std::move(gen)};
}

std::vector<Index> condensates(const ConfigSpace& space, const std::vector<Site>& sites) {
  std::vector<Index> out;
  for (Site x : sites) out.push_back(space.condensate(x));
  return out;
}

std::string site_list(const SiteKernel& kernel, const std::vector<Site>& sites) {
  std::string out;
  for (Site x : sites) out += (out.empty() ? "" : ";") + kernel.label(x);
  return out;
}

std::string display_list(const SiteKernel& kernel, const std::vector<Site>& sites) {
  std::string out;
  for (Site x : sites) out += (out.empty() ? "" : ", ") + kernel.label(x);
  return out;
}

int resolved_scale(const Scenario& s, const CommandOptions& o) { return o.scale.value_or(s.scale); }

ScalePrediction predict(const Scenario& s, int scale, SweepPoint at) {
  switch (scale) {
    case 1: return predict_scale1(s.kernel, at.d, s.source_site());
    case 2: return predict_scale2(s.kernel, at.d, at.n);
    case 3: return predict_scale3_bracket(s.kernel, at.d, at.n);
    default: throw Error(Errc::BadParameter, "scale must be 1, 2 or 3");
  }
}

void set_point_columns(Table& t, const Scenario& s, SweepPoint at) {
  t.set("N", static_cast<std::int64_t>(at.n));
  t.set("d_N", at.d);
  t.set("d_N_log_N", at.d * std::log(static_cast<double>(at.n)));
  t.set("states", static_cast<std::int64_t>(space_size(at.n, s.kernel.size())));
}

std::vector<Column> point_columns() {
  return {{"status"}, {"N"}, {"d_N"}, {"d_N_log_N"}, {"states"}, {"source"}, {"target"}};
}

std::vector<Column> with(std::vector<Column> base, std::initializer_list<Column> more) {
  base.insert(base.end(), more.begin(), more.end());
  return base;
}

// Fills one row per sweep point with up to `workers` points in flight; rows
// come out in scenario order whatever the completion order.
template <class Fill>
Table sweep(const Scenario& s, const CommandOptions& o, std::vector<Column> columns, int& exit_code, Fill fill) {
  const auto points = s.sweep();
  std::vector<Table> rows(points.size(), Table(columns));
  std::vector<char> failed(points.size(), 0);
  auto run = [&](std::size_t k) {
    Table& row = rows[k];
    row.new_row();
    set_point_columns(row, s, points[k]);
    row.set("source", s.kernel.label(s.source_site()));
    row.set("target", site_list(s.kernel, s.target_sites()));
    try {
      fill(points[k], row);
      row.set("status", std::string("ok"));
    } catch (const Error& e) {
      row.set("status", std::string("failed: ") + e.what());
      failed[k] = 1;
    }
  };
  const unsigned workers = std::max(1u, std::min<unsigned>(o.workers, static_cast<unsigned>(points.size())));
  if (workers == 1) {
    for (std::size_t k = 0; k < points.size(); ++k) run(k);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t k = next++; k < points.size(); k = next++) run(k);
      });
    for (auto& th : pool) th.join();
  }
  Table out(columns);
  for (std::size_t k = 0; k < points.size(); ++k) {
    out.append(rows[k]);
    if (failed[k]) exit_code = 1;
  }
  return out;
}

double table_number(const Table& t, std::size_t row, const std::string& column) {
  const auto& v = t.get(row, column);
  if (const auto* d = std::get_if<double>(&v)) return *d;
  if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
  return std::nan("");
}

std::string render(const Table& t, OutputFormat format, const std::string& title) {
  switch (format) {
    case OutputFormat::Csv: return t.csv();
    case OutputFormat::Json: return t.json().dump(2) + "\n";
    case OutputFormat::Svg: {
      const bool has_ratio = std::any_of(t.columns().begin(), t.columns().end(),
                                         [](const Column& c) { return c.name == "ratio"; });
      if (!has_ratio) throw Error(Errc::BadParameter, "svg output needs a ratio column; pass --scale");
      Series series{"exact / predicted", {}};
      for (std::size_t r = 0; r < t.size(); ++r)
        series.points.emplace_back(table_number(t, r, "N"), table_number(t, r, "ratio"));
      return line_chart_svg(title, "N", "exact / predicted", {series});
    }
  }
  return {};
}

}  // namespace

unsigned default_workers() {
  if (const char* env = std::getenv("RIPLAB_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return 1;
}

CommandResult cmd_validate(const std::filesystem::path& scenario_path) {
  CommandResult result;
  std::ostringstream os;
  try {
    const Scenario s = load_scenario(scenario_path);
    const auto& k = s.kernel;
    os << "scenario: " << (s.name.empty() ? scenario_path.filename().string() : s.name) << "\n";
    os << "sites:";
    for (Site x = 0; x < k.size(); ++x) os << " " << k.label(x);
    os << "\nm*:";
    for (Site x = 0; x < k.size(); ++x) os << " " << format_number(k.m_star(x));
    os << "\nS*: {" << display_list(k, k.s_star()) << "}\n";
    os << "kappa*: " << k.kappa_star() << "\n";
    if (const auto order = chain_order(k))
      os << "linear chain: yes, order " << display_list(k, *order) << "\n";
    else
      os << "linear chain: no\n";
    os << "source: " << k.label(s.source_site()) << "  target: " << site_list(k, s.target_sites()) << "\n";
    for (const auto& p : s.sweep())
      os << "N=" << p.n << " d_N=" << format_number(p.d) << " d_N*log(N)=" << format_number(p.d * std::log(p.n))
         << " states=" << space_size(p.n, k.size()) << "\n";
    os << "status: ok\n";
  } catch (const Error& e) {
    os << "error: " << e.what() << "\n";
    result.exit_code = 1;
  }
  result.output = os.str();
  return result;
}

Table capacity_table(const Scenario& s, const CommandOptions& o, int& exit_code) {
  const int scale = resolved_scale(s, o);
  auto columns = with(point_columns(), {{"capacity", true},
                                        {"capacity_dirichlet", true},
                                        {"iterations"},
                                        {"series_oracle", true},
                                        {"predicted_capacity", true},
                                        {"predicted_capacity_lower", true},
                                        {"predicted_capacity_upper", true},
                                        {"ratio", true}});
  return sweep(s, o, columns, exit_code, [&](SweepPoint at, Table& row) {
    const Point p = build_point(s, at);
    const auto rep = solve_equilibrium_potential(p.gen, {p.space.condensate(s.source_site())},
                                                 condensates(p.space, s.target_sites()));
    row.set("capacity", rep.capacity, Provenance::ExactSolve);
    row.set("capacity_dirichlet", rep.capacity_dirichlet, Provenance::ExactSolve);
    row.set("iterations", static_cast<std::int64_t>(rep.iterations));
    if (s.kernel.size() == 2) {
      // Birth-death chain on ℓ = η at the source: conductances in series.
      const Site x = s.source_site(), y = 1 - x;
      std::vector<double> c;
      for (Occupation l = 1; l <= at.n; ++l) {
        std::vector<Occupation> eta(2);
        eta[x] = l;
        eta[y] = at.n - l;
        const Index i = p.space.rank(std::span<const Occupation>(eta));
        c.push_back(std::exp(p.gen.log_mu()[i]) * l * (at.d + at.n - l) * s.kernel.rate(x, y));
      }
      row.set("series_oracle", series_conductance(c), Provenance::Oracle);
    }
    if (scale != 0) {
      const auto pred = predict(s, scale, at);
      if (pred.capacity) {
        row.set("predicted_capacity", *pred.capacity, Provenance::Formula);
        row.set("ratio", rep.capacity / *pred.capacity, Provenance::ExactSolve);
      }
      if (pred.capacity_bracket) {
        row.set("predicted_capacity_lower", pred.capacity_bracket->lower, Provenance::Formula);
        row.set("predicted_capacity_upper", pred.capacity_bracket->upper, Provenance::Formula);
      }
    }
  });
}

Table hitting_table(const Scenario& s, const CommandOptions& o, int& exit_code) {
  const int scale = resolved_scale(s, o);
  const std::size_t trials = o.trials.value_or(s.trials);
  const std::uint64_t seed = o.seed.value_or(s.seed);
  auto columns = with(point_columns(), {{"mean_hitting", true},
                                        {"mean_hitting_potential", true},
                                        {"theta", true},
                                        {"scaled_time", true},
                                        {"predicted_mean", true},
                                        {"predicted_lower", true},
                                        {"predicted_upper", true},
                                        {"ratio", true},
                                        {"trials"},
                                        {"mc_mean", true},
                                        {"mc_standard_error", true}});
  return sweep(s, o, columns, exit_code, [&](SweepPoint at, Table& row) {
    const Point p = build_point(s, at);
    const Index start = p.space.condensate(s.source_site());
    const auto target = condensates(p.space, s.target_sites());
    const double exact = mean_hitting_time(p.gen, start, target);
    const auto rep = solve_equilibrium_potential(p.gen, {start}, target);
    row.set("mean_hitting", exact, Provenance::ExactSolve);
    row.set("mean_hitting_potential", *rep.mean_hitting_from_a, Provenance::ExactSolve);
    if (scale != 0) {
      const auto pred = predict(s, scale, at);
      row.set("theta", pred.theta, Provenance::Formula);
      row.set("scaled_time", exact / pred.theta, Provenance::ExactSolve);
      if (pred.mean_time) {
        row.set("predicted_mean", *pred.mean_time, Provenance::Formula);
        row.set("ratio", exact / *pred.mean_time, Provenance::ExactSolve);
      }
      if (pred.hitting_bracket) {
        row.set("predicted_lower", pred.hitting_bracket->lower, Provenance::Formula);
        row.set("predicted_upper", pred.hitting_bracket->upper, Provenance::Formula);
      }
    }
    if (trials > 0) {
      SimulationOptions so;
      so.event_cap = s.event_cap;
      const auto mc = simulate_hitting(p.gen, start, target, trials, seed, so);
      row.set("trials", static_cast<std::int64_t>(trials));
      row.set("mc_mean", mc.mean_hitting_time(), Provenance::MonteCarlo);
      row.set("mc_standard_error", mc.standard_error(), Provenance::MonteCarlo);
    }
  });
}

Table simulate_table(const Scenario& s, const CommandOptions& o, int& exit_code, std::vector<Artifact>* per_trial) {
  const int scale = resolved_scale(s, o);
  const std::size_t trials = std::max<std::size_t>(1, o.trials.value_or(s.trials));
  const std::uint64_t seed = o.seed.value_or(s.seed);
  auto columns = with(point_columns(), {{"trials"},
                                        {"seed"},
                                        {"mc_mean", true},
                                        {"mc_standard_error", true},
                                        {"mc_min", true},
                                        {"mc_max", true},
                                        {"mean_events", true},
                                        {"theta", true},
                                        {"horizon"},
                                        {"path_jumps", true},
                                        {"path_jump_rate", true},
                                        {"path_delta_fraction", true}});
  std::mutex artifact_lock;
  std::vector<std::pair<Occupation, Artifact>> artifacts;
  auto table = sweep(s, o, columns, exit_code, [&](SweepPoint at, Table& row) {
    const Point p = build_point(s, at);
    SimulationOptions so;
    so.event_cap = s.event_cap;
    const Index start = p.space.condensate(s.source_site());
    const auto mc = simulate_hitting(p.gen, start, condensates(p.space, s.target_sites()), trials, seed, so);
    row.set("trials", static_cast<std::int64_t>(trials));
    row.set("seed", static_cast<std::int64_t>(seed));
    row.set("mc_mean", mc.mean_hitting_time(), Provenance::MonteCarlo);
    row.set("mc_standard_error", mc.standard_error(), Provenance::MonteCarlo);
    row.set("mc_min", *std::min_element(mc.hitting_times.begin(), mc.hitting_times.end()), Provenance::MonteCarlo);
    row.set("mc_max", *std::max_element(mc.hitting_times.begin(), mc.hitting_times.end()), Provenance::MonteCarlo);
    double events = 0.0;
    for (auto e : mc.events) events += static_cast<double>(e);
    row.set("mean_events", events / trials, Provenance::MonteCarlo);
    if (per_trial) {
      std::lock_guard<std::mutex> lock(artifact_lock);
      artifacts.push_back({at.n, {"trials_N" + std::to_string(at.n) + ".csv", trials_csv(mc)}});
    }
    if (scale != 0) {
      const auto pred = predict(s, scale, at);
      const auto path = simulate_condensate_path(p.gen, s.kernel, s.source_site(), s.horizon, pred.theta, seed, 1, so);
      row.set("theta", pred.theta, Provenance::Formula);
      row.set("horizon", s.horizon);
      row.set("path_jumps", static_cast<double>(path.condensate_jumps.size()), Provenance::MonteCarlo);
      row.set("path_jump_rate", path.condensate_jumps.size() / s.horizon, Provenance::MonteCarlo);
      row.set("path_delta_fraction", path.delta_fraction(), Provenance::MonteCarlo);
    }
  });
  if (per_trial) {
    std::stable_sort(artifacts.begin(), artifacts.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (auto& [n, a] : artifacts) per_trial->push_back(std::move(a));
  }
  return table;
}

Table predict_table(const Scenario& s, const CommandOptions& o, int& exit_code) {
  const int scale = resolved_scale(s, o);
  if (scale == 0) throw Error(Errc::BadParameter, "predict needs a scale; set it in the scenario or pass --scale");
  auto columns = with(point_columns(), {{"scale"},
                                        {"theta", true},
                                        {"predicted_mean", true},
                                        {"predicted_lower", true},
                                        {"predicted_upper", true},
                                        {"predicted_capacity", true},
                                        {"predicted_capacity_lower", true},
                                        {"predicted_capacity_upper", true}});
  return sweep(s, o, columns, exit_code, [&](SweepPoint at, Table& row) {
    const auto pred = predict(s, scale, at);
    row.set("scale", static_cast<std::int64_t>(scale));
    row.set("theta", pred.theta, Provenance::Formula);
    if (pred.mean_time) row.set("predicted_mean", *pred.mean_time, Provenance::Formula);
    if (pred.hitting_bracket) {
      row.set("predicted_lower", pred.hitting_bracket->lower, Provenance::Formula);
      row.set("predicted_upper", pred.hitting_bracket->upper, Provenance::Formula);
    }
    if (pred.capacity) row.set("predicted_capacity", *pred.capacity, Provenance::Formula);
    if (pred.capacity_bracket) {
      row.set("predicted_capacity_lower", pred.capacity_bracket->lower, Provenance::Formula);
      row.set("predicted_capacity_upper", pred.capacity_bracket->upper, Provenance::Formula);
    }
  });
}

namespace {

CommandResult finish(const Table& table, int exit_code, OutputFormat format, const std::string& title) {
  CommandResult r;
  r.exit_code = exit_code;
  r.output = render(table, format, title);
  return r;
}

}  // namespace

CommandResult cmd_capacity(const Scenario& s, const CommandOptions& o, OutputFormat format) {
  int code = 0;
  const auto t = capacity_table(s, o, code);
  return finish(t, code, format, "capacity: exact / predicted");
}

CommandResult cmd_hitting(const Scenario& s, const CommandOptions& o, OutputFormat format) {
  int code = 0;
  const auto t = hitting_table(s, o, code);
  return finish(t, code, format, "mean hitting time: exact / predicted");
}

CommandResult cmd_simulate(const Scenario& s, const CommandOptions& o, OutputFormat format) {
  int code = 0;
  std::vector<Artifact> extras;
  const auto t = simulate_table(s, o, code, &extras);
  auto r = finish(t, code, format == OutputFormat::Svg ? OutputFormat::Csv : format, "");
  r.extras = std::move(extras);
  return r;
}

CommandResult cmd_predict(const Scenario& s, const CommandOptions& o, OutputFormat format) {
  int code = 0;
  const auto t = predict_table(s, o, code);
  return finish(t, code, format == OutputFormat::Svg ? OutputFormat::Csv : format, "");
}

namespace {

std::string join_numbers(const std::vector<double>& v) {
  std::string out;
  for (double x : v) out += (out.empty() ? "" : " ") + format_number(x);
  return out;
}

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] < v[i - 1])) return false;
  return true;
}

}  // namespace

std::vector<CriterionOutcome> verify_scale(const Scenario& s, int scale, const CommandOptions& o) {
  const auto points = s.sweep();
  // Shape check before any solve.
  predict(s, scale, points.front());

  const double eps = o.epsilon.value_or(s.epsilon);
  std::vector<double> route_gap, ratio_error, scaled, lower, upper, dirichlet_gap;
  bool upper_bound_holds = true;
  for (const auto& at : points) {
    const Point p = build_point(s, at);
    const auto pred = predict(s, scale, at);
    const auto spec = test_function_spec(scale, eps, s.source_site());
    const auto sets = test_function_sets(spec, s.kernel, p.space);
    const auto rep = solve_equilibrium_potential(p.gen, sets.source, sets.target);
    const double direct = mean_hitting_time(p.gen, sets.source.front(), sets.target);
    route_gap.push_back(std::abs(direct - *rep.mean_hitting_from_a) / direct);

    const auto f = evaluate_test_function(spec, scale, s.kernel, p.space);
    const double df = dirichlet_form(p.gen, f);
    if (df < rep.capacity * (1.0 - 1e-12)) upper_bound_holds = false;
    dirichlet_gap.push_back(df - rep.capacity);

    if (pred.mean_time) {
      ratio_error.push_back(std::abs(direct / *pred.mean_time - 1.0));
    } else {
      scaled.push_back(direct / pred.theta);
      lower.push_back(pred.hitting_constants->lower);
      upper.push_back(pred.hitting_constants->upper);
    }
  }

  std::vector<CriterionOutcome> out;
  const double worst_gap = *std::max_element(route_gap.begin(), route_gap.end());
  out.push_back({"two-route mean hitting time agree to 1e-8", worst_gap <= 1e-8,
                 "max relative gap " + format_number(worst_gap)});
  out.push_back({"Dirichlet form of the test function bounds the capacity", upper_bound_holds,
                 "D(F) - Cap: " + join_numbers(dirichlet_gap)});
  if (scale == 1 && points.size() > 1)
    out.push_back({"test-function gap shrinks with N", strictly_decreasing(dirichlet_gap),
                   "D(F) - Cap: " + join_numbers(dirichlet_gap)});
  if (!ratio_error.empty()) {
    const double limit = scale == 1 ? 0.20 : 0.25;
    const bool trend = strictly_decreasing(ratio_error);
    out.push_back({"relative error of the predicted mean time decreases along the sweep", trend,
                   "errors " + join_numbers(ratio_error)});
    out.push_back({"final relative error at most " + format_number(limit), ratio_error.back() <= limit,
                   "final error " + format_number(ratio_error.back())});
  } else {
    bool inside = true;
    for (std::size_t i = 0; i < scaled.size(); ++i)
      inside = inside && scaled[i] >= 0.5 * lower[i] && scaled[i] <= 2.0 * upper[i];
    out.push_back({"d^3/N^2 E[tau] inside [C1/2, 2 C2]", inside,
                   "scaled " + join_numbers(scaled) + " bracket [" + format_number(0.5 * lower.front()) + ", " +
                       format_number(2.0 * upper.front()) + "]"});
  }
  return out;
}

CommandResult cmd_verify(const Scenario& s, int scale, const CommandOptions& o, OutputFormat format) {
  const auto outcomes = verify_scale(s, scale, o);
  Table t({{"criterion"}, {"passed"}, {"measured"}});
  CommandResult r;
  for (const auto& c : outcomes) {
    t.new_row();
    t.set("criterion", c.name);
    t.set("passed", std::string(c.passed ? "pass" : "fail"));
    t.set("measured", c.measured);
    if (!c.passed) r.exit_code = 1;
  }
  r.output = format == OutputFormat::Json ? t.json().dump(2) + "\n" : t.csv();
  return r;
}

}  // namespace riplab
