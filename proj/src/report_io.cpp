#include "riplab/report_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

#include "riplab/error.hpp"

namespace riplab {

std::string_view to_string(Provenance p) noexcept {
  switch (p) {
    case Provenance::ExactSolve: return "exact-solve";
    case Provenance::MonteCarlo: return "monte-carlo";
    case Provenance::Formula: return "formula";
    case Provenance::Oracle: return "oracle";
  }
  return "unknown";
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void Table::put(const std::string& column, Value v, std::string provenance) {
  if (rows_.empty()) throw Error(Errc::BadInput, "table has no open row");
  const auto it = std::find_if(columns_.begin(), columns_.end(), [&](const Column& c) { return c.name == column; });
  if (it == columns_.end()) throw Error(Errc::BadInput, "unknown column " + column);
  rows_.back()[column] = Cell{std::move(v), std::move(provenance)};
}

void Table::append(const Table& other) {
  rows_.insert(rows_.end(), other.rows_.begin(), other.rows_.end());
}

void Table::set(const std::string& column, double v, Provenance p) { put(column, v, std::string(to_string(p))); }
void Table::set(const std::string& column, double v) { put(column, v, ""); }
void Table::set(const std::string& column, std::int64_t v) { put(column, v, ""); }
void Table::set(const std::string& column, std::string v) { put(column, std::move(v), ""); }

const Table::Value& Table::get(std::size_t row, const std::string& column) const {
  static const Value empty;
  const auto it = rows_.at(row).find(column);
  return it == rows_.at(row).end() ? empty : it->second.value;
}

namespace {

std::string cell_text(const Table::Value& v) {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, std::monostate>) return "";
        else if constexpr (std::is_same_v<T, double>) return format_number(x);
        else if constexpr (std::is_same_v<T, std::int64_t>) return std::to_string(x);
        else {
          if (x.find_first_of(",\"\n") == std::string::npos) return x;
          std::string quoted = "\"";
          for (char c : x) {
            if (c == '"') quoted += '"';
            quoted += c;
          }
          return quoted + "\"";
        }
      },
      v);
}

nlohmann::json cell_json(const Table::Value& v) {
  return std::visit(
      [](const auto& x) -> nlohmann::json {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, std::monostate>) return nullptr;
        else if constexpr (std::is_same_v<T, double>) {
          if (!std::isfinite(x)) return format_number(x);
          return x;
        } else return x;
      },
      v);
}

}  // namespace

std::string Table::csv() const {
  std::ostringstream os;
  bool first = true;
  for (const auto& c : columns_) {
    os << (first ? "" : ",") << c.name;
    if (c.provenance) os << "," << c.name << "_provenance";
    first = false;
  }
  os << "\n";
  for (const auto& row : rows_) {
    first = true;
    for (const auto& c : columns_) {
      const auto it = row.find(c.name);
      os << (first ? "" : ",") << (it == row.end() ? "" : cell_text(it->second.value));
      if (c.provenance) os << "," << (it == row.end() ? "" : it->second.provenance);
      first = false;
    }
    os << "\n";
  }
  return os.str();
}

nlohmann::json Table::json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : rows_) {
    nlohmann::json obj = nlohmann::json::object();
    for (const auto& c : columns_) {
      const auto it = row.find(c.name);
      if (it == row.end()) continue;
      if (c.provenance)
        obj[c.name] = {{"value", cell_json(it->second.value)}, {"provenance", it->second.provenance}};
      else
        obj[c.name] = cell_json(it->second.value);
    }
    rows.push_back(std::move(obj));
  }
  return rows;
}

std::string line_chart_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                           const std::vector<Series>& series, double reference) {
  constexpr double width = 640, height = 400, left = 70, right = 20, top = 40, bottom = 50;
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = reference, y1 = reference;
  for (const auto& s : series)
    for (const auto& [x, y] : s.points) {
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1;
  if (x1 == x0) x1 = x0 + 1;
  const double pad = 0.05 * std::max(y1 - y0, 1e-12);
  y0 -= pad;
  y1 += pad;
  auto sx = [&](double x) { return left + (x - x0) / (x1 - x0) * (width - left - right); };
  auto sy = [&](double y) { return height - bottom - (y - y0) / (y1 - y0) * (height - top - bottom); };

  static const char* colours[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n";
  os << "<line x1=\"" << left << "\" y1=\"" << height - bottom << "\" x2=\"" << width - right << "\" y2=\""
     << height - bottom << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << height - bottom
     << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = x0 + (x1 - x0) * k / 4, yv = y0 + (y1 - y0) * k / 4;
    os << "<text x=\"" << sx(xv) << "\" y=\"" << height - bottom + 16 << "\" text-anchor=\"middle\">"
       << format_number(std::round(xv * 100) / 100) << "</text>\n";
    os << "<text x=\"" << left - 6 << "\" y=\"" << sy(yv) + 4 << "\" text-anchor=\"end\">"
       << format_number(std::round(yv * 1000) / 1000) << "</text>\n";
  }
  os << "<text x=\"" << width / 2 << "\" y=\"" << height - 12 << "\" text-anchor=\"middle\">" << x_label
     << "</text>\n";
  os << "<text x=\"16\" y=\"" << height / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
     << height / 2 << ")\">" << y_label << "</text>\n";
  os << "<line x1=\"" << left << "\" y1=\"" << sy(reference) << "\" x2=\"" << width - right << "\" y2=\""
     << sy(reference) << "\" stroke=\"gray\" stroke-dasharray=\"4 4\"/>\n";
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* colour = colours[s % 5];
    os << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"2\" points=\"";
    for (const auto& [x, y] : series[s].points)
      if (std::isfinite(y)) os << sx(x) << "," << sy(y) << " ";
    os << "\"/>\n";
    for (const auto& [x, y] : series[s].points)
      if (std::isfinite(y))
        os << "<circle cx=\"" << sx(x) << "\" cy=\"" << sy(y) << "\" r=\"3\" fill=\"" << colour << "\"/>\n";
    os << "<text x=\"" << width - right - 4 << "\" y=\"" << top + 14 * (s + 1) << "\" text-anchor=\"end\" fill=\""
       << colour << "\">" << series[s].label << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

nlohmann::json to_json(const PotentialReport& report) {
  nlohmann::json j;
  j["A"] = report.a;
  j["B"] = report.b;
  j["capacity"] = report.capacity;
  j["capacity_dirichlet"] = report.capacity_dirichlet;
  j["mu_h"] = report.mu_h;
  j["mean_hitting_from_A"] = report.mean_hitting_from_a ? nlohmann::json(*report.mean_hitting_from_a) : nullptr;
  j["residual"] = report.residual;
  j["iterations"] = report.iterations;
  return j;
}

nlohmann::json to_json(const ScalePrediction& p) {
  auto bracket = [](const std::optional<Bracket>& b) -> nlohmann::json {
    if (!b) return nullptr;
    return {{"lower", b->lower}, {"upper", b->upper}};
  };
  nlohmann::json j;
  j["scale"] = p.scale;
  j["theta"] = p.theta;
  j["mean_time"] = p.mean_time ? nlohmann::json(*p.mean_time) : nullptr;
  j["hitting_bracket"] = bracket(p.hitting_bracket);
  j["capacity_bracket"] = bracket(p.capacity_bracket);
  j["hitting_constants"] = bracket(p.hitting_constants);
  j["capacity_constants"] = bracket(p.capacity_constants);
  j["capacity"] = p.capacity ? nlohmann::json(*p.capacity) : nullptr;
  j["rates"] = p.rates;
  j["provenance"] = p.source;
  return j;
}

nlohmann::json to_json(const TrajectorySummary& s, bool include_wall_clock) {
  nlohmann::json j;
  j["seed"] = s.seed;
  j["trials"] = s.trials;
  if (!s.hitting_times.empty()) {
    j["hitting_times"] = s.hitting_times;
    j["mean"] = s.mean_hitting_time();
    j["standard_error"] = s.standard_error();
  }
  j["events"] = s.events;
  nlohmann::json jumps = nlohmann::json::array();
  for (const auto& c : s.condensate_jumps)
    jumps.push_back({{"trial", c.trial}, {"from", c.from}, {"to", c.to}, {"time", c.time}});
  j["condensate_jumps"] = jumps;
  if (!s.trace_time.empty()) {
    j["trace_time"] = s.trace_time;
    j["delta_time"] = s.delta_time;
    j["delta_fraction"] = s.delta_fraction();
  }
  if (include_wall_clock) j["wall_seconds"] = s.wall_seconds;
  return j;
}

std::string trials_csv(const TrajectorySummary& s) {
  std::ostringstream os;
  os << "trial,hitting_time\n";
  for (std::size_t t = 0; t < s.hitting_times.size(); ++t) os << t << "," << format_number(s.hitting_times[t]) << "\n";
  return os.str();
}

std::string weights_csv(const WeightTable& w) {
  std::ostringstream os;
  os << "k,log_w\n";
  for (std::size_t k = 0; k < w.log_w.size(); ++k) os << k << "," << format_number(w.log_w[k]) << "\n";
  return os.str();
}

std::string measure_csv(const SparseGenerator& gen) {
  std::ostringstream os;
  os << "rank,log_mu\n";
  for (Index i = 0; i < gen.size(); ++i) os << i << "," << format_number(gen.log_mu()[i]) << "\n";
  return os.str();
}

std::string edges_csv(const SparseGenerator& gen) {
  std::ostringstream os;
  os << "from,to,rate\n";
  for (Index i = 0; i < gen.size(); ++i)
    for (std::size_t e = gen.first_edge(i); e < gen.last_edge(i); ++e)
      os << i << "," << gen.targets()[e] << "," << format_number(gen.rates()[e]) << "\n";
  return os.str();
}

}  // namespace riplab
