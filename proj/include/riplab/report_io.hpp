#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "riplab/asymptotics.hpp"
#include "riplab/generator.hpp"
#include "riplab/measure.hpp"
#include "riplab/potential.hpp"
#include "riplab/simulator.hpp"

namespace riplab {

enum class Provenance { ExactSolve, MonteCarlo, Formula, Oracle };
std::string_view to_string(Provenance p) noexcept;

// Shortest round-trip decimal form; identical input gives identical text.
std::string format_number(double v);

struct Column {
  std::string name;
  // Computed values get a companion "<name>_provenance" column.
  bool provenance = false;
};

// A sweep table with a fixed header; cells left unset print empty.
class Table {
 public:
  using Value = std::variant<std::monostate, double, std::int64_t, std::string>;

  explicit Table(std::vector<Column> columns) : columns_(std::move(columns)) {}

  void new_row() { rows_.emplace_back(); }
  // Appends the rows of a table with the same columns.
  void append(const Table& other);
  void set(const std::string& column, double v, Provenance p);
  void set(const std::string& column, double v);
  void set(const std::string& column, std::int64_t v);
  void set(const std::string& column, std::string v);

  const std::vector<Column>& columns() const noexcept { return columns_; }
  std::size_t size() const noexcept { return rows_.size(); }
  const Value& get(std::size_t row, const std::string& column) const;

  std::string csv() const;
  nlohmann::json json() const;

 private:
  struct Cell {
    Value value;
    std::string provenance;
  };
  void put(const std::string& column, Value v, std::string provenance);

  std::vector<Column> columns_;
  std::vector<std::map<std::string, Cell>> rows_;
};

struct Series {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

// Static line chart of y against x with a dashed reference line at y = reference.
std::string line_chart_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                           const std::vector<Series>& series, double reference = 1.0);

nlohmann::json to_json(const PotentialReport& report);
nlohmann::json to_json(const ScalePrediction& prediction);
// Wall-clock time is left out unless asked for, so equal seeds give equal text.
nlohmann::json to_json(const TrajectorySummary& summary, bool include_wall_clock = false);

// (trial, hitting time) rows.
std::string trials_csv(const TrajectorySummary& summary);
// (k, log w_N(k)) rows.
std::string weights_csv(const WeightTable& weights);
// (rank, log mu) rows.
std::string measure_csv(const SparseGenerator& gen);
// (rank, rank, rate) rows.
std::string edges_csv(const SparseGenerator& gen);

}  // namespace riplab
