#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "riplab/config_space.hpp"
#include "riplab/measure.hpp"
#include "riplab/model.hpp"

namespace riplab {

// Compressed sparse rows of L_N over E_N in rank order. Edge e of row i goes
// to targets()[e] with rate η_x(d_N + η_y) r(x,y); reverse()[e] is the index
// of the opposite edge. log μ_N is kept per state.
class SparseGenerator {
 public:
  const ConfigSpace& space() const noexcept { return space_; }
  Index size() const noexcept { return space_.size(); }
  std::size_t edge_count() const noexcept { return targets_.size(); }
  double d() const noexcept { return d_; }
  double log_z() const noexcept { return log_z_; }

  std::span<const std::size_t> row_begin() const noexcept { return row_begin_; }
  std::span<const Index> targets() const noexcept { return targets_; }
  std::span<const double> rates() const noexcept { return rates_; }
  std::span<const std::size_t> reverse() const noexcept { return reverse_; }
  std::span<const double> exit_rates() const noexcept { return exit_; }
  std::span<const double> log_mu() const noexcept { return log_mu_; }

  std::size_t first_edge(Index i) const { return row_begin_[i]; }
  std::size_t last_edge(Index i) const { return row_begin_[i + 1]; }

 private:
  friend SparseGenerator build_generator(const SiteKernel&, const WeightTable&, const ConfigSpace&);
  explicit SparseGenerator(const ConfigSpace& space) : space_(space) {}

  ConfigSpace space_;
  double d_ = 0.0;
  double log_z_ = 0.0;
  std::vector<std::size_t> row_begin_;
  std::vector<Index> targets_;
  std::vector<double> rates_;
  std::vector<std::size_t> reverse_;
  std::vector<double> exit_;
  std::vector<double> log_mu_;
};

inline constexpr double kReversibilityTol = 1e-10;
inline constexpr std::size_t kReversibilitySample = 10000;

// Throws BadInput when the kernel, weights and space disagree on κ or N, and
// NotReversible when a sampled edge violates μ(η)r(η,η') = μ(η')r(η',η).
SparseGenerator build_generator(const SiteKernel& kernel, const WeightTable& weights,
                                const ConfigSpace& space);

struct ReversibilityCheck {
  std::size_t edges_checked = 0;
  double max_relative_error = 0.0;
};

// Checks every edge when max_edges is at least the edge count, otherwise an
// evenly strided subset of max_edges edges.
ReversibilityCheck check_reversibility(const SparseGenerator& gen, std::size_t max_edges);

double dirichlet_form(const SparseGenerator& gen, std::span<const double> f);

std::vector<double> apply_generator(const SparseGenerator& gen, std::span<const double> f);

// max_η |(μ L_N)(η)| divided by the largest μ(η) · exit rate.
double stationarity_defect(const SparseGenerator& gen);

}  // namespace riplab
