#pragma once

#include <span>
#include <vector>

#include "riplab/config_space.hpp"
#include "riplab/model.hpp"

namespace riplab {

// log w_N(k) for k = 0..N, where w_N(k) = Gamma(k + d) / (k! Gamma(d)).
struct WeightTable {
  double d = 0.0;
  std::vector<double> log_w;

  Occupation particles() const noexcept { return static_cast<Occupation>(log_w.size() - 1); }
  double log_weight(Occupation k) const { return log_w[k]; }
};

// Built by the recurrence w(k+1) = w(k) (k + d) / (k + 1). Throws BadParameter
// for d <= 0 or N < 1.
WeightTable build_weights(Occupation n_particles, double d);

// d_N = 1 / (log N)^2, the default diffusion schedule.
double inverse_log_squared(Occupation n_particles);

double log_sum_exp(std::span<const double> values);

// log of m*^eta w_N(eta), the unnormalised stationary weight.
double log_config_weight(std::span<const double> log_m_star, const WeightTable& weights,
                         std::span<const Occupation> eta);

// log Z_{N,S} summed over every configuration of E_N.
double log_partition_enumerated(std::span<const double> m_star, const WeightTable& weights);

// log Z_{n,kappa} for every n = 0..N, from the site-by-site convolution
// Z_{n,k} = sum_l m*(k)^l w(l) Z_{n-l,k-1}. O(kappa N^2).
std::vector<double> log_partition_table(std::span<const double> m_star, const WeightTable& weights);
double log_partition_recursive(std::span<const double> m_star, const WeightTable& weights);

inline constexpr double kPartitionAgreementTol = 1e-9;
inline constexpr Index kEnumerationCrossCheckLimit = 100000;

// log Z by the recursion; on spaces of at most kEnumerationCrossCheckLimit
// states the enumerated sum is also computed and the two must agree to
// kPartitionAgreementTol relative, otherwise BadParameter is thrown.
double partition_function(const SiteKernel& kernel, const WeightTable& weights);

class MeasureReport {
 public:
  MeasureReport(const SiteKernel& kernel, const WeightTable& weights);

  double log_z() const noexcept { return log_z_; }
  // mu_N(eta) for the configuration at the given rank, evaluated on demand.
  double log_mu(Index rank) const;
  double mu(Index rank) const;
  double log_mu(std::span<const Occupation> eta) const;

  // mu_N(E^x) for each x in S*, in the order of kernel.s_star().
  const std::vector<double>& mass_on_metastable() const noexcept { return metastable_; }
  double mass_on_delta() const noexcept { return delta_; }
  const ConfigSpace& space() const noexcept { return space_; }

 private:
  ConfigSpace space_;
  WeightTable weights_;
  std::vector<double> log_m_star_;
  double log_z_;
  std::vector<double> metastable_;
  double delta_;
};

inline MeasureReport measure_report(const SiteKernel& kernel, const WeightTable& weights) {
  return MeasureReport(kernel, weights);
}

// (k+1) w_N(k+1) / d_N for k = 0..N-1.
std::vector<double> weight_ratio_sequence(const WeightTable& weights);

}  // namespace riplab
