#include "riplab/measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "riplab/error.hpp"

namespace riplab {

namespace {

std::vector<double> logs_of(std::span<const double> values) {
  std::vector<double> out(values.size());
  std::transform(values.begin(), values.end(), out.begin(), [](double v) { return std::log(v); });
  return out;
}

}  // namespace

WeightTable build_weights(Occupation n_particles, double d) {
  if (!(d > 0.0) || !std::isfinite(d)) throw Error(Errc::BadParameter, "d_N must be positive");
  if (n_particles < 1) throw Error(Errc::BadParameter, "N must be at least 1");
  WeightTable t;
  t.d = d;
  t.log_w.resize(std::size_t{n_particles} + 1);
  t.log_w[0] = 0.0;
  for (Occupation k = 0; k < n_particles; ++k)
    t.log_w[k + 1] = t.log_w[k] + std::log(k + d) - std::log(k + 1.0);
  return t;
}

double inverse_log_squared(Occupation n_particles) {
  if (n_particles < 2) throw Error(Errc::BadParameter, "inverse-log-squared needs N >= 2");
  const double l = std::log(static_cast<double>(n_particles));
  return 1.0 / (l * l);
}

double log_sum_exp(std::span<const double> values) {
  if (values.empty()) return -std::numeric_limits<double>::infinity();
  const double top = *std::max_element(values.begin(), values.end());
  if (!std::isfinite(top)) return top;
  double s = 0.0;
  for (double v : values) s += std::exp(v - top);
  return top + std::log(s);
}

double log_config_weight(std::span<const double> log_m_star, const WeightTable& weights,
                         std::span<const Occupation> eta) {
  double acc = 0.0;
  for (std::size_t x = 0; x < eta.size(); ++x) {
    if (eta[x] == 0) continue;
    acc += eta[x] * log_m_star[x] + weights.log_w[eta[x]];
  }
  return acc;
}

double log_partition_enumerated(std::span<const double> m_star, const WeightTable& weights) {
  const auto log_m = logs_of(m_star);
  const ConfigSpace space(weights.particles(), m_star.size());
  std::vector<double> terms;
  terms.reserve(space.size());
  space.for_each([&](Index, std::span<const Occupation> eta) {
    terms.push_back(log_config_weight(log_m, weights, eta));
  });
  return log_sum_exp(terms);
}

std::vector<double> log_partition_table(std::span<const double> m_star, const WeightTable& weights) {
  if (m_star.empty()) throw Error(Errc::BadInput, "no sites");
  const std::size_t n = weights.particles();
  const auto log_m = logs_of(m_star);

  // First site alone: Z_{n,1} = m*(1)^n w(n).
  std::vector<double> z(n + 1);
  for (std::size_t j = 0; j <= n; ++j) z[j] = j * log_m[0] + weights.log_w[j];

  std::vector<double> next(n + 1), terms;
  terms.reserve(n + 1);
  for (std::size_t k = 1; k < m_star.size(); ++k) {
    for (std::size_t j = 0; j <= n; ++j) {
      terms.clear();
      for (std::size_t l = 0; l <= j; ++l) terms.push_back(l * log_m[k] + weights.log_w[l] + z[j - l]);
      next[j] = log_sum_exp(terms);
    }
    z.swap(next);
  }
  return z;
}

double log_partition_recursive(std::span<const double> m_star, const WeightTable& weights) {
  return log_partition_table(m_star, weights).back();
}

double partition_function(const SiteKernel& kernel, const WeightTable& weights) {
  const double recursive = log_partition_recursive(kernel.m_star(), weights);
  if (space_size(weights.particles(), kernel.size()) <= kEnumerationCrossCheckLimit) {
    const double direct = log_partition_enumerated(kernel.m_star(), weights);
    if (std::abs(recursive - direct) > kPartitionAgreementTol * std::max(1.0, std::abs(direct))) {
      std::ostringstream os;
      os.precision(17);
      os << "partition function routes disagree: recursion " << recursive << " vs enumeration "
         << direct;
      throw Error(Errc::BadParameter, os.str());
    }
  }
  return recursive;
}

MeasureReport::MeasureReport(const SiteKernel& kernel, const WeightTable& weights)
    : space_(weights.particles(), kernel.size()),
      weights_(weights),
      log_m_star_(logs_of(kernel.m_star())),
      log_z_(partition_function(kernel, weights)) {
  // Every x in S* has m*(x) = 1, so mu_N(E^x) = w_N(N) / Z_N.
  const double mass = std::exp(weights.log_w.back() - log_z_);
  metastable_.assign(kernel.kappa_star(), mass);
  double total = 0.0;
  for (double m : metastable_) total += m;
  delta_ = 1.0 - total;
}

double MeasureReport::log_mu(std::span<const Occupation> eta) const {
  return log_config_weight(log_m_star_, weights_, eta) - log_z_;
}

double MeasureReport::log_mu(Index rank) const {
  std::vector<Occupation> eta(space_.sites());
  space_.unrank_into(rank, eta);
  return log_mu(std::span<const Occupation>(eta));
}

double MeasureReport::mu(Index rank) const { return std::exp(log_mu(rank)); }

std::vector<double> weight_ratio_sequence(const WeightTable& weights) {
  const std::size_t n = weights.particles();
  std::vector<double> out(n);
  const double log_d = std::log(weights.d);
  for (std::size_t k = 0; k < n; ++k)
    out[k] = std::exp(std::log(k + 1.0) + weights.log_w[k + 1] - log_d);
  return out;
}

}  // namespace riplab
