#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace riplab {

// Sites are dense indices 0..kappa-1; labels only exist at the I/O boundary.
using Site = std::size_t;

// Underlying random walk: jump rates r(x,y), its reversible probability
// measure m, and the maximal set S* where m attains its maximum.
// Immutable once built; safe to share across threads.
class SiteKernel {
 public:
  std::size_t size() const noexcept { return kappa_; }

  double rate(Site x, Site y) const { return rates_[x * kappa_ + y]; }
  // Total jump rate out of x.
  double exit_rate(Site x) const;
  std::vector<std::vector<double>> rate_matrix() const;

  double measure(Site x) const { return measure_[x]; }
  std::span<const double> measure() const noexcept { return measure_; }

  // m(x) / max m, exactly 1 on S*.
  double m_star(Site x) const { return m_star_[x]; }
  std::span<const double> m_star() const noexcept { return m_star_; }

  const std::vector<Site>& s_star() const noexcept { return s_star_; }
  std::size_t kappa_star() const noexcept { return s_star_.size(); }
  bool in_s_star(Site x) const;

  const std::vector<std::string>& labels() const noexcept { return labels_; }
  const std::string& label(Site x) const { return labels_[x]; }
  // Index of a label; throws BadInput when unknown.
  Site site_of(const std::string& label) const;

 private:
  friend SiteKernel build_kernel(const std::vector<std::vector<double>>&,
                                 std::optional<std::vector<double>>,
                                 std::vector<std::string>);
  SiteKernel() = default;

  std::size_t kappa_ = 0;
  std::vector<double> rates_;
  std::vector<double> measure_;
  std::vector<double> m_star_;
  std::vector<Site> s_star_;
  std::vector<std::string> labels_;
};

inline constexpr double kDetailedBalanceTol = 1e-12;
inline constexpr double kStarTieTol = 1e-10;

// Validates the rate matrix and derives m, m*, S*.
//
// When `measure` is absent the stationary distribution of the rate matrix is
// obtained from a dense solve and detailed balance is then verified; a given
// measure is rescaled to sum one and checked the same way. Labels default to
// "1".."kappa".
//
// Throws Error with BadInput, BadDiagonal, NotIrreducible or NotReversible.
SiteKernel build_kernel(const std::vector<std::vector<double>>& rates,
                        std::optional<std::vector<double>> measure = std::nullopt,
                        std::vector<std::string> labels = {});

// True when the sites can be ordered 1..kappa with nearest-neighbour rates
// only and S* = {1, kappa}.
bool is_linear_chain(const SiteKernel& kernel);

// The site ordering along the chain, starting at the lower-indexed end, or
// nullopt when the kernel is not a linear chain.
std::optional<std::vector<Site>> chain_order(const SiteKernel& kernel);

}  // namespace riplab
