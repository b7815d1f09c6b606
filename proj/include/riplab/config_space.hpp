#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "riplab/model.hpp"

namespace riplab {

using Index = std::uint64_t;
using Occupation = std::uint32_t;

// Occupation numbers of one arrangement of N particles on the sites.
struct Configuration {
  std::vector<Occupation> occupations;

  std::size_t size() const noexcept { return occupations.size(); }
  Occupation operator[](Site x) const { return occupations[x]; }
  Occupation total() const noexcept;

  friend bool operator==(const Configuration&, const Configuration&) = default;
};

// Largest state count ConfigSpace accepts.
inline constexpr Index kMaxStates = Index{1} << 40;

// binom(N + kappa - 1, kappa - 1); throws Overflow when it does not fit in 64 bits.
Index space_size(std::uint64_t n_particles, std::size_t kappa);

// The set E_N of all configurations with N particles on kappa sites, indexed
// by lexicographic order of the occupation vector: (0,...,0,N) has rank 0 and
// (N,0,...,0) has rank size()-1. This ordering is part of the export format.
class ConfigSpace {
 public:
  // Throws Overflow above kMaxStates states, BadInput for kappa == 0.
  ConfigSpace(Occupation n_particles, std::size_t kappa);

  Occupation particles() const noexcept { return n_; }
  std::size_t sites() const noexcept { return kappa_; }
  Index size() const noexcept { return size_; }

  // Throws OutOfRange when the configuration is not in E_N.
  Index rank(std::span<const Occupation> occupations) const;
  Index rank(const Configuration& eta) const { return rank(eta.occupations); }
  Configuration unrank(Index i) const;
  void unrank_into(Index i, std::span<Occupation> out) const;

  // Rank of the configuration with all particles on x.
  Index condensate(Site x) const;

  // Visits every configuration once, in rank order.
  template <class F>
  void for_each(F&& visit) const {
    std::vector<Occupation> eta(kappa_, 0);
    eta[kappa_ - 1] = n_;
    Index i = 0;
    while (true) {
      visit(i, std::span<const Occupation>(eta));
      ++i;
      if (!next_lexicographic(eta)) break;
    }
  }

  // Advances to the lexicographic successor; false when eta was the last.
  static bool next_lexicographic(std::vector<Occupation>& eta);

 private:
  // Number of configurations with at most n particles on k sites.
  Index up_to(Occupation n, std::size_t k) const { return table_[k * (n_ + 1) + n]; }

  Occupation n_;
  std::size_t kappa_;
  Index size_;
  std::vector<Index> table_;
};

// eta^{x,y}: one particle moved from x to y. Throws EmptySite or SameSite.
Configuration move(const Configuration& eta, Site x, Site y);

}  // namespace riplab
