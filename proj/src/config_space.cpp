#include "riplab/config_space.hpp"

#include <limits>
#include <numeric>

#include "riplab/error.hpp"

namespace riplab {

Occupation Configuration::total() const noexcept {
  return std::accumulate(occupations.begin(), occupations.end(), Occupation{0});
}

Index space_size(std::uint64_t n_particles, std::size_t kappa) {
  if (kappa == 0) throw Error(Errc::BadInput, "kappa must be at least 1");
  // binom(n + k - 1, k - 1) built up as a running product of exact binomials.
  const std::uint64_t k = kappa - 1;
  unsigned __int128 acc = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    acc = acc * (n_particles + i) / i;
    if (acc > std::numeric_limits<std::uint64_t>::max())
      throw Error(Errc::Overflow, "configuration count exceeds 64-bit range");
  }
  return static_cast<Index>(acc);
}

ConfigSpace::ConfigSpace(Occupation n_particles, std::size_t kappa)
    : n_(n_particles), kappa_(kappa), size_(space_size(n_particles, kappa)) {
  if (size_ > kMaxStates)
    throw Error(Errc::Overflow, "state space of " + std::to_string(size_) +
                                    " configurations exceeds the 2^40 guard");
  // up_to(n, k) = binom(n + k, k): configurations of at most n particles on k
  // sites, i.e. exactly n particles on k + 1 sites.
  table_.assign((kappa_ + 1) * (n_ + 1), 0);
  for (Occupation n = 0; n <= n_; ++n) table_[n] = 1;
  for (std::size_t k = 1; k <= kappa_; ++k) {
    Index run = 0;
    for (Occupation n = 0; n <= n_; ++n) {
      run += table_[(k - 1) * (n_ + 1) + n];
      table_[k * (n_ + 1) + n] = run;
    }
  }
}

Index ConfigSpace::rank(std::span<const Occupation> eta) const {
  if (eta.size() != kappa_) throw Error(Errc::OutOfRange, "configuration has the wrong length");
  std::uint64_t total = 0;
  for (auto v : eta) total += v;
  if (total != n_) throw Error(Errc::OutOfRange, "configuration does not hold N particles");
  // Configurations preceding eta: for each position i, those sharing
  // eta[0..i) but holding v < eta[i] at i. Their tails carry remaining - v
  // particles, and summing over v telescopes (hockey stick) to a difference
  // of at-most counts.
  Index r = 0;
  Occupation remaining = n_;
  for (std::size_t i = 0; i + 1 < kappa_; ++i) {
    const std::size_t tail = kappa_ - i - 1;
    r += up_to(remaining, tail) - up_to(remaining - eta[i], tail);
    remaining -= eta[i];
  }
  return r;
}

void ConfigSpace::unrank_into(Index i, std::span<Occupation> out) const {
  if (i >= size_) throw Error(Errc::OutOfRange, "rank " + std::to_string(i) + " out of range");
  Occupation remaining = n_;
  for (std::size_t pos = 0; pos + 1 < kappa_; ++pos) {
    const std::size_t tail = kappa_ - pos - 1;
    // Largest v with up_to(remaining, tail) - up_to(remaining - v, tail) <= i.
    const Index full = up_to(remaining, tail);
    Occupation lo = 0, hi = remaining;
    while (lo < hi) {
      const Occupation mid = lo + (hi - lo + 1) / 2;
      if (full - up_to(remaining - mid, tail) <= i) lo = mid;
      else hi = mid - 1;
    }
    i -= full - up_to(remaining - lo, tail);
    out[pos] = lo;
    remaining -= lo;
  }
  out[kappa_ - 1] = remaining;
}

Configuration ConfigSpace::unrank(Index i) const {
  Configuration eta{std::vector<Occupation>(kappa_)};
  unrank_into(i, eta.occupations);
  return eta;
}

Index ConfigSpace::condensate(Site x) const {
  if (x >= kappa_) throw Error(Errc::OutOfRange, "site out of range");
  std::vector<Occupation> eta(kappa_, 0);
  eta[x] = n_;
  return rank(eta);
}

bool ConfigSpace::next_lexicographic(std::vector<Occupation>& eta) {
  const std::size_t k = eta.size();
  if (k < 2) return false;
  // Rightmost position (excluding the last) whose tail still holds particles.
  Occupation tail = eta[k - 1];
  for (std::size_t i = k - 1; i-- > 0;) {
    if (tail > 0) {
      ++eta[i];
      for (std::size_t j = i + 1; j + 1 < k; ++j) eta[j] = 0;
      eta[k - 1] = tail - 1;
      return true;
    }
    tail += eta[i];
  }
  return false;
}

Configuration move(const Configuration& eta, Site x, Site y) {
  if (x == y) throw Error(Errc::SameSite, "source and target site coincide");
  if (x >= eta.size() || y >= eta.size()) throw Error(Errc::OutOfRange, "site out of range");
  if (eta[x] == 0) throw Error(Errc::EmptySite, "no particle to move from site " + std::to_string(x));
  Configuration out = eta;
  --out.occupations[x];
  ++out.occupations[y];
  return out;
}

}  // namespace riplab
