#pragma once

// Reference computations written without the library: recursive enumeration,
// Γ-function weights and dense Eigen solves. Only usable on small spaces.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <vector>

namespace oracle {

using Config = std::vector<unsigned>;
using Rates = std::vector<std::vector<double>>;

// All configurations of n particles on k sites in lexicographic order.
inline std::vector<Config> configurations(unsigned n, std::size_t k) {
  std::vector<Config> out;
  Config eta(k, 0);
  auto rec = [&](auto& self, std::size_t site, unsigned left) -> void {
    if (site + 1 == k) {
      eta[site] = left;
      out.push_back(eta);
      return;
    }
    for (unsigned v = 0; v <= left; ++v) {
      eta[site] = v;
      self(self, site + 1, left - v);
    }
  };
  rec(rec, 0, n);
  return out;
}

inline double log_weight(unsigned k, double d) {
  return std::lgamma(k + d) - std::lgamma(k + 1.0) - std::lgamma(d);
}

// Stationary measure of an irreducible rate matrix from the null space of Qᵀ.
inline std::vector<double> stationary(const Rates& r) {
  const std::size_t k = r.size();
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(k, k);
  for (std::size_t x = 0; x < k; ++x)
    for (std::size_t y = 0; y < k; ++y)
      if (x != y) {
        q(x, y) = r[x][y];
        q(x, x) -= r[x][y];
      }
  Eigen::MatrixXd a = q.transpose();
  a.row(k - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k);
  rhs(k - 1) = 1.0;
  Eigen::VectorXd m = a.fullPivLu().solve(rhs);
  return {m.data(), m.data() + k};
}

struct Chain {
  std::vector<Config> states;
  std::map<Config, std::size_t> index;
  Eigen::VectorXd mu;
  Eigen::MatrixXd q;  // off-diagonal rates, diagonal minus exit rate

  std::size_t at(const Config& c) const { return index.at(c); }
  std::size_t condensate(std::size_t site) const {
    Config c(states.front().size(), 0);
    c[site] = n();
    return at(c);
  }
  unsigned n() const {
    unsigned s = 0;
    for (unsigned v : states.front()) s += v;
    return s;
  }
};

inline Chain inclusion_chain(const Rates& r, unsigned n, double d) {
  Chain c;
  const std::size_t k = r.size();
  c.states = configurations(n, k);
  for (std::size_t i = 0; i < c.states.size(); ++i) c.index[c.states[i]] = i;
  const auto m = stationary(r);
  const double m_max = *std::max_element(m.begin(), m.end());

  const std::size_t size = c.states.size();
  std::vector<double> log_mu(size);
  for (std::size_t i = 0; i < size; ++i) {
    double s = 0.0;
    for (std::size_t x = 0; x < k; ++x) s += c.states[i][x] * std::log(m[x] / m_max) + log_weight(c.states[i][x], d);
    log_mu[i] = s;
  }
  const double top = *std::max_element(log_mu.begin(), log_mu.end());
  c.mu.resize(size);
  for (std::size_t i = 0; i < size; ++i) c.mu(i) = std::exp(log_mu[i] - top);
  c.mu /= c.mu.sum();

  c.q = Eigen::MatrixXd::Zero(size, size);
  for (std::size_t i = 0; i < size; ++i)
    for (std::size_t x = 0; x < k; ++x)
      for (std::size_t y = 0; y < k; ++y) {
        if (x == y || c.states[i][x] == 0 || r[x][y] == 0.0) continue;
        Config t = c.states[i];
        --t[x];
        ++t[y];
        const double rate = c.states[i][x] * (d + c.states[i][y]) * r[x][y];
        c.q(i, c.at(t)) += rate;
        c.q(i, i) -= rate;
      }
  return c;
}

struct Potential {
  Eigen::VectorXd h;
  double capacity = 0.0;
  double mu_h = 0.0;
};

inline Potential equilibrium(const Chain& c, const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  const std::size_t size = c.states.size();
  std::vector<int> role(size, 0);
  for (auto i : a) role[i] = 1;
  for (auto i : b) role[i] = 2;
  std::vector<std::size_t> interior;
  for (std::size_t i = 0; i < size; ++i)
    if (role[i] == 0) interior.push_back(i);

  Potential p;
  p.h = Eigen::VectorXd::Zero(size);
  for (auto i : a) p.h(i) = 1.0;
  if (!interior.empty()) {
    const std::size_t m = interior.size();
    Eigen::MatrixXd sys(m, m);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
    for (std::size_t r = 0; r < m; ++r) {
      for (std::size_t s = 0; s < m; ++s) sys(r, s) = c.q(interior[r], interior[s]);
      for (auto i : a) rhs(r) -= c.q(interior[r], i);
    }
    Eigen::VectorXd sol = sys.fullPivLu().solve(rhs);
    for (std::size_t r = 0; r < m; ++r) p.h(interior[r]) = sol(r);
  }
  for (auto i : a)
    for (std::size_t j = 0; j < size; ++j)
      if (j != i) p.capacity += c.mu(i) * c.q(i, j) * (1.0 - p.h(j));
  p.mu_h = c.mu.dot(p.h);
  return p;
}

// E_η[τ_B] for every η.
inline Eigen::VectorXd hitting_times(const Chain& c, const std::vector<std::size_t>& b) {
  const std::size_t size = c.states.size();
  std::vector<bool> in_b(size, false);
  for (auto i : b) in_b[i] = true;
  std::vector<std::size_t> interior;
  for (std::size_t i = 0; i < size; ++i)
    if (!in_b[i]) interior.push_back(i);
  const std::size_t m = interior.size();
  Eigen::MatrixXd sys(m, m);
  for (std::size_t r = 0; r < m; ++r)
    for (std::size_t s = 0; s < m; ++s) sys(r, s) = c.q(interior[r], interior[s]);
  Eigen::VectorXd sol = sys.fullPivLu().solve(Eigen::VectorXd::Constant(m, -1.0));
  Eigen::VectorXd u = Eigen::VectorXd::Zero(size);
  for (std::size_t r = 0; r < m; ++r) u(interior[r]) = sol(r);
  return u;
}

inline double dirichlet(const Chain& c, const Eigen::VectorXd& f) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < c.q.rows(); ++i)
    for (Eigen::Index j = 0; j < c.q.cols(); ++j)
      if (i != j) s += 0.5 * c.mu(i) * c.q(i, j) * (f(j) - f(i)) * (f(j) - f(i));
  return s;
}

// Two sites: the chain (N,0) → (N-1,1) → ... → (0,N) is a birth-death line,
// so Cap((N,0),(0,N)) is the series sum of its edge conductances
// μ(ℓ,N-ℓ) ℓ (d+N-ℓ) r(1,2). The measure comes from the closed-form product.
inline double two_site_capacity(unsigned n, double d, double r12, double r21) {
  const double log_m2 = std::log(r12 / r21);
  const double log_m_max = std::max(0.0, log_m2);
  std::vector<double> log_mu(n + 1);
  for (unsigned l = 0; l <= n; ++l)
    log_mu[l] = log_weight(l, d) + log_weight(n - l, d) + (n - l) * (log_m2 - log_m_max) - l * log_m_max;
  const double top = *std::max_element(log_mu.begin(), log_mu.end());
  double z = 0.0;
  for (double v : log_mu) z += std::exp(v - top);
  double resistance = 0.0;
  for (unsigned l = 1; l <= n; ++l) {
    const double cond = std::exp(log_mu[l] - top) / z * l * (d + n - l) * r12;
    resistance += 1.0 / cond;
  }
  return 1.0 / resistance;
}

inline double relative(double a, double b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); }

}  // namespace oracle
