#include "riplab/model.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "riplab/error.hpp"

namespace riplab {

namespace {

std::vector<bool> reachable(const std::vector<double>& rates, std::size_t n, bool forward) {
  std::vector<bool> seen(n, false);
  std::vector<std::size_t> stack{0};
  seen[0] = true;
  while (!stack.empty()) {
    const auto x = stack.back();
    stack.pop_back();
    for (std::size_t y = 0; y < n; ++y) {
      const double r = forward ? rates[x * n + y] : rates[y * n + x];
      if (r > 0.0 && !seen[y]) {
        seen[y] = true;
        stack.push_back(y);
      }
    }
  }
  return seen;
}

std::vector<double> stationary_distribution(const std::vector<double>& rates, std::size_t n) {
  // pi Q = 0 with sum(pi) = 1: transpose, then swap the last equation for the
  // normalisation.
  Eigen::MatrixXd qt = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t x = 0; x < n; ++x) {
    double out = 0.0;
    for (std::size_t y = 0; y < n; ++y) {
      qt(y, x) = rates[x * n + y];
      out += rates[x * n + y];
    }
    qt(x, x) = -out;
  }
  qt.row(n - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs(n - 1) = 1.0;
  const Eigen::VectorXd pi = qt.fullPivLu().solve(rhs);
  std::vector<double> m(n);
  for (std::size_t x = 0; x < n; ++x) m[x] = std::max(pi(x), 0.0);
  const double total = std::accumulate(m.begin(), m.end(), 0.0);
  for (auto& v : m) v /= total;
  return m;
}

}  // namespace

double SiteKernel::exit_rate(Site x) const {
  double out = 0.0;
  for (Site y = 0; y < kappa_; ++y) out += rate(x, y);
  return out;
}

std::vector<std::vector<double>> SiteKernel::rate_matrix() const {
  std::vector<std::vector<double>> out(kappa_, std::vector<double>(kappa_));
  for (Site x = 0; x < kappa_; ++x)
    for (Site y = 0; y < kappa_; ++y) out[x][y] = rate(x, y);
  return out;
}

bool SiteKernel::in_s_star(Site x) const {
  return std::find(s_star_.begin(), s_star_.end(), x) != s_star_.end();
}

Site SiteKernel::site_of(const std::string& label) const {
  const auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) throw Error(Errc::BadInput, "unknown site label '" + label + "'");
  return static_cast<Site>(it - labels_.begin());
}

SiteKernel build_kernel(const std::vector<std::vector<double>>& rates,
                        std::optional<std::vector<double>> measure,
                        std::vector<std::string> labels) {
  const std::size_t n = rates.size();
  if (n < 2) throw Error(Errc::BadInput, "at least two sites are required");
  SiteKernel k;
  k.kappa_ = n;
  k.rates_.resize(n * n);
  for (std::size_t x = 0; x < n; ++x) {
    if (rates[x].size() != n) throw Error(Errc::BadInput, "rate matrix must be square");
    for (std::size_t y = 0; y < n; ++y) {
      const double r = rates[x][y];
      if (!std::isfinite(r) || r < 0.0)
        throw Error(Errc::BadInput, "rates must be finite and nonnegative");
      if (x == y && r != 0.0) {
        std::ostringstream os;
        os << "r(" << x + 1 << "," << x + 1 << ") = " << r << " must be zero";
        throw Error(Errc::BadDiagonal, os.str());
      }
      k.rates_[x * n + y] = r;
    }
  }

  const auto fwd = reachable(k.rates_, n, true);
  const auto bwd = reachable(k.rates_, n, false);
  for (std::size_t x = 0; x < n; ++x)
    if (!fwd[x] || !bwd[x])
      throw Error(Errc::NotIrreducible, "jump graph is not strongly connected");

  if (labels.empty()) {
    for (std::size_t x = 0; x < n; ++x) labels.push_back(std::to_string(x + 1));
  } else if (labels.size() != n) {
    throw Error(Errc::BadInput, "label count does not match the number of sites");
  }
  k.labels_ = std::move(labels);

  if (measure) {
    if (measure->size() != n) throw Error(Errc::BadInput, "measure has the wrong length");
    double total = 0.0;
    for (double v : *measure) {
      if (!std::isfinite(v) || v < 0.0)
        throw Error(Errc::BadInput, "measure entries must be finite and nonnegative");
      total += v;
    }
    if (!(total > 0.0)) throw Error(Errc::BadInput, "measure has zero mass");
    // Leave an already normalised measure untouched so rebuilding from a
    // kernel's own output is exact.
    if (std::abs(total - 1.0) > 1e-14)
      for (auto& v : *measure) v /= total;
    k.measure_ = std::move(*measure);
  } else {
    k.measure_ = stationary_distribution(k.rates_, n);
  }

  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t y = x + 1; y < n; ++y) {
      const double a = k.measure_[x] * k.rate(x, y);
      const double b = k.measure_[y] * k.rate(y, x);
      if (std::abs(a - b) > kDetailedBalanceTol * std::max(a, b)) {
        std::ostringstream os;
        os << "detailed balance fails on (" << k.labels_[x] << "," << k.labels_[y]
           << "): " << a << " vs " << b;
        throw Error(Errc::NotReversible, os.str());
      }
    }
  }

  const double top = *std::max_element(k.measure_.begin(), k.measure_.end());
  k.m_star_.resize(n);
  for (std::size_t x = 0; x < n; ++x) {
    double v = k.measure_[x] / top;
    if (std::abs(v - 1.0) <= kStarTieTol) {
      v = 1.0;
      k.s_star_.push_back(x);
    }
    k.m_star_[x] = v;
  }
  return k;
}

std::optional<std::vector<Site>> chain_order(const SiteKernel& kernel) {
  const std::size_t n = kernel.size();
  std::vector<std::vector<Site>> adj(n);
  for (Site x = 0; x < n; ++x)
    for (Site y = 0; y < n; ++y)
      if (x != y && (kernel.rate(x, y) > 0.0 || kernel.rate(y, x) > 0.0)) adj[x].push_back(y);

  std::vector<Site> ends;
  for (Site x = 0; x < n; ++x) {
    if (adj[x].size() == 1) ends.push_back(x);
    else if (adj[x].size() != 2) return std::nullopt;
  }
  if (ends.size() != 2) return std::nullopt;

  std::vector<Site> order{ends.front()};
  Site prev = ends.front();
  Site cur = adj[prev].front();
  while (true) {
    order.push_back(cur);
    if (adj[cur].size() == 1) break;
    const Site next = adj[cur][0] == prev ? adj[cur][1] : adj[cur][0];
    prev = cur;
    cur = next;
    if (order.size() > n) return std::nullopt;
  }
  if (order.size() != n) return std::nullopt;

  std::vector<Site> star = kernel.s_star();
  std::vector<Site> want{order.front(), order.back()};
  std::sort(star.begin(), star.end());
  std::sort(want.begin(), want.end());
  if (star != want) return std::nullopt;
  return order;
}

bool is_linear_chain(const SiteKernel& kernel) { return chain_order(kernel).has_value(); }

}  // namespace riplab
