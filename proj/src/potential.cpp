#include "riplab/potential.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>

#include "riplab/error.hpp"

namespace riplab {

namespace {

// Residual left by representing the solution in double precision: this
// multiple of eps times the conductance-weighted solution magnitude.
constexpr double kRoundingFloor = std::numeric_limits<double>::epsilon();

constexpr std::size_t kRestrictedMargin = 2;

enum Role : std::uint8_t { kInterior = 0, kSource = 1, kTarget = 2 };

std::vector<Index> normalise_set(std::vector<Index> set, Index n, const char* name) {
  std::sort(set.begin(), set.end());
  set.erase(std::unique(set.begin(), set.end()), set.end());
  if (set.empty()) throw Error(Errc::BadSets, std::string(name) + " is empty");
  if (set.back() >= n) throw Error(Errc::BadSets, std::string(name) + " has a rank outside E_N");
  return set;
}

// Symmetric conductances μ(η) rate(η→η') divided by their maximum.
struct Network {
  const SparseGenerator& gen;
  std::vector<double> cond;
  std::vector<double> diag;
  double log_scale = 0.0;

  explicit Network(const SparseGenerator& g) : gen(g), cond(g.edge_count()), diag(g.size(), 0.0) {
    const auto rows = g.row_begin();
    const auto targets = g.targets();
    const auto rates = g.rates();
    const auto log_mu = g.log_mu();
    log_scale = -std::numeric_limits<double>::infinity();
    for (Index i = 0; i < g.size(); ++i)
      for (std::size_t e = rows[i]; e < rows[i + 1]; ++e)
        log_scale = std::max(log_scale, log_mu[i] + std::log(rates[e]));
    for (Index i = 0; i < g.size(); ++i)
      for (std::size_t e = rows[i]; e < rows[i + 1]; ++e)
        if (i < targets[e]) cond[e] = std::exp(log_mu[i] + std::log(rates[e]) - log_scale);
    for (Index i = 0; i < g.size(); ++i)
      for (std::size_t e = rows[i]; e < rows[i + 1]; ++e) {
        if (i > targets[e]) cond[e] = cond[g.reverse()[e]];
        diag[i] += cond[e];
      }
  }
};

// Jacobi-preconditioned CG for K x = rhs on the states of `active`, every
// other state held at zero. Returns the iterations used.
std::size_t conjugate_gradient(const Network& net, const std::vector<std::uint8_t>& in_active,
                               const std::vector<Index>& active, std::vector<double> rhs, std::vector<double>& x,
                               double tolerance, std::size_t budget) {
  const auto rows = net.gen.row_begin();
  const auto targets = net.gen.targets();
  const std::size_t m = active.size();
  x.assign(m, 0.0);

  // The system is linear, so solve for rhs / scale to keep tiny residuals
  // clear of underflow.
  double scale = 0.0;
  for (double v : rhs) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) return 0;
  for (double& v : rhs) v /= scale;

  std::vector<double> r(std::move(rhs)), z(m), p(m), q(m);
  std::vector<double> full(net.gen.size(), 0.0);
  double rz = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    z[k] = r[k] / net.diag[active[k]];
    p[k] = z[k];
    rz += r[k] * z[k];
  }
  const double stop = tolerance * tolerance * rz;

  std::size_t it = 0;
  while (it < budget && rz > stop) {
    for (std::size_t k = 0; k < m; ++k) full[active[k]] = p[k];
    double pq = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      const Index i = active[k];
      double acc = net.diag[i] * p[k];
      for (std::size_t e = rows[i]; e < rows[i + 1]; ++e)
        if (in_active[targets[e]]) acc -= net.cond[e] * full[targets[e]];
      q[k] = acc;
      pq += p[k] * acc;
    }
    const double alpha = rz / pq;
    double rz_next = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      x[k] += alpha * p[k];
      r[k] -= alpha * q[k];
      z[k] = r[k] / net.diag[active[k]];
      rz_next += r[k] * z[k];
    }
    const double beta = rz_next / rz;
    rz = rz_next;
    for (std::size_t k = 0; k < m; ++k) p[k] = z[k] + beta * p[k];
    ++it;
  }
  for (double& v : x) v *= scale;
  return it;
}

std::size_t iteration_budget(const SolverOptions& options, Index n) {
  return static_cast<std::size_t>(std::ceil(options.iteration_factor * std::sqrt(static_cast<double>(n))));
}

struct ResidualState {
  std::vector<double> res;
  // Interior positions whose residual exceeds the local tolerance.
  std::vector<std::size_t> failing;
  double worst = 0.0;
  double total = 0.0;
  double floor = 0.0;
};

// Iterative refinement around CG. A pass solves the whole interior while the
// summed residual is above tolerance; afterwards only the states still
// failing the local test are re-solved with the rest held fixed, which
// reaches states whose conductances are too small to register in a global
// norm. `residual` fills a ResidualState, `apply` adds a correction.
template <class ResidualFn, class ApplyFn>
bool refine(const Network& net, const std::vector<Index>& interior, const SolverOptions& options,
            std::size_t budget, std::size_t& iterations, double& reported,
            ResidualFn residual, ApplyFn apply) {
  const Index n = net.gen.size();
  std::vector<std::uint8_t> in_active(n, 0);
  ResidualState st;
  st.res.resize(interior.size());
  std::vector<double> delta;
  for (std::size_t pass = 0; pass <= options.max_refinements; ++pass) {
    const double global_scale = residual(st, pass);
    reported = st.worst;
    const bool global_ok = pass > 0 && st.total <= std::max(options.global_tolerance * global_scale, st.floor);
    if (global_ok && st.failing.empty()) return true;
    if (iterations >= budget) return false;

    std::fill(in_active.begin(), in_active.end(), 0);
    std::vector<Index> active;
    std::vector<double> rhs;
    std::vector<std::size_t> positions;
    if (!global_ok) {
      active = interior;
      rhs = st.res;
      positions.resize(interior.size());
      for (std::size_t k = 0; k < interior.size(); ++k) positions[k] = k;
    } else {
      // Failing states plus a margin of neighbours, so the fixed boundary of
      // the restricted solve sits on states that already pass.
      for (std::size_t k : st.failing) in_active[interior[k]] = 1;
      const auto rows = net.gen.row_begin();
      const auto targets = net.gen.targets();
      for (std::size_t layer = 0; layer < kRestrictedMargin; ++layer) {
        std::vector<Index> grown;
        for (std::size_t k = 0; k < interior.size(); ++k) {
          const Index i = interior[k];
          if (in_active[i]) continue;
          for (std::size_t e = rows[i]; e < rows[i + 1]; ++e)
            if (in_active[targets[e]]) {
              grown.push_back(i);
              break;
            }
        }
        for (Index i : grown) in_active[i] = 1;
      }
      for (std::size_t k = 0; k < interior.size(); ++k)
        if (in_active[interior[k]]) {
          active.push_back(interior[k]);
          rhs.push_back(st.res[k]);
          positions.push_back(k);
        }
    }
    for (Index i : active) in_active[i] = 1;
    iterations += conjugate_gradient(net, in_active, active, std::move(rhs), delta, options.cg_tolerance,
                                     budget - iterations);
    for (std::size_t k = 0; k < active.size(); ++k) apply(positions[k], delta[k], pass);
  }
  return false;
}

[[noreturn]] void diverged(const std::string& what, std::size_t iterations) {
  std::ostringstream os;
  os << what << " after " << iterations << " CG iterations";
  throw Error(Errc::SolverDiverged, os.str());
}

}  // namespace

PotentialReport solve_equilibrium_potential(const SparseGenerator& gen, std::vector<Index> a,
                                            std::vector<Index> b, const SolverOptions& options) {
  const Index n = gen.size();
  PotentialReport rep;
  rep.a = normalise_set(std::move(a), n, "A");
  rep.b = normalise_set(std::move(b), n, "B");

  std::vector<std::uint8_t> role(n, kInterior);
  for (Index i : rep.a) role[i] = kSource;
  for (Index i : rep.b) {
    if (role[i] == kSource) throw Error(Errc::BadSets, "A and B overlap");
    role[i] = kTarget;
  }
  std::vector<Index> interior;
  for (Index i = 0; i < n; ++i)
    if (role[i] == kInterior) interior.push_back(i);

  const Network net(gen);
  const auto rows = gen.row_begin();
  const auto targets = gen.targets();

  // h = s + u with s in {0, 1}: once s is the rounded potential, u carries
  // 1 - h near A with full relative precision.
  std::vector<double> s(n, 0.0), u(n, 0.0);
  for (Index i : rep.a) s[i] = 1.0;

  auto dirichlet_normalised = [&] {
    double sum = 0.0;
    for (Index i = 0; i < n; ++i)
      for (std::size_t e = rows[i]; e < rows[i + 1]; ++e) {
        const Index j = targets[e];
        if (j < i) continue;
        const double diff = (s[j] - s[i]) + (u[j] - u[i]);
        sum += net.cond[e] * diff * diff;
      }
    return sum;
  };

  // Residuals from edge differences, which stay exact where h is flat.
  auto residual = [&](ResidualState& st, std::size_t pass) {
    st.failing.clear();
    st.worst = st.total = st.floor = 0.0;
    for (std::size_t k = 0; k < interior.size(); ++k) {
      const Index i = interior[k];
      double acc = 0.0, rounding = 0.0;
      for (std::size_t e = rows[i]; e < rows[i + 1]; ++e) {
        const Index j = targets[e];
        acc -= net.cond[e] * ((s[i] - s[j]) + (u[i] - u[j]));
        rounding += net.cond[e] * (std::abs(u[i]) + std::abs(u[j]));
      }
      rounding *= kRoundingFloor;
      st.res[k] = acc;
      st.worst = std::max(st.worst, std::abs(acc) / net.diag[i]);
      if (std::abs(acc) > options.local_tolerance * net.diag[i] + rounding) st.failing.push_back(k);
      st.total += std::abs(acc);
      st.floor += rounding;
    }
    return pass == 0 ? 0.0 : dirichlet_normalised();
  };

  auto apply = [&](std::size_t k, double delta, std::size_t pass) {
    const Index i = interior[k];
    if (pass == 0) {
      s[i] = delta >= 0.5 ? 1.0 : 0.0;
      u[i] = delta - s[i];
    } else {
      u[i] += delta;
    }
  };

  if (!interior.empty() &&
      !refine(net, interior, options, iteration_budget(options, n), rep.iterations, rep.residual, residual,
              apply))
    diverged("equilibrium potential did not reach tolerance", rep.iterations);

  const auto log_mu = gen.log_mu();
  rep.h.resize(n);
  for (Index i = 0; i < n; ++i) rep.h[i] = s[i] + u[i];
  for (Index i = 0; i < n; ++i) {
    if (rep.h[i] < -kMaximumPrincipleSlack || rep.h[i] > 1.0 + kMaximumPrincipleSlack) {
      std::ostringstream os;
      os << "maximum principle violated: h = " << rep.h[i] << " at rank " << i;
      throw Error(Errc::SolverDiverged, os.str());
    }
    rep.mu_h += std::exp(log_mu[i]) * rep.h[i];
  }

  double flux = 0.0;
  for (Index i : rep.a)
    for (std::size_t e = rows[i]; e < rows[i + 1]; ++e) {
      const Index j = targets[e];
      if (role[j] == kSource) continue;
      flux += net.cond[e] * ((1.0 - s[j]) - u[j]);
    }
  const double scale = std::exp(net.log_scale);
  rep.capacity = flux * scale;
  rep.capacity_dirichlet = dirichlet_normalised() * scale;
  if (!(rep.capacity > 0.0) ||
      std::abs(rep.capacity - rep.capacity_dirichlet) > kCapacityAgreementTol * rep.capacity) {
    std::ostringstream os;
    os.precision(17);
    os << "capacity formulas disagree: boundary flux " << rep.capacity << " vs Dirichlet form "
       << rep.capacity_dirichlet;
    throw Error(Errc::SolverDiverged, os.str());
  }
  if (rep.a.size() == 1) rep.mean_hitting_from_a = rep.mu_h / rep.capacity;
  return rep;
}

HittingSolution solve_hitting_times(const SparseGenerator& gen, std::vector<Index> b,
                                    const SolverOptions& options) {
  const Index n = gen.size();
  b = normalise_set(std::move(b), n, "B");
  std::vector<std::uint8_t> role(n, kInterior);
  for (Index i : b) role[i] = kTarget;
  std::vector<Index> interior;
  for (Index i = 0; i < n; ++i)
    if (role[i] == kInterior) interior.push_back(i);

  const Network net(gen);
  const auto rows = gen.row_begin();
  const auto targets = gen.targets();
  const auto log_mu = gen.log_mu();

  // μ(η)(L u)(η) = -μ(η) in conductance units.
  std::vector<double> source(interior.size());
  double source_total = 0.0;
  for (std::size_t k = 0; k < interior.size(); ++k) {
    source[k] = std::exp(log_mu[interior[k]] - net.log_scale);
    source_total += source[k];
  }

  HittingSolution sol;
  sol.u.assign(n, 0.0);
  auto residual = [&](ResidualState& st, std::size_t) {
    st.failing.clear();
    st.worst = st.total = st.floor = 0.0;
    for (std::size_t k = 0; k < interior.size(); ++k) {
      const Index i = interior[k];
      double acc = source[k], magnitude = source[k], rounding = 0.0;
      for (std::size_t e = rows[i]; e < rows[i + 1]; ++e) {
        const double flow = net.cond[e] * (sol.u[i] - sol.u[targets[e]]);
        acc -= flow;
        magnitude += std::abs(flow);
        rounding += net.cond[e] * (std::abs(sol.u[i]) + std::abs(sol.u[targets[e]]));
      }
      rounding *= kRoundingFloor;
      st.res[k] = acc;
      st.worst = std::max(st.worst, std::abs(acc) / magnitude);
      if (std::abs(acc) > options.local_tolerance * magnitude + rounding) st.failing.push_back(k);
      st.total += std::abs(acc);
      st.floor += rounding;
    }
    return source_total;
  };
  auto apply = [&](std::size_t k, double delta, std::size_t) { sol.u[interior[k]] += delta; };

  if (!interior.empty() && !refine(net, interior, options, iteration_budget(options, n), sol.iterations,
                                   sol.residual, residual, apply))
    diverged("hitting-time system did not reach tolerance", sol.iterations);
  return sol;
}

double mean_hitting_time(const SparseGenerator& gen, Index start, std::vector<Index> b,
                         const SolverOptions& options) {
  if (start >= gen.size()) throw Error(Errc::BadSets, "start rank outside E_N");
  if (std::find(b.begin(), b.end(), start) != b.end())
    throw Error(Errc::BadSets, "start lies in the target set");
  return solve_hitting_times(gen, std::move(b), options).u[start];
}

std::vector<std::vector<double>> trace_rates(const SparseGenerator& gen,
                                             const std::vector<Index>& singletons,
                                             const SolverOptions& options) {
  const std::size_t k = singletons.size();
  if (k < 2) throw Error(Errc::BadSets, "trace rates need at least two metastable sets");

  auto others = [&](std::initializer_list<std::size_t> skip) {
    std::vector<Index> out;
    for (std::size_t j = 0; j < k; ++j)
      if (std::find(skip.begin(), skip.end(), j) == skip.end()) out.push_back(singletons[j]);
    return out;
  };

  std::vector<double> single(k);
  for (std::size_t x = 0; x < k; ++x)
    single[x] = solve_equilibrium_potential(gen, {singletons[x]}, others({x}), options).capacity;

  std::vector<std::vector<double>> rates(k, std::vector<double>(k, 0.0));
  for (std::size_t x = 0; x < k; ++x)
    for (std::size_t y = x + 1; y < k; ++y) {
      double pair = 0.0;
      if (k > 2)
        pair = solve_equilibrium_potential(gen, {singletons[x], singletons[y]}, others({x, y}), options)
                   .capacity;
      const double numerator = 0.5 * (single[x] + single[y] - pair);
      rates[x][y] = numerator / std::exp(gen.log_mu()[singletons[x]]);
      rates[y][x] = numerator / std::exp(gen.log_mu()[singletons[y]]);
    }
  return rates;
}

}  // namespace riplab
